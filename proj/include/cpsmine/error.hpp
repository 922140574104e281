#pragma once

#include <stdexcept>
#include <string>

namespace cpsmine {

/// Base for every error raised by the library. Stage drivers map the
/// concrete subclass onto a process exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CPSMINE_DEFINE_ERROR(Name)          \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

CPSMINE_DEFINE_ERROR(IoError);
CPSMINE_DEFINE_ERROR(ParseError);
CPSMINE_DEFINE_ERROR(ValidationError);
CPSMINE_DEFINE_ERROR(UnknownComponent);
CPSMINE_DEFINE_ERROR(FormatError);
CPSMINE_DEFINE_ERROR(SchemaError);
CPSMINE_DEFINE_ERROR(DegenerateInput);
CPSMINE_DEFINE_ERROR(UnknownNode);
CPSMINE_DEFINE_ERROR(WindowTooShort);
CPSMINE_DEFINE_ERROR(ConfigError);
CPSMINE_DEFINE_ERROR(ShapeError);
CPSMINE_DEFINE_ERROR(UnlabeledWindow);
CPSMINE_DEFINE_ERROR(UnknownLabelMapping);
CPSMINE_DEFINE_ERROR(ScriptError);
// Raised by the stage drivers around a bad or missing input file.
CPSMINE_DEFINE_ERROR(InputError);

#undef CPSMINE_DEFINE_ERROR

}  // namespace cpsmine
