#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace cpsmine {

// --- hashing ---------------------------------------------------------------

/// 64-bit FNV-1a. Stable across platforms, used for feature hashing,
/// run manifests and determinism checks.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// --- text / csv ------------------------------------------------------------

std::string_view trim(std::string_view s);

/// Splits one CSV record. Double-quoted fields may contain commas and
/// doubled quotes.
std::vector<std::string> split_csv(std::string_view line);
std::string csv_field(std::string_view s);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

/// Shortest representation that round-trips to the same double.
std::string format_double(double v);

// --- files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// --- randomness ------------------------------------------------------------

using Rng = std::mt19937_64;

/// Uniform integer in [0, n). Implemented on raw engine output so results do
/// not depend on the standard library's distribution implementation.
std::size_t uniform_index(Rng& rng, std::size_t n);
/// Uniform real in [0, 1).
double uniform01(Rng& rng);
double uniform_real(Rng& rng, double lo, double hi);
/// Deterministic child seed for stream `index` of a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

// --- angles ----------------------------------------------------------------

/// Wraps degrees into (-180, 180].
double wrap_degrees(double deg);

}  // namespace cpsmine
