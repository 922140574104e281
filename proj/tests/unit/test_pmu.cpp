#include <gtest/gtest.h>

#include <sstream>

#include "cpsmine/error.hpp"
#include "cpsmine/pmu.hpp"
#include "cpsmine/util.hpp"
#include "fixtures.hpp"

using namespace cpsmine;

namespace {

PmuParseResult parse(const std::string& text) {
    std::istringstream in(text);
    return parse_pmu_csv(in);
}

std::string testbed_header() {
    std::string h = "time";
    for (int r = 1; r <= 4; ++r)
        for (std::size_t i = 0; i < kSignalCount; ++i)
            h += ",R" + std::to_string(r) + "-" + std::string(signal_name(static_cast<Signal>(i)));
    for (const char* log : {"control_panel_log1", "control_panel_log2", "control_panel_log3", "control_panel_log4",
                            "relay1_log", "relay2_log", "relay3_log", "relay4_log", "snort_log1", "snort_log2",
                            "snort_log3", "snort_log4"})
        h += std::string(",") + log;
    return h + ",marker\n";
}

std::string testbed_row(double t, double va_mag = 132790.0) {
    std::string row = format_double(t);
    for (int r = 1; r <= 4; ++r) {
        auto s = fixtures::balanced(t);
        s[Signal::VaMag] = va_mag;
        for (double v : s.values) row += "," + format_double(v);
    }
    for (int i = 0; i < 12; ++i) row += ",0";
    return row + ",41\n";
}

}  // namespace

TEST(PmuParse, TestbedRowGivesFourSamples) {
    const auto r = parse(testbed_header() + testbed_row(3.0));
    EXPECT_EQ(r.sources, (std::vector<std::string>{"R1", "R2", "R3", "R4"}));
    ASSERT_EQ(r.samples.size(), 4u);
    for (const auto& s : r.samples) {
        EXPECT_EQ(s.time, 3.0);
        EXPECT_EQ(s.marker, 41);
        EXPECT_EQ(s[Signal::VaMag], 132790.0);
    }
    EXPECT_EQ(split_csv(testbed_header()).size(), 1u + 116u + 12u + 1u);
}

TEST(PmuParse, NegativeMagnitudeRejected) {
    const auto r = parse(testbed_header() + testbed_row(0.0) + testbed_row(1.0, -5.0));
    EXPECT_EQ(r.samples.size(), 4u);
    ASSERT_EQ(r.rejects.size(), 1u);
    EXPECT_EQ(r.rejects[0].line_number, 3u);
    EXPECT_NE(r.rejects[0].reason.find("negative magnitude"), std::string::npos);
}

TEST(PmuParse, FiveHundredRows) {
    std::string text = testbed_header();
    for (int i = 0; i < 500; ++i) text += testbed_row(i);
    const auto r = parse(text);
    EXPECT_EQ(r.samples.size(), 2000u);
    const auto series = by_source(r.samples);
    for (const auto& [src, v] : series) EXPECT_EQ(v.size(), 500u);
}

TEST(PmuParse, SchemaErrors) {
    EXPECT_THROW(parse("time,a,b\n1,2,3\n"), SchemaError);
    EXPECT_THROW(parse("time,R1-PA1:VH\n1,2\n"), SchemaError);
    EXPECT_THROW(parse(""), SchemaError);
}

TEST(PmuParse, AnglesWrapped) {
    std::string h = "time";
    std::string row = "0";
    for (std::size_t i = 0; i < kSignalCount; ++i) {
        h += ",R2-" + std::string(signal_name(static_cast<Signal>(i)));
        row += i == 0 ? ",190" : ",1";
    }
    const auto r = parse(h + "\n" + row + "\n");
    ASSERT_EQ(r.samples.size(), 1u);
    EXPECT_DOUBLE_EQ(r.samples[0][Signal::VaAngle], -170.0);
}

TEST(PmuParse, AlternateSequenceCurrentNames) {
    EXPECT_EQ(parse_signal("PA10:IH"), Signal::IPosAngle);
    EXPECT_EQ(parse_signal("PM12:I"), Signal::IZeroMag);
    EXPECT_EQ(parse_signal("PM7:V"), Signal::VPosMag);
    EXPECT_FALSE(parse_signal("PM99:V"));
}

TEST(PmuParse, WriteReadRoundTrip) {
    PmuSeries s;
    s["R1"] = fixtures::balanced_window(6, "R1");
    s["R3"] = fixtures::balanced_window(6, "R3");
    s["R3"][2][Signal::ZMag] = 42.125;
    const auto r = parse(write_pmu_csv(s, true));
    EXPECT_TRUE(r.rejects.empty());
    const auto back = by_source(r.samples);
    ASSERT_EQ(back.size(), 2u);
    for (const auto& [src, v] : s)
        for (std::size_t i = 0; i < v.size(); ++i) {
            EXPECT_EQ(back.at(src)[i].values, v[i].values);
            EXPECT_EQ(back.at(src)[i].marker, v[i].marker);
        }
}
