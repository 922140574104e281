#pragma once

// Builders shared by the unit and acceptance tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cpsmine/cas.hpp"
#include "cpsmine/pmu.hpp"
#include "cpsmine/tfp_tree.hpp"
#include "cpsmine/topology.hpp"

namespace fixtures {

std::filesystem::path source_dir();
std::filesystem::path data_dir();
/// Fresh, empty scratch directory under the build tree.
std::filesystem::path scratch(const std::string& name);

/// One balanced sample: 120 degree spacing, equal magnitudes, zero
/// sequence currents.
cpsmine::PmuSample balanced(double t, const std::string& source = "R1");
std::vector<cpsmine::PmuSample> balanced_window(std::size_t n, const std::string& source = "R1");

cpsmine::Item cyber(const std::string& sig, int ce);
cpsmine::Item physical(int label, int pe);
cpsmine::AttackRecord record(const std::string& aid, const std::vector<cpsmine::Item>& items,
                             double t0 = 0.0);

struct RandomAdShape {
    std::size_t max_records = 25;
    std::size_t cyber_items = 6;
    std::size_t physical_items = 2;
    std::size_t max_attackers = 6;
    std::size_t max_len = 6;
    int max_ce = 3;  ///< cyber items spread over CE1..max_ce
    int max_pe = 2;
};

/// Random attack database; items drawn from a fixed pool of
/// cyber_items + physical_items distinct items.
cpsmine::AttackDatabase random_ad(std::mt19937_64& rng, const RandomAdShape& shape);

/// Random two-layer network over alarms s1..s<alarms>.
cpsmine::CausalNetwork random_network(std::mt19937_64& rng, std::size_t alarms, std::size_t max_parents,
                                      std::size_t sequences);

cpsmine::AlarmEvent alarm(const std::string& cid, double t, const std::string& src, const std::string& sig,
                          int ce = 1);

}  // namespace fixtures
