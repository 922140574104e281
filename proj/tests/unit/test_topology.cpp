#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cpsmine/error.hpp"
#include "cpsmine/topology.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cpsmine;

namespace {

TopologyMap testbed() { return load_topology(fixtures::data_dir() / "testbed_topology.json"); }

}  // namespace

TEST(ComponentId, RoundTrip) {
    for (int i : {1, 9, 12, 123}) {
        EXPECT_EQ(ComponentId::parse(ComponentId::cyber(i).str()), ComponentId::cyber(i));
        EXPECT_EQ(ComponentId::parse(ComponentId::physical(i).str()), ComponentId::physical(i));
    }
    EXPECT_EQ(ComponentId::cyber(4).str(), "CE4");
    EXPECT_THROW(ComponentId::parse("CE0"), ParseError);
    EXPECT_THROW(ComponentId::parse("XE1"), ParseError);
    EXPECT_THROW(ComponentId::parse("PE"), ParseError);
    EXPECT_FALSE(ComponentId::try_parse("CE-1"));
}

TEST(Topology, TestbedHasNineCyberTwelvePhysical) {
    const auto t = testbed();
    EXPECT_EQ(t.cyber_nodes().size(), 9u);
    EXPECT_EQ(t.physical_nodes().size(), 12u);
}

TEST(Topology, EmptyRelationsAreValid) {
    const auto t = parse_topology(R"({"cyber":["CE1"],"physical":["PE1"],"relations":[]})");
    EXPECT_TRUE(t.relations().empty());
    EXPECT_TRUE(t.connected_cyber(ComponentId::physical(1)).empty());
}

TEST(Topology, RejectsInvalidMaps) {
    EXPECT_THROW(parse_topology(R"({"cyber":["CE1"],"physical":["PE1"],"relations":[["CE1","PE99"]]})"),
                 ValidationError);
    EXPECT_THROW(parse_topology(R"({"cyber":["CE1"],"physical":[],"relations":[["CE1","CE1"]]})"),
                 ValidationError);
    EXPECT_THROW(parse_topology(R"({"cyber":["CE1","CE1"],"physical":[],"relations":[]})"), ValidationError);
    EXPECT_THROW(parse_topology(R"({"cyber":["CE1"],"physical":["PE1","PE2"],"relations":[["PE1","PE2"]]})"),
                 ValidationError);
    EXPECT_THROW(parse_topology("{not json"), ParseError);
    EXPECT_THROW(load_topology(fixtures::data_dir() / "no_such_file.json"), IoError);
}

TEST(Topology, ConnectedCyber) {
    const auto t = testbed();
    EXPECT_EQ(t.connected_cyber(ComponentId::physical(5)), std::vector{ComponentId::cyber(5)});
    EXPECT_EQ(t.connected_cyber(ComponentId::physical(2)),
              (std::vector{ComponentId::cyber(2), ComponentId::cyber(3)}));
    EXPECT_THROW(t.connected_cyber(ComponentId::physical(99)), UnknownComponent);
}

TEST(Topology, Reachability) {
    const auto t = testbed();
    const auto pe = ComponentId::physical(2);
    EXPECT_TRUE(t.is_reachable(t.connected_cyber(pe), pe));
    EXPECT_FALSE(t.is_reachable({ComponentId::cyber(5)}, pe));
    EXPECT_FALSE(t.is_reachable({ComponentId::cyber(1)}, pe, ReachPolicy::Direct));
    EXPECT_TRUE(t.is_reachable({ComponentId::cyber(1)}, pe, ReachPolicy::Transitive));

    const auto chain = parse_topology(
        R"({"cyber":["CE1","CE2"],"physical":["PE3"],"relations":[["CE1","CE2"],["CE2","PE3"]]})");
    EXPECT_TRUE(chain.is_reachable({ComponentId::cyber(1)}, ComponentId::physical(3), ReachPolicy::Transitive));
    EXPECT_FALSE(chain.is_reachable({ComponentId::cyber(1)}, ComponentId::physical(3)));
}

TEST(Topology, SerializeRoundTrip) {
    const auto t = testbed();
    const auto back = parse_topology(t.serialize());
    EXPECT_EQ(back.cyber_nodes(), t.cyber_nodes());
    EXPECT_EQ(back.physical_nodes(), t.physical_nodes());
    EXPECT_EQ(back.relations(), t.relations());
    EXPECT_EQ(back.serialize(), t.serialize());
}

TEST(TopologyProperty, DirectReachMatchesNeighbourIntersection) {
    std::mt19937_64 rng(77);
    const auto t = testbed();
    std::vector<std::pair<std::string, std::string>> raw;
    for (const auto& [a, b] : t.relations()) raw.emplace_back(a.str(), b.str());
    std::bernoulli_distribution coin(0.3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ComponentId> set;
        std::vector<std::string> names;
        for (const auto& c : t.cyber_nodes())
            if (coin(rng)) {
                set.push_back(c);
                names.push_back(c.str());
            }
        for (const auto& pe : t.physical_nodes()) {
            const auto nb = t.connected_cyber(pe);
            for (const auto& c : nb) EXPECT_TRUE(t.cyber_nodes().count(c));
            const bool meets = std::any_of(set.begin(), set.end(), [&](const ComponentId& c) {
                return std::find(nb.begin(), nb.end(), c) != nb.end();
            });
            EXPECT_EQ(t.is_reachable(set, pe), meets);
            EXPECT_EQ(t.is_reachable(set, pe, ReachPolicy::Transitive),
                      oracle::reachable(raw, names, pe.str(), true));
        }
    }
}
