#include "fixtures.hpp"

#include <algorithm>

namespace fixtures {

namespace fs = std::filesystem;
using namespace cpsmine;

fs::path source_dir() { return CPSMINE_SOURCE_DIR; }
fs::path data_dir() { return source_dir() / "data"; }

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(CPSMINE_WORK_DIR) / "scratch" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

PmuSample balanced(double t, const std::string& source) {
    PmuSample s;
    s.source = source;
    s.time = t;
    s.marker = 41;
    s[Signal::VaAngle] = 0.0;
    s[Signal::VbAngle] = -120.0;
    s[Signal::VcAngle] = 120.0;
    s[Signal::VaMag] = s[Signal::VbMag] = s[Signal::VcMag] = 132790.0;
    s[Signal::IaAngle] = -25.0;
    s[Signal::IbAngle] = -145.0;
    s[Signal::IcAngle] = 95.0;
    s[Signal::IaMag] = s[Signal::IbMag] = s[Signal::IcMag] = 400.0;
    s[Signal::VPosMag] = 132790.0;
    s[Signal::IPosMag] = 400.0;
    s[Signal::Freq] = 60.0;
    s[Signal::ZMag] = 100.0;
    s[Signal::ZAngle] = 70.0;
    return s;
}

std::vector<PmuSample> balanced_window(std::size_t n, const std::string& source) {
    std::vector<PmuSample> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(balanced(static_cast<double>(i), source));
    return w;
}

Item cyber(const std::string& sig, int ce) { return Item{sig, ComponentId::cyber(ce)}; }
Item physical(int label, int pe) { return Item{"e" + std::to_string(label), ComponentId::physical(pe)}; }

AttackRecord record(const std::string& aid, const std::vector<Item>& items, double t0) {
    AttackRecord r{aid, {}};
    for (std::size_t i = 0; i < items.size(); ++i) r.steps.push_back({items[i], t0 + 10.0 * static_cast<double>(i)});
    return r;
}

AttackDatabase random_ad(std::mt19937_64& rng, const RandomAdShape& shape) {
    std::vector<Item> pool;
    for (std::size_t i = 0; i < shape.cyber_items; ++i)
        pool.push_back(cyber("s" + std::to_string(1 + i % 8),
                             1 + static_cast<int>(i % static_cast<std::size_t>(shape.max_ce))));
    for (std::size_t i = 0; i < shape.physical_items; ++i)
        pool.push_back(physical(15 + static_cast<int>(i), 1 + static_cast<int>(i % static_cast<std::size_t>(shape.max_pe))));
    std::uniform_int_distribution<std::size_t> n_rec(1, shape.max_records), n_att(1, shape.max_attackers),
        len(1, shape.max_len), pick(0, pool.size() - 1), pick_phys(shape.cyber_items, pool.size() - 1);
    std::bernoulli_distribution ends_physical(0.7);
    const auto attackers = n_att(rng);
    AttackDatabase ad;
    const auto records = n_rec(rng);
    for (std::size_t r = 0; r < records; ++r) {
        AttackRecord rec{"10.0.0." + std::to_string(1 + r % attackers), {}};
        const auto n = len(rng);
        for (std::size_t i = 0; i < n; ++i)
            rec.steps.push_back({pool[pick(rng)], 10.0 * static_cast<double>(i)});
        if (shape.physical_items > 0 && ends_physical(rng))
            rec.steps.push_back({pool[pick_phys(rng)], 10.0 * static_cast<double>(n)});
        ad.push_back(std::move(rec));
    }
    return ad;
}

CausalNetwork random_network(std::mt19937_64& rng, std::size_t alarms, std::size_t max_parents,
                             std::size_t sequences) {
    std::uniform_real_distribution<double> prob(0.05, 0.95), leak(0.0, 0.2);
    std::vector<AlarmNode> nodes;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < alarms; ++i) {
        labels.push_back("s" + std::to_string(i + 1));
        nodes.push_back({labels.back(), prob(rng)});
    }
    std::vector<SequenceNode> seqs;
    std::map<CausalNetwork::EdgeKey, double> edges;
    std::uniform_int_distribution<std::size_t> n_par(1, std::min(max_parents, alarms));
    for (std::size_t k = 0; k < sequences; ++k) {
        auto pool = labels;
        std::shuffle(pool.begin(), pool.end(), rng);
        pool.resize(n_par(rng));
        SequenceNode s{"T" + std::to_string(k + 1), pool};
        for (const auto& p : pool) edges[{p, s.label}] = prob(rng);
        seqs.push_back(s);
    }
    return CausalNetwork(nodes, seqs, edges, leak(rng));
}

AlarmEvent alarm(const std::string& cid, double t, const std::string& src, const std::string& sig, int ce) {
    AlarmEvent e;
    e.cid = cid;
    e.time = t;
    e.src_ip = src;
    e.dst_ip = "192.168.1." + std::to_string(ce);
    e.src_port = 40000;
    e.dst_port = 22;
    e.sig_name = sig;
    e.component = ComponentId::cyber(ce);
    return e;
}

}  // namespace fixtures
