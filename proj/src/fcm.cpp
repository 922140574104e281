#include "cpsmine/fcm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "cpsmine/error.hpp"
#include "cpsmine/util.hpp"

namespace cpsmine {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

Matrix seed_centers(std::span<const std::vector<double>> x, std::size_t c, std::uint64_t seed) {
    const std::size_t n = x.size();
    const std::size_t dim = x[0].size();
    Rng rng(seed);
    Matrix v(c, dim);
    std::vector<double> best(n, std::numeric_limits<double>::infinity());

    std::size_t pick = uniform_index(rng, n);
    for (std::size_t j = 0; j < c; ++j) {
        if (j > 0) {
            double total = 0.0;
            for (double d : best) total += d;
            const double r = uniform01(rng) * total;
            double acc = 0.0;
            pick = n;
            std::size_t last_positive = n;
            for (std::size_t k = 0; k < n; ++k) {
                if (best[k] <= 0.0) continue;
                last_positive = k;
                acc += best[k];
                if (acc > r) {
                    pick = k;
                    break;
                }
            }
            if (pick == n) pick = last_positive;  // rounding at the tail
        }
        std::copy(x[pick].begin(), x[pick].end(), v.row(j).begin());
        for (std::size_t k = 0; k < n; ++k) best[k] = std::min(best[k], sq_dist(x[k], v.row(j)));
    }
    return v;
}

void update_membership(std::span<const std::vector<double>> x, const Matrix& v, double m,
                       Matrix& u) {
    const std::size_t c = v.rows;
    const double expo = 1.0 / (m - 1.0);
    std::vector<double> d2(c);
    for (std::size_t k = 0; k < x.size(); ++k) {
        std::size_t zero_at = c;
        for (std::size_t i = 0; i < c; ++i) {
            d2[i] = sq_dist(x[k], v.row(i));
            if (d2[i] == 0.0 && zero_at == c) zero_at = i;
        }
        if (zero_at != c) {
            for (std::size_t i = 0; i < c; ++i) u(i, k) = i == zero_at ? 1.0 : 0.0;
            continue;
        }
        for (std::size_t i = 0; i < c; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < c; ++j) s += std::pow(d2[i] / d2[j], expo);
            u(i, k) = 1.0 / s;
        }
    }
}

void update_centers(std::span<const std::vector<double>> x, const Matrix& u, double m, Matrix& v) {
    const std::size_t dim = v.cols;
    std::vector<double> acc(dim);
    for (std::size_t i = 0; i < v.rows; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        double wsum = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double w = std::pow(u(i, k), m);
            if (w == 0.0) continue;
            wsum += w;
            for (std::size_t d = 0; d < dim; ++d) acc[d] += w * x[k][d];
        }
        if (wsum == 0.0) continue;  // empty cluster keeps its center
        for (std::size_t d = 0; d < dim; ++d) v(i, d) = acc[d] / wsum;
    }
}

}  // namespace

std::size_t count_distinct(std::span<const std::vector<double>> vectors) {
    std::set<std::vector<double>> s(vectors.begin(), vectors.end());
    return s.size();
}

double fcm_objective(std::span<const std::vector<double>> x, const Matrix& u, const Matrix& v,
                     double m) {
    double j = 0.0;
    for (std::size_t i = 0; i < v.rows; ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double w = std::pow(u(i, k), m);
            if (w != 0.0) j += w * sq_dist(x[k], v.row(i));
        }
    return j;
}

FcmResult fcm_cluster(std::span<const std::vector<double>> x, const FcmParams& p) {
    if (p.clusters == 0) throw ConfigError("cluster count must be at least 1");
    if (!(p.fuzzifier > 1.0)) throw ConfigError("fuzzifier m must be > 1");
    if (!(p.tolerance > 0.0)) throw ConfigError("tolerance must be > 0");
    if (x.empty()) throw DegenerateInput("no vectors to cluster");
    const std::size_t dim = x[0].size();
    for (const auto& v : x) {
        if (v.size() != dim) throw ShapeError("feature vectors differ in length");
        for (double e : v)
            if (!std::isfinite(e)) throw DegenerateInput("non-finite feature value");
    }
    const auto distinct = count_distinct(x);
    if (p.clusters > distinct)
        throw DegenerateInput(
            fmt::format("{} clusters requested but only {} distinct vectors", p.clusters, distinct));

    FcmResult r;
    r.fuzzifier = p.fuzzifier;
    r.clusters = p.clusters;
    r.centers = seed_centers(x, p.clusters, p.seed);
    r.membership = Matrix(p.clusters, x.size());

    for (std::size_t it = 0; it < p.max_iter; ++it) {
        const Matrix previous = r.centers;
        update_membership(x, r.centers, p.fuzzifier, r.membership);
        update_centers(x, r.membership, p.fuzzifier, r.centers);
        const double j = fcm_objective(x, r.membership, r.centers, p.fuzzifier);
        // At the fixed point rounding can nudge J up by a few ulps; that step
        // is dropped and the previous centers stand.
        if (!r.objective_trace.empty() && j > r.objective_trace.back()) {
            r.centers = previous;
            r.converged = true;
            r.iterations = it + 1;
            break;
        }
        r.objective_trace.push_back(j);
        r.iterations = it + 1;
        const auto n = r.objective_trace.size();
        if (n >= 2 && std::abs(r.objective_trace[n - 2] - j) < p.tolerance) {
            r.converged = true;
            break;
        }
    }
    // Final memberships are consistent with the reported centers.
    update_membership(x, r.centers, p.fuzzifier, r.membership);
    return r;
}

std::vector<std::size_t> hard_assignment(const FcmResult& result) {
    const auto& u = result.membership;
    std::vector<std::size_t> out(u.cols, 0);
    for (std::size_t k = 0; k < u.cols; ++k) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < u.rows; ++i)
            if (u(i, k) > u(best, k)) best = i;
        out[k] = best;
    }
    return out;
}

}  // namespace cpsmine
