#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cpsmine {

/// Dense row-major matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

struct FcmParams {
    std::size_t clusters = 2;     ///< c
    double fuzzifier = 2.0;       ///< m > 1
    double tolerance = 1e-6;      ///< stop when |delta J| < tolerance
    std::size_t max_iter = 300;
    std::uint64_t seed = 0;
};

/// Fuzzy C-means output. `membership` is clusters x events, each column sums
/// to one; `centers` is clusters x dimension.
struct FcmResult {
    Matrix membership;
    Matrix centers;
    std::vector<double> objective_trace;
    double fuzzifier = 2.0;
    std::size_t clusters = 0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Minimizes J(U,V) = sum_i sum_k u_ik^m ||x_k - v_i||^2 by alternating
/// membership and center updates, seeded k-means++ style from `seed`.
/// Throws DegenerateInput when c exceeds the number of distinct vectors,
/// ConfigError on m <= 1, tol <= 0 or c == 0.
FcmResult fcm_cluster(std::span<const std::vector<double>> vectors, const FcmParams& params);

/// J(U,V) for the given data, membership and centers.
double fcm_objective(std::span<const std::vector<double>> vectors, const Matrix& membership,
                     const Matrix& centers, double fuzzifier);

/// Arg-max cluster per event; ties go to the lower cluster index.
std::vector<std::size_t> hard_assignment(const FcmResult& result);

std::size_t count_distinct(std::span<const std::vector<double>> vectors);

}  // namespace cpsmine
