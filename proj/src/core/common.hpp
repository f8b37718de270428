#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>

namespace mmd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // batches are row-per-example

using Rng = std::mt19937_64;

// Thrown for contract violations (bad shapes, bad config values).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown for runtime failures (divergence, non-finite values, I/O).
struct RuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw UsageError(msg);
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

inline double uniform01(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng);
}

inline Mat randn(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Mat m(rows, cols);
    std::normal_distribution<double> n(0.0, 1.0);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
    return m;
}

}  // namespace mmd
