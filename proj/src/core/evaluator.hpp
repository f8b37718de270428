#pragma once

#include <functional>

#include "core/gmm.hpp"
#include "core/sampler.hpp"

namespace mmd {

struct EvalConfig {
    int n_samples = 4096;
    int knn = 32;
    int coverage_min_count = 5;
    double coverage_radius_mult = 3.0;
    int s_grid_points = 8;
    double logsnr_lo = -6.0;
    double logsnr_hi = 6.0;
    std::uint64_t seed = 0;
};

struct EvalReport {
    double energy_distance = 0.0;
    double mode_coverage = 0.0;
    std::vector<double> moment_residual;  // per s-grid point
    int n_samples = 0;
    std::uint64_t seed = 0;
};

// V-statistic energy distance 2 E||a-b|| - E||a-a'|| - E||b-b'||;
// exactly 0 on identical point sets.
double energy_distance(const Mat& a, const Mat& b);

// Upper percentile (e.g. 0.99) of the permutation null for
// energy_distance(a, b) under H0: same distribution.
double energy_distance_null(const Mat& a, const Mat& b, int permutations, double percentile,
                            Rng& rng);

double mode_coverage(const Mat& samples, const GmmSpec& spec, double radius_mult, int min_count);

// s-grid uniform in logSNR over [lo, hi] nats, mapped through the schedule.
std::vector<double> eval_s_grid(const EvalConfig& cfg, const Schedule& sched);

// A generator maps a batch of noisy inputs (and labels) to clean
// predictions; rng covers any internal sampling.
using GeneratorFn =
    std::function<Mat(const Mat& z_t, double t, const std::vector<int>& labels, Rng& rng)>;

GeneratorFn net_generator(const ParamVector& eta, const ArchDescriptor& arch,
                          const Schedule& sched);
// Draws x_tilde exactly from q(x | z_t): the estimator-noise-floor control.
GeneratorFn ideal_generator(const GmmSpec& spec, const Schedule& sched);

// Per-s kNN-regression estimate of ||E_g[x_tilde | z_s] - E_q[x | z_s]||.
std::vector<double> moment_residual(const GeneratorFn& gen, const Schedule& sched,
                                    const GmmSpec& spec, const DatasetSpec& dataset, int k,
                                    TransitionMode transition, const std::vector<double>& s_grid,
                                    const EvalConfig& cfg);

}  // namespace mmd
