#pragma once

#include <vector>

#include "core/schedule.hpp"

namespace mmd {

// Isotropic Gaussian mixture in 2-D with closed-form diffused
// posteriors; doubles as dataset, ground-truth denoiser and test
// oracle. One class label per mode.
struct GmmSpec {
    std::vector<double> weights;
    std::vector<Eigen::Vector2d> means;
    std::vector<double> scales;

    int num_modes() const { return static_cast<int>(weights.size()); }
    void validate() const;
    Eigen::Vector2d data_mean() const;
    double data_std() const;  // sqrt of average per-coordinate variance

    static GmmSpec ring(int modes, double radius, double scale);
    static GmmSpec single(const Eigen::Vector2d& mean, double scale);
};

enum class DatasetKind { gmm, ring, checkerboard };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::gmm;
    GmmSpec gmm;          // gmm kind
    double ring_radius = 1.0;     // ring kind
    double ring_noise = 0.05;
    double board_extent = 2.0;    // checkerboard kind: [-extent, extent]^2
    bool labeled = true;

    int num_classes() const;
};

struct LabeledSamples {
    Mat points;               // n x 2
    std::vector<int> labels;  // empty when unlabeled
};

LabeledSamples sample_data(const DatasetSpec& spec, int n, Rng& rng);

// E_q[x | z_t] under forward diffusion of the mixture; returns z_t at
// t=0 (infinite SNR).
Eigen::Vector2d oracle_denoise(const GmmSpec& spec, const Schedule& sched,
                               const Eigen::Vector2d& z_t, double t);
Mat oracle_denoise_batch(const GmmSpec& spec, const Schedule& sched, const Mat& z_t, double t);

Eigen::Vector2d oracle_score(const GmmSpec& spec, const Schedule& sched,
                             const Eigen::Vector2d& z_t, double t);

double oracle_log_density(const GmmSpec& spec, const Schedule& sched, const Eigen::Vector2d& z_t,
                          double t);

// Mode responsibilities r_i(z_t) under q(z_t); sums to 1.
std::vector<double> oracle_responsibilities(const GmmSpec& spec, const Schedule& sched,
                                            const Eigen::Vector2d& z_t, double t);

// Exact draw from q(x | z_t): mixture of per-mode Gaussian posteriors.
// This is the ideal generator the fixed-point and noise-floor tests use.
Eigen::Vector2d oracle_posterior_sample(const GmmSpec& spec, const Schedule& sched,
                                        const Eigen::Vector2d& z_t, double t, Rng& rng);

}  // namespace mmd
