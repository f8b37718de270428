#pragma once

#include "core/common.hpp"

namespace mmd {

// Variance-preserving cosine schedule with an additive log-SNR shift.
// alpha^2 + sigma^2 = 1 for all t; t=0 is clean data, t=1 pure noise.
struct Schedule {
    double logsnr_shift = 0.0;

    // log(alpha_t^2 / sigma_t^2); +inf at t=0, -inf at t=1.
    double logsnr(double t) const;
    void alpha_sigma(double t, double& alpha, double& sigma) const;
    // Inverse of logsnr (monotone decreasing in t).
    double time_from_logsnr(double lsnr) const;
};

// Parameters of q(z_s | z_t, x) = N(c_zt * z_t + c_x * x, std^2 I).
struct PosteriorParams {
    double mean_coeff_zt = 0.0;
    double mean_coeff_x = 0.0;
    double std = 0.0;
};

PosteriorParams posterior(const Schedule& sched, double t, double s);

enum class TimeDist { uniform, edm_grid };
enum class WeightMode { flat, edm };

// Distillation-time sampling distribution p(s) and loss weight w(s).
struct TimeWeighting {
    TimeDist p_s = TimeDist::uniform;
    WeightMode w_s = WeightMode::flat;
    double rho = 7.0;
    double sigma_min = 0.002;
    double sigma_max = 80.0;
    double sigma_data = 0.5;
    int grid_size = 64;
};

// Draws s ~ p(s), delta ~ U[0, 1/k], returns (s, min(s + delta, 1)).
std::pair<double, double> sample_time(const TimeWeighting& tw, const Schedule& sched, int k,
                                      Rng& rng);

double loss_weight(const TimeWeighting& tw, const Schedule& sched, double s);

// The EDM sigma grid mapped onto t in (0,1) through the schedule's
// log-SNR (sigma_tilde = sigma/alpha).
std::vector<double> edm_time_grid(const TimeWeighting& tw, const Schedule& sched);

}  // namespace mmd
