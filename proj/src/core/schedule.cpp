#include "core/schedule.hpp"

#include <cmath>
#include <limits>

namespace mmd {

namespace {
double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

double Schedule::logsnr(double t) const {
    require(t >= 0.0 && t <= 1.0, "Schedule::logsnr: t outside [0,1]");
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    if (t >= 1.0) return -std::numeric_limits<double>::infinity();
    // cosine: alpha = cos(pi t / 2), sigma = sin(pi t / 2)
    return -2.0 * std::log(std::tan(M_PI * t / 2.0)) + logsnr_shift;
}

void Schedule::alpha_sigma(double t, double& alpha, double& sigma) const {
    require(t >= 0.0 && t <= 1.0, "Schedule::alpha_sigma: t outside [0,1]");
    if (t <= 0.0) {
        alpha = 1.0;
        sigma = 0.0;
        return;
    }
    if (t >= 1.0) {
        alpha = 0.0;
        sigma = 1.0;
        return;
    }
    const double l = logsnr(t);
    alpha = std::sqrt(stable_sigmoid(l));
    sigma = std::sqrt(stable_sigmoid(-l));
}

double Schedule::time_from_logsnr(double lsnr) const {
    if (std::isinf(lsnr)) return lsnr > 0 ? 0.0 : 1.0;
    return (2.0 / M_PI) * std::atan(std::exp(-(lsnr - logsnr_shift) / 2.0));
}

PosteriorParams posterior(const Schedule& sched, double t, double s) {
    require(s >= 0.0 && t <= 1.0 && s <= t, "posterior: need 0 <= s <= t <= 1");
    if (s == t) return {1.0, 0.0, 0.0};  // zero-step identity
    double at, st, as, ss;
    sched.alpha_sigma(t, at, st);
    sched.alpha_sigma(s, as, ss);
    if (s == 0.0) return {0.0, 1.0, 0.0};  // z_0 is the clean sample itself
    if (t == 1.0) return {0.0, as, ss};    // pure noise carries no information

    const double a_ts = at / as;
    const double var_ts = st * st - a_ts * a_ts * ss * ss;
    if (var_ts <= 0.0) return {1.0, 0.0, 0.0};  // t numerically indistinct from s

    const double prec = 1.0 / (ss * ss) + (a_ts * a_ts) / var_ts;
    PosteriorParams p;
    p.mean_coeff_zt = (a_ts / var_ts) / prec;
    p.mean_coeff_x = (as / (ss * ss)) / prec;
    p.std = std::sqrt(1.0 / prec);
    return p;
}

std::pair<double, double> sample_time(const TimeWeighting& tw, const Schedule& sched, int k,
                                      Rng& rng) {
    require(k >= 1, "sample_time: k must be >= 1");
    double s;
    if (tw.p_s == TimeDist::uniform) {
        s = 1.0 - uniform01(rng);  // (0, 1]
    } else {
        const auto grid = edm_time_grid(tw, sched);
        std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
        s = grid[pick(rng)];
    }
    const double delta = uniform01(rng) / k;
    return {s, std::min(s + delta, 1.0)};
}

double loss_weight(const TimeWeighting& tw, const Schedule& sched, double s) {
    require(s > 0.0 || tw.w_s == WeightMode::flat,
            "loss_weight: s=0 has infinite SNR under edm weighting");
    if (tw.w_s == WeightMode::flat) return 1.0;
    // (sigma_tilde^2 + sigma_data^2) / (sigma_tilde * sigma_data)^2
    // with sigma_tilde^2 = exp(-logsnr).
    const double l = sched.logsnr(s);
    const double sd2 = tw.sigma_data * tw.sigma_data;
    return 1.0 / sd2 + std::exp(l);
}

std::vector<double> edm_time_grid(const TimeWeighting& tw, const Schedule& sched) {
    std::vector<double> grid;
    grid.reserve(tw.grid_size);
    const double smax = std::pow(tw.sigma_max, 1.0 / tw.rho);
    const double smin = std::pow(tw.sigma_min, 1.0 / tw.rho);
    for (int i = 0; i < tw.grid_size; ++i) {
        const double frac = tw.grid_size == 1 ? 0.0 : double(i) / (tw.grid_size - 1);
        const double sigma = std::pow(smax + frac * (smin - smax), tw.rho);
        grid.push_back(sched.time_from_logsnr(-2.0 * std::log(sigma)));
    }
    return grid;
}

}  // namespace mmd
