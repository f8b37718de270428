#include "core/sampler.hpp"

namespace mmd {

Mat sample(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
           const SamplerConfig& cfg, int class_id, int n, Rng& rng) {
    require(cfg.k >= 1, "sample: k must be >= 1");
    require(n >= 1, "sample: n must be >= 1");
    Mat z = randn(n, arch.input_dim, rng);
    Mat x_hat;
    for (int i = cfg.k; i >= 1; --i) {
        const double t = double(i) / cfg.k;
        const double s = t - 1.0 / cfg.k;
        x_hat = denoise_guided(params, arch, sched, z, t, class_id, cfg.guidance);
        if (i == 1) break;  // final x_hat is the sample
        double at, st, as, ss;
        sched.alpha_sigma(t, at, st);
        sched.alpha_sigma(s, as, ss);
        if (cfg.mode == SampleMode::ddim) {
            z = as * x_hat + (ss / st) * (z - at * x_hat);
        } else {
            const PosteriorParams p = posterior(sched, t, s);
            Mat mean = p.mean_coeff_zt * z + p.mean_coeff_x * x_hat;
            z = mean + cfg.noise_multiplier * p.std * randn(n, arch.input_dim, rng);
        }
    }
    return x_hat;
}

Mat transition_noise(const Schedule& sched, double t, double s, const Mat& z_t,
                     const Mat& x_tilde, TransitionMode mode, Rng& rng) {
    require(s <= t, "transition: need s <= t");
    if (mode == TransitionMode::conditional) {
        const PosteriorParams p = posterior(sched, t, s);
        Mat z_s = p.mean_coeff_zt * z_t + p.mean_coeff_x * x_tilde;
        if (p.std > 0.0) z_s += p.std * randn(z_t.rows(), z_t.cols(), rng);
        return z_s;
    }
    double as, ss;
    sched.alpha_sigma(s, as, ss);
    return as * x_tilde + ss * randn(z_t.rows(), z_t.cols(), rng);
}

Transition generator_transition(const ParamVector& params, const ArchDescriptor& arch,
                                const Schedule& sched, double t, double s, const Mat& z_t,
                                TransitionMode mode, int class_id, Rng& rng) {
    Transition tr;
    tr.x_tilde = denoise(params, arch, sched, z_t, t, class_id);
    tr.z_s = transition_noise(sched, t, s, z_t, tr.x_tilde, mode, rng);
    return tr;
}

}  // namespace mmd
