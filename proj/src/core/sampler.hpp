#pragma once

#include "core/denoiser.hpp"

namespace mmd {

enum class SampleMode { ancestral, ddim };
enum class TransitionMode { conditional, marginal };

struct SamplerConfig {
    int k = 8;
    SampleMode mode = SampleMode::ancestral;
    double noise_multiplier = 1.0;  // gamma on the posterior std; ignored by ddim
    GuidanceConfig guidance;
};

// k-step sampling on the uniform grid t in {1, (k-1)/k, ..., 1/k};
// returns the final clean prediction, one row per chain.
Mat sample(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
           const SamplerConfig& cfg, int class_id, int n, Rng& rng);

// One generator transition used inside distillation: x_tilde =
// g_eta(z_t, t), then z_s from the conditional posterior
// q(z_s | z_t, x_tilde) or the marginal q(z_s | x_tilde).
struct Transition {
    Mat x_tilde;
    Mat z_s;
};

Transition generator_transition(const ParamVector& params, const ArchDescriptor& arch,
                                const Schedule& sched, double t, double s, const Mat& z_t,
                                TransitionMode mode, int class_id, Rng& rng);

// Same transition but with a caller-supplied x_tilde (the ideal-
// generator variants substitute the oracle here).
Mat transition_noise(const Schedule& sched, double t, double s, const Mat& z_t,
                     const Mat& x_tilde, TransitionMode mode, Rng& rng);

}  // namespace mmd
