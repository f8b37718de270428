#pragma once

#include "core/sampler.hpp"
#include "core/teacher.hpp"

#include <functional>
#include <limits>

namespace mmd {

enum class DistillVariant { alternating, instant };

struct DistillConfig {
    DistillVariant variant = DistillVariant::alternating;
    int k = 8;
    TransitionMode transition = TransitionMode::conditional;
    // p(s) defaults to the EDM inference grid at distillation time;
    // w(s) is resolved by resolve_weighting()
    TimeWeighting tw{.p_s = TimeDist::edm_grid};
    GuidanceConfig guidance;  // teacher-side only
    OptConfig opt_eta;
    OptConfig opt_phi;  // alternating only
    int batch_size = 128;
    int eval_every = 1000;
    std::uint64_t seed = 0;
    int log_every = 100;

    // Optional hook run every eval_every steps on the current eta;
    // its return value lands in the moment_residual metrics column.
    std::function<double(const ParamVector&)> eval_hook;

    // flat weight for k <= 2, EDM weighting for larger k
    void resolve_weighting() { tw.w_s = k <= 2 ? WeightMode::flat : WeightMode::edm; }
};

struct DistillMetricsRow {
    int step = 0;
    double loss_eta = 0.0;      // L(eta) or L_instant
    double loss_phi = 0.0;      // alternating only
    double grad_norm_eta = 0.0;
    double loss_mm = 0.0;       // instant only: 0.5 gA^T Lambda gB
    double moment_residual = std::numeric_limits<double>::quiet_NaN();  // every eval_every
};

struct DistillResult {
    ParamVector eta;
    std::vector<DistillMetricsRow> metrics;
};

// L(phi) = w * mean( ||x_tilde - g_phi(z_s)||^2 + ||g_theta(z_s) - g_phi(z_s)||^2 ).
// x_tilde enters as a constant; the teacher pass applies guidance.
double aux_loss_grad(const ParamVector& phi, const ParamVector& theta, const ArchDescriptor& arch,
                     const Schedule& sched, const GuidanceConfig& guidance, const Mat& x_tilde,
                     const Mat& z_s, double s, double w, const std::vector<int>& class_ids,
                     ParamVector& grad_out);

// L(eta) = w * mean x_tilde^T sg[g_phi(z_s) - g_theta(z_s)]; gradient
// flows only through x_tilde = g_eta(z_t). z_s is produced inside via
// the generator transition.
double gen_loss_grad_alternating(const ParamVector& eta, const ParamVector& phi,
                                 const ParamVector& theta, const ArchDescriptor& arch,
                                 const Schedule& sched, const GuidanceConfig& guidance,
                                 TransitionMode transition, double t, double s, double w,
                                 const Mat& z_t, const std::vector<int>& class_ids, Rng& rng,
                                 ParamVector& grad_out);

struct InstantBatch {
    Mat z_t;  // data-diffused inputs at time t
    std::vector<int> class_ids;
};

// Two-batch instant loss: nu = Lambda (grad_theta of the teacher loss
// on batch B); the JVP of g_theta in direction nu on batch A defines
// the cotangent for g_eta. Teacher guidance/clipping is straight-through.
// mm_monitor, when non-null, receives the nonnegative-in-expectation
// parameter-space moment residual 0.5 * gA^T Lambda gB (the loss curve
// worth watching during instant distillation).
double instant_loss_grad(const ParamVector& eta, const ParamVector& theta,
                         const Preconditioner& lambda, const ArchDescriptor& arch,
                         const Schedule& sched, const GuidanceConfig& guidance,
                         TransitionMode transition, double t, double s, double w,
                         const InstantBatch& batch_a, const InstantBatch& batch_b, Rng& rng,
                         ParamVector& grad_out, double* mm_monitor = nullptr);

DistillResult distill_alternating(const ParamVector& theta, const ArchDescriptor& arch,
                                  const Schedule& sched, const DatasetSpec& dataset,
                                  const DistillConfig& cfg);

DistillResult distill_instant(const ParamVector& theta, const Preconditioner& lambda,
                              const ArchDescriptor& arch, const Schedule& sched,
                              const DatasetSpec& dataset, const DistillConfig& cfg);

}  // namespace mmd
