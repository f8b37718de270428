#include "core/distill.hpp"

#include <cmath>

namespace mmd {

namespace {

Mat forward_diffuse(const Schedule& sched, double t, const Mat& x, Rng& rng) {
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    return alpha * x + sigma * randn(x.rows(), x.cols(), rng);
}

Vec const_vec(Eigen::Index n, double v) { return Vec::Constant(n, v); }

void check_finite(double v, const char* what, int step) {
    if (!std::isfinite(v))
        throw RuntimeError(std::string("distill: non-finite ") + what + " at step " +
                           std::to_string(step));
}

}  // namespace

double aux_loss_grad(const ParamVector& phi, const ParamVector& theta, const ArchDescriptor& arch,
                     const Schedule& sched, const GuidanceConfig& guidance, const Mat& x_tilde,
                     const Mat& z_s, double s, double w, const std::vector<int>& class_ids,
                     ParamVector& grad_out) {
    const Eigen::Index n = z_s.rows();
    const Vec sv = const_vec(n, s);
    const Mat pred_theta = denoise_rows_guided(theta, arch, sched, z_s, sv, class_ids, guidance);
    const Mat pred_phi = denoise_rows(phi, arch, sched, z_s, sv, class_ids);

    const Mat r1 = pred_phi - x_tilde;
    const Mat r2 = pred_phi - pred_theta;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        loss += r1.row(i).squaredNorm() + r2.row(i).squaredNorm();
    loss *= w / n;
    if (!std::isfinite(loss)) throw RuntimeError("aux_loss_grad: non-finite loss");

    const Mat cot = (2.0 * w / n) * (r1 + r2);
    denoise_rows_vjp(phi, arch, sched, z_s, sv, class_ids, cot, grad_out);
    return loss;
}

double gen_loss_grad_alternating(const ParamVector& eta, const ParamVector& phi,
                                 const ParamVector& theta, const ArchDescriptor& arch,
                                 const Schedule& sched, const GuidanceConfig& guidance,
                                 TransitionMode transition, double t, double s, double w,
                                 const Mat& z_t, const std::vector<int>& class_ids, Rng& rng,
                                 ParamVector& grad_out) {
    const Eigen::Index n = z_t.rows();
    const Vec tv = const_vec(n, t);
    const Vec sv = const_vec(n, s);

    const Mat x_tilde = denoise_rows(eta, arch, sched, z_t, tv, class_ids);
    const Mat z_s = transition_noise(sched, t, s, z_t, x_tilde, transition, rng);

    // the bracket is a constant (stop-gradient), as is z_s's dependence on eta
    const Mat bracket = denoise_rows(phi, arch, sched, z_s, sv, class_ids) -
                        denoise_rows_guided(theta, arch, sched, z_s, sv, class_ids, guidance);

    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += x_tilde.row(i).dot(bracket.row(i));
    loss *= w / n;
    if (!std::isfinite(loss)) throw RuntimeError("gen_loss_grad_alternating: non-finite loss");

    const Mat cot = (w / n) * bracket;
    denoise_rows_vjp(eta, arch, sched, z_t, tv, class_ids, cot, grad_out);
    return loss;
}

double instant_loss_grad(const ParamVector& eta, const ParamVector& theta,
                         const Preconditioner& lambda, const ArchDescriptor& arch,
                         const Schedule& sched, const GuidanceConfig& guidance,
                         TransitionMode transition, double t, double s, double w,
                         const InstantBatch& batch_a, const InstantBatch& batch_b, Rng& rng,
                         ParamVector& grad_out, double* mm_monitor) {
    // Batch B: nu = Lambda grad_theta[ w * mean ||x_tilde' - g_theta(z_s')||^2 ].
    // The residual uses the guided/clipped teacher output; the backward
    // pass goes through the plain conditional teacher (straight-through).
    const Eigen::Index nb = batch_b.z_t.rows();
    const Vec tvb = const_vec(nb, t);
    const Vec svb = const_vec(nb, s);
    const Mat x_tilde_b = denoise_rows(eta, arch, sched, batch_b.z_t, tvb, batch_b.class_ids);
    const Mat z_s_b =
        transition_noise(sched, t, s, batch_b.z_t, x_tilde_b, transition, rng);
    const Mat teacher_b =
        denoise_rows_guided(theta, arch, sched, z_s_b, svb, batch_b.class_ids, guidance);
    // nu is the preconditioned descent step on the auxiliary loss,
    // phi* - theta = -lambda_step * Lambda grad L(phi); the residual is
    // therefore (x_tilde - teacher), not (teacher - x_tilde).
    ParamVector nu = theta.zeros_like();
    const Mat cot_b = (2.0 * w / nb) * (x_tilde_b - teacher_b);
    denoise_rows_vjp(theta, arch, sched, z_s_b, svb, batch_b.class_ids, cot_b, nu);
    nu = lambda.apply(nu);

    // Batch A: JVP of the conditional teacher in direction nu.
    const Eigen::Index na = batch_a.z_t.rows();
    const Vec tva = const_vec(na, t);
    const Vec sva = const_vec(na, s);
    const Mat x_tilde_a = denoise_rows(eta, arch, sched, batch_a.z_t, tva, batch_a.class_ids);
    const Mat z_s_a =
        transition_noise(sched, t, s, batch_a.z_t, x_tilde_a, transition, rng);
    DualParamVector dual{theta, std::move(nu)};
    const Mat jvp = denoise_rows_jvp(dual, arch, sched, z_s_a, sva, batch_a.class_ids);

    double loss = 0.0;
    for (Eigen::Index i = 0; i < na; ++i) loss += x_tilde_a.row(i).dot(jvp.row(i));
    loss *= w / na;
    if (!std::isfinite(loss)) throw RuntimeError("instant_loss_grad: non-finite loss");

    const Mat cot_a = (w / na) * jvp;
    denoise_rows_vjp(eta, arch, sched, batch_a.z_t, tva, batch_a.class_ids, cot_a, grad_out);

    if (mm_monitor) {
        // gA^T nu with gA the teacher-loss gradient on batch A; the two
        // batches being independent makes 0.5 gA^T Lambda gB an unbiased
        // estimate of 0.5 ||E grad_theta L_theta||^2_Lambda.
        const Mat teacher_a =
            denoise_rows_guided(theta, arch, sched, z_s_a, sva, batch_a.class_ids, guidance);
        ParamVector ga = theta.zeros_like();
        const Mat cot_ga = (2.0 * w / na) * (x_tilde_a - teacher_a);
        denoise_rows_vjp(theta, arch, sched, z_s_a, sva, batch_a.class_ids, cot_ga, ga);
        *mm_monitor = 0.5 * ga.vec().dot(dual.tangent.vec());
    }
    return loss;
}

DistillResult distill_alternating(const ParamVector& theta, const ArchDescriptor& arch,
                                  const Schedule& sched, const DatasetSpec& dataset,
                                  const DistillConfig& cfg) {
    Rng rng(cfg.seed);
    DistillResult out;
    out.eta = theta;          // generator is a finetune of the teacher
    ParamVector phi = theta;  // auxiliary starts at the teacher too

    Adam opt_eta(cfg.opt_eta, out.eta);
    Adam opt_phi(cfg.opt_phi, phi);

    double last_phi = 0.0, last_eta = 0.0, last_gnorm = 0.0;
    const int total = cfg.opt_eta.total_steps;
    for (int step = 0; step < total; ++step) {
        const auto [s, t] = sample_time(cfg.tw, sched, cfg.k, rng);
        const double w = loss_weight(cfg.tw, sched, s);
        const auto batch = sample_data(dataset, cfg.batch_size, rng);
        const Mat z_t = forward_diffuse(sched, t, batch.points, rng);

        if (step % 2 == 0) {
            const Vec tv = const_vec(z_t.rows(), t);
            const Mat x_tilde = denoise_rows(out.eta, arch, sched, z_t, tv, batch.labels);
            const Mat z_s = transition_noise(sched, t, s, z_t, x_tilde, cfg.transition, rng);
            ParamVector grad = phi.zeros_like();
            last_phi = aux_loss_grad(phi, theta, arch, sched, cfg.guidance, x_tilde, z_s, s, w,
                                     batch.labels, grad);
            check_finite(last_phi, "L(phi)", step);
            opt_phi.step(phi, grad);
        } else {
            ParamVector grad = out.eta.zeros_like();
            last_eta =
                gen_loss_grad_alternating(out.eta, phi, theta, arch, sched, cfg.guidance,
                                          cfg.transition, t, s, w, z_t, batch.labels, rng, grad);
            check_finite(last_eta, "L(eta)", step);
            last_gnorm = opt_eta.step(out.eta, grad);
        }
        if (step % cfg.log_every == 0 || step == total - 1) {
            DistillMetricsRow row{step, last_eta, last_phi, last_gnorm, 0.0};
            if (cfg.eval_hook && step % cfg.eval_every == 0) row.moment_residual = cfg.eval_hook(out.eta);
            out.metrics.push_back(row);
        }
    }
    return out;
}

DistillResult distill_instant(const ParamVector& theta, const Preconditioner& lambda,
                              const ArchDescriptor& arch, const Schedule& sched,
                              const DatasetSpec& dataset, const DistillConfig& cfg) {
    Rng rng(cfg.seed);
    DistillResult out;
    out.eta = theta;
    Adam opt_eta(cfg.opt_eta, out.eta);

    const int total = cfg.opt_eta.total_steps;
    for (int step = 0; step < total; ++step) {
        const auto [s, t] = sample_time(cfg.tw, sched, cfg.k, rng);
        const double w = loss_weight(cfg.tw, sched, s);

        const auto data_a = sample_data(dataset, cfg.batch_size, rng);
        const auto data_b = sample_data(dataset, cfg.batch_size, rng);
        InstantBatch a{forward_diffuse(sched, t, data_a.points, rng), data_a.labels};
        InstantBatch b{forward_diffuse(sched, t, data_b.points, rng), data_b.labels};

        ParamVector grad = out.eta.zeros_like();
        double mm = 0.0;
        const bool log_row = step % cfg.log_every == 0 || step == total - 1;
        const double loss =
            instant_loss_grad(out.eta, theta, lambda, arch, sched, cfg.guidance, cfg.transition,
                              t, s, w, a, b, rng, grad, log_row ? &mm : nullptr);
        check_finite(loss, "L_instant", step);
        const double gnorm = opt_eta.step(out.eta, grad);
        if (log_row) {
            DistillMetricsRow row{step, loss, 0.0, gnorm, mm};
            if (cfg.eval_hook && step % cfg.eval_every == 0) row.moment_residual = cfg.eval_hook(out.eta);
            out.metrics.push_back(row);
        }
    }
    return out;
}

}  // namespace mmd
