#include "core/teacher.hpp"

#include <cmath>

namespace mmd {

double diffusion_loss(const ParamVector& params, const ArchDescriptor& arch,
                      const Schedule& sched, const TimeWeighting& tw, const Mat& x,
                      const std::vector<int>& labels, double null_class_dropout, Rng& rng,
                      ParamVector& grad_out) {
    const Eigen::Index n = x.rows();
    require(n >= 1, "diffusion_loss: empty batch");

    Vec t(n), w(n);
    Mat z_t(n, x.cols());
    std::vector<int> class_ids;
    const bool conditional = arch.num_classes > 0 && !labels.empty();
    if (conditional) class_ids.resize(n);
    std::vector<double> grid;
    if (tw.p_s == TimeDist::edm_grid) grid = edm_time_grid(tw, sched);
    for (Eigen::Index i = 0; i < n; ++i) {
        double ti;
        if (tw.p_s == TimeDist::uniform) {
            ti = 1.0 - uniform01(rng);
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
            ti = grid[pick(rng)];
        }
        t(i) = ti;
        w(i) = loss_weight(tw, sched, ti);
        double alpha, sigma;
        sched.alpha_sigma(ti, alpha, sigma);
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            z_t(i, j) = alpha * x(i, j) + sigma * standard_normal(rng);
        if (conditional)
            class_ids[i] = uniform01(rng) < null_class_dropout ? kNoClass : labels[i];
    }

    const Mat pred = denoise_rows(params, arch, sched, z_t, t, class_ids);
    const Mat resid = pred - x;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += w(i) * resid.row(i).squaredNorm();
    loss /= n;
    if (!std::isfinite(loss))
        throw RuntimeError("diffusion_loss: non-finite loss (t=" + std::to_string(t(0)) + ")");

    Mat cot = resid;
    for (Eigen::Index i = 0; i < n; ++i) cot.row(i) *= 2.0 * w(i) / n;
    denoise_rows_vjp(params, arch, sched, z_t, t, class_ids, cot, grad_out);
    return loss;
}

TeacherResult train_teacher(const TeacherConfig& cfg) {
    Rng rng(cfg.seed);
    TeacherResult out;
    out.params = denoiser_param_layout(cfg.arch);
    denoiser_init(cfg.arch, out.params, rng);

    Adam opt(cfg.opt, out.params);
    for (int step = 0; step < cfg.opt.total_steps; ++step) {
        const auto batch = sample_data(cfg.dataset, cfg.batch_size, rng);
        ParamVector grad = out.params.zeros_like();
        double loss;
        try {
            loss = diffusion_loss(out.params, cfg.arch, cfg.sched, cfg.tw, batch.points,
                                  batch.labels, cfg.null_class_dropout, rng, grad);
        } catch (const RuntimeError& e) {
            throw RuntimeError("train_teacher: diverged at step " + std::to_string(step) + ": " +
                               e.what());
        }
        opt.step(out.params, grad);
        if (step % cfg.log_every == 0 || step == cfg.opt.total_steps - 1)
            out.metrics.push_back({step, loss, lr_at(cfg.opt, step)});
    }

    if (opt.steps_taken() == 0) {
        // 0-step run: no Adam state; run the lr=0 warm-up pass instead
        Adam warm(cfg.opt, out.params);
        Rng wrng(cfg.seed + 0x9e3779b97f4a7c15ull);
        for (int i = 0; i < 100; ++i) {
            const auto batch = sample_data(cfg.dataset, cfg.batch_size, wrng);
            ParamVector grad = out.params.zeros_like();
            diffusion_loss(out.params, cfg.arch, cfg.sched, cfg.tw, batch.points, batch.labels,
                           cfg.null_class_dropout, wrng, grad);
            warm.accumulate_second_moment(grad);
        }
        out.adam_v = warm.second_moment();
        out.adam_steps = warm.steps_taken();
    } else {
        out.adam_v = opt.second_moment();
        out.adam_steps = opt.steps_taken();
    }
    return out;
}

Preconditioner preconditioner_fallback(const TeacherConfig& cfg, const ParamVector& params,
                                       int steps) {
    Rng rng(cfg.seed + 0x9e3779b97f4a7c15ull);
    Adam opt(cfg.opt, params);
    for (int i = 0; i < steps; ++i) {
        const auto batch = sample_data(cfg.dataset, cfg.batch_size, rng);
        ParamVector grad = params.zeros_like();
        diffusion_loss(params, cfg.arch, cfg.sched, cfg.tw, batch.points, batch.labels,
                       cfg.null_class_dropout, rng, grad);
        opt.accumulate_second_moment(grad);
    }
    return Preconditioner::from_adam(opt);
}

}  // namespace mmd
