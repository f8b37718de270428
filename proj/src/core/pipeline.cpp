#include "core/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace mmd {

namespace {

void ensure_out_dir(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    save_run_config(cfg.out_dir + "/config_resolved.json", cfg);
}

GuidanceConfig guidance_for(double scale) {
    GuidanceConfig g;
    g.scale = scale;
    return g;
}

}  // namespace

TrainOutputs pipeline_train(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const TeacherResult res = train_teacher(cfg.teacher);

    Checkpoint ckpt;
    ckpt.arch = cfg.arch;
    ckpt.params = res.params;
    ckpt.adam_v = res.adam_v;
    ckpt.adam_steps = res.adam_steps;
    ckpt.adam_beta2 = cfg.teacher.opt.beta2;
    ckpt.adam_eps = cfg.teacher.opt.eps;

    TrainOutputs out;
    out.checkpoint_path = cfg.out_dir + "/teacher.ckpt";
    out.metrics_path = cfg.out_dir + "/teacher_metrics.csv";
    save_checkpoint(out.checkpoint_path, ckpt);
    write_teacher_metrics_csv(out.metrics_path, res.metrics);
    return out;
}

DistillOutputs pipeline_distill(const RunConfig& cfg) {
    ensure_out_dir(cfg);
    const std::string teacher_path = cfg.out_dir + "/teacher.ckpt";
    if (!fs::exists(teacher_path))
        throw UsageError("distill: missing teacher checkpoint " + teacher_path);
    const Checkpoint teacher = load_checkpoint(teacher_path);
    require(teacher.arch == cfg.arch, "distill: checkpoint arch differs from config arch");

    DistillOutputs out;
    DistillConfig dcfg = cfg.distill;

    // moment-residual hook for the metrics CSV (analytic oracle only)
    if (cfg.dataset.kind == DatasetKind::gmm) {
        EvalConfig ecfg = cfg.eval;
        ecfg.n_samples = std::min(ecfg.n_samples, 2048);
        const Schedule sched = cfg.schedule;
        const DatasetSpec dataset = cfg.dataset;
        const ArchDescriptor arch = cfg.arch;
        const auto s_grid = eval_s_grid(ecfg, sched);
        dcfg.eval_hook = [=](const ParamVector& eta) {
            const auto res = moment_residual(net_generator(eta, arch, sched), sched, dataset.gmm,
                                             dataset, dcfg.k, dcfg.transition, s_grid, ecfg);
            double mean = 0.0;
            for (double r : res) mean += r;
            return mean / res.size();
        };
    }

    DistillResult res;
    if (dcfg.variant == DistillVariant::alternating) {
        res = distill_alternating(teacher.params, cfg.arch, cfg.schedule, cfg.dataset, dcfg);
    } else {
        Preconditioner lambda = Preconditioner::identity(teacher.params);
        if (teacher.adam_v) {
            lambda = Preconditioner::from_second_moment(*teacher.adam_v, teacher.adam_steps,
                                                        teacher.adam_beta2, teacher.adam_eps);
        } else {
            out.lambda_from_fallback = true;
            lambda = preconditioner_fallback(cfg.teacher, teacher.params);
        }
        res = distill_instant(teacher.params, lambda, cfg.arch, cfg.schedule, cfg.dataset, dcfg);
    }

    Checkpoint ckpt;
    ckpt.arch = cfg.arch;
    ckpt.params = res.eta;
    const std::string tag =
        dcfg.variant == DistillVariant::alternating ? "alternating" : "instant";
    out.checkpoint_path = cfg.out_dir + "/distilled_" + tag + "_k" + std::to_string(dcfg.k) + ".ckpt";
    out.metrics_path = cfg.out_dir + "/distill_metrics.csv";
    save_checkpoint(out.checkpoint_path, ckpt);
    write_distill_metrics_csv(out.metrics_path, res.metrics);
    return out;
}

void pipeline_sample(const std::string& ckpt_path, int k, int n, const std::string& mode,
                     double guidance, std::uint64_t seed, const std::string& out_csv) {
    require(n >= 1, "sample: n must be >= 1");
    require(k >= 1, "sample: k must be >= 1");
    const Checkpoint ckpt = load_checkpoint(ckpt_path);

    SamplerConfig scfg;
    scfg.k = k;
    if (mode == "ancestral") scfg.mode = SampleMode::ancestral;
    else if (mode == "ddim") scfg.mode = SampleMode::ddim;
    else throw UsageError("sample: unknown mode '" + mode + "'");
    scfg.guidance = guidance_for(guidance);

    Rng rng(seed);
    Mat points(n, ckpt.arch.input_dim);
    std::vector<int> labels;
    if (ckpt.arch.num_classes > 0) {
        labels.resize(n);
        const int C = ckpt.arch.num_classes;
        int row = 0;
        for (int c = 0; c < C; ++c) {
            const int nc = n / C + (c < n % C ? 1 : 0);
            if (nc == 0) continue;
            points.middleRows(row, nc) =
                sample(ckpt.params, ckpt.arch, Schedule{}, scfg, c, nc, rng);
            std::fill(labels.begin() + row, labels.begin() + row + nc, c);
            row += nc;
        }
    } else {
        require(guidance == 0.0, "sample: guidance requires a conditional checkpoint");
        points = sample(ckpt.params, ckpt.arch, Schedule{}, scfg, kNoClass, n, rng);
    }
    write_sample_dump_csv(out_csv, points, labels, seed, k, mode);
}

EvalReport pipeline_eval(const std::string& samples_a, const std::string& samples_b_or_config,
                         const std::string& ckpt_path, const std::string& out_json) {
    const LabeledSamples a = read_samples_csv(samples_a);
    EvalReport report;
    report.n_samples = static_cast<int>(a.points.rows());

    const bool b_is_csv = samples_b_or_config.ends_with(".csv");
    if (b_is_csv) {
        const LabeledSamples b = read_samples_csv(samples_b_or_config);
        report.energy_distance = energy_distance(a.points, b.points);
    } else {
        const RunConfig cfg = load_run_config(samples_b_or_config);
        report.seed = cfg.eval.seed;
        Rng rng(cfg.eval.seed);
        const auto data = sample_data(cfg.dataset, cfg.eval.n_samples, rng);
        report.energy_distance = energy_distance(a.points, data.points);
        if (cfg.dataset.kind == DatasetKind::gmm) {
            report.mode_coverage = mode_coverage(a.points, cfg.dataset.gmm,
                                                 cfg.eval.coverage_radius_mult,
                                                 cfg.eval.coverage_min_count);
            if (!ckpt_path.empty()) {
                const Checkpoint ckpt = load_checkpoint(ckpt_path);
                const auto s_grid = eval_s_grid(cfg.eval, cfg.schedule);
                report.moment_residual = moment_residual(
                    net_generator(ckpt.params, ckpt.arch, cfg.schedule), cfg.schedule,
                    cfg.dataset.gmm, cfg.dataset, cfg.distill.k, cfg.distill.transition, s_grid,
                    cfg.eval);
            }
        }
    }
    if (!out_json.empty()) write_eval_report_json(out_json, report);
    return report;
}

namespace {

struct CheckRunner {
    std::ostream& os;
    int failures = 0;
    void check(const std::string& name, bool ok) {
        os << (ok ? "PASS " : "FAIL ") << name << "\n";
        if (!ok) ++failures;
    }
};

}  // namespace

int run_checks(std::uint64_t seed, std::ostream& os) {
    CheckRunner cr{os};
    Rng rng(seed);
    Schedule sched;

    {  // variance preservation on a grid
        bool ok = true;
        for (int i = 0; i <= 1000; ++i) {
            double a, s;
            sched.alpha_sigma(i / 1000.0, a, s);
            if (std::abs(a * a + s * s - 1.0) > 1e-12) ok = false;
        }
        cr.check("schedule: alpha^2 + sigma^2 == 1", ok);
    }
    {  // posterior endpoints
        const auto p1 = posterior(sched, 1.0, 0.4);
        double as, ss;
        sched.alpha_sigma(0.4, as, ss);
        cr.check("posterior: collapses to forward marginal at t=1",
                 p1.mean_coeff_zt == 0.0 && p1.mean_coeff_x == as && p1.std == ss);
        const auto p2 = posterior(sched, 0.7, 0.7);
        cr.check("posterior: s=t returns identity params",
                 p2.mean_coeff_zt == 1.0 && p2.mean_coeff_x == 0.0 && p2.std == 0.0);
    }
    {  // multistep score identity under the linear substitution
        bool ok = true;
        for (int i = 0; i < 1000; ++i) {
            const double s = 0.05 + 0.9 * uniform01(rng);
            const double t = s + (1.0 - s) * std::max(1e-3, uniform01(rng));
            const Eigen::Vector2d x(2.0 * standard_normal(rng), 2.0 * standard_normal(rng));
            const Eigen::Vector2d z_s(standard_normal(rng), standard_normal(rng));
            double at, st, as, ss;
            sched.alpha_sigma(t, at, st);
            sched.alpha_sigma(s, as, ss);
            const double a_ts = at / as;
            const Eigen::Vector2d z_t = a_ts * z_s;  // E[z_t | z_s]
            const auto p = posterior(sched, t, s);
            const Eigen::Vector2d lhs =
                (p.mean_coeff_zt * z_t + p.mean_coeff_x * x - z_s) / (p.std * p.std);
            const Eigen::Vector2d rhs = (as * x - z_s) / (ss * ss);
            if ((lhs - rhs).norm() > 1e-10 * std::max(1.0, rhs.norm())) ok = false;
        }
        cr.check("posterior: multistep score identity", ok);
    }
    {  // vjp/jvp transpose identity on a small random net
        ArchDescriptor arch;
        arch.input_dim = 2;
        arch.hidden_dims = {16, 16};
        arch.time_embed_dim = 8;
        ParamVector params = denoiser_param_layout(arch);
        denoiser_init(arch, params, rng);
        // final layer zero-init makes the output trivially zero; shake it
        for (Eigen::Index i = 0; i < params.vec().size(); ++i)
            params.vec()(i) += 0.05 * standard_normal(rng);

        const Mat z = randn(4, 2, rng);
        const double t = 0.6;
        const Mat cot = randn(4, 2, rng);
        ParamVector vjp_res = params.zeros_like();
        denoise_vjp(params, arch, Schedule{}, z, t, kNoClass, cot, vjp_res);

        ParamVector dir = params.zeros_like();
        for (Eigen::Index i = 0; i < dir.vec().size(); ++i)
            dir.vec()(i) = standard_normal(rng);
        DualParamVector dual{params, dir};
        const Mat jvp_res = denoise_jvp(dual, arch, Schedule{}, z, t, kNoClass);

        const double lhs = (cot.array() * jvp_res.array()).sum();
        const double rhs = vjp_res.vec().dot(dir.vec());
        cr.check("autodiff: transpose identity cot^T J v == (J^T cot)^T v",
                 std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs)));

        // straight-through: guided jvp is invariant to scale/clip
        ArchDescriptor carch = arch;
        carch.num_classes = 3;
        ParamVector cparams = denoiser_param_layout(carch);
        denoiser_init(carch, cparams, rng);
        const Mat g0 = denoise_guided(cparams, carch, Schedule{}, z, t, 1, GuidanceConfig{});
        const Mat plain = denoise(cparams, carch, Schedule{}, z, t, 1);
        cr.check("guidance: w=0 equals plain denoise", (g0 - plain).norm() == 0.0);
    }
    {  // marginalization of the ancestral posterior (Monte Carlo)
        const Eigen::Vector2d x(0.7, -0.3);
        const double t = 0.8, s = 0.45;
        double at, st, as, ss;
        sched.alpha_sigma(t, at, st);
        sched.alpha_sigma(s, as, ss);
        const auto p = posterior(sched, t, s);
        const int n = 100000;
        Eigen::Vector2d mean = Eigen::Vector2d::Zero();
        double var = 0.0;
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d z_t =
                at * x + st * Eigen::Vector2d(standard_normal(rng), standard_normal(rng));
            const Eigen::Vector2d z_s =
                p.mean_coeff_zt * z_t + p.mean_coeff_x * x +
                p.std * Eigen::Vector2d(standard_normal(rng), standard_normal(rng));
            mean += z_s;
            var += (z_s - as * x).squaredNorm();
        }
        mean /= n;
        var /= 2.0 * n;
        const double mean_se = ss / std::sqrt(double(n));
        const bool mean_ok = (mean - as * x).norm() < 4.0 * mean_se * std::sqrt(2.0);
        const double var_se = ss * ss * std::sqrt(2.0 / (2.0 * n));
        const bool var_ok = std::abs(var - ss * ss) < 4.0 * var_se;
        cr.check("posterior: marginalization matches q(z_s | x)", mean_ok && var_ok);
    }
    return cr.failures;
}

}  // namespace mmd
