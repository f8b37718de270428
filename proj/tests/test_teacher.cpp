#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/teacher.hpp"
#include "helpers.hpp"

using namespace mmd;
using namespace mmd::testing;

namespace {

TeacherConfig small_config() {
    TeacherConfig cfg;
    cfg.arch.hidden_dims = {16, 16};
    cfg.arch.time_embed_dim = 8;
    cfg.dataset.gmm = GmmSpec::ring(8, 1.0, 0.05);
    cfg.dataset.labeled = false;
    cfg.batch_size = 64;
    cfg.opt.total_steps = 400;
    cfg.opt.warmup_steps = 50;
    cfg.seed = 3;
    cfg.log_every = 50;
    return cfg;
}

}  // namespace

TEST_CASE("diffusion loss of the zero-init net is the expected squared data norm") {
    // flat weight, zero predictor: loss = mean ||x||^2
    TeacherConfig cfg;
    cfg.arch.hidden_dims = {8};
    cfg.arch.time_embed_dim = 4;
    cfg.dataset.gmm = GmmSpec::single({0.0, 0.0}, 1.0);
    ParamVector params = denoiser_param_layout(cfg.arch);
    Rng rng(1);
    denoiser_init(cfg.arch, params, rng);

    const int n = 20000;
    Rng data_rng(2);
    const auto batch = sample_data(cfg.dataset, n, data_rng);
    ParamVector grad = params.zeros_like();
    Rng loss_rng(3);
    const double loss = diffusion_loss(params, cfg.arch, cfg.sched, cfg.tw, batch.points, {},
                                       0.0, loss_rng, grad);
    // E||x||^2 = 2 for a standard 2-D normal; MC tolerance
    CHECK(loss == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("diffusion loss gradient matches finite differences") {
    TeacherConfig cfg;
    cfg.arch.hidden_dims = {6};
    cfg.arch.time_embed_dim = 4;
    cfg.dataset.gmm = GmmSpec::ring(4, 1.0, 0.1);
    cfg.dataset.labeled = false;
    ParamVector params = denoiser_param_layout(cfg.arch);
    Rng rng(4);
    denoiser_init(cfg.arch, params, rng);
    fill_random(params, rng, 0.2);

    Rng data_rng(5);
    const auto batch = sample_data(cfg.dataset, 8, data_rng);

    ParamVector grad = params.zeros_like();
    Rng g_rng(6);
    diffusion_loss(params, cfg.arch, cfg.sched, cfg.tw, batch.points, {}, 0.0, g_rng, grad);

    // identical rng stream for every finite-difference evaluation keeps
    // (t, eps) draws fixed, so only the parameter dependence differs
    const auto scalar = [&](const ParamVector& p) {
        ParamVector unused = p.zeros_like();
        Rng fd_rng(6);
        return diffusion_loss(p, cfg.arch, cfg.sched, cfg.tw, batch.points, {}, 0.0, fd_rng,
                              unused);
    };
    const ParamVector fd = fd_param_grad(params, scalar);
    CHECK(rel_err_vec(grad.vec(), fd.vec()) < 1e-5);
}

TEST_CASE("training reduces the loss: trailing average below leading average") {
    const auto res = train_teacher(small_config());
    REQUIRE(res.metrics.size() >= 4);
    const auto& m = res.metrics;
    const std::size_t q = m.size() / 4;
    double lead = 0.0, trail = 0.0;
    for (std::size_t i = 0; i < q; ++i) lead += m[i].loss;
    for (std::size_t i = m.size() - q; i < m.size(); ++i) trail += m[i].loss;
    CHECK(trail < lead);
}

TEST_CASE("training is deterministic given the seed") {
    const auto a = train_teacher(small_config());
    const auto b = train_teacher(small_config());
    CHECK((a.params.vec() - b.params.vec()).norm() == 0.0);
    CHECK((a.adam_v.vec() - b.adam_v.vec()).norm() == 0.0);
}

TEST_CASE("zero-step training returns the init with a warm-up preconditioner") {
    TeacherConfig cfg = small_config();
    cfg.opt.total_steps = 0;
    const auto res = train_teacher(cfg);

    Rng rng(cfg.seed);
    ParamVector init = denoiser_param_layout(cfg.arch);
    denoiser_init(cfg.arch, init, rng);
    CHECK((res.params.vec() - init.vec()).norm() == 0.0);
    CHECK(res.adam_steps > 0);
    CHECK((res.adam_v.vec().array() >= 0.0).all());
    // v usable for a preconditioner
    CHECK_NOTHROW(Preconditioner::from_second_moment(res.adam_v, res.adam_steps, cfg.opt.beta2,
                                                     cfg.opt.eps));
}

TEST_CASE("preconditioner fallback runs without touching the parameters") {
    TeacherConfig cfg = small_config();
    ParamVector params = denoiser_param_layout(cfg.arch);
    Rng rng(9);
    denoiser_init(cfg.arch, params, rng);
    fill_random(params, rng, 0.1);
    const ParamVector before = params;
    const auto lam = preconditioner_fallback(cfg, params, 20);
    CHECK((params.vec() - before.vec()).norm() == 0.0);
    CHECK((lam.diag().vec().array() > 0.0).all());
}
