#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/optimizer.hpp"

using namespace mmd;

namespace {

ParamVector one_param(double value) {
    ParamVector p;
    p.add("w", {1});
    p.vec()(0) = value;
    return p;
}

}  // namespace

TEST_CASE("learning rate: linear warmup then linear anneal to zero") {
    OptConfig cfg;
    cfg.peak_lr = 1.0;
    cfg.warmup_steps = 100;
    cfg.total_steps = 1100;
    // warmup counts the upcoming step, so the very first update is nonzero
    CHECK(lr_at(cfg, 0) == doctest::Approx(0.01));
    CHECK(lr_at(cfg, 49) == doctest::Approx(0.5));
    CHECK(lr_at(cfg, 99) == doctest::Approx(1.0));
    CHECK(lr_at(cfg, 100) == doctest::Approx(1.0));
    CHECK(lr_at(cfg, 600) == doctest::Approx(0.5));
    CHECK(lr_at(cfg, 1100) == doctest::Approx(0.0));
}

TEST_CASE("Adam with beta1=0 is RMS scaling, hand-checked on one parameter") {
    OptConfig cfg;
    cfg.peak_lr = 0.1;
    cfg.warmup_steps = 1;  // step 1 already at peak
    cfg.total_steps = 1000000;
    cfg.beta1 = 0.0;
    cfg.beta2 = 0.99;
    cfg.eps = 1e-12;
    cfg.clip_norm = 100.0;  // inactive here

    ParamVector p = one_param(1.0);
    Adam opt(cfg, p);
    ParamVector g = one_param(0.5);
    opt.step(p, g);

    // v = 0.01 * 0.25; v_hat = v / (1 - 0.99) = 0.25; m_hat = g
    // update = lr * g / (sqrt(v_hat) + eps) = 0.1 * 0.5 / 0.5 = 0.1
    const double lr1 = lr_at(cfg, 1);
    CHECK(p.vec()(0) == doctest::Approx(1.0 - lr1 * 1.0).epsilon(1e-9));
    CHECK(opt.second_moment().vec()(0) == doctest::Approx(0.01 * 0.25).epsilon(1e-12));
}

TEST_CASE("gradient clipping caps the norm exactly and is a no-op below it") {
    OptConfig cfg;
    cfg.clip_norm = 1.0;
    cfg.warmup_steps = 1;
    ParamVector p;
    p.add("w", {2});
    Adam opt(cfg, p);

    ParamVector g = p.zeros_like();
    g.vec() << 3.0, 4.0;  // norm 5
    const double pre = opt.step(p, g);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(g.vec().norm() == doctest::Approx(1.0).epsilon(1e-12));

    ParamVector small = p.zeros_like();
    small.vec() << 0.3, 0.4;  // norm 0.5, untouched
    opt.step(p, small);
    CHECK(small.vec().norm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("preconditioner: identity passes gradients through, zero maps to zero") {
    ParamVector p;
    p.add("w", {4});
    const auto lam = Preconditioner::identity(p);
    ParamVector g = p.zeros_like();
    g.vec() << 1.0, -2.0, 0.5, 3.0;
    CHECK((lam.apply(g).vec() - g.vec()).norm() == 0.0);
    CHECK(lam.apply(p.zeros_like()).vec().norm() == 0.0);
}

TEST_CASE("preconditioner from Adam state matches a scalar loop") {
    OptConfig cfg;
    cfg.beta2 = 0.99;
    cfg.eps = 1e-12;
    cfg.warmup_steps = 1;
    ParamVector p;
    p.add("w", {3});
    Adam opt(cfg, p);
    ParamVector g = p.zeros_like();
    g.vec() << 0.1, -0.4, 0.9;
    opt.accumulate_second_moment(g);
    opt.accumulate_second_moment(g);

    const auto lam = Preconditioner::from_adam(opt);
    const double bc = 1.0 - std::pow(0.99, 2);
    for (int i = 0; i < 3; ++i) {
        const double v = (1 - 0.99) * g.vec()(i) * g.vec()(i) * (1.0 + 0.99);
        const double want = 1.0 / (std::sqrt(v / bc) + 1e-12);
        CHECK(lam.diag().vec()(i) == doctest::Approx(want).epsilon(1e-10));
        CHECK(lam.diag().vec()(i) > 0.0);
    }

    // apply is the entrywise product
    ParamVector x = p.zeros_like();
    x.vec() << 2.0, 3.0, -1.0;
    const auto y = lam.apply(x);
    for (int i = 0; i < 3; ++i)
        CHECK(y.vec()(i) == doctest::Approx(lam.diag().vec()(i) * x.vec()(i)).epsilon(1e-14));
}
