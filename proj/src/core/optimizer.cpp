#include "core/optimizer.hpp"

#include <cmath>

namespace mmd {

double lr_at(const OptConfig& cfg, int step) {
    if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
        return cfg.peak_lr * (step + 1) / cfg.warmup_steps;
    if (cfg.total_steps <= cfg.warmup_steps) return cfg.peak_lr;
    const double frac =
        double(cfg.total_steps - step) / double(cfg.total_steps - cfg.warmup_steps);
    return cfg.peak_lr * std::max(0.0, frac);
}

double Adam::step(ParamVector& params, ParamVector& grad) {
    require(params.same_layout(grad), "Adam::step: layout mismatch");
    auto g = grad.vec();
    const double norm = g.norm();
    if (cfg_.clip_norm > 0.0 && norm > cfg_.clip_norm) g *= cfg_.clip_norm / norm;

    const double lr = lr_at(cfg_, step_);
    ++step_;
    auto m = m_.vec();
    auto v = v_.vec();
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v.array().matrix() + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, step_);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, step_);
    auto p = params.vec();
    p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg_.eps);
    return norm;
}

void Adam::accumulate_second_moment(const ParamVector& grad) {
    ++step_;
    auto g = grad.vec();
    auto v = v_.vec();
    v = cfg_.beta2 * v.array().matrix() + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
}

Preconditioner Preconditioner::identity(const ParamVector& params) {
    ParamVector d = params.zeros_like();
    d.vec().setOnes();
    return Preconditioner(std::move(d));
}

Preconditioner Preconditioner::from_adam(const Adam& opt) {
    return from_second_moment(opt.second_moment(), opt.steps_taken(), opt.config().beta2,
                              opt.config().eps);
}

Preconditioner Preconditioner::from_second_moment(const ParamVector& v, int steps, double beta2,
                                                  double eps) {
    require(steps > 0, "Preconditioner: no optimizer steps recorded");
    ParamVector d = v.zeros_like();
    const double bc = 1.0 - std::pow(beta2, steps);
    d.vec().array() = 1.0 / ((v.vec().array() / bc).sqrt() + eps);
    require(d.vec().allFinite() && (d.vec().array() > 0.0).all(),
            "Preconditioner: non-finite or non-positive entries");
    return Preconditioner(std::move(d));
}

ParamVector Preconditioner::apply(const ParamVector& g) const {
    require(diag_.same_layout(g), "Preconditioner::apply: layout mismatch");
    ParamVector out = g;
    out.vec().array() *= diag_.vec().array();
    return out;
}

}  // namespace mmd
