#pragma once

#include "core/param_vector.hpp"

namespace mmd {

struct OptConfig {
    double peak_lr = 3e-4;
    int warmup_steps = 1000;
    int total_steps = 20000;
    double beta1 = 0.0;
    double beta2 = 0.99;
    double eps = 1e-12;
    double clip_norm = 1.0;
};

// Linear warmup to peak, then linear anneal to zero at total_steps.
double lr_at(const OptConfig& cfg, int step);

class Adam {
  public:
    Adam(const OptConfig& cfg, const ParamVector& params)
        : cfg_(cfg), m_(params.zeros_like()), v_(params.zeros_like()) {}

    // In-place clip + Adam update; returns the pre-clip gradient norm.
    double step(ParamVector& params, ParamVector& grad);

    int steps_taken() const { return step_; }
    const ParamVector& second_moment() const { return v_; }
    const OptConfig& config() const { return cfg_; }

    // Accumulate v without touching params; the lr=0 warm-up pass used
    // to build a preconditioner from a cold checkpoint.
    void accumulate_second_moment(const ParamVector& grad);

  private:
    OptConfig cfg_;
    ParamVector m_, v_;
    int step_ = 0;
};

// Frozen diagonal scaling 1/(sqrt(v_hat) + eps) from Adam state.
class Preconditioner {
  public:
    static Preconditioner identity(const ParamVector& params);
    static Preconditioner from_adam(const Adam& opt);
    static Preconditioner from_second_moment(const ParamVector& v, int steps, double beta2,
                                             double eps);

    const ParamVector& diag() const { return diag_; }
    ParamVector apply(const ParamVector& g) const;

  private:
    explicit Preconditioner(ParamVector diag) : diag_(std::move(diag)) {}
    ParamVector diag_;
};

}  // namespace mmd
