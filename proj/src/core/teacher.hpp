#pragma once

#include "core/denoiser.hpp"
#include "core/gmm.hpp"
#include "core/optimizer.hpp"

namespace mmd {

struct TeacherConfig {
    ArchDescriptor arch;
    Schedule sched;
    TimeWeighting tw;  // pretraining p(t) and w(t); uniform/flat default
    DatasetSpec dataset;
    OptConfig opt;
    int batch_size = 256;
    double null_class_dropout = 0.1;  // conditional archs only
    std::uint64_t seed = 0;
    int log_every = 100;
};

struct MetricsRow {
    int step = 0;
    double loss = 0.0;
    double lr = 0.0;
};

struct TeacherResult {
    ParamVector params;
    ParamVector adam_v;  // second moment, for the preconditioner
    int adam_steps = 0;
    std::vector<MetricsRow> metrics;
};

// Weighted denoising loss on one batch with per-example t; returns the
// loss and accumulates the parameter gradient into grad_out.
double diffusion_loss(const ParamVector& params, const ArchDescriptor& arch,
                      const Schedule& sched, const TimeWeighting& tw, const Mat& x,
                      const std::vector<int>& labels, double null_class_dropout, Rng& rng,
                      ParamVector& grad_out);

TeacherResult train_teacher(const TeacherConfig& cfg);

// 100 gradient-accumulation steps at lr=0 to populate Adam's second
// moment when a checkpoint arrives without optimizer state.
Preconditioner preconditioner_fallback(const TeacherConfig& cfg, const ParamVector& params,
                                       int steps = 100);

}  // namespace mmd
