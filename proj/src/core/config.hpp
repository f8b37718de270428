#pragma once

#include <string>

#include "core/distill.hpp"
#include "core/evaluator.hpp"

namespace mmd {

// Full experiment description; serialized as JSON. The resolved
// snapshot written next to every run's outputs is the reproduction
// record.
struct RunConfig {
    DatasetSpec dataset;
    Schedule schedule;
    ArchDescriptor arch;
    TeacherConfig teacher;    // arch/sched/dataset filled from the above
    DistillConfig distill;
    SamplerConfig sampler;
    EvalConfig eval;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    // Copies the shared fields into the sub-configs and derives seeds.
    void resolve();
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& json_text);

}  // namespace mmd
