#pragma once

#include <string>

#include "core/checkpoint.hpp"
#include "core/config.hpp"
#include "core/io.hpp"

namespace mmd {

// Orchestration behind the CLI subcommands. Every run writes a
// resolved-config snapshot into out_dir.

struct TrainOutputs {
    std::string checkpoint_path;
    std::string metrics_path;
};
TrainOutputs pipeline_train(const RunConfig& cfg);

struct DistillOutputs {
    std::string checkpoint_path;
    std::string metrics_path;
    bool lambda_from_fallback = false;
};
DistillOutputs pipeline_distill(const RunConfig& cfg);

void pipeline_sample(const std::string& ckpt_path, int k, int n, const std::string& mode,
                     double guidance, std::uint64_t seed, const std::string& out_csv);

// B may be a samples CSV or a run-config JSON (dataset reference);
// ckpt_path optionally adds the moment residual of that generator.
EvalReport pipeline_eval(const std::string& samples_a, const std::string& samples_b_or_config,
                         const std::string& ckpt_path, const std::string& out_json);

// Fast identity/property checks; prints one line per check, returns
// the number of failures.
int run_checks(std::uint64_t seed, std::ostream& os);

}  // namespace mmd
