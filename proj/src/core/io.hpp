#pragma once

#include <string>

#include "core/distill.hpp"
#include "core/evaluator.hpp"

namespace mmd {

// samples CSV, header x0,x1,label (label -1 when absent)
void write_samples_csv(const std::string& path, const Mat& points,
                       const std::vector<int>& labels);
// sample-dump CSV, header x0,x1,label,seed,k,mode
void write_sample_dump_csv(const std::string& path, const Mat& points,
                           const std::vector<int>& labels, std::uint64_t seed, int k,
                           const std::string& mode);
LabeledSamples read_samples_csv(const std::string& path);

void write_teacher_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);
void write_distill_metrics_csv(const std::string& path,
                               const std::vector<DistillMetricsRow>& rows);

void write_eval_report_json(const std::string& path, const EvalReport& report);
void write_residuals_csv(const std::string& path, const std::vector<double>& s_grid,
                         const std::vector<double>& residuals);

}  // namespace mmd
