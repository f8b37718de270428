#include "core/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace mmd {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw RuntimeError("io: cannot write " + path);
    os << std::setprecision(17);
    return os;
}

}  // namespace

void write_samples_csv(const std::string& path, const Mat& points,
                       const std::vector<int>& labels) {
    auto os = open_out(path);
    os << "x0,x1,label\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        os << points(i, 0) << "," << points(i, 1) << ","
           << (labels.empty() ? -1 : labels[i]) << "\n";
}

void write_sample_dump_csv(const std::string& path, const Mat& points,
                           const std::vector<int>& labels, std::uint64_t seed, int k,
                           const std::string& mode) {
    auto os = open_out(path);
    os << "x0,x1,label,seed,k,mode\n";
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        os << points(i, 0) << "," << points(i, 1) << ","
           << (labels.empty() ? -1 : labels[i]) << "," << seed << "," << k << "," << mode
           << "\n";
}

LabeledSamples read_samples_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("io: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw UsageError("io: empty CSV " + path);

    std::vector<std::array<double, 2>> pts;
    std::vector<int> labels;
    bool any_label = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::array<double, 2> p{};
        for (int c = 0; c < 2; ++c) {
            if (!std::getline(ss, tok, ','))
                throw UsageError("io: malformed CSV line in " + path);
            p[c] = std::stod(tok);
        }
        int label = -1;
        if (std::getline(ss, tok, ',') && !tok.empty()) label = std::stoi(tok);
        if (label >= 0) any_label = true;
        pts.push_back(p);
        labels.push_back(label);
    }
    LabeledSamples out;
    out.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out.points(static_cast<Eigen::Index>(i), 0) = pts[i][0];
        out.points(static_cast<Eigen::Index>(i), 1) = pts[i][1];
    }
    if (any_label) out.labels = std::move(labels);
    return out;
}

void write_teacher_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows) {
    auto os = open_out(path);
    os << "step,loss,lr\n";
    for (const auto& r : rows) os << r.step << "," << r.loss << "," << r.lr << "\n";
}

void write_distill_metrics_csv(const std::string& path,
                               const std::vector<DistillMetricsRow>& rows) {
    auto os = open_out(path);
    os << "step,loss_eta,loss_phi,grad_norm_eta,loss_mm,moment_residual\n";
    for (const auto& r : rows) {
        os << r.step << "," << r.loss_eta << "," << r.loss_phi << "," << r.grad_norm_eta << ","
           << r.loss_mm << ",";
        if (std::isnan(r.moment_residual))
            os << "\n";
        else
            os << r.moment_residual << "\n";
    }
}

void write_eval_report_json(const std::string& path, const EvalReport& report) {
    nlohmann::json j;
    j["energy_distance"] = report.energy_distance;
    j["mode_coverage"] = report.mode_coverage;
    j["moment_residual"] = report.moment_residual;
    j["n_samples"] = report.n_samples;
    j["seed"] = report.seed;
    auto os = open_out(path);
    os << j.dump(2) << "\n";
}

void write_residuals_csv(const std::string& path, const std::vector<double>& s_grid,
                         const std::vector<double>& residuals) {
    require(s_grid.size() == residuals.size(), "io: residual grid size mismatch");
    auto os = open_out(path);
    os << "s,moment_residual\n";
    for (std::size_t i = 0; i < s_grid.size(); ++i)
        os << s_grid[i] << "," << residuals[i] << "\n";
}

}  // namespace mmd
