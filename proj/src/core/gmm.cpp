#include "core/gmm.hpp"

#include <cmath>
#include <numeric>

namespace mmd {

void GmmSpec::validate() const {
    require(!weights.empty() && weights.size() == means.size() && weights.size() == scales.size(),
            "GmmSpec: weights/means/scales size mismatch");
    double sum = 0.0;
    for (double w : weights) {
        require(w >= 0.0, "GmmSpec: negative weight");
        sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-12, "GmmSpec: weights must sum to 1");
    for (double s : scales) require(s > 0.0, "GmmSpec: scales must be > 0");
}

Eigen::Vector2d GmmSpec::data_mean() const {
    Eigen::Vector2d m = Eigen::Vector2d::Zero();
    for (int i = 0; i < num_modes(); ++i) m += weights[i] * means[i];
    return m;
}

double GmmSpec::data_std() const {
    const Eigen::Vector2d m = data_mean();
    double var = 0.0;  // averaged over the two coordinates
    for (int i = 0; i < num_modes(); ++i)
        var += weights[i] * (scales[i] * scales[i] + (means[i] - m).squaredNorm() / 2.0);
    return std::sqrt(var);
}

GmmSpec GmmSpec::ring(int modes, double radius, double scale) {
    GmmSpec spec;
    for (int i = 0; i < modes; ++i) {
        const double ang = 2.0 * M_PI * i / modes;
        spec.weights.push_back(1.0 / modes);
        spec.means.emplace_back(radius * std::cos(ang), radius * std::sin(ang));
        spec.scales.push_back(scale);
    }
    return spec;
}

GmmSpec GmmSpec::single(const Eigen::Vector2d& mean, double scale) {
    GmmSpec spec;
    spec.weights = {1.0};
    spec.means = {mean};
    spec.scales = {scale};
    return spec;
}

int DatasetSpec::num_classes() const {
    if (!labeled) return 0;
    switch (kind) {
        case DatasetKind::gmm: return gmm.num_modes();
        case DatasetKind::ring: return 0;
        case DatasetKind::checkerboard: return 0;
    }
    return 0;
}

LabeledSamples sample_data(const DatasetSpec& spec, int n, Rng& rng) {
    require(n >= 1, "sample_data: n must be >= 1");
    LabeledSamples out;
    out.points.resize(n, 2);
    if (spec.labeled && spec.num_classes() > 0) out.labels.resize(n, 0);

    switch (spec.kind) {
        case DatasetKind::gmm: {
            spec.gmm.validate();
            std::discrete_distribution<int> pick(spec.gmm.weights.begin(), spec.gmm.weights.end());
            for (int i = 0; i < n; ++i) {
                const int c = pick(rng);
                out.points(i, 0) = spec.gmm.means[c].x() + spec.gmm.scales[c] * standard_normal(rng);
                out.points(i, 1) = spec.gmm.means[c].y() + spec.gmm.scales[c] * standard_normal(rng);
                if (!out.labels.empty()) out.labels[i] = c;
            }
            break;
        }
        case DatasetKind::ring: {
            for (int i = 0; i < n; ++i) {
                const double ang = 2.0 * M_PI * uniform01(rng);
                const double r = spec.ring_radius + spec.ring_noise * standard_normal(rng);
                out.points(i, 0) = r * std::cos(ang);
                out.points(i, 1) = r * std::sin(ang);
            }
            break;
        }
        case DatasetKind::checkerboard: {
            // rejection-free: pick a dark cell of a 4x4 board, uniform inside
            const double cell = spec.board_extent / 2.0;
            for (int i = 0; i < n; ++i) {
                std::uniform_int_distribution<int> cell_pick(0, 7);
                const int c = cell_pick(rng);
                const int row = c / 2;
                const int col = 2 * (c % 2) + (row % 2);
                out.points(i, 0) = -spec.board_extent + (col + uniform01(rng)) * cell;
                out.points(i, 1) = -spec.board_extent + (row + uniform01(rng)) * cell;
            }
            break;
        }
    }
    return out;
}

std::vector<double> oracle_responsibilities(const GmmSpec& spec, const Schedule& sched,
                                            const Eigen::Vector2d& z_t, double t) {
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    const int m = spec.num_modes();
    std::vector<double> logp(m);
    for (int i = 0; i < m; ++i) {
        const double var = alpha * alpha * spec.scales[i] * spec.scales[i] + sigma * sigma;
        const Eigen::Vector2d d = z_t - alpha * spec.means[i];
        logp[i] = std::log(spec.weights[i]) - std::log(var) - d.squaredNorm() / (2.0 * var);
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double denom = 0.0;
    for (double& l : logp) {
        l = std::exp(l - mx);
        denom += l;
    }
    for (double& l : logp) l /= denom;
    return logp;
}

Eigen::Vector2d oracle_denoise(const GmmSpec& spec, const Schedule& sched,
                               const Eigen::Vector2d& z_t, double t) {
    require(t >= 0.0 && t <= 1.0, "oracle_denoise: t outside [0,1]");
    if (t == 0.0) return z_t;  // infinite SNR: the observation is the sample
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    const auto resp = oracle_responsibilities(spec, sched, z_t, t);
    Eigen::Vector2d out = Eigen::Vector2d::Zero();
    for (int i = 0; i < spec.num_modes(); ++i) {
        const double s2 = spec.scales[i] * spec.scales[i];
        const double var = alpha * alpha * s2 + sigma * sigma;
        const Eigen::Vector2d cond_mean =
            spec.means[i] + (alpha * s2 / var) * (z_t - alpha * spec.means[i]);
        out += resp[i] * cond_mean;
    }
    return out;
}

Mat oracle_denoise_batch(const GmmSpec& spec, const Schedule& sched, const Mat& z_t, double t) {
    Mat out(z_t.rows(), 2);
    for (Eigen::Index i = 0; i < z_t.rows(); ++i)
        out.row(i) = oracle_denoise(spec, sched, z_t.row(i).transpose(), t).transpose();
    return out;
}

Eigen::Vector2d oracle_score(const GmmSpec& spec, const Schedule& sched,
                             const Eigen::Vector2d& z_t, double t) {
    require(t > 0.0, "oracle_score: undefined at t=0");
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    return (alpha * oracle_denoise(spec, sched, z_t, t) - z_t) / (sigma * sigma);
}

double oracle_log_density(const GmmSpec& spec, const Schedule& sched, const Eigen::Vector2d& z_t,
                          double t) {
    require(t > 0.0, "oracle_log_density: undefined at t=0");
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    const int m = spec.num_modes();
    std::vector<double> logp(m);
    for (int i = 0; i < m; ++i) {
        const double var = alpha * alpha * spec.scales[i] * spec.scales[i] + sigma * sigma;
        const Eigen::Vector2d d = z_t - alpha * spec.means[i];
        logp[i] = std::log(spec.weights[i]) - std::log(2.0 * M_PI * var) -
                  d.squaredNorm() / (2.0 * var);
    }
    const double mx = *std::max_element(logp.begin(), logp.end());
    double sum = 0.0;
    for (double l : logp) sum += std::exp(l - mx);
    return mx + std::log(sum);
}

Eigen::Vector2d oracle_posterior_sample(const GmmSpec& spec, const Schedule& sched,
                                        const Eigen::Vector2d& z_t, double t, Rng& rng) {
    if (t == 0.0) return z_t;
    double alpha, sigma;
    sched.alpha_sigma(t, alpha, sigma);
    const auto resp = oracle_responsibilities(spec, sched, z_t, t);
    std::discrete_distribution<int> pick(resp.begin(), resp.end());
    const int i = pick(rng);
    const double s2 = spec.scales[i] * spec.scales[i];
    const double var = alpha * alpha * s2 + sigma * sigma;
    const Eigen::Vector2d cond_mean =
        spec.means[i] + (alpha * s2 / var) * (z_t - alpha * spec.means[i]);
    const double cond_std = std::sqrt(s2 * sigma * sigma / var);
    return cond_mean +
           cond_std * Eigen::Vector2d(standard_normal(rng), standard_normal(rng));
}

}  // namespace mmd
