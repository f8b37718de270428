#include "core/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmd {

namespace {

// mean pairwise distance between rows of a and rows of b (all pairs)
double mean_cross_distance(const Mat& a, const Mat& b) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            sum += (a.row(i) - b.row(j)).norm();
    return sum / (double(a.rows()) * double(b.rows()));
}

}  // namespace

double energy_distance(const Mat& a, const Mat& b) {
    require(a.rows() >= 2 && b.rows() >= 2, "energy_distance: need at least 2 points per set");
    require(a.cols() == b.cols(), "energy_distance: dimension mismatch");
    return 2.0 * mean_cross_distance(a, b) - mean_cross_distance(a, a) -
           mean_cross_distance(b, b);
}

double energy_distance_null(const Mat& a, const Mat& b, int permutations, double percentile,
                            Rng& rng) {
    const Eigen::Index n = a.rows(), m = b.rows(), tot = n + m;
    Mat pool(tot, a.cols());
    pool.topRows(n) = a;
    pool.bottomRows(m) = b;

    // distance matrix once; each permutation is then index bookkeeping
    Mat d = Mat::Zero(tot, tot);
    for (Eigen::Index i = 0; i < tot; ++i)
        for (Eigen::Index j = i + 1; j < tot; ++j)
            d(i, j) = d(j, i) = (pool.row(i) - pool.row(j)).norm();

    std::vector<Eigen::Index> idx(tot);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> stats;
    stats.reserve(permutations);
    for (int p = 0; p < permutations; ++p) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double ab = 0.0, aa = 0.0, bb = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) aa += d(idx[i], idx[j]);
        for (Eigen::Index i = n; i < tot; ++i)
            for (Eigen::Index j = n; j < tot; ++j) bb += d(idx[i], idx[j]);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = n; j < tot; ++j) ab += d(idx[i], idx[j]);
        stats.push_back(2.0 * ab / (double(n) * m) - aa / (double(n) * n) -
                        bb / (double(m) * m));
    }
    std::sort(stats.begin(), stats.end());
    const auto pos = std::min<std::size_t>(stats.size() - 1,
                                           static_cast<std::size_t>(percentile * stats.size()));
    return stats[pos];
}

double mode_coverage(const Mat& samples, const GmmSpec& spec, double radius_mult, int min_count) {
    spec.validate();
    int covered = 0;
    for (int i = 0; i < spec.num_modes(); ++i) {
        const double r = radius_mult * spec.scales[i];
        int count = 0;
        for (Eigen::Index j = 0; j < samples.rows(); ++j) {
            if ((samples.row(j).transpose() - spec.means[i]).norm() <= r) ++count;
            if (count >= min_count) break;
        }
        if (count >= min_count) ++covered;
    }
    return double(covered) / spec.num_modes();
}

std::vector<double> eval_s_grid(const EvalConfig& cfg, const Schedule& sched) {
    std::vector<double> grid;
    grid.reserve(cfg.s_grid_points);
    for (int i = 0; i < cfg.s_grid_points; ++i) {
        const double frac = cfg.s_grid_points == 1 ? 0.5 : double(i) / (cfg.s_grid_points - 1);
        const double lsnr = cfg.logsnr_hi + frac * (cfg.logsnr_lo - cfg.logsnr_hi);
        grid.push_back(sched.time_from_logsnr(lsnr));
    }
    return grid;
}

GeneratorFn net_generator(const ParamVector& eta, const ArchDescriptor& arch,
                          const Schedule& sched) {
    return [eta, arch, sched](const Mat& z_t, double t, const std::vector<int>& labels, Rng&) {
        return denoise_rows(eta, arch, sched, z_t, Vec::Constant(z_t.rows(), t), labels);
    };
}

GeneratorFn ideal_generator(const GmmSpec& spec, const Schedule& sched) {
    return [spec, sched](const Mat& z_t, double t, const std::vector<int>&, Rng& rng) {
        Mat out(z_t.rows(), 2);
        for (Eigen::Index i = 0; i < z_t.rows(); ++i)
            out.row(i) =
                oracle_posterior_sample(spec, sched, z_t.row(i).transpose(), t, rng).transpose();
        return out;
    };
}

std::vector<double> moment_residual(const GeneratorFn& gen, const Schedule& sched,
                                    const GmmSpec& spec, const DatasetSpec& dataset, int k,
                                    TransitionMode transition, const std::vector<double>& s_grid,
                                    const EvalConfig& cfg) {
    require(cfg.n_samples >= 10 * cfg.knn, "moment_residual: n too small for kNN");
    Rng rng(cfg.seed);
    std::vector<double> out;
    out.reserve(s_grid.size());

    for (double s : s_grid) {
        const int n = cfg.n_samples;
        const auto data = sample_data(dataset, n, rng);
        const double t = std::min(s + uniform01(rng) / k, 1.0);
        double alpha, sigma;
        sched.alpha_sigma(t, alpha, sigma);
        const Mat z_t = alpha * data.points + sigma * randn(n, 2, rng);
        const Mat x_tilde = gen(z_t, t, data.labels, rng);
        const Mat z_s = transition_noise(sched, t, s, z_t, x_tilde, transition, rng);

        // kNN regression of x_tilde on z_s at each sample point
        std::vector<int> order(n);
        std::vector<double> dist(n);
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) dist[j] = (z_s.row(i) - z_s.row(j)).squaredNorm();
            std::iota(order.begin(), order.end(), 0);
            std::nth_element(order.begin(), order.begin() + cfg.knn, order.end(),
                             [&dist](int p, int q) { return dist[p] < dist[q]; });
            Eigen::Vector2d est = Eigen::Vector2d::Zero();
            for (int j = 0; j < cfg.knn; ++j) est += x_tilde.row(order[j]).transpose();
            est /= cfg.knn;
            total += (est - oracle_denoise(spec, sched, z_s.row(i).transpose(), s)).norm();
        }
        out.push_back(total / n);
    }
    return out;
}

}  // namespace mmd
