#pragma once

#include <functional>

#include "core/denoiser.hpp"
#include "core/mlp.hpp"

namespace mmd::testing {

inline void fill_random(ParamVector& p, Rng& rng, double scale = 0.3) {
    for (Eigen::Index i = 0; i < p.vec().size(); ++i) p.vec()(i) = scale * standard_normal(rng);
}

// Central finite difference of a scalar function of the parameters.
inline ParamVector fd_param_grad(const ParamVector& params,
                                 const std::function<double(const ParamVector&)>& f,
                                 double h = 1e-5) {
    ParamVector g = params.zeros_like();
    ParamVector work = params;
    for (Eigen::Index i = 0; i < g.vec().size(); ++i) {
        const double orig = work.vec()(i);
        work.vec()(i) = orig + h;
        const double fp = f(work);
        work.vec()(i) = orig - h;
        const double fm = f(work);
        work.vec()(i) = orig;
        g.vec()(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline Mat fd_input_grad(const Mat& input, const std::function<double(const Mat&)>& f,
                         double h = 1e-5) {
    Mat g = Mat::Zero(input.rows(), input.cols());
    Mat work = input;
    for (Eigen::Index r = 0; r < input.rows(); ++r)
        for (Eigen::Index c = 0; c < input.cols(); ++c) {
            const double orig = work(r, c);
            work(r, c) = orig + h;
            const double fp = f(work);
            work(r, c) = orig - h;
            const double fm = f(work);
            work(r, c) = orig;
            g(r, c) = (fp - fm) / (2.0 * h);
        }
    return g;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double rel_err_vec(const Vec& got, const Vec& want) {
    return (got - want).norm() / std::max(1.0, want.norm());
}

}  // namespace mmd::testing
