#include "core/mlp.hpp"

#include <cmath>

namespace mmd {

ParamVector mlp_param_layout(const MlpArch& arch) {
    require(arch.dims.size() >= 2, "MlpArch: need at least input and output dims");
    for (int d : arch.dims) require(d >= 1, "MlpArch: all dims must be >= 1");
    ParamVector p;
    for (int i = 0; i < arch.num_layers(); ++i) {
        p.add("W" + std::to_string(i),
              {static_cast<std::uint32_t>(arch.dims[i + 1]), static_cast<std::uint32_t>(arch.dims[i])});
        p.add("b" + std::to_string(i), {static_cast<std::uint32_t>(arch.dims[i + 1])});
    }
    return p;
}

void mlp_init(const MlpArch& arch, ParamVector& params, Rng& rng, bool zero_final) {
    const int L = arch.num_layers();
    for (int i = 0; i < L; ++i) {
        auto W = params.mat("W" + std::to_string(i));
        auto b = params.slice("b" + std::to_string(i));
        if (zero_final && i == L - 1) {
            W.setZero();
            b.setZero();
            continue;
        }
        const double scale = std::sqrt(2.0 / arch.dims[i]);
        for (Eigen::Index r = 0; r < W.rows(); ++r)
            for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = scale * standard_normal(rng);
        b.setZero();
    }
}

Mat mlp_forward(const MlpArch& arch, const ParamVector& params, const Mat& input, MlpTape* tape) {
    require(input.cols() == arch.in_dim(), "mlp_forward: input dim mismatch");
    const int L = arch.num_layers();
    Mat act = input;
    if (tape) {
        tape->inputs.clear();
        tape->pre.clear();
        tape->inputs.reserve(L);
        tape->pre.reserve(L);
    }
    for (int i = 0; i < L; ++i) {
        auto W = params.mat("W" + std::to_string(i));
        auto b = params.slice("b" + std::to_string(i));
        if (tape) tape->inputs.push_back(act);
        Mat pre = act * W.transpose();
        pre.rowwise() += b.transpose();
        if (tape) tape->pre.push_back(pre);
        if (i < L - 1) {
            act = pre.unaryExpr([](double x) { return silu(x); });
        } else {
            act = std::move(pre);
        }
    }
    return act;
}

void mlp_vjp_accumulate(const MlpArch& arch, const ParamVector& params, const MlpTape& tape,
                        const Mat& cotangent, ParamVector& grad_out, Mat* input_grad) {
    const int L = arch.num_layers();
    require(static_cast<int>(tape.inputs.size()) == L, "mlp_vjp: tape/arch mismatch");
    require(cotangent.cols() == arch.out_dim(), "mlp_vjp: cotangent dim mismatch");
    require(cotangent.rows() == tape.inputs[0].rows(), "mlp_vjp: cotangent batch mismatch");

    Mat delta = cotangent;  // d(loss)/d(pre-activation of layer i)
    for (int i = L - 1; i >= 0; --i) {
        auto W = params.mat("W" + std::to_string(i));
        auto gW = grad_out.mat("W" + std::to_string(i));
        auto gb = grad_out.slice("b" + std::to_string(i));
        gW += (delta.transpose() * tape.inputs[i]);
        gb += delta.colwise().sum().transpose();
        if (i > 0) {
            Mat back = delta * W;  // gradient w.r.t. silu output of layer i-1
            const Mat& pre_prev = tape.pre[i - 1];
            delta = back.cwiseProduct(pre_prev.unaryExpr([](double x) { return silu_deriv(x); }));
        } else if (input_grad) {
            *input_grad = delta * W;
        }
    }
}

ParamVector mlp_vjp(const MlpArch& arch, const ParamVector& params, const MlpTape& tape,
                    const Mat& cotangent, Mat* input_grad) {
    ParamVector grad = params.zeros_like();
    mlp_vjp_accumulate(arch, params, tape, cotangent, grad, input_grad);
    return grad;
}

Mat mlp_jvp(const MlpArch& arch, const DualParamVector& params, const Mat& input,
            const Mat& input_tangent) {
    params.check();
    require(input.cols() == arch.in_dim(), "mlp_jvp: input dim mismatch");
    require(input_tangent.rows() == input.rows() && input_tangent.cols() == input.cols(),
            "mlp_jvp: tangent shape mismatch");
    const int L = arch.num_layers();
    Mat act = input;
    Mat act_dot = input_tangent;
    for (int i = 0; i < L; ++i) {
        auto W = params.primal.mat("W" + std::to_string(i));
        auto b = params.primal.slice("b" + std::to_string(i));
        auto Wd = params.tangent.mat("W" + std::to_string(i));
        auto bd = params.tangent.slice("b" + std::to_string(i));
        Mat pre = act * W.transpose();
        pre.rowwise() += b.transpose();
        Mat pre_dot = act_dot * W.transpose() + act * Wd.transpose();
        pre_dot.rowwise() += bd.transpose();
        if (i < L - 1) {
            act = pre.unaryExpr([](double x) { return silu(x); });
            act_dot = pre_dot.cwiseProduct(pre.unaryExpr([](double x) { return silu_deriv(x); }));
        } else {
            act = std::move(pre);
            act_dot = std::move(pre_dot);
        }
    }
    return act_dot;
}

}  // namespace mmd
