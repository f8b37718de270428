#pragma once

#include <vector>

#include "core/param_vector.hpp"

namespace mmd {

// Fully connected net with silu between layers, linear output layer.
// dims = {in, h1, ..., hk, out}. Parameters per layer i: "W<i>" with
// shape (dims[i+1], dims[i]) and "b<i>" with shape (dims[i+1],).
struct MlpArch {
    std::vector<int> dims;

    int num_layers() const { return static_cast<int>(dims.size()) - 1; }
    int in_dim() const { return dims.front(); }
    int out_dim() const { return dims.back(); }
};

// Per-call tape: layer inputs and pre-activations kept from the
// forward pass, discarded with the object.
struct MlpTape {
    std::vector<Mat> inputs;  // inputs[i]: activation entering layer i (n x dims[i])
    std::vector<Mat> pre;     // pre[i]: pre-activation of layer i (n x dims[i+1])
};

ParamVector mlp_param_layout(const MlpArch& arch);

// He-style init for silu hidden layers; final layer zeroed so a fresh
// net outputs exactly 0.
void mlp_init(const MlpArch& arch, ParamVector& params, Rng& rng, bool zero_final = true);

// input is n x in_dim (one row per example); returns n x out_dim.
Mat mlp_forward(const MlpArch& arch, const ParamVector& params, const Mat& input,
                MlpTape* tape = nullptr);

// Gradient of sum_n cotangent_n^T output_n w.r.t. params. If
// input_grad is non-null it receives the same gradient w.r.t. input.
ParamVector mlp_vjp(const MlpArch& arch, const ParamVector& params, const MlpTape& tape,
                    const Mat& cotangent, Mat* input_grad = nullptr);

// Accumulating form used by the training loops.
void mlp_vjp_accumulate(const MlpArch& arch, const ParamVector& params, const MlpTape& tape,
                        const Mat& cotangent, ParamVector& grad_out, Mat* input_grad = nullptr);

// Directional derivative of the output in direction (params.tangent,
// input_tangent); pass a zero matrix for a pure parameter direction.
Mat mlp_jvp(const MlpArch& arch, const DualParamVector& params, const Mat& input,
            const Mat& input_tangent);

inline double silu(double x) { return x / (1.0 + std::exp(-x)); }
inline double silu_deriv(double x) {
    double s = 1.0 / (1.0 + std::exp(-x));
    return s * (1.0 + x * (1.0 - s));
}

}  // namespace mmd
