#pragma once

#include <optional>

#include "core/mlp.hpp"
#include "core/schedule.hpp"

namespace mmd {

// Architecture of g(z_t, t, c): an MLP over the concatenation of z_t,
// a sinusoidal embedding of logSNR(t), and (when conditional) a
// learned class embedding. x-prediction: output dim == input dim.
struct ArchDescriptor {
    int input_dim = 2;
    std::vector<int> hidden_dims = {256, 256, 256};
    int time_embed_dim = 32;
    int num_classes = 0;  // 0 = unconditional

    int class_embed_dim() const { return num_classes > 0 ? time_embed_dim : 0; }
    int feature_dim() const { return input_dim + time_embed_dim + class_embed_dim(); }
    // Row num_classes of the embedding table is the reserved null class.
    int null_class() const { return num_classes; }

    MlpArch mlp() const {
        MlpArch a;
        a.dims.push_back(feature_dim());
        for (int h : hidden_dims) a.dims.push_back(h);
        a.dims.push_back(input_dim);
        return a;
    }

    bool operator==(const ArchDescriptor&) const = default;
};

struct GuidanceConfig {
    double scale = 0.0;
    std::optional<std::pair<double, double>> clip_range;
};

// No class label; distinct from the null-class row, which only the
// guided path and label dropout use explicitly.
inline constexpr int kNoClass = -1;

ParamVector denoiser_param_layout(const ArchDescriptor& arch);
void denoiser_init(const ArchDescriptor& arch, ParamVector& params, Rng& rng);

Vec time_embedding(const ArchDescriptor& arch, const Schedule& sched, double t);

// Batched evaluation: z_t is n x input_dim, one (t, class) per call.
Mat denoise(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
            const Mat& z_t, double t, int class_id = kNoClass);

// Guided forward value (1+w) cond - w uncond, then clipped. Derivative
// channels (denoise_vjp/denoise_jvp) always linearize through the
// plain conditional pass, so they are invariant to scale and clipping.
Mat denoise_guided(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                   const Mat& z_t, double t, int class_id, const GuidanceConfig& g);

// Gradient of sum_n cotangent_n^T g(z_t_n) w.r.t. params, accumulated
// into grad_out; optionally also w.r.t. z_t.
void denoise_vjp(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                 const Mat& z_t, double t, int class_id, const Mat& cotangent,
                 ParamVector& grad_out, Mat* input_grad = nullptr);

// Directional derivative in parameter direction params.tangent.
Mat denoise_jvp(const DualParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                const Mat& z_t, double t, int class_id);

// Per-example time and class, for the training loss where each row of
// the batch carries its own (t, c). class_ids may be empty
// (unconditional rows) and may contain kNoClass entries.
Mat denoise_rows(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                 const Mat& z_t, const Vec& t, const std::vector<int>& class_ids);

void denoise_rows_vjp(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                      const Mat& z_t, const Vec& t, const std::vector<int>& class_ids,
                      const Mat& cotangent, ParamVector& grad_out);

Mat denoise_rows_guided(const ParamVector& params, const ArchDescriptor& arch,
                        const Schedule& sched, const Mat& z_t, const Vec& t,
                        const std::vector<int>& class_ids, const GuidanceConfig& g);

Mat denoise_rows_jvp(const DualParamVector& params, const ArchDescriptor& arch,
                     const Schedule& sched, const Mat& z_t, const Vec& t,
                     const std::vector<int>& class_ids);

}  // namespace mmd
