#include "core/denoiser.hpp"

#include <cmath>

namespace mmd {

namespace {

constexpr double kLogSnrClamp = 40.0;

void check_class(const ArchDescriptor& arch, int class_id) {
    if (class_id == kNoClass) return;
    require(arch.num_classes > 0, "denoise: class_id given for unconditional arch");
    require(class_id >= 0 && class_id <= arch.null_class(), "denoise: class_id out of range");
}

// Features for one (t, class) setting, broadcast over the batch.
Mat build_features(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                   const Mat& z_t, double t, int class_id) {
    require(z_t.cols() == arch.input_dim, "denoise: z_t dim mismatch");
    Mat feat(z_t.rows(), arch.feature_dim());
    feat.leftCols(arch.input_dim) = z_t;
    const Vec temb = time_embedding(arch, sched, t);
    feat.middleCols(arch.input_dim, arch.time_embed_dim).rowwise() = temb.transpose();
    if (arch.num_classes > 0) {
        const int row = class_id == kNoClass ? arch.null_class() : class_id;
        auto table = params.mat("class_embed");
        feat.rightCols(arch.class_embed_dim()).rowwise() = table.row(row);
    }
    return feat;
}

}  // namespace

ParamVector denoiser_param_layout(const ArchDescriptor& arch) {
    require(arch.input_dim >= 1 && arch.time_embed_dim >= 1, "ArchDescriptor: dims must be >= 1");
    ParamVector p;
    if (arch.num_classes > 0) {
        p.add("class_embed", {static_cast<std::uint32_t>(arch.num_classes + 1),
                              static_cast<std::uint32_t>(arch.class_embed_dim())});
    }
    ParamVector mlp = mlp_param_layout(arch.mlp());
    for (const auto& e : mlp.layout()) p.add(e.name, e.shape);
    return p;
}

void denoiser_init(const ArchDescriptor& arch, ParamVector& params, Rng& rng) {
    if (arch.num_classes > 0) {
        auto table = params.mat("class_embed");
        for (Eigen::Index r = 0; r < table.rows(); ++r)
            for (Eigen::Index c = 0; c < table.cols(); ++c)
                table(r, c) = 0.1 * standard_normal(rng);
    }
    mlp_init(arch.mlp(), params, rng);
}

Vec time_embedding(const ArchDescriptor& arch, const Schedule& sched, double t) {
    double l = sched.logsnr(t);
    l = std::clamp(l, -kLogSnrClamp, kLogSnrClamp);
    const int d = arch.time_embed_dim;
    const int half = d / 2;
    Vec emb(d);
    for (int j = 0; j < half; ++j) {
        const double freq = std::exp(-std::log(1000.0) * j / std::max(1, half - 1));
        emb(2 * j) = std::sin(l * freq);
        emb(2 * j + 1) = std::cos(l * freq);
    }
    if (d % 2 == 1) emb(d - 1) = l / kLogSnrClamp;
    return emb;
}

Mat denoise(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
            const Mat& z_t, double t, int class_id) {
    check_class(arch, class_id);
    const Mat feat = build_features(params, arch, sched, z_t, t, class_id);
    return mlp_forward(arch.mlp(), params, feat);
}

Mat denoise_guided(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                   const Mat& z_t, double t, int class_id, const GuidanceConfig& g) {
    if (g.scale > 0.0) {
        require(arch.num_classes > 0, "denoise_guided: guidance requires a conditional arch");
        require(class_id != kNoClass, "denoise_guided: guidance requires a class label");
    }
    Mat out = denoise(params, arch, sched, z_t, t, class_id);
    if (g.scale > 0.0) {
        const Mat uncond = denoise(params, arch, sched, z_t, t, kNoClass);
        out = (1.0 + g.scale) * out - g.scale * uncond;
    }
    if (g.clip_range) {
        const auto [lo, hi] = *g.clip_range;
        require(lo < hi, "denoise_guided: invalid clip range");
        out = out.cwiseMax(lo).cwiseMin(hi);
    }
    return out;
}

void denoise_vjp(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                 const Mat& z_t, double t, int class_id, const Mat& cotangent,
                 ParamVector& grad_out, Mat* input_grad) {
    check_class(arch, class_id);
    const Mat feat = build_features(params, arch, sched, z_t, t, class_id);
    MlpTape tape;
    mlp_forward(arch.mlp(), params, feat, &tape);
    Mat feat_grad;
    mlp_vjp_accumulate(arch.mlp(), params, tape, cotangent, grad_out, &feat_grad);
    if (input_grad) *input_grad = feat_grad.leftCols(arch.input_dim);
    if (arch.num_classes > 0) {
        const int row = class_id == kNoClass ? arch.null_class() : class_id;
        grad_out.mat("class_embed").row(row) +=
            feat_grad.rightCols(arch.class_embed_dim()).colwise().sum();
    }
}

Mat denoise_jvp(const DualParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                const Mat& z_t, double t, int class_id) {
    check_class(arch, class_id);
    const Mat feat = build_features(params.primal, arch, sched, z_t, t, class_id);
    Mat feat_dot = Mat::Zero(feat.rows(), feat.cols());
    if (arch.num_classes > 0) {
        const int row = class_id == kNoClass ? arch.null_class() : class_id;
        auto table_dot = params.tangent.mat("class_embed");
        feat_dot.rightCols(arch.class_embed_dim()).rowwise() = table_dot.row(row);
    }
    return mlp_jvp(arch.mlp(), params, feat, feat_dot);
}

namespace {

Mat build_features_rows(const ParamVector& params, const ArchDescriptor& arch,
                        const Schedule& sched, const Mat& z_t, const Vec& t,
                        const std::vector<int>& class_ids) {
    require(z_t.cols() == arch.input_dim, "denoise_rows: z_t dim mismatch");
    require(t.size() == z_t.rows(), "denoise_rows: t size mismatch");
    require(class_ids.empty() || static_cast<Eigen::Index>(class_ids.size()) == z_t.rows(),
            "denoise_rows: class_ids size mismatch");
    Mat feat(z_t.rows(), arch.feature_dim());
    feat.leftCols(arch.input_dim) = z_t;
    for (Eigen::Index i = 0; i < z_t.rows(); ++i)
        feat.row(i).segment(arch.input_dim, arch.time_embed_dim) =
            time_embedding(arch, sched, t(i)).transpose();
    if (arch.num_classes > 0) {
        auto table = params.mat("class_embed");
        for (Eigen::Index i = 0; i < z_t.rows(); ++i) {
            int c = class_ids.empty() ? kNoClass : class_ids[i];
            check_class(arch, c);
            const int row = c == kNoClass ? arch.null_class() : c;
            feat.row(i).tail(arch.class_embed_dim()) = table.row(row);
        }
    }
    return feat;
}

}  // namespace

Mat denoise_rows(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                 const Mat& z_t, const Vec& t, const std::vector<int>& class_ids) {
    const Mat feat = build_features_rows(params, arch, sched, z_t, t, class_ids);
    return mlp_forward(arch.mlp(), params, feat);
}

void denoise_rows_vjp(const ParamVector& params, const ArchDescriptor& arch, const Schedule& sched,
                      const Mat& z_t, const Vec& t, const std::vector<int>& class_ids,
                      const Mat& cotangent, ParamVector& grad_out) {
    const Mat feat = build_features_rows(params, arch, sched, z_t, t, class_ids);
    MlpTape tape;
    mlp_forward(arch.mlp(), params, feat, &tape);
    Mat feat_grad;
    mlp_vjp_accumulate(arch.mlp(), params, tape, cotangent, grad_out, &feat_grad);
    if (arch.num_classes > 0) {
        auto table_grad = grad_out.mat("class_embed");
        for (Eigen::Index i = 0; i < z_t.rows(); ++i) {
            const int c = class_ids.empty() ? kNoClass : class_ids[i];
            const int row = c == kNoClass ? arch.null_class() : c;
            table_grad.row(row) += feat_grad.row(i).tail(arch.class_embed_dim());
        }
    }
}

Mat denoise_rows_guided(const ParamVector& params, const ArchDescriptor& arch,
                        const Schedule& sched, const Mat& z_t, const Vec& t,
                        const std::vector<int>& class_ids, const GuidanceConfig& g) {
    if (g.scale > 0.0) {
        require(arch.num_classes > 0 && !class_ids.empty(),
                "denoise_rows_guided: guidance requires class labels");
    }
    Mat out = denoise_rows(params, arch, sched, z_t, t, class_ids);
    if (g.scale > 0.0) {
        const Mat uncond = denoise_rows(params, arch, sched, z_t, t, {});
        out = (1.0 + g.scale) * out - g.scale * uncond;
    }
    if (g.clip_range) {
        const auto [lo, hi] = *g.clip_range;
        require(lo < hi, "denoise_rows_guided: invalid clip range");
        out = out.cwiseMax(lo).cwiseMin(hi);
    }
    return out;
}

Mat denoise_rows_jvp(const DualParamVector& params, const ArchDescriptor& arch,
                     const Schedule& sched, const Mat& z_t, const Vec& t,
                     const std::vector<int>& class_ids) {
    const Mat feat = build_features_rows(params.primal, arch, sched, z_t, t, class_ids);
    Mat feat_dot = Mat::Zero(feat.rows(), feat.cols());
    if (arch.num_classes > 0) {
        auto table_dot = params.tangent.mat("class_embed");
        for (Eigen::Index i = 0; i < z_t.rows(); ++i) {
            const int c = class_ids.empty() ? kNoClass : class_ids[i];
            const int row = c == kNoClass ? arch.null_class() : c;
            feat_dot.row(i).tail(arch.class_embed_dim()) = table_dot.row(row);
        }
    }
    return mlp_jvp(arch.mlp(), params, feat, feat_dot);
}

}  // namespace mmd
