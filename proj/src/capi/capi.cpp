#include "mmdistill/mmdistill.h"

#include <exception>
#include <iostream>
#include <string>

#include "core/pipeline.hpp"

struct mmd_session {
    std::string last_error;
};

namespace {

template <typename Fn>
int guarded(mmd_session* s, Fn&& fn) {
    if (!s) return MMD_ERR_USAGE;
    s->last_error.clear();
    try {
        return fn();
    } catch (const mmd::UsageError& e) {
        s->last_error = e.what();
        return MMD_ERR_USAGE;
    } catch (const std::exception& e) {
        s->last_error = e.what();
        return MMD_ERR_RUNTIME;
    }
}

int require_arg(mmd_session* s, const char* arg, const char* name) {
    if (arg) return MMD_OK;
    s->last_error = std::string(name) + " must not be null";
    return MMD_ERR_USAGE;
}

}  // namespace

extern "C" {

mmd_session* mmd_session_create(void) { return new (std::nothrow) mmd_session; }

void mmd_session_destroy(mmd_session* s) { delete s; }

const char* mmd_last_error(const mmd_session* s) { return s ? s->last_error.c_str() : ""; }

int mmd_train(mmd_session* s, const char* config_path) {
    if (!s) return MMD_ERR_USAGE;
    if (int rc = require_arg(s, config_path, "config_path")) return rc;
    return guarded(s, [&] {
        mmd::RunConfig cfg = mmd::load_run_config(config_path);
        const auto out = mmd::pipeline_train(cfg);
        std::cout << out.checkpoint_path << "\n" << out.metrics_path << "\n";
        return MMD_OK;
    });
}

int mmd_distill(mmd_session* s, const char* config_path, const char* variant, int k,
                const char* transition) {
    if (!s) return MMD_ERR_USAGE;
    if (int rc = require_arg(s, config_path, "config_path")) return rc;
    return guarded(s, [&] {
        mmd::RunConfig cfg = mmd::load_run_config(config_path);
        if (variant) {
            const std::string v = variant;
            if (v == "alternating")
                cfg.distill.variant = mmd::DistillVariant::alternating;
            else if (v == "instant")
                cfg.distill.variant = mmd::DistillVariant::instant;
            else
                throw mmd::UsageError("unknown variant '" + v + "'");
        }
        if (k > 0) cfg.distill.k = k;
        if (transition) {
            const std::string tr = transition;
            if (tr == "conditional")
                cfg.distill.transition = mmd::TransitionMode::conditional;
            else if (tr == "marginal")
                cfg.distill.transition = mmd::TransitionMode::marginal;
            else
                throw mmd::UsageError("unknown transition '" + tr + "'");
        }
        cfg.distill.resolve_weighting();
        const auto out = mmd::pipeline_distill(cfg);
        if (out.lambda_from_fallback)
            std::cout << "preconditioner rebuilt by lr=0 warm-up (no optimizer state in checkpoint)\n";
        std::cout << out.checkpoint_path << "\n" << out.metrics_path << "\n";
        return MMD_OK;
    });
}

int mmd_sample(mmd_session* s, const char* ckpt_path, int k, int n, const char* mode,
               double guidance, unsigned long long seed, const char* out_csv) {
    if (!s) return MMD_ERR_USAGE;
    if (int rc = require_arg(s, ckpt_path, "ckpt_path")) return rc;
    if (int rc = require_arg(s, mode, "mode")) return rc;
    if (int rc = require_arg(s, out_csv, "out_csv")) return rc;
    return guarded(s, [&] {
        mmd::pipeline_sample(ckpt_path, k, n, mode, guidance, seed, out_csv);
        std::cout << out_csv << "\n";
        return MMD_OK;
    });
}

int mmd_eval(mmd_session* s, const char* samples_a_csv, const char* samples_b_or_config,
             const char* ckpt_path, const char* out_json) {
    if (!s) return MMD_ERR_USAGE;
    if (int rc = require_arg(s, samples_a_csv, "samples_a_csv")) return rc;
    if (int rc = require_arg(s, samples_b_or_config, "samples_b_or_config")) return rc;
    return guarded(s, [&] {
        const auto report =
            mmd::pipeline_eval(samples_a_csv, samples_b_or_config, ckpt_path ? ckpt_path : "",
                               out_json ? out_json : "");
        std::cout << "energy_distance " << report.energy_distance << "\n";
        if (report.mode_coverage > 0.0) std::cout << "mode_coverage " << report.mode_coverage << "\n";
        if (out_json) std::cout << out_json << "\n";
        return MMD_OK;
    });
}

int mmd_check(mmd_session* s, unsigned long long seed) {
    if (!s) return MMD_ERR_USAGE;
    return guarded(s, [&] {
        const int failures = mmd::run_checks(seed, std::cout);
        if (failures == 0) return MMD_OK;
        s->last_error = std::to_string(failures) + " check(s) failed";
        return MMD_ERR_RUNTIME;
    });
}

}  // extern "C"
