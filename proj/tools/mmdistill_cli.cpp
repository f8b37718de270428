// Command-line front end; talks to the core only through the C API.

#include <cstdint>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "mmdistill/mmdistill.h"

namespace {

struct SessionDeleter {
    void operator()(mmd_session* s) const { mmd_session_destroy(s); }
};

int report(mmd_session* s, int rc) {
    if (rc != MMD_OK) std::cerr << "error: " << mmd_last_error(s) << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moment-matching distillation of diffusion samplers"};
    app.require_subcommand(1);

    std::unique_ptr<mmd_session, SessionDeleter> session(mmd_session_create());
    if (!session) {
        std::cerr << "error: out of memory\n";
        return MMD_ERR_RUNTIME;
    }
    mmd_session* s = session.get();

    std::string config_path;
    auto* train = app.add_subcommand("train", "pretrain the teacher denoiser");
    train->add_option("--config", config_path, "run config JSON")->required();

    std::string d_variant, d_transition;
    int d_k = 0;
    auto* distill = app.add_subcommand("distill", "distill the teacher into a k-step sampler");
    distill->add_option("--config", config_path, "run config JSON")->required();
    distill->add_option("--variant", d_variant, "alternating | instant");
    distill->add_option("--k", d_k, "number of sampling steps");
    distill->add_option("--transition", d_transition, "conditional | marginal");

    std::string s_ckpt, s_mode = "ancestral", s_out = "samples.csv";
    int s_k = 8, s_n = 4096;
    double s_guidance = 0.0;
    std::uint64_t s_seed = 0;
    auto* sample = app.add_subcommand("sample", "draw samples from a checkpoint");
    sample->add_option("--ckpt", s_ckpt, "MMD1 checkpoint")->required();
    sample->add_option("--k", s_k, "number of sampling steps");
    sample->add_option("--n", s_n, "number of samples");
    sample->add_option("--mode", s_mode, "ancestral | ddim");
    sample->add_option("--guidance", s_guidance, "classifier-free guidance scale");
    sample->add_option("--seed", s_seed, "RNG seed");
    sample->add_option("--out", s_out, "output CSV");

    std::string e_a, e_b, e_ckpt, e_out;
    auto* eval = app.add_subcommand("eval", "compare sample sets / score a generator");
    eval->add_option("--samples-a", e_a, "samples CSV")->required();
    eval->add_option("--samples-b", e_b, "samples CSV or run config JSON")->required();
    eval->add_option("--ckpt", e_ckpt, "generator checkpoint for the moment residual");
    eval->add_option("--out", e_out, "report JSON");

    std::uint64_t c_seed = 0;
    auto* check = app.add_subcommand("check", "run built-in identity checks");
    check->add_option("--seed", c_seed, "RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : MMD_ERR_USAGE;
    }

    if (train->parsed()) return report(s, mmd_train(s, config_path.c_str()));
    if (distill->parsed())
        return report(s, mmd_distill(s, config_path.c_str(),
                                     d_variant.empty() ? nullptr : d_variant.c_str(), d_k,
                                     d_transition.empty() ? nullptr : d_transition.c_str()));
    if (sample->parsed())
        return report(s, mmd_sample(s, s_ckpt.c_str(), s_k, s_n, s_mode.c_str(), s_guidance,
                                    s_seed, s_out.c_str()));
    if (eval->parsed())
        return report(s, mmd_eval(s, e_a.c_str(), e_b.c_str(),
                                  e_ckpt.empty() ? nullptr : e_ckpt.c_str(),
                                  e_out.empty() ? nullptr : e_out.c_str()));
    if (check->parsed()) return report(s, mmd_check(s, c_seed));
    return MMD_ERR_USAGE;
}
