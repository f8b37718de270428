#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "mmdistill/mmdistill.h"

namespace fs = std::filesystem;

namespace {

std::string work_dir() {
    const auto d = fs::temp_directory_path() / "mmd_capi_test";
    return d.string();
}

std::string write_tiny_config(const std::string& out_dir) {
    const std::string cfg_path = out_dir + "/config.json";
    fs::create_directories(out_dir);
    std::ofstream os(cfg_path);
    os << R"({
  "dataset": {
    "kind": "gmm",
    "labeled": false,
    "gmm": {
      "weights": [0.5, 0.5],
      "means": [[1.0, 0.0], [-1.0, 0.0]],
      "scales": [0.1, 0.1]
    }
  },
  "arch": {"hidden_dims": [16, 16], "time_embed_dim": 8, "num_classes": 0},
  "teacher": {
    "opt": {"peak_lr": 3e-3, "warmup_steps": 50, "total_steps": 300},
    "batch_size": 64,
    "log_every": 100
  },
  "distill": {
    "variant": "instant",
    "k": 2,
    "opt_eta": {"peak_lr": 1e-3, "warmup_steps": 20, "total_steps": 200},
    "batch_size": 32,
    "eval_every": 1000,
    "log_every": 50
  },
  "eval": {"n_samples": 512, "knn": 16},
  "out_dir": ")" << out_dir
       << R"(",
  "seed": 12
})";
    return cfg_path;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

struct Session {
    mmd_session* s = mmd_session_create();
    ~Session() { mmd_session_destroy(s); }
};

}  // namespace

TEST_CASE("session lifecycle and error text") {
    Session se;
    REQUIRE(se.s != nullptr);
    const char* err = mmd_last_error(se.s);
    REQUIRE(err != nullptr);
    CHECK(std::strlen(err) == 0);
}

TEST_CASE("null and missing arguments are usage errors with messages") {
    Session se;
    CHECK(mmd_train(se.s, nullptr) == MMD_ERR_USAGE);
    CHECK(std::strlen(mmd_last_error(se.s)) > 0);
    CHECK(mmd_sample(se.s, nullptr, 4, 16, "ancestral", 0.0, 1, "/tmp/x.csv") == MMD_ERR_USAGE);
    CHECK(mmd_eval(se.s, nullptr, nullptr, nullptr, nullptr) == MMD_ERR_USAGE);

    // a missing config file is reported with its path
    const std::string missing = work_dir() + "/no_such_config.json";
    CHECK(mmd_train(se.s, missing.c_str()) != MMD_OK);
    CHECK(std::string(mmd_last_error(se.s)).find("no_such_config.json") != std::string::npos);
}

TEST_CASE("built-in property checks pass") {
    Session se;
    CHECK(mmd_check(se.s, 7) == MMD_OK);
}

TEST_CASE("full pipeline through the C interface") {
    Session se;
    const std::string dir = work_dir() + "/run";
    fs::remove_all(dir);
    const std::string cfg = write_tiny_config(dir);

    SUBCASE("distillation before training reports the missing teacher") {
        CHECK(mmd_distill(se.s, cfg.c_str(), nullptr, 0, nullptr) != MMD_OK);
        CHECK(std::string(mmd_last_error(se.s)).find("teacher") != std::string::npos);
    }

    SUBCASE("train, distill, sample, eval") {
        REQUIRE(mmd_train(se.s, cfg.c_str()) == MMD_OK);
        CHECK(fs::exists(dir + "/teacher.ckpt"));
        CHECK(fs::exists(dir + "/teacher_metrics.csv"));
        CHECK(fs::exists(dir + "/config_resolved.json"));

        // retraining with the same seed reproduces the checkpoint bytes
        const std::string bytes = slurp(dir + "/teacher.ckpt");
        REQUIRE(mmd_train(se.s, cfg.c_str()) == MMD_OK);
        CHECK(slurp(dir + "/teacher.ckpt") == bytes);

        REQUIRE(mmd_distill(se.s, cfg.c_str(), nullptr, 0, nullptr) == MMD_OK);
        const std::string distilled = dir + "/distilled_instant_k2.ckpt";
        CHECK(fs::exists(distilled));
        CHECK(fs::exists(dir + "/distill_metrics.csv"));

        // explicit overrides land in the artifact name
        REQUIRE(mmd_distill(se.s, cfg.c_str(), "alternating", 1, "conditional") == MMD_OK);
        CHECK(fs::exists(dir + "/distilled_alternating_k1.ckpt"));

        const std::string samples = dir + "/samples.csv";
        REQUIRE(mmd_sample(se.s, distilled.c_str(), 2, 256, "ancestral", 0.0, 5, samples.c_str()) ==
                MMD_OK);
        REQUIRE(fs::exists(samples));
        // header + one row per sample
        std::ifstream is(samples);
        std::string line;
        int lines = 0;
        while (std::getline(is, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 257);

        // identical files: energy distance exactly zero in the report
        const std::string report = dir + "/eval_self.json";
        REQUIRE(mmd_eval(se.s, samples.c_str(), samples.c_str(), nullptr, report.c_str()) ==
                MMD_OK);
        const std::string self_json = slurp(report);
        CHECK(self_json.find("\"energy_distance\": 0.0") != std::string::npos);

        // against the run config: coverage and moment residual included
        const std::string full = dir + "/eval_full.json";
        REQUIRE(mmd_eval(se.s, samples.c_str(), cfg.c_str(), distilled.c_str(), full.c_str()) ==
                MMD_OK);
        const std::string full_json = slurp(full);
        CHECK(full_json.find("mode_coverage") != std::string::npos);
        CHECK(full_json.find("moment_residual") != std::string::npos);

        // invalid requests after a success flip the error message back on
        CHECK(mmd_sample(se.s, distilled.c_str(), 2, 0, "ancestral", 0.0, 5, samples.c_str()) ==
              MMD_ERR_USAGE);
        CHECK(mmd_sample(se.s, distilled.c_str(), 2, 16, "warp", 0.0, 5, samples.c_str()) ==
              MMD_ERR_USAGE);
        // guidance needs class conditioning, absent in this arch
        CHECK(mmd_sample(se.s, distilled.c_str(), 2, 16, "ancestral", 1.0, 5, samples.c_str()) ==
              MMD_ERR_USAGE);
        CHECK(std::strlen(mmd_last_error(se.s)) > 0);
    }
}
