#include "core/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mmd {

using nlohmann::json;

namespace {

std::string kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::gmm: return "gmm";
        case DatasetKind::ring: return "ring";
        case DatasetKind::checkerboard: return "checkerboard";
    }
    return "gmm";
}

DatasetKind kind_from(const std::string& s) {
    if (s == "gmm") return DatasetKind::gmm;
    if (s == "ring") return DatasetKind::ring;
    if (s == "checkerboard") return DatasetKind::checkerboard;
    throw UsageError("config: unknown dataset kind '" + s + "'");
}

json gmm_to_json(const GmmSpec& g) {
    json j;
    j["weights"] = g.weights;
    json means = json::array();
    for (const auto& m : g.means) means.push_back({m.x(), m.y()});
    j["means"] = means;
    j["scales"] = g.scales;
    return j;
}

GmmSpec gmm_from_json(const json& j) {
    GmmSpec g;
    g.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& m : j.at("means")) g.means.emplace_back(m.at(0).get<double>(), m.at(1).get<double>());
    g.scales = j.at("scales").get<std::vector<double>>();
    g.validate();
    return g;
}

json tw_to_json(const TimeWeighting& tw) {
    json j;
    j["p_s"] = tw.p_s == TimeDist::uniform ? "uniform" : "edm_grid";
    j["w_s"] = tw.w_s == WeightMode::flat ? "flat" : "edm";
    j["rho"] = tw.rho;
    j["sigma_min"] = tw.sigma_min;
    j["sigma_max"] = tw.sigma_max;
    j["sigma_data"] = tw.sigma_data;
    j["grid_size"] = tw.grid_size;
    return j;
}

TimeWeighting tw_from_json(const json& j) {
    TimeWeighting tw;
    const std::string ps = j.value("p_s", "uniform");
    if (ps == "uniform") tw.p_s = TimeDist::uniform;
    else if (ps == "edm_grid") tw.p_s = TimeDist::edm_grid;
    else throw UsageError("config: unknown p_s '" + ps + "'");
    const std::string ws = j.value("w_s", "flat");
    if (ws == "flat") tw.w_s = WeightMode::flat;
    else if (ws == "edm") tw.w_s = WeightMode::edm;
    else throw UsageError("config: unknown w_s '" + ws + "'");
    tw.rho = j.value("rho", tw.rho);
    tw.sigma_min = j.value("sigma_min", tw.sigma_min);
    tw.sigma_max = j.value("sigma_max", tw.sigma_max);
    tw.sigma_data = j.value("sigma_data", tw.sigma_data);
    tw.grid_size = j.value("grid_size", tw.grid_size);
    return tw;
}

json opt_to_json(const OptConfig& o) {
    return {{"peak_lr", o.peak_lr},   {"warmup_steps", o.warmup_steps},
            {"total_steps", o.total_steps}, {"beta1", o.beta1},
            {"beta2", o.beta2},       {"eps", o.eps},
            {"clip_norm", o.clip_norm}};
}

OptConfig opt_from_json(const json& j) {
    OptConfig o;
    o.peak_lr = j.value("peak_lr", o.peak_lr);
    o.warmup_steps = j.value("warmup_steps", o.warmup_steps);
    o.total_steps = j.value("total_steps", o.total_steps);
    o.beta1 = j.value("beta1", o.beta1);
    o.beta2 = j.value("beta2", o.beta2);
    o.eps = j.value("eps", o.eps);
    o.clip_norm = j.value("clip_norm", o.clip_norm);
    return o;
}

json guidance_to_json(const GuidanceConfig& g) {
    json j;
    j["scale"] = g.scale;
    if (g.clip_range) j["clip_range"] = {g.clip_range->first, g.clip_range->second};
    return j;
}

GuidanceConfig guidance_from_json(const json& j) {
    GuidanceConfig g;
    g.scale = j.value("scale", 0.0);
    if (j.contains("clip_range"))
        g.clip_range = {{j["clip_range"].at(0).get<double>(), j["clip_range"].at(1).get<double>()}};
    return g;
}

}  // namespace

void RunConfig::resolve() {
    teacher.arch = arch;
    teacher.sched = schedule;
    teacher.dataset = dataset;
    teacher.seed = seed;
    distill.seed = seed + 1;
    eval.seed = seed + 2;
    if (dataset.kind == DatasetKind::gmm) {
        // EDM sigma_data rescaled to the dataset's empirical std
        const double sd = dataset.gmm.data_std();
        teacher.tw.sigma_data = sd;
        distill.tw.sigma_data = sd;
    }
    distill.resolve_weighting();
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    json ds;
    ds["kind"] = kind_name(cfg.dataset.kind);
    ds["labeled"] = cfg.dataset.labeled;
    if (cfg.dataset.kind == DatasetKind::gmm) ds["gmm"] = gmm_to_json(cfg.dataset.gmm);
    if (cfg.dataset.kind == DatasetKind::ring) {
        ds["radius"] = cfg.dataset.ring_radius;
        ds["noise"] = cfg.dataset.ring_noise;
    }
    if (cfg.dataset.kind == DatasetKind::checkerboard) ds["extent"] = cfg.dataset.board_extent;
    j["dataset"] = ds;

    j["schedule"] = {{"kind", "cosine"}, {"logsnr_shift", cfg.schedule.logsnr_shift}};
    j["arch"] = {{"input_dim", cfg.arch.input_dim},
                 {"hidden_dims", cfg.arch.hidden_dims},
                 {"time_embed_dim", cfg.arch.time_embed_dim},
                 {"num_classes", cfg.arch.num_classes},
                 {"activation", "silu"}};
    j["teacher"] = {{"opt", opt_to_json(cfg.teacher.opt)},
                    {"tw", tw_to_json(cfg.teacher.tw)},
                    {"batch_size", cfg.teacher.batch_size},
                    {"null_class_dropout", cfg.teacher.null_class_dropout},
                    {"log_every", cfg.teacher.log_every}};
    j["distill"] = {
        {"variant", cfg.distill.variant == DistillVariant::alternating ? "alternating" : "instant"},
        {"k", cfg.distill.k},
        {"transition",
         cfg.distill.transition == TransitionMode::conditional ? "conditional" : "marginal"},
        {"tw", tw_to_json(cfg.distill.tw)},
        {"guidance", guidance_to_json(cfg.distill.guidance)},
        {"opt_eta", opt_to_json(cfg.distill.opt_eta)},
        {"opt_phi", opt_to_json(cfg.distill.opt_phi)},
        {"batch_size", cfg.distill.batch_size},
        {"eval_every", cfg.distill.eval_every},
        {"log_every", cfg.distill.log_every}};
    j["sampler"] = {{"k", cfg.sampler.k},
                    {"mode", cfg.sampler.mode == SampleMode::ancestral ? "ancestral" : "ddim"},
                    {"noise_multiplier", cfg.sampler.noise_multiplier},
                    {"guidance", guidance_to_json(cfg.sampler.guidance)}};
    j["eval"] = {{"n_samples", cfg.eval.n_samples},
                 {"knn", cfg.eval.knn},
                 {"coverage_min_count", cfg.eval.coverage_min_count},
                 {"coverage_radius_mult", cfg.eval.coverage_radius_mult},
                 {"s_grid_points", cfg.eval.s_grid_points},
                 {"logsnr_lo", cfg.eval.logsnr_lo},
                 {"logsnr_hi", cfg.eval.logsnr_hi}};
    j["out_dir"] = cfg.out_dir;
    j["seed"] = cfg.seed;
    return j.dump(2);
}

RunConfig run_config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("config: invalid JSON: ") + e.what());
    }
    RunConfig cfg;
    if (j.contains("dataset")) {
        const auto& ds = j["dataset"];
        cfg.dataset.kind = kind_from(ds.value("kind", "gmm"));
        cfg.dataset.labeled = ds.value("labeled", true);
        if (ds.contains("gmm")) cfg.dataset.gmm = gmm_from_json(ds["gmm"]);
        cfg.dataset.ring_radius = ds.value("radius", cfg.dataset.ring_radius);
        cfg.dataset.ring_noise = ds.value("noise", cfg.dataset.ring_noise);
        cfg.dataset.board_extent = ds.value("extent", cfg.dataset.board_extent);
    }
    if (j.contains("schedule"))
        cfg.schedule.logsnr_shift = j["schedule"].value("logsnr_shift", 0.0);
    if (j.contains("arch")) {
        const auto& a = j["arch"];
        cfg.arch.input_dim = a.value("input_dim", cfg.arch.input_dim);
        cfg.arch.hidden_dims = a.value("hidden_dims", cfg.arch.hidden_dims);
        cfg.arch.time_embed_dim = a.value("time_embed_dim", cfg.arch.time_embed_dim);
        cfg.arch.num_classes = a.value("num_classes", cfg.arch.num_classes);
    }
    if (j.contains("teacher")) {
        const auto& t = j["teacher"];
        if (t.contains("opt")) cfg.teacher.opt = opt_from_json(t["opt"]);
        if (t.contains("tw")) cfg.teacher.tw = tw_from_json(t["tw"]);
        cfg.teacher.batch_size = t.value("batch_size", cfg.teacher.batch_size);
        cfg.teacher.null_class_dropout =
            t.value("null_class_dropout", cfg.teacher.null_class_dropout);
        cfg.teacher.log_every = t.value("log_every", cfg.teacher.log_every);
    }
    if (j.contains("distill")) {
        const auto& d = j["distill"];
        const std::string v = d.value("variant", "alternating");
        if (v == "alternating") cfg.distill.variant = DistillVariant::alternating;
        else if (v == "instant") cfg.distill.variant = DistillVariant::instant;
        else throw UsageError("config: unknown distill variant '" + v + "'");
        cfg.distill.k = d.value("k", cfg.distill.k);
        const std::string tr = d.value("transition", "conditional");
        if (tr == "conditional") cfg.distill.transition = TransitionMode::conditional;
        else if (tr == "marginal") cfg.distill.transition = TransitionMode::marginal;
        else throw UsageError("config: unknown transition '" + tr + "'");
        if (d.contains("tw")) cfg.distill.tw = tw_from_json(d["tw"]);
        if (d.contains("guidance")) cfg.distill.guidance = guidance_from_json(d["guidance"]);
        if (d.contains("opt_eta")) cfg.distill.opt_eta = opt_from_json(d["opt_eta"]);
        if (d.contains("opt_phi")) cfg.distill.opt_phi = opt_from_json(d["opt_phi"]);
        cfg.distill.batch_size = d.value("batch_size", cfg.distill.batch_size);
        cfg.distill.eval_every = d.value("eval_every", cfg.distill.eval_every);
        cfg.distill.log_every = d.value("log_every", cfg.distill.log_every);
    }
    if (j.contains("sampler")) {
        const auto& s = j["sampler"];
        cfg.sampler.k = s.value("k", cfg.sampler.k);
        const std::string m = s.value("mode", "ancestral");
        if (m == "ancestral") cfg.sampler.mode = SampleMode::ancestral;
        else if (m == "ddim") cfg.sampler.mode = SampleMode::ddim;
        else throw UsageError("config: unknown sampler mode '" + m + "'");
        cfg.sampler.noise_multiplier = s.value("noise_multiplier", 1.0);
        if (s.contains("guidance")) cfg.sampler.guidance = guidance_from_json(s["guidance"]);
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        cfg.eval.n_samples = e.value("n_samples", cfg.eval.n_samples);
        cfg.eval.knn = e.value("knn", cfg.eval.knn);
        cfg.eval.coverage_min_count = e.value("coverage_min_count", cfg.eval.coverage_min_count);
        cfg.eval.coverage_radius_mult =
            e.value("coverage_radius_mult", cfg.eval.coverage_radius_mult);
        cfg.eval.s_grid_points = e.value("s_grid_points", cfg.eval.s_grid_points);
        cfg.eval.logsnr_lo = e.value("logsnr_lo", cfg.eval.logsnr_lo);
        cfg.eval.logsnr_hi = e.value("logsnr_hi", cfg.eval.logsnr_hi);
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.resolve();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return run_config_from_json(ss.str());
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
    std::ofstream os(path);
    if (!os) throw RuntimeError("config: cannot write " + path);
    os << run_config_to_json(cfg) << "\n";
}

}  // namespace mmd
