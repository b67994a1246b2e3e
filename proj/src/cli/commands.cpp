#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "prsans/cli/cli.hpp"
#include "prsans/cli/config.hpp"
#include "prsans/csv.hpp"
#include "prsans/detector_image.hpp"
#include "prsans/errors.hpp"
#include "prsans/image_io.hpp"
#include "prsans/metrics.hpp"
#include "prsans/nn/checkpoint.hpp"
#include "prsans/nn/dataset.hpp"
#include "prsans/nn/net.hpp"
#include "prsans/nn/train.hpp"
#include "prsans/priors/epsilon_schedule.hpp"
#include "prsans/priors/gmm_prior.hpp"
#include "prsans/rng.hpp"
#include "prsans/sans/acquire.hpp"
#include "prsans/sans/geometry.hpp"
#include "prsans/sans/pattern.hpp"
#include "prsans/sans/reduce.hpp"
#include "prsans/solver/pnp.hpp"
#include "prsans/theory/certify.hpp"

namespace prsans::cli {

namespace {

struct RunContext {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed_override;
    std::string base_dir;  // config paths resolve relative to this
};

std::string artifact_path(const RunContext& ctx, const std::string& name) {
    return (std::filesystem::path(ctx.out_dir) / name).string();
}

std::uint64_t effective_seed(const nlohmann::json& cfg, const RunContext& ctx) {
    if (ctx.seed_override) return *ctx.seed_override;
    return get_seed(cfg, "", "seed", std::uint64_t{0});
}

// resolved_config.json is itself an artifact, so it joins the manifest.
void finish_run(const RunContext& ctx, const nlohmann::json& resolved,
                std::vector<std::string> artifacts) {
    write_resolved_config(ctx.out_dir, resolved);
    artifacts.push_back("resolved_config.json");
    write_manifest(ctx.out_dir, artifacts);
}

nlohmann::json block_or_empty(const nlohmann::json& cfg, const char* key) {
    return cfg.is_object() && cfg.contains(key) ? cfg.at(key) : nlohmann::json::object();
}

std::vector<double> get_double_array(const nlohmann::json& obj, const std::string& prefix,
                                     const std::string& key) {
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    if (!obj.is_object() || !obj.contains(key))
        throw ConfigError(field, "missing required array");
    const auto& arr = obj.at(key);
    if (!arr.is_array() || arr.empty())
        throw ConfigError(field, "expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw ConfigError(field, "expected a non-empty array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

std::string curve_to_csv(const nn::TrainCurve& curve) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (std::size_t i = 0; i < curve.train_loss.size(); ++i) {
        out += std::to_string(i + 1) + "," + fmt_full(curve.train_loss[i]) + ",";
        if (i < curve.val_loss.size()) out += fmt_full(curve.val_loss[i]);
        out += "\n";
    }
    return out;
}

sans::ScatteringGeometry parse_geometry(const nlohmann::json& obj, nlohmann::json& resolved) {
    if (!obj.is_object()) throw ConfigError("geometry", "expected a geometry object");
    const auto g = sans::ScatteringGeometry::from_json(obj.dump());
    resolved = nlohmann::json::parse(g.to_json());
    return g;
}

sans::FormFactorModel parse_model(const nlohmann::json& obj, const std::string& prefix,
                                  nlohmann::json& resolved) {
    if (!obj.is_object()) throw ConfigError(prefix, "expected a model object");
    const auto m = sans::FormFactorModel::from_json(obj.dump());
    resolved = nlohmann::json::parse(m.to_json());
    return m;
}

sans::AcquireOptions parse_acquire(const nlohmann::json& obj, const std::string& prefix,
                                   nlohmann::json& resolved) {
    reject_unknown_keys(obj, prefix, {"mode", "time_factor", "flux_scale", "awgn_sigma"});
    sans::AcquireOptions opt;
    const std::string mode = get_string(obj, prefix, "mode", std::string("poisson"));
    if (mode == "poisson") {
        opt.mode = sans::AcquireOptions::Mode::poisson;
    } else if (mode == "awgn") {
        opt.mode = sans::AcquireOptions::Mode::awgn;
    } else {
        throw ConfigError(prefix + ".mode", "must be poisson or awgn");
    }
    opt.time_factor = get_double(obj, prefix, "time_factor", 1.0);
    opt.flux_scale = get_double(obj, prefix, "flux_scale", 1.0);
    opt.awgn_sigma = get_double(obj, prefix, "awgn_sigma", 0.0);
    if (!(opt.time_factor > 0.0))
        throw ConfigError(prefix + ".time_factor", "time_factor must be > 0");
    if (!(opt.flux_scale > 0.0))
        throw ConfigError(prefix + ".flux_scale", "flux_scale must be > 0");
    if (opt.awgn_sigma < 0.0)
        throw ConfigError(prefix + ".awgn_sigma", "awgn_sigma must be >= 0");
    resolved = {{"mode", mode},
                {"time_factor", opt.time_factor},
                {"flux_scale", opt.flux_scale},
                {"awgn_sigma", opt.awgn_sigma}};
    return opt;
}

priors::GmmPrior parse_gmm_block(const nlohmann::json& cfg, const RunContext& ctx,
                                 nlohmann::json& resolved) {
    if (!cfg.contains("gmm")) throw ConfigError("gmm", "missing required mixture");
    const auto& block = cfg.at("gmm");
    priors::GmmPrior gmm;
    if (block.is_string()) {
        const std::string file = resolve_path(ctx.base_dir, block.get<std::string>());
        gmm = priors::GmmPrior::from_json(read_text_file(file));
    } else if (block.is_object()) {
        gmm = priors::GmmPrior::from_json(block.dump());
    } else {
        throw ConfigError("gmm", "expected an object or a file path string");
    }
    resolved = nlohmann::json::parse(gmm.to_json());
    return gmm;
}

// Simulated target domain: full clean/noisy frame pairs per model, both
// sides scaled by the clean maximum so patch intensities live near [0,1].
struct TargetPool {
    int patch = 40;
    int n_pairs = 0;
    sans::ScatteringGeometry geometry;
    std::vector<sans::FormFactorModel> models;
    sans::AcquireOptions acquire;
};

TargetPool parse_target_pool(const nlohmann::json& obj, const std::string& prefix,
                             nlohmann::json& resolved) {
    reject_unknown_keys(obj, prefix, {"patch", "n_pairs", "geometry", "models", "acquire"});
    TargetPool pool;
    pool.patch = get_int(obj, prefix, "patch", 40);
    pool.n_pairs = get_int(obj, prefix, "n_pairs", 0);
    if (pool.patch < 1) throw ConfigError(prefix + ".patch", "patch must be >= 1");
    if (pool.n_pairs < 0) throw ConfigError(prefix + ".n_pairs", "n_pairs must be >= 0");
    nlohmann::json geo_resolved;
    pool.geometry = parse_geometry(block_or_empty(obj, "geometry"), geo_resolved);
    if (!obj.contains("models") || !obj.at("models").is_array() || obj.at("models").empty())
        throw ConfigError(prefix + ".models", "expected a non-empty array of models");
    nlohmann::json models_resolved = nlohmann::json::array();
    for (std::size_t i = 0; i < obj.at("models").size(); ++i) {
        nlohmann::json one;
        pool.models.push_back(parse_model(obj.at("models")[i],
                                          prefix + ".models[" + std::to_string(i) + "]", one));
        models_resolved.push_back(one);
    }
    nlohmann::json acq_resolved;
    pool.acquire = parse_acquire(block_or_empty(obj, "acquire"), prefix + ".acquire", acq_resolved);
    resolved = {{"patch", pool.patch},
                {"n_pairs", pool.n_pairs},
                {"geometry", geo_resolved},
                {"models", models_resolved},
                {"acquire", acq_resolved}};
    return pool;
}

// One acquisition per model keyed by (stream_seed, model index); cropping
// randomness comes from the same stream, so a smaller n_pairs draw is a
// prefix of a larger one.
nn::PairDataset target_patches(const TargetPool& pool, int n_pairs, std::uint64_t stream_seed) {
    std::vector<std::vector<double>> clean_imgs;
    std::vector<std::vector<double>> noisy_imgs;
    double diff_sq = 0.0;
    std::size_t diff_n = 0;
    for (std::size_t m = 0; m < pool.models.size(); ++m) {
        const DetectorImage clean = sans::synth_clean_pattern(pool.models[m], pool.geometry);
        const DetectorImage noisy = sans::simulate_acquisition(
            clean, pool.acquire, substream_seed(stream_seed, static_cast<std::uint64_t>(m)));
        std::vector<double> c = clean.as_vector();
        std::vector<double> n = noisy.as_vector();
        double mx = 0.0;
        for (double v : c) mx = std::max(mx, v);
        if (mx <= 0.0) mx = 1.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i] /= mx;
            n[i] /= mx;
            diff_sq += (n[i] - c[i]) * (n[i] - c[i]);
        }
        diff_n += c.size();
        clean_imgs.push_back(std::move(c));
        noisy_imgs.push_back(std::move(n));
    }
    const double sigma_hint = diff_n ? std::sqrt(diff_sq / static_cast<double>(diff_n)) : 0.0;
    return nn::patches_from_pairs(clean_imgs, noisy_imgs, pool.geometry.width,
                                  pool.geometry.height, n_pairs, pool.patch,
                                  substream_seed(stream_seed, "crop"),
                                  nn::PairDataset::Role::target, sigma_hint);
}

int cmd_restore(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"input", "reference", "prior", "solve", "seed", "normalize"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    const std::string input = get_string(cfg, "", "input");
    resolved["input"] = input;
    DetectorImage noisy = read_image(resolve_path(ctx.base_dir, input));
    const bool normalize = get_bool(cfg, "", "normalize", true);
    resolved["normalize"] = normalize;

    nlohmann::json solve_resolved;
    const auto solve_cfg = parse_solve_config(block_or_empty(cfg, "solve"), "solve",
                                              solve_resolved);
    resolved["solve"] = solve_resolved;

    if (!cfg.contains("prior")) throw ConfigError("prior", "missing required prior block");
    nlohmann::json prior_resolved;
    auto prior = parse_prior(cfg.at("prior"), "prior", seed, ctx.base_dir, prior_resolved);
    resolved["prior"] = prior_resolved;

    DetectorImage work = noisy;
    if (normalize) normalize_inplace(work);
    const priors::Shape shape{work.width, work.height};
    auto result = solver::pr_sans_solve(work.as_vector(), std::move(prior), solve_cfg, shape);
    DetectorImage restored = work;
    restored.set_from_vector(result.x);
    if (normalize) denormalize_inplace(restored);

    write_image(artifact_path(ctx, "restored.prsi"), restored);
    write_text_file(artifact_path(ctx, "trace.csv"), result.trace.to_csv());
    std::vector<std::string> artifacts{"restored.prsi", "trace.csv"};

    if (cfg.contains("reference")) {
        const std::string reference = get_string(cfg, "", "reference");
        resolved["reference"] = reference;
        const DetectorImage ref = read_image(resolve_path(ctx.base_dir, reference));
        const auto rec = compute_metrics(ref, restored);
        write_text_file(artifact_path(ctx, "metrics.csv"), metrics_to_csv(rec));
        artifacts.push_back("metrics.csv");
    }
    finish_run(ctx, resolved, std::move(artifacts));
    return 0;
}

int cmd_verify_theory(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "",
                        {"gmm", "sigma", "y", "schedule", "solve", "tolerances", "lipschitz",
                         "b2_scale", "seed"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    nlohmann::json gmm_resolved;
    const auto gmm = parse_gmm_block(cfg, ctx, gmm_resolved);
    resolved["gmm"] = gmm_resolved;
    const double sigma = get_double(cfg, "", "sigma");
    if (!(sigma > 0.0)) throw ConfigError("sigma", "sigma must be > 0");
    resolved["sigma"] = sigma;
    const auto y = get_double_array(cfg, "", "y");
    if (y.size() != gmm.dim())
        throw ConfigError("y", "dimension mismatch with the mixture");
    resolved["y"] = y;

    const std::string schedule_text = get_string(cfg, "", "schedule", std::string("zero"));
    priors::EpsilonSchedule schedule;
    try {
        schedule = priors::EpsilonSchedule::parse(schedule_text);
    } catch (const ConfigError& e) {
        throw ConfigError("schedule", e.what());
    }
    resolved["schedule"] = schedule_text;

    theory::CertifyConfig ccfg;
    nlohmann::json solve_resolved;
    ccfg.solve = parse_solve_config(block_or_empty(cfg, "solve"), "solve", solve_resolved);
    resolved["solve"] = solve_resolved;

    const auto tol = block_or_empty(cfg, "tolerances");
    reject_unknown_keys(tol, "tolerances",
                        {"rel_slack", "abs_floor", "asymptote_tol", "shadow_slack"});
    ccfg.rel_slack = get_double(tol, "tolerances", "rel_slack", ccfg.rel_slack);
    ccfg.abs_floor = get_double(tol, "tolerances", "abs_floor", ccfg.abs_floor);
    ccfg.asymptote_tol = get_double(tol, "tolerances", "asymptote_tol", ccfg.asymptote_tol);
    ccfg.shadow_slack = get_double(tol, "tolerances", "shadow_slack", ccfg.shadow_slack);
    resolved["tolerances"] = {{"rel_slack", ccfg.rel_slack},
                              {"abs_floor", ccfg.abs_floor},
                              {"asymptote_tol", ccfg.asymptote_tol},
                              {"shadow_slack", ccfg.shadow_slack}};

    const auto lip = block_or_empty(cfg, "lipschitz");
    reject_unknown_keys(lip, "lipschitz", {"samples", "box"});
    ccfg.lipschitz_samples = get_int(lip, "lipschitz", "samples", ccfg.lipschitz_samples);
    ccfg.lipschitz_box = get_double(lip, "lipschitz", "box", ccfg.lipschitz_box);
    if (ccfg.lipschitz_samples < 2)
        throw ConfigError("lipschitz.samples", "samples must be >= 2");
    resolved["lipschitz"] = {{"samples", ccfg.lipschitz_samples}, {"box", ccfg.lipschitz_box}};

    ccfg.b2_scale = get_double(cfg, "", "b2_scale", 1.0);
    if (!(ccfg.b2_scale > 0.0)) throw ConfigError("b2_scale", "b2_scale must be > 0");
    resolved["b2_scale"] = ccfg.b2_scale;
    ccfg.seed = seed;

    const auto report = theory::certify_theorem1(y, gmm, sigma, schedule, ccfg);
    write_text_file(artifact_path(ctx, "report.csv"), report.to_csv());
    write_text_file(artifact_path(ctx, "report.json"), report.to_json());
    finish_run(ctx, resolved, {"report.csv", "report.json"});
    theory::require_passed(report);
    return 0;
}

int cmd_synth(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"geometry", "model", "acquire", "seed"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    nlohmann::json geo_resolved;
    const auto geometry = parse_geometry(block_or_empty(cfg, "geometry"), geo_resolved);
    resolved["geometry"] = geo_resolved;
    if (!cfg.contains("model")) throw ConfigError("model", "missing required model block");
    nlohmann::json model_resolved;
    const auto model = parse_model(cfg.at("model"), "model", model_resolved);
    resolved["model"] = model_resolved;

    const DetectorImage clean = sans::synth_clean_pattern(model, geometry);
    write_image(artifact_path(ctx, "clean.prsi"), clean);
    std::vector<std::string> artifacts{"clean.prsi"};

    if (cfg.contains("acquire")) {
        nlohmann::json acq_resolved;
        const auto opt = parse_acquire(cfg.at("acquire"), "acquire", acq_resolved);
        resolved["acquire"] = acq_resolved;
        const DetectorImage noisy = sans::simulate_acquisition(clean, opt, seed);
        write_image(artifact_path(ctx, "noisy.prsi"), noisy);
        artifacts.push_back("noisy.prsi");
    }
    finish_run(ctx, resolved, std::move(artifacts));
    return 0;
}

int cmd_reduce(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"input", "geometry", "n_bins", "binning", "seed"});
    nlohmann::json resolved;
    resolved["seed"] = effective_seed(cfg, ctx);

    const std::string input = get_string(cfg, "", "input");
    resolved["input"] = input;
    const DetectorImage img = read_image(resolve_path(ctx.base_dir, input));
    nlohmann::json geo_resolved;
    const auto geometry = parse_geometry(block_or_empty(cfg, "geometry"), geo_resolved);
    resolved["geometry"] = geo_resolved;
    const int n_bins = get_int(cfg, "", "n_bins", 100);
    if (n_bins < 1) throw ConfigError("n_bins", "n_bins must be >= 1");
    resolved["n_bins"] = n_bins;
    const std::string binning = get_string(cfg, "", "binning", std::string("log"));
    sans::Binning mode;
    if (binning == "log") {
        mode = sans::Binning::log;
    } else if (binning == "linear") {
        mode = sans::Binning::linear;
    } else {
        throw ConfigError("binning", "must be log or linear");
    }
    resolved["binning"] = binning;

    const auto curve = sans::azimuthal_average(img, geometry, n_bins, mode);
    write_text_file(artifact_path(ctx, "iq.csv"), curve.to_csv());
    finish_run(ctx, resolved, {"iq.csv"});
    return 0;
}

int cmd_pretrain(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"dataset", "arch", "train", "seed"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    const auto ds = block_or_empty(cfg, "dataset");
    reject_unknown_keys(ds, "dataset", {"kind", "n_patches", "patch", "sigma"});
    const std::string kind = get_string(ds, "dataset", "kind", std::string("textures"));
    if (kind != "textures") throw ConfigError("dataset.kind", "unknown dataset kind '" + kind + "'");
    const int n_patches = get_int(ds, "dataset", "n_patches", 256);
    const int patch = get_int(ds, "dataset", "patch", 40);
    const double sigma = get_double(ds, "dataset", "sigma", 5.0 / 255.0);
    if (n_patches < 1) throw ConfigError("dataset.n_patches", "n_patches must be >= 1");
    if (patch < 1) throw ConfigError("dataset.patch", "patch must be >= 1");
    if (!(sigma > 0.0)) throw ConfigError("dataset.sigma", "sigma must be > 0");
    resolved["dataset"] = {{"kind", kind}, {"n_patches", n_patches}, {"patch", patch},
                           {"sigma", sigma}};

    nlohmann::json arch_resolved;
    const auto arch = parse_arch(block_or_empty(cfg, "arch"), "arch", arch_resolved);
    resolved["arch"] = arch_resolved;
    nlohmann::json train_resolved;
    const auto tcfg = parse_train_config(block_or_empty(cfg, "train"), "train", seed,
                                         train_resolved);
    resolved["train"] = train_resolved;

    const auto source = nn::make_texture_dataset(n_patches, patch, sigma, seed);
    nn::TrainCurve curve;
    const auto net = nn::pretrain(source, arch, tcfg, &curve);
    nn::save_checkpoint(net, artifact_path(ctx, "checkpoint.prsc"));
    write_text_file(artifact_path(ctx, "curve.csv"), curve_to_csv(curve));
    finish_run(ctx, resolved, {"checkpoint.prsc", "curve.csv"});
    return 0;
}

int cmd_adapt(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"source_checkpoint", "target", "train", "seed"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    const std::string source_rel = get_string(cfg, "", "source_checkpoint");
    resolved["source_checkpoint"] = source_rel;
    const auto source = nn::load_checkpoint(resolve_path(ctx.base_dir, source_rel));

    if (!cfg.contains("target")) throw ConfigError("target", "missing required target block");
    nlohmann::json target_resolved;
    const auto pool = parse_target_pool(cfg.at("target"), "target", target_resolved);
    resolved["target"] = target_resolved;
    nlohmann::json train_resolved;
    const auto tcfg = parse_train_config(block_or_empty(cfg, "train"), "train", seed,
                                         train_resolved);
    resolved["train"] = train_resolved;

    const auto target = target_patches(pool, pool.n_pairs, substream_seed(seed, "target"));
    nn::TrainCurve curve;
    std::string warning;
    const auto net = nn::adapt(source, target, tcfg, &curve, &warning);
    if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
    nn::save_checkpoint(net, artifact_path(ctx, "adapted.prsc"));
    write_text_file(artifact_path(ctx, "curve.csv"), curve_to_csv(curve));
    finish_run(ctx, resolved, {"adapted.prsc", "curve.csv"});
    return 0;
}

int cmd_eval(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "", {"image", "reference", "seed"});
    nlohmann::json resolved;
    resolved["seed"] = effective_seed(cfg, ctx);

    const std::string image = get_string(cfg, "", "image");
    const std::string reference = get_string(cfg, "", "reference");
    resolved["image"] = image;
    resolved["reference"] = reference;
    const DetectorImage est = read_image(resolve_path(ctx.base_dir, image));
    const DetectorImage ref = read_image(resolve_path(ctx.base_dir, reference));
    const auto rec = compute_metrics(ref, est);
    write_text_file(artifact_path(ctx, "metrics.csv"), metrics_to_csv(rec));
    finish_run(ctx, resolved, {"metrics.csv"});
    return 0;
}

int cmd_sweep_adaptation(const RunContext& ctx) {
    const auto cfg = load_json_file(ctx.config_path);
    reject_unknown_keys(cfg, "",
                        {"source_checkpoint", "target", "ks", "eval", "train",
                         "include_zero_start", "seed"});
    nlohmann::json resolved;
    const auto seed = effective_seed(cfg, ctx);
    resolved["seed"] = seed;

    const std::string source_rel = get_string(cfg, "", "source_checkpoint");
    resolved["source_checkpoint"] = source_rel;
    const auto source = nn::load_checkpoint(resolve_path(ctx.base_dir, source_rel));

    if (!cfg.contains("target")) throw ConfigError("target", "missing required target block");
    nlohmann::json target_resolved;
    auto pool = parse_target_pool(cfg.at("target"), "target", target_resolved);
    resolved["target"] = target_resolved;

    std::vector<int> ks;
    if (cfg.contains("ks")) {
        const auto& arr = cfg.at("ks");
        if (!arr.is_array() || arr.empty())
            throw ConfigError("ks", "expected a non-empty array of pair counts");
        for (const auto& v : arr) {
            if (!v.is_number_integer() || v.get<int>() < 0)
                throw ConfigError("ks", "pair counts must be integers >= 0");
            ks.push_back(v.get<int>());
        }
    } else {
        ks = {0, 20, 40, 60, 80};
    }
    resolved["ks"] = ks;

    const auto eval_block = block_or_empty(cfg, "eval");
    reject_unknown_keys(eval_block, "eval", {"n_pairs"});
    const int eval_pairs = get_int(eval_block, "eval", "n_pairs", 64);
    if (eval_pairs < 1) throw ConfigError("eval.n_pairs", "n_pairs must be >= 1");
    resolved["eval"] = {{"n_pairs", eval_pairs}};

    nlohmann::json train_resolved;
    const auto tcfg = parse_train_config(block_or_empty(cfg, "train"), "train", seed,
                                         train_resolved);
    resolved["train"] = train_resolved;
    const bool include_zero_start = get_bool(cfg, "", "include_zero_start", false);
    resolved["include_zero_start"] = include_zero_start;

    // Independent acquisition noise and crops for evaluation.
    const auto eval_set = target_patches(pool, eval_pairs, substream_seed(seed, "eval"));

    std::string csv = "k,val_mse,provenance\n";
    const std::uint64_t target_seed = substream_seed(seed, "target");
    int max_k = 0;
    for (int k : ks) max_k = std::max(max_k, k);
    for (int k : ks) {
        const auto train_set = target_patches(pool, k, target_seed);
        const auto net = nn::adapt(source, train_set, tcfg);
        const double val_mse = nn::dataset_loss(net, eval_set);
        csv += std::to_string(k) + "," + fmt_full(val_mse) + "," +
               nn::provenance_name(net.provenance, net.adapted_pairs) + "\n";
    }
    if (include_zero_start) {
        const auto train_set = target_patches(pool, max_k, target_seed);
        auto scratch = nn::ResidualDenoiser::he_init(source.arch, substream_seed(seed, "init"));
        scratch.sigma_train = train_set.noise_sigma;
        std::string warning;
        const auto net = nn::adapt(scratch, train_set, tcfg, nullptr, &warning);
        if (!warning.empty()) std::cerr << "warning: " << warning << "\n";
        const double val_mse = nn::dataset_loss(net, eval_set);
        csv += std::to_string(max_k) + "," + fmt_full(val_mse) + ",zero_start\n";
    }
    write_text_file(artifact_path(ctx, "sweep.csv"), csv);
    finish_run(ctx, resolved, {"sweep.csv"});
    return 0;
}

int dispatch(const std::string& name, const RunContext& ctx) {
    std::filesystem::create_directories(ctx.out_dir);
    if (name == "restore") return cmd_restore(ctx);
    if (name == "verify-theory") return cmd_verify_theory(ctx);
    if (name == "synth") return cmd_synth(ctx);
    if (name == "reduce") return cmd_reduce(ctx);
    if (name == "pretrain") return cmd_pretrain(ctx);
    if (name == "adapt") return cmd_adapt(ctx);
    if (name == "eval") return cmd_eval(ctx);
    if (name == "sweep-adaptation") return cmd_sweep_adaptation(ctx);
    throw ContractError("unknown subcommand " + name);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"PR-SANS toolkit: synthesis, restoration, training, reduction, certification"};
    app.require_subcommand(1);

    struct SubArgs {
        CLI::App* sub = nullptr;
        std::string name;
        std::string config;
        std::string out = ".";
        std::uint64_t seed = 0;
    };
    std::vector<std::shared_ptr<SubArgs>> subs;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"restore", "run the plug-and-play restoration on one image"},
        {"verify-theory", "certify the convergence bound on a mixture problem"},
        {"synth", "synthesize a clean scattering pattern (and optional noisy acquisition)"},
        {"reduce", "azimuthally average a detector image to I(Q)"},
        {"pretrain", "train the residual denoiser on procedural textures"},
        {"adapt", "fine-tune a pretrained denoiser on simulated target pairs"},
        {"eval", "compute restoration metrics for an image against a reference"},
        {"sweep-adaptation", "adaptation quality versus number of target pairs"},
    };
    for (const auto& [name, desc] : commands) {
        auto s = std::make_shared<SubArgs>();
        s->name = name;
        s->sub = app.add_subcommand(name, desc);
        s->sub->add_option("--config", s->config, "JSON config path")->required();
        s->sub->add_option("--out", s->out, "output directory (default: current)");
        s->sub->add_option("--seed", s->seed, "override the config seed");
        subs.push_back(std::move(s));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 3;
    }

    try {
        for (const auto& s : subs) {
            if (!s->sub->parsed()) continue;
            RunContext ctx;
            ctx.config_path = s->config;
            ctx.out_dir = s->out;
            if (s->sub->count("--seed") > 0) ctx.seed_override = s->seed;
            ctx.base_dir = dir_of(s->config);
            return dispatch(s->name, ctx);
        }
        std::cerr << "error: no subcommand given\n";
        return 3;
    } catch (const FileError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ImageIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == ImageIoCode::open_failure ? 2 : 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const CertificationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (...) {
        std::cerr << "error: unknown failure\n";
        return 3;
    }
}

}  // namespace prsans::cli
