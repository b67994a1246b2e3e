#include "prsans/cli/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "prsans/csv.hpp"
#include "prsans/errors.hpp"
#include "prsans/nn/checkpoint.hpp"
#include "prsans/priors/epsilon_schedule.hpp"
#include "prsans/rng.hpp"

namespace prsans::cli {

namespace {

std::string joined(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

const nlohmann::json* find_key(const nlohmann::json& obj, const std::string& key) {
    if (!obj.is_object()) return nullptr;
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError(path, "cannot open");
    try {
        return nlohmann::json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
}

void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                         const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(prefix, "expected a JSON object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(joined(prefix, key), "unknown key");
    }
}

double get_double(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
                  std::optional<double> def) {
    const auto* v = find_key(obj, key);
    if (!v) {
        if (def) return *def;
        throw ConfigError(joined(prefix, key), "missing required number");
    }
    if (!v->is_number()) throw ConfigError(joined(prefix, key), "expected a number");
    return v->get<double>();
}

int get_int(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
            std::optional<int> def) {
    const auto* v = find_key(obj, key);
    if (!v) {
        if (def) return *def;
        throw ConfigError(joined(prefix, key), "missing required integer");
    }
    if (!v->is_number_integer()) throw ConfigError(joined(prefix, key), "expected an integer");
    return v->get<int>();
}

bool get_bool(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
              std::optional<bool> def) {
    const auto* v = find_key(obj, key);
    if (!v) {
        if (def) return *def;
        throw ConfigError(joined(prefix, key), "missing required boolean");
    }
    if (!v->is_boolean()) throw ConfigError(joined(prefix, key), "expected a boolean");
    return v->get<bool>();
}

std::string get_string(const nlohmann::json& obj, const std::string& prefix,
                       const std::string& key, std::optional<std::string> def) {
    const auto* v = find_key(obj, key);
    if (!v) {
        if (def) return *def;
        throw ConfigError(joined(prefix, key), "missing required string");
    }
    if (!v->is_string()) throw ConfigError(joined(prefix, key), "expected a string");
    return v->get<std::string>();
}

std::uint64_t get_seed(const nlohmann::json& obj, const std::string& prefix,
                       const std::string& key, std::optional<std::uint64_t> def) {
    const auto* v = find_key(obj, key);
    if (!v) {
        if (def) return *def;
        throw ConfigError(joined(prefix, key), "missing required seed");
    }
    if (!v->is_number_unsigned() && !v->is_number_integer())
        throw ConfigError(joined(prefix, key), "expected an unsigned integer");
    return v->get<std::uint64_t>();
}

solver::SolveConfig parse_solve_config(const nlohmann::json& obj, const std::string& prefix,
                                       nlohmann::json& resolved) {
    reject_unknown_keys(obj, prefix, {"gamma", "tau", "max_iter", "fp_tol", "trace_level"});
    solver::SolveConfig cfg;
    cfg.gamma = get_double(obj, prefix, "gamma", 0.7);
    cfg.tau = get_double(obj, prefix, "tau", 1.0);
    cfg.max_iter = get_int(obj, prefix, "max_iter", 20);
    cfg.fp_tol = get_double(obj, prefix, "fp_tol", 0.0);
    const std::string level = get_string(obj, prefix, "trace_level", std::string("norms"));
    if (level == "final") {
        cfg.trace_level = solver::TraceLevel::final;
    } else if (level == "norms") {
        cfg.trace_level = solver::TraceLevel::norms;
    } else if (level == "full") {
        cfg.trace_level = solver::TraceLevel::full;
    } else {
        throw ConfigError(joined(prefix, "trace_level"), "must be final, norms, or full");
    }
    if (!(cfg.gamma > 0.0)) throw ConfigError(joined(prefix, "gamma"), "gamma must be > 0");
    if (!(cfg.tau > 0.0)) throw ConfigError(joined(prefix, "tau"), "tau must be > 0");
    if (cfg.max_iter < 1) throw ConfigError(joined(prefix, "max_iter"), "max_iter must be >= 1");
    if (!(cfg.fp_tol >= 0.0)) throw ConfigError(joined(prefix, "fp_tol"), "fp_tol must be >= 0");
    resolved = {{"gamma", cfg.gamma},
                {"tau", cfg.tau},
                {"max_iter", cfg.max_iter},
                {"fp_tol", cfg.fp_tol},
                {"trace_level", level}};
    return cfg;
}

priors::PriorHandle parse_prior(const nlohmann::json& obj, const std::string& prefix,
                                std::uint64_t seed, const std::string& base_dir,
                                nlohmann::json& resolved) {
    if (!obj.is_object()) throw ConfigError(prefix, "expected a prior object");
    const std::string type = get_string(obj, prefix, "type");
    resolved = {{"type", type}};

    priors::PriorHandle handle = [&]() -> priors::PriorHandle {
        if (type == "gmm") {
            reject_unknown_keys(obj, prefix,
                                {"type", "file", "weights", "means", "variances", "sigma",
                                 "schedule"});
            const double sigma = get_double(obj, prefix, "sigma");
            if (!(sigma > 0.0)) throw ConfigError(joined(prefix, "sigma"), "sigma must be > 0");
            resolved["sigma"] = sigma;
            priors::GmmPrior gmm;
            if (find_key(obj, "file")) {
                const std::string file =
                    resolve_path(base_dir, get_string(obj, prefix, "file"));
                gmm = priors::GmmPrior::from_json(read_text_file(file));
                resolved["file"] = get_string(obj, prefix, "file");
            } else {
                nlohmann::json inline_gmm;
                for (const char* key : {"weights", "means", "variances"}) {
                    const auto* v = find_key(obj, key);
                    if (!v)
                        throw ConfigError(joined(prefix, key),
                                          "missing (or use \"file\" for an external mixture)");
                    inline_gmm[key] = *v;
                }
                gmm = priors::GmmPrior::from_json(inline_gmm.dump());
                resolved["weights"] = inline_gmm["weights"];
                resolved["means"] = inline_gmm["means"];
                resolved["variances"] = inline_gmm["variances"];
            }
            return priors::PriorHandle::make_gmm(std::move(gmm), sigma);
        }
        if (type == "tv") {
            reject_unknown_keys(obj, prefix, {"type", "strength", "tol", "max_iter", "schedule"});
            priors::TvOptions opt;
            opt.strength = get_double(obj, prefix, "strength");
            opt.tol = get_double(obj, prefix, "tol", 1e-6);
            opt.max_iter = get_int(obj, prefix, "max_iter", 500);
            if (!(opt.strength >= 0.0))
                throw ConfigError(joined(prefix, "strength"), "strength must be >= 0");
            if (opt.max_iter < 1)
                throw ConfigError(joined(prefix, "max_iter"), "max_iter must be >= 1");
            resolved["strength"] = opt.strength;
            resolved["tol"] = opt.tol;
            resolved["max_iter"] = opt.max_iter;
            return priors::PriorHandle::make_tv(opt);
        }
        if (type == "blur") {
            reject_unknown_keys(obj, prefix, {"type", "sigma", "schedule"});
            const double sigma = get_double(obj, prefix, "sigma");
            if (!(sigma >= 0.0)) throw ConfigError(joined(prefix, "sigma"), "sigma must be >= 0");
            resolved["sigma"] = sigma;
            return priors::PriorHandle::make_blur(sigma);
        }
        if (type == "learned") {
            reject_unknown_keys(obj, prefix, {"type", "checkpoint", "schedule"});
            const std::string rel = get_string(obj, prefix, "checkpoint");
            const std::string file = resolve_path(base_dir, rel);
            auto net = std::make_shared<nn::ResidualDenoiser>(nn::load_checkpoint(file));
            resolved["checkpoint"] = rel;
            return priors::PriorHandle::make_learned(std::move(net));
        }
        throw ConfigError(joined(prefix, "type"), "unknown prior type '" + type + "'");
    }();

    if (find_key(obj, "schedule")) {
        const std::string sched_text = get_string(obj, prefix, "schedule");
        priors::EpsilonSchedule schedule;
        try {
            schedule = priors::EpsilonSchedule::parse(sched_text);
        } catch (const ConfigError& e) {
            throw ConfigError(joined(prefix, "schedule"), e.what());
        }
        resolved["schedule"] = sched_text;
        return priors::PriorHandle::make_inexact(std::move(handle), std::move(schedule),
                                                 substream_seed(seed, "perturbation"));
    }
    return handle;
}

nn::NetArch parse_arch(const nlohmann::json& obj, const std::string& prefix,
                       nlohmann::json& resolved) {
    reject_unknown_keys(obj, prefix, {"depth", "channels", "kernel_size", "padding"});
    nn::NetArch arch;
    arch.depth = get_int(obj, prefix, "depth", 5);
    arch.channels = get_int(obj, prefix, "channels", 16);
    arch.kernel_size = get_int(obj, prefix, "kernel_size", 3);
    const std::string padding = get_string(obj, prefix, "padding", std::string("symmetric"));
    if (padding == "symmetric") {
        arch.padding = nn::PaddingMode::symmetric;
    } else if (padding == "periodic") {
        arch.padding = nn::PaddingMode::periodic;
    } else {
        throw ConfigError(joined(prefix, "padding"), "must be symmetric or periodic");
    }
    if (arch.depth < 1) throw ConfigError(joined(prefix, "depth"), "depth must be >= 1");
    if (arch.channels < 1) throw ConfigError(joined(prefix, "channels"), "channels must be >= 1");
    if (arch.kernel_size < 1 || arch.kernel_size % 2 == 0)
        throw ConfigError(joined(prefix, "kernel_size"), "kernel_size must be odd and >= 1");
    resolved = {{"depth", arch.depth},
                {"channels", arch.channels},
                {"kernel_size", arch.kernel_size},
                {"padding", padding}};
    return arch;
}

nn::TrainConfig parse_train_config(const nlohmann::json& obj, const std::string& prefix,
                                   std::uint64_t seed, nlohmann::json& resolved) {
    reject_unknown_keys(obj, prefix,
                        {"epochs", "lr", "momentum", "batch", "val_fraction", "shards"});
    nn::TrainConfig cfg;
    cfg.epochs = get_int(obj, prefix, "epochs", 50);
    cfg.lr = get_double(obj, prefix, "lr", 0.1);
    cfg.momentum = get_double(obj, prefix, "momentum", 0.9);
    cfg.batch = get_int(obj, prefix, "batch", 16);
    cfg.val_fraction = get_double(obj, prefix, "val_fraction", 0.1);
    cfg.shards = get_int(obj, prefix, "shards", 1);
    cfg.seed = seed;
    if (cfg.epochs < 0) throw ConfigError(joined(prefix, "epochs"), "epochs must be >= 0");
    if (!(cfg.lr > 0.0)) throw ConfigError(joined(prefix, "lr"), "lr must be > 0");
    if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
        throw ConfigError(joined(prefix, "momentum"), "momentum must be in [0, 1)");
    if (cfg.batch < 1) throw ConfigError(joined(prefix, "batch"), "batch must be >= 1");
    if (cfg.val_fraction < 0.0 || cfg.val_fraction >= 1.0)
        throw ConfigError(joined(prefix, "val_fraction"), "val_fraction must be in [0, 1)");
    if (cfg.shards < 1) throw ConfigError(joined(prefix, "shards"), "shards must be >= 1");
    resolved = {{"epochs", cfg.epochs}, {"lr", cfg.lr},
                {"momentum", cfg.momentum}, {"batch", cfg.batch},
                {"val_fraction", cfg.val_fraction}, {"shards", cfg.shards}};
    return cfg;
}

std::string resolve_path(const std::string& base_dir, const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_absolute() || base_dir.empty()) return path;
    return (std::filesystem::path(base_dir) / p).string();
}

std::string dir_of(const std::string& path) {
    return std::filesystem::path(path).parent_path().string();
}

void write_resolved_config(const std::string& out_dir, const nlohmann::json& resolved) {
    write_text_file((std::filesystem::path(out_dir) / "resolved_config.json").string(),
                    resolved.dump(2) + "\n");
}

void write_manifest(const std::string& out_dir, const std::vector<std::string>& artifact_names) {
    std::vector<std::string> names = artifact_names;
    std::sort(names.begin(), names.end());
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& name : names) {
        const std::string full = (std::filesystem::path(out_dir) / name).string();
        const std::string content = read_text_file(full);
        outputs.push_back({{"file", name},
                           {"bytes", content.size()},
                           {"fnv1a64", content_hash_hex(content)}});
    }
    nlohmann::json manifest;
    manifest["outputs"] = outputs;
    write_text_file((std::filesystem::path(out_dir) / "run_manifest.json").string(),
                    manifest.dump(2) + "\n");
}

}  // namespace prsans::cli
