#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "prsans/nn/net.hpp"
#include "prsans/nn/train.hpp"
#include "prsans/priors/prior_handle.hpp"
#include "prsans/solver/pnp.hpp"

namespace prsans::cli {

nlohmann::json load_json_file(const std::string& path);

// Schema guard: any key outside `allowed` raises ConfigError naming the
// offending key with its dotted path.
void reject_unknown_keys(const nlohmann::json& obj, const std::string& prefix,
                         const std::vector<std::string>& allowed);

// Typed field access; a missing field without a default and any wrong type
// raise ConfigError naming the field.
double get_double(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
                  std::optional<double> def = std::nullopt);
int get_int(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
            std::optional<int> def = std::nullopt);
bool get_bool(const nlohmann::json& obj, const std::string& prefix, const std::string& key,
              std::optional<bool> def = std::nullopt);
std::string get_string(const nlohmann::json& obj, const std::string& prefix,
                       const std::string& key, std::optional<std::string> def = std::nullopt);
std::uint64_t get_seed(const nlohmann::json& obj, const std::string& prefix,
                       const std::string& key, std::optional<std::uint64_t> def = std::nullopt);

// Parsers for the shared config blocks. Each returns the parsed value and
// appends the resolved (defaults filled) form to `resolved`.
solver::SolveConfig parse_solve_config(const nlohmann::json& obj, const std::string& prefix,
                                       nlohmann::json& resolved);
priors::PriorHandle parse_prior(const nlohmann::json& obj, const std::string& prefix,
                                std::uint64_t seed, const std::string& base_dir,
                                nlohmann::json& resolved);
nn::NetArch parse_arch(const nlohmann::json& obj, const std::string& prefix,
                       nlohmann::json& resolved);
nn::TrainConfig parse_train_config(const nlohmann::json& obj, const std::string& prefix,
                                   std::uint64_t seed, nlohmann::json& resolved);

// Paths inside configs resolve relative to the config file's directory.
std::string resolve_path(const std::string& base_dir, const std::string& path);
std::string dir_of(const std::string& path);

void write_resolved_config(const std::string& out_dir, const nlohmann::json& resolved);
void write_manifest(const std::string& out_dir, const std::vector<std::string>& artifact_names);

}  // namespace prsans::cli
