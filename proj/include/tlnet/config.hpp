#pragma once

// key=value configuration files with [source] / [target] sections.

#include "tlnet/evalkit.hpp"
#include "tlnet/netmodel.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>

namespace tlnet {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using KeyValues = std::map<std::string, std::string>;

/// Builds a model from one section. Custom matrices come from `probs`
/// (rows separated by ';') or `matrix_file`, resolved against base_dir.
ModelSpec parse_model_spec(const KeyValues& kv, const std::filesystem::path& base_dir = {});
/// Inverse of parse_model_spec (custom matrices are written inline).
KeyValues model_spec_to_keys(const ModelSpec& spec);

/// Top-level keys: name, n, n_q, trials, seed, estimators.
ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
void write_experiment_config(std::ostream& out, const ExperimentConfig& cfg);

}  // namespace tlnet
