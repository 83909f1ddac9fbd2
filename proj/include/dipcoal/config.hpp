#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dipcoal/forward_models.hpp"
#include "dipcoal/xi_measure.hpp"

namespace dipcoal {

// Raised for any malformed configuration; the message names the offending
// field path (e.g. "model.fitness.alpha: must lie in (1, 2)").  The CLI maps
// this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Top-level experiment description loaded from a JSON file.  `seed` stays
// empty when the file omits it; the CLI requires a seed from either the file
// or the --seed flag and never falls back to the clock.
struct ExperimentConfig {
  std::string experiment;
  std::optional<ModelConfig> model;
  std::optional<XiMeasure> measure;
  int sample_size = 0;
  std::vector<int> n_grid;
  long long replicates = 0;
  std::optional<std::uint64_t> seed;
  double level = 0.01;
  std::string out_dir;
};

// Parsers throw ConfigError; `path` prefixes field names in messages.
ModelConfig model_from_json(const nlohmann::json& j,
                            const std::string& path = "model");
XiMeasure measure_from_json(const nlohmann::json& j,
                            const std::string& path = "measure");
ExperimentConfig experiment_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment(const std::string& file_path);

// Inline measure shorthand for CLI flags: "kingman", "beta(FOLD,ALPHA)",
// or "point(FOLD,X0)", e.g. "beta(4,1.5)".
XiMeasure measure_from_string(const std::string& text);

nlohmann::json to_json(const ModelConfig& config);
nlohmann::json to_json(const XiMeasure& measure);

}  // namespace dipcoal
