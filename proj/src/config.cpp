#include "dipcoal/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dipcoal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double get_double(const json& j, const std::string& path, const char* key) {
  const auto& v = member(j, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

long long get_int(const json& j, const std::string& path, const char* key) {
  const auto& v = member(j, path, key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<long long>();
}

std::string get_string(const json& j, const std::string& path, const char* key) {
  const auto& v = member(j, path, key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

// Known-key check keeps typos (e.g. "n_couple") from being silently ignored.
void reject_unknown(const json& j, const std::string& path,
                    std::initializer_list<const char*> keys) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : keys)
      if (key == k) known = true;
    if (!known) fail(path + "." + key, "unknown field");
  }
}

FitnessLaw fitness_from_json(const json& j, const std::string& path) {
  const std::string type = get_string(j, path, "type");
  if (type == "constant") {
    reject_unknown(j, path, {"type", "value"});
    return PointMassFitness{get_double(j, path, "value")};
  }
  if (type == "pareto") {
    reject_unknown(j, path, {"type", "alpha", "scale"});
    ParetoFitness f;
    f.alpha = get_double(j, path, "alpha");
    f.scale = j.contains("scale") ? get_double(j, path, "scale") : 1.0;
    if (!(f.alpha > 1.0 && f.alpha < 2.0))
      fail(path + ".alpha", "must lie in (1, 2)");
    if (!(f.scale > 0.0)) fail(path + ".scale", "must be positive");
    return f;
  }
  if (type == "tabulated") {
    reject_unknown(j, path, {"type", "values", "probs"});
    TabulatedFitness f;
    const auto& values = member(j, path, "values");
    const auto& probs = member(j, path, "probs");
    if (!values.is_array() || !probs.is_array())
      fail(path, "values and probs must be arrays");
    for (const auto& v : values) f.values.push_back(v.get<double>());
    for (const auto& p : probs) f.probs.push_back(p.get<double>());
    return f;
  }
  fail(path + ".type", "expected constant, pareto, or tabulated");
}

JuvenileLaw juveniles_from_json(const json& j, const std::string& path) {
  const std::string type = get_string(j, path, "type");
  if (type == "constant") {
    reject_unknown(j, path, {"type", "value"});
    return ConstJuveniles{get_int(j, path, "value")};
  }
  if (type == "pareto") {
    reject_unknown(j, path, {"type", "alpha", "scale"});
    ParetoJuveniles f;
    f.alpha = get_double(j, path, "alpha");
    f.scale = j.contains("scale") ? get_double(j, path, "scale") : 1.0;
    if (!(f.alpha > 1.0 && f.alpha < 2.0))
      fail(path + ".alpha", "must lie in (1, 2)");
    if (!(f.scale > 0.0)) fail(path + ".scale", "must be positive");
    return f;
  }
  if (type == "tabulated") {
    reject_unknown(j, path, {"type", "values", "probs"});
    TabulatedJuveniles f;
    const auto& values = member(j, path, "values");
    const auto& probs = member(j, path, "probs");
    if (!values.is_array() || !probs.is_array())
      fail(path, "values and probs must be arrays");
    for (const auto& v : values) f.values.push_back(v.get<long long>());
    for (const auto& p : probs) f.probs.push_back(p.get<double>());
    return f;
  }
  fail(path + ".type", "expected constant, pareto, or tabulated");
}

MixingLaw law_from_json(const json& j, const std::string& path) {
  const std::string type = get_string(j, path, "type");
  if (type == "beta") {
    reject_unknown(j, path, {"type", "alpha"});
    return BetaLaw{get_double(j, path, "alpha")};
  }
  if (type == "point-mass") {
    reject_unknown(j, path, {"type", "x0"});
    return PointMassLaw{get_double(j, path, "x0")};
  }
  fail(path + ".type", "expected beta or point-mass");
}

}  // namespace

ModelConfig model_from_json(const json& j, const std::string& path) {
  const std::string type = get_string(j, path, "type");
  ModelConfig config;
  if (type == "wright-fisher") {
    reject_unknown(j, path, {"type", "n_pop"});
    config = WrightFisher{static_cast<int>(get_int(j, path, "n_pop"))};
  } else if (type == "random-fitness") {
    reject_unknown(j, path, {"type", "n_pop", "fitness", "resample_cap"});
    RandomFitness m;
    m.n_pop = static_cast<int>(get_int(j, path, "n_pop"));
    m.fitness = fitness_from_json(member(j, path, "fitness"), path + ".fitness");
    if (j.contains("resample_cap"))
      m.resample_cap = static_cast<int>(get_int(j, path, "resample_cap"));
    config = m;
  } else if (type == "gw-sampling") {
    reject_unknown(j, path,
                   {"type", "n_pop", "activity_rate", "juveniles", "resample_cap"});
    GaltonWatsonSampling m;
    m.n_pop = static_cast<int>(get_int(j, path, "n_pop"));
    m.activity_rate = get_double(j, path, "activity_rate");
    m.juveniles =
        juveniles_from_json(member(j, path, "juveniles"), path + ".juveniles");
    if (j.contains("resample_cap"))
      m.resample_cap = static_cast<int>(get_int(j, path, "resample_cap"));
    config = m;
  } else if (type == "fixed-couples") {
    reject_unknown(j, path, {"type", "n_couples"});
    config = FixedCouples{static_cast<int>(get_int(j, path, "n_couples"))};
  } else if (type == "large-family") {
    reject_unknown(j, path, {"type", "n_pop", "psi", "gamma"});
    LargeFamily m;
    m.n_pop = static_cast<int>(get_int(j, path, "n_pop"));
    m.psi = get_double(j, path, "psi");
    m.gamma = get_double(j, path, "gamma");
    config = m;
  } else {
    fail(path + ".type",
         "expected wright-fisher, random-fitness, gw-sampling, fixed-couples, "
         "or large-family");
  }
  try {
    validate(config);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return config;
}

XiMeasure measure_from_json(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return measure_from_string(j.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(path, e.what());
    }
  }
  reject_unknown(j, path, {"kingman_mass", "components", "normalized"});
  double kingman_mass = 0.0;
  if (j.contains("kingman_mass"))
    kingman_mass = get_double(j, path, "kingman_mass");
  std::vector<XiComponent> components;
  if (j.contains("components")) {
    const auto& arr = member(j, path, "components");
    if (!arr.is_array()) fail(path + ".components", "expected an array");
    for (std::size_t c = 0; c < arr.size(); ++c) {
      const std::string cpath = path + ".components[" + std::to_string(c) + "]";
      const auto& cj = arr[c];
      reject_unknown(cj, cpath, {"fold", "weight", "law"});
      XiComponent component;
      component.fold = static_cast<int>(get_int(cj, cpath, "fold"));
      component.weight =
          cj.contains("weight") ? get_double(cj, cpath, "weight") : 1.0;
      component.law = law_from_json(member(cj, cpath, "law"), cpath + ".law");
      components.push_back(component);
    }
  }
  double total = kingman_mass;
  for (const auto& c : components) total += c.weight;
  bool normalized = std::abs(total - 1.0) <= 1e-12;
  if (j.contains("normalized")) {
    const auto& v = member(j, path, "normalized");
    if (!v.is_boolean()) fail(path + ".normalized", "expected a boolean");
    normalized = v.get<bool>();
  }
  try {
    return XiMeasure(kingman_mass, std::move(components), normalized);
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
}

XiMeasure measure_from_string(const std::string& text) {
  if (text == "kingman") return XiMeasure::kingman();
  int fold = 0;
  double value = 0.0;
  int consumed = 0;
  try {
    if (std::sscanf(text.c_str(), "beta(%d,%lf)%n", &fold, &value, &consumed) == 2 &&
        consumed == static_cast<int>(text.size()))
      return XiMeasure::beta(fold, value);
    if (std::sscanf(text.c_str(), "point(%d,%lf)%n", &fold, &value, &consumed) == 2 &&
        consumed == static_cast<int>(text.size()))
      return XiMeasure::point_mass(fold, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("measure \"" + text + "\": " + e.what());
  }
  throw ConfigError("measure \"" + text +
                    "\": expected kingman, beta(FOLD,ALPHA), or point(FOLD,X0)");
}

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  reject_unknown(j, "config",
                 {"experiment", "model", "measure", "sample_size", "n_grid",
                  "replicates", "seed", "level", "out"});
  ExperimentConfig config;
  if (j.contains("experiment"))
    config.experiment = get_string(j, "config", "experiment");
  if (j.contains("model"))
    config.model = model_from_json(j.at("model"), "config.model");
  if (j.contains("measure"))
    config.measure = measure_from_json(j.at("measure"), "config.measure");
  if (j.contains("sample_size")) {
    config.sample_size = static_cast<int>(get_int(j, "config", "sample_size"));
    if (config.sample_size < 1)
      fail("config.sample_size", "must be a positive integer");
  }
  if (j.contains("n_grid")) {
    const auto& arr = j.at("n_grid");
    if (!arr.is_array()) fail("config.n_grid", "expected an array of integers");
    for (const auto& v : arr) {
      if (!v.is_number_integer() || v.get<long long>() < 2)
        fail("config.n_grid", "entries must be integers >= 2");
      config.n_grid.push_back(static_cast<int>(v.get<long long>()));
    }
  }
  if (j.contains("replicates")) {
    config.replicates = get_int(j, "config", "replicates");
    if (config.replicates < 1) fail("config.replicates", "must be positive");
  }
  if (j.contains("seed")) {
    const auto& v = j.at("seed");
    if (!v.is_number_unsigned() && !v.is_number_integer())
      fail("config.seed", "expected a nonnegative 64-bit integer");
    if (v.is_number_integer() && !v.is_number_unsigned() &&
        v.get<long long>() < 0)
      fail("config.seed", "expected a nonnegative 64-bit integer");
    config.seed = v.get<std::uint64_t>();
  }
  if (j.contains("level")) {
    config.level = get_double(j, "config", "level");
    if (!(config.level > 0.0 && config.level < 1.0))
      fail("config.level", "must lie in (0, 1)");
  }
  if (j.contains("out")) config.out_dir = get_string(j, "config", "out");
  return config;
}

ExperimentConfig load_experiment(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw ConfigError("cannot open config file: " + file_path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + file_path + ": " + e.what());
  }
  return experiment_from_json(j);
}

nlohmann::json to_json(const ModelConfig& config) {
  json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WrightFisher>) {
          j = {{"type", "wright-fisher"}, {"n_pop", m.n_pop}};
        } else if constexpr (std::is_same_v<T, RandomFitness>) {
          json fitness;
          if (const auto* c = std::get_if<PointMassFitness>(&m.fitness))
            fitness = {{"type", "constant"}, {"value", c->value}};
          else if (const auto* p = std::get_if<ParetoFitness>(&m.fitness))
            fitness = {{"type", "pareto"}, {"alpha", p->alpha}, {"scale", p->scale}};
          else {
            const auto& t = std::get<TabulatedFitness>(m.fitness);
            fitness = {{"type", "tabulated"}, {"values", t.values}, {"probs", t.probs}};
          }
          j = {{"type", "random-fitness"},
               {"n_pop", m.n_pop},
               {"fitness", fitness},
               {"resample_cap", m.resample_cap}};
        } else if constexpr (std::is_same_v<T, GaltonWatsonSampling>) {
          json juveniles;
          if (const auto* c = std::get_if<ConstJuveniles>(&m.juveniles))
            juveniles = {{"type", "constant"}, {"value", c->value}};
          else if (const auto* p = std::get_if<ParetoJuveniles>(&m.juveniles))
            juveniles = {{"type", "pareto"}, {"alpha", p->alpha}, {"scale", p->scale}};
          else {
            const auto& t = std::get<TabulatedJuveniles>(m.juveniles);
            juveniles = {{"type", "tabulated"}, {"values", t.values}, {"probs", t.probs}};
          }
          j = {{"type", "gw-sampling"},
               {"n_pop", m.n_pop},
               {"activity_rate", m.activity_rate},
               {"juveniles", juveniles},
               {"resample_cap", m.resample_cap}};
        } else if constexpr (std::is_same_v<T, FixedCouples>) {
          j = {{"type", "fixed-couples"}, {"n_couples", m.n_couples}};
        } else {
          j = {{"type", "large-family"},
               {"n_pop", m.n_pop},
               {"psi", m.psi},
               {"gamma", m.gamma}};
        }
      },
      config);
  return j;
}

nlohmann::json to_json(const XiMeasure& measure) {
  json components = json::array();
  for (const auto& c : measure.components()) {
    json law;
    if (const auto* b = std::get_if<BetaLaw>(&c.law))
      law = {{"type", "beta"}, {"alpha", b->alpha}};
    else
      law = {{"type", "point-mass"}, {"x0", std::get<PointMassLaw>(c.law).x0}};
    components.push_back({{"fold", c.fold}, {"weight", c.weight}, {"law", law}});
  }
  return {{"kingman_mass", measure.kingman_mass()},
          {"components", components},
          {"normalized", measure.normalized()}};
}

}  // namespace dipcoal
