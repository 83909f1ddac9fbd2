#include <cstdio>
#include <fstream>
#include <string>

#include <doctest.h>

#include "dipcoal/config.hpp"

using namespace dipcoal;
using nlohmann::json;

namespace {

bool message_contains(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("model configs round-trip through json") {
  const char* docs[] = {
      R"({"type":"wright-fisher","n_pop":100})",
      R"({"type":"random-fitness","n_pop":50,"fitness":{"type":"pareto","alpha":1.5,"scale":1.0},"resample_cap":100})",
      R"({"type":"gw-sampling","n_pop":80,"activity_rate":4.0,"juveniles":{"type":"pareto","alpha":1.5,"scale":1.0},"resample_cap":100})",
      R"({"type":"fixed-couples","n_couples":25})",
      R"({"type":"large-family","n_pop":400,"psi":0.5,"gamma":0.5})",
  };
  for (const char* doc : docs) {
    const auto config = model_from_json(json::parse(doc));
    const auto round = model_from_json(to_json(config));
    CHECK(to_json(config) == to_json(round));
  }
}

TEST_CASE("tabulated laws parse") {
  const auto config = model_from_json(json::parse(
      R"({"type":"random-fitness","n_pop":20,
          "fitness":{"type":"tabulated","values":[1.0,2.0],"probs":[0.5,0.5]}})"));
  const auto& rf = std::get<RandomFitness>(config);
  const auto& tab = std::get<TabulatedFitness>(rf.fitness);
  CHECK(tab.values == std::vector<double>{1.0, 2.0});

  const auto gw = model_from_json(json::parse(
      R"({"type":"gw-sampling","n_pop":20,"activity_rate":4.0,
          "juveniles":{"type":"tabulated","values":[1,5],"probs":[0.5,0.5]}})"));
  const auto& tj =
      std::get<TabulatedJuveniles>(std::get<GaltonWatsonSampling>(gw).juveniles);
  CHECK(tj.values == std::vector<long long>{1, 5});
}

TEST_CASE("unknown and invalid fields name their path") {
  CHECK(message_contains(
      [] {
        model_from_json(json::parse(R"({"type":"fixed-couples","n_couple":3})"));
      },
      "n_couple"));
  CHECK(message_contains(
      [] {
        model_from_json(json::parse(
            R"({"type":"random-fitness","n_pop":10,
                "fitness":{"type":"pareto","alpha":2.5}})"));
      },
      "model.fitness.alpha"));
  CHECK(message_contains(
      [] { model_from_json(json::parse(R"({"type":"mystery"})")); }, "type"));
  CHECK(message_contains(
      [] { measure_from_json(json::parse(R"({"components":7})")); },
      "components"));
}

TEST_CASE("measures parse from json and shorthand strings") {
  const auto m = measure_from_json(json::parse(
      R"({"kingman_mass":0.25,
          "components":[{"fold":4,"weight":0.75,"law":{"type":"beta","alpha":1.5}}],
          "normalized":true})"));
  CHECK(m.kingman_mass() == 0.25);
  REQUIRE(m.components().size() == 1);
  CHECK(m.components()[0].fold == 4);
  CHECK(measure_from_json(to_json(m)).id() == m.id());

  CHECK(measure_from_string("kingman").kingman_mass() == 1.0);
  const auto beta = measure_from_string("beta(4,1.5)");
  REQUIRE(beta.components().size() == 1);
  CHECK(beta.components()[0].fold == 4);
  CHECK(std::get<BetaLaw>(beta.components()[0].law).alpha == 1.5);
  const auto point = measure_from_string("point(2,0.5)");
  CHECK(std::get<PointMassLaw>(point.components()[0].law).x0 == 0.5);

  CHECK_THROWS_AS(measure_from_string("beta(4,1.5)x"), ConfigError);
  CHECK_THROWS_AS(measure_from_string("beta(4)"), ConfigError);
  CHECK_THROWS_AS(measure_from_string("gaussian(1,2)"), ConfigError);
  CHECK_THROWS_AS(measure_from_string("beta(4,2.5)"), ConfigError);
}

TEST_CASE("experiment documents") {
  const auto config = experiment_from_json(json::parse(
      R"({"experiment":"estimate-cn",
          "model":{"type":"wright-fisher","n_pop":100},
          "replicates":500,
          "n_grid":[200,400],
          "seed":7,
          "level":0.05,
          "out":"results"})"));
  CHECK(config.experiment == "estimate-cn");
  REQUIRE(config.model.has_value());
  CHECK(population_size(*config.model) == 100);
  CHECK(config.replicates == 500);
  CHECK(config.n_grid == std::vector<int>{200, 400});
  REQUIRE(config.seed.has_value());
  CHECK(*config.seed == 7);
  CHECK(config.level == 0.05);
  CHECK(config.out_dir == "results");

  const auto bare = experiment_from_json(json::parse(
      R"js({"experiment":"rates","measure":"beta(4,1.5)"})js"));
  CHECK_FALSE(bare.seed.has_value());
  CHECK(bare.level == 0.01);
  REQUIRE(bare.measure.has_value());
  CHECK(bare.measure->components()[0].fold == 4);

  CHECK(message_contains(
      [] {
        experiment_from_json(
            json::parse(R"({"experiment":"rates","bogus":1})"));
      },
      "bogus"));
  CHECK_THROWS_AS(experiment_from_json(json::parse(R"({"model":{}})")),
                  ConfigError);
}

TEST_CASE("experiment files load from disk") {
  const std::string path = "/tmp/dipcoal_test_config.json";
  {
    std::ofstream out(path);
    out << R"js({"experiment":"simulate-coalescent","measure":"beta(4,1.5)",
               "sample_size":8,"replicates":100,"seed":3})js";
  }
  const auto config = load_experiment(path);
  CHECK(config.experiment == "simulate-coalescent");
  CHECK(config.sample_size == 8);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_experiment("/tmp/definitely_missing_dipcoal.json"),
                  ConfigError);
}
