#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dipcoal {

// One named check inside a recipe.  `statistic` and `threshold` document the
// decision that produced `pass`, so a rerun with the recorded seed is fully
// auditable.
struct Verdict {
  std::string test;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::uint64_t seed = 0;
  std::string note;
};

struct RecipeReport {
  std::string name;
  bool pass = false;  // conjunction of the verdicts
  std::vector<Verdict> verdicts;
  // (relative filename, CSV payload) written out by the CLI when --out is set
  std::vector<std::pair<std::string, std::string>> artifacts;
};

const std::vector<std::string>& recipe_names();

// Runs one named experiment end to end.  Output depends only on (name, seed);
// `threads` affects wall time, never results.  Throws std::invalid_argument
// for unknown names.
RecipeReport run_recipe(const std::string& name, std::uint64_t seed,
                        int threads);

nlohmann::json to_json(const RecipeReport& report);

}  // namespace dipcoal
