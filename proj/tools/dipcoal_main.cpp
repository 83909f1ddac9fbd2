#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dipcoal/analysis.hpp"
#include "dipcoal/ancestry.hpp"
#include "dipcoal/coalescent.hpp"
#include "dipcoal/config.hpp"
#include "dipcoal/forward_models.hpp"
#include "dipcoal/parallel.hpp"
#include "dipcoal/partitions.hpp"
#include "dipcoal/rates.hpp"
#include "dipcoal/recipes.hpp"
#include "dipcoal/version.hpp"
#include "dipcoal/xi_measure.hpp"

namespace {

using namespace dipcoal;

std::string csv_trailer(std::uint64_t seed) {
  return std::string("# seed=") + std::to_string(seed) +
         "\n# version=" + kVersion + "\n";
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_file(const std::string& dir, const std::string& name,
                const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(dir.empty() ? "." : dir) / name;
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  std::cout << "wrote " << path.string() << "\n";
}

// CLI flags override config fields; stochastic subcommands insist on a seed
// from one of the two (never the clock).
struct Inputs {
  CLI::App* sub = nullptr;
  std::string config_path;
  std::string out_dir;
  std::string measure_text;
  std::uint64_t seed = 0;
  long long reps = 0;
  int n = 0;
  int threads = 0;
  double level = 0.0;
  bool trace = false;

  ExperimentConfig config;

  void load() {
    if (!config_path.empty()) config = load_experiment(config_path);
  }
  std::uint64_t require_seed() const {
    if (sub->count("--seed")) return seed;
    if (config.seed) return *config.seed;
    throw ConfigError("seed: required via --seed or the config file");
  }
  long long resolve_reps(long long fallback) const {
    if (sub->count("--reps")) return reps;
    if (config.replicates > 0) return config.replicates;
    return fallback;
  }
  int resolve_n(int fallback = 0) const {
    if (sub->count("--n")) return n;
    if (config.sample_size > 0) return config.sample_size;
    if (fallback > 0) return fallback;
    throw ConfigError("sample_size: required via --n or the config file");
  }
  double resolve_level() const {
    if (sub->count("--level")) return level;
    return config.level;
  }
  XiMeasure resolve_measure() const {
    if (sub->count("--measure")) return measure_from_string(measure_text);
    if (config.measure) return *config.measure;
    throw ConfigError("measure: required via --measure or the config file");
  }
  const ModelConfig& require_model() const {
    if (!config.model)
      throw ConfigError("config.model: required for this subcommand");
    return *config.model;
  }
  std::string out() const {
    if (!out_dir.empty()) return out_dir;
    if (!config.out_dir.empty()) return config.out_dir;
    return ".";
  }
};

void add_common(CLI::App* sub, Inputs& in) {
  in.sub = sub;
  sub->add_option("--config", in.config_path, "JSON experiment config");
  sub->add_option("--seed", in.seed, "master seed (64-bit)");
  sub->add_option("--reps", in.reps, "replicate count");
  sub->add_option("--out", in.out_dir, "output directory");
  sub->add_option("--threads", in.threads,
                  "worker threads (DIPCOAL_THREADS overrides; 0 = all cores)");
  sub->add_option("--level", in.level, "test level for verdicts");
}

ModelConfig with_population(const ModelConfig& config, int n_pop) {
  ModelConfig scaled = config;
  std::visit(
      [n_pop](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedCouples>) {
          if (n_pop % 2 != 0)
            throw ConfigError("n_grid: couple model needs even sizes");
          m.n_couples = n_pop / 2;
        } else {
          m.n_pop = n_pop;
        }
      },
      scaled);
  validate(scaled);
  return scaled;
}

int cmd_rates(Inputs& in, int max_b, bool use_quadrature) {
  const XiMeasure measure = in.resolve_measure();
  if (max_b < 2 || max_b > 32)
    throw ConfigError("--max-b: must lie in 2..32");
  std::ostringstream csv;
  csv << "b,group_sizes,s,rate,method,measure\n";
  const std::string method = use_quadrature ? "quadrature" : "closed";
  for (int b = 2; b <= max_b; ++b) {
    for (const auto& spec : enumerate_merger_specs(b)) {
      std::string sizes;
      for (std::size_t i = 0; i < spec.group_sizes.size(); ++i) {
        if (i > 0) sizes += ";";
        sizes += std::to_string(spec.group_sizes[i]);
      }
      const double value =
          use_quadrature ? rate_quadrature(measure, spec) : rate(measure, spec);
      csv << b << "," << quoted(sizes) << "," << spec.singletons << "," << value
          << "," << method << "," << quoted(measure.id()) << "\n";
    }
  }
  csv << csv_trailer(in.sub->count("--seed") ? in.seed : 0);
  write_file(in.out(), "rates.csv", csv.str());
  return 0;
}

int cmd_simulate_coalescent(Inputs& in) {
  const XiMeasure measure = in.resolve_measure();
  const int n = in.resolve_n();
  if (n < 2 || n > 32) throw ConfigError("sample_size: must lie in 2..32");
  const std::uint64_t seed = in.require_seed();
  const long long reps = in.resolve_reps(1000);
  const int threads = resolve_threads(in.threads);

  const JumpTable table(measure, n);
  struct Row {
    double tmrca = 0.0, total = 0.0;
    std::vector<double> by_size;
    int n_events = 0, max_groups = 0;
  };
  std::vector<Row> rows(static_cast<std::size_t>(reps));
  parallel_replicates(reps, seed, threads, [&](long long r, Xoshiro256& rng) {
    const auto record = simulate_coalescent(table, n, rng);
    auto& row = rows[static_cast<std::size_t>(r)];
    row.tmrca = tmrca(record);
    row.total = total_length(record);
    row.by_size = branch_lengths(record);
    row.n_events = static_cast<int>(record.specs.size());
    for (const auto& spec : record.specs)
      row.max_groups = std::max(row.max_groups, spec.n_groups());
  });

  std::ostringstream csv;
  csv << "replicate,tmrca,l_total";
  for (int s = 1; s < n; ++s) csv << ",l_" << s;
  csv << ",n_events,max_groups_in_one_event\n";
  for (long long r = 0; r < reps; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    csv << r << "," << row.tmrca << "," << row.total;
    for (double v : row.by_size) csv << "," << v;
    csv << "," << row.n_events << "," << row.max_groups << "\n";
  }
  csv << csv_trailer(seed);
  write_file(in.out(), "coalescent.csv", csv.str());
  return 0;
}

int cmd_simulate_forward(Inputs& in) {
  const ModelConfig& model = in.require_model();
  const int n = in.resolve_n();
  const std::uint64_t seed = in.require_seed();
  const long long reps = in.resolve_reps(100);
  const int threads = resolve_threads(in.threads);

  struct Row {
    long long absorbed = 0;
    std::string events;
    std::vector<std::pair<long long, DiploidState>> trace;
  };
  std::vector<Row> rows(static_cast<std::size_t>(reps));
  const bool want_trace = in.trace;
  parallel_replicates(reps, seed, threads, [&](long long r, Xoshiro256& rng) {
    auto& row = rows[static_cast<std::size_t>(r)];
    AncestryOptions options;
    if (want_trace) options.trace = &row.trace;
    const auto record = run_genealogy(model, n, rng, options);
    row.absorbed = static_cast<long long>(record.events.back().time);
    std::ostringstream events;
    for (std::size_t e = 0; e + 1 < record.events.size(); ++e) {
      if (e > 0) events << ";";
      events << static_cast<long long>(record.events[e + 1].time) << ":"
             << to_string(record.specs[e]);
    }
    row.events = events.str();
  });

  std::ostringstream csv;
  csv << "replicate,model,n_pop,n,absorption_generation,events\n";
  const std::string id = model_id(model);
  const int n_pop = population_size(model);
  for (long long r = 0; r < reps; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    csv << r << "," << quoted(id) << "," << n_pop << "," << n << ","
        << row.absorbed << "," << quoted(row.events) << "\n";
  }
  csv << csv_trailer(seed);
  write_file(in.out(), "forward.csv", csv.str());

  if (want_trace) {
    std::ostringstream trace_csv;
    trace_csv << "replicate,generation,state\n";
    for (long long r = 0; r < reps; ++r)
      for (const auto& [gen, state] : rows[static_cast<std::size_t>(r)].trace)
        trace_csv << r << "," << gen << "," << quoted(to_string(state)) << "\n";
    trace_csv << csv_trailer(seed);
    write_file(in.out(), "forward_trace.csv", trace_csv.str());
  }
  return 0;
}

int cmd_estimate_cn(Inputs& in) {
  const ModelConfig& model = in.require_model();
  const std::uint64_t seed = in.require_seed();
  const long long reps = in.resolve_reps(10000);

  std::vector<int> grid = in.config.n_grid;
  if (grid.empty()) grid.push_back(population_size(model));

  std::ostringstream csv;
  csv << "estimate,std_error,reps,model,n_pop\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ModelConfig scaled = with_population(model, grid[i]);
    Xoshiro256 rng(seed, static_cast<std::uint64_t>(i));
    const auto est = estimate_cn(scaled, reps, rng);
    csv << est.value << "," << est.std_error << "," << est.replicates << ","
        << quoted(model_id(scaled)) << "," << population_size(scaled) << "\n";
  }
  csv << csv_trailer(seed);
  write_file(in.out(), "cn_estimates.csv", csv.str());
  return 0;
}

int cmd_mohle(Inputs& in, long long cn_reps) {
  const ModelConfig& model = in.require_model();
  const int n = in.resolve_n(3);
  if (n < 1 || n > 4) throw ConfigError("sample_size: must lie in 1..4");
  const std::uint64_t seed = in.require_seed();
  const long long reps = in.resolve_reps(100000);

  double c_hat = 0.0;
  std::string c_source;
  if (const auto analytic = pair_coalescence_prob(model)) {
    c_hat = *analytic;
    c_source = "analytic";
  } else {
    Xoshiro256 cn_rng(seed, 1u << 20);
    c_hat = estimate_cn(model, cn_reps, cn_rng).value;
    c_source = "estimated(" + std::to_string(cn_reps) + ")";
  }

  Xoshiro256 rng(seed);
  const auto pi = estimate_transition_matrix(model, n, reps, rng);
  const auto md = mohle_decompose(pi, c_hat, n);

  std::ostringstream csv;
  csv << "row_state,col_state,pi,a,b,g\n";
  const auto dim = static_cast<Eigen::Index>(md.states.size());
  for (Eigen::Index s = 0; s < dim; ++s)
    for (Eigen::Index t = 0; t < dim; ++t)
      csv << quoted(to_string(md.states[static_cast<std::size_t>(s)])) << ","
          << quoted(to_string(md.states[static_cast<std::size_t>(t)])) << ","
          << pi(s, t) << "," << md.A(s, t) << "," << md.B(s, t) << ","
          << md.G(s, t) << "\n";
  csv << "# c_hat=" << c_hat << " source=" << c_source << "\n";
  csv << csv_trailer(seed);
  write_file(in.out(), "mohle.csv", csv.str());
  return 0;
}

int cmd_compare(Inputs& in) {
  const ModelConfig& model = in.require_model();
  const XiMeasure measure = in.resolve_measure();
  const int n = in.resolve_n();
  if (n < 2 || n > 32) throw ConfigError("sample_size: must lie in 2..32");
  const std::uint64_t seed = in.require_seed();
  const long long reps = in.resolve_reps(2000);
  const int threads = resolve_threads(in.threads);
  const double level = in.resolve_level();

  double c_hat = 0.0;
  std::string c_source;
  if (const auto analytic = pair_coalescence_prob(model)) {
    c_hat = *analytic;
    c_source = "analytic";
  } else {
    Xoshiro256 cn_rng(seed, 1u << 20);
    const auto est = estimate_cn(model, 10000, cn_rng);
    c_hat = est.value;
    c_source = "estimated, se=" + std::to_string(est.std_error);
  }

  // forward side: absorption generations rescaled by c_hat, event group counts
  std::vector<double> forward_times(static_cast<std::size_t>(reps));
  std::vector<std::array<long long, 5>> forward_groups(
      static_cast<std::size_t>(reps), std::array<long long, 5>{});
  parallel_replicates(reps, seed, threads, [&](long long r, Xoshiro256& rng) {
    const auto record = run_genealogy(model, n, rng);
    forward_times[static_cast<std::size_t>(r)] =
        record.events.back().time * c_hat;
    for (const auto& spec : record.specs)
      ++forward_groups[static_cast<std::size_t>(r)]
                      [static_cast<std::size_t>(std::min(spec.n_groups(), 4))];
  });

  // limit side: the coalescent under the measure at the same sample size
  const JumpTable table(measure, n);
  std::vector<double> limit_times(static_cast<std::size_t>(reps));
  std::vector<std::array<long long, 5>> limit_groups(
      static_cast<std::size_t>(reps), std::array<long long, 5>{});
  parallel_replicates(
      reps, seed ^ 0x5bf0363e0f1e6a21ULL, threads,
      [&](long long r, Xoshiro256& rng) {
        const auto record = simulate_coalescent(table, n, rng);
        limit_times[static_cast<std::size_t>(r)] = tmrca(record);
        // view the limit chain at generation resolution: jumps inside the
        // same c_hat-wide window compose into one observed event, the same
        // way a forward generation composes simultaneous mergers; without
        // this the multi-group cell is a structural zero on the limit side
        // and the homogeneity test rejects on finite-N composites alone
        std::size_t i = 1;
        while (i < record.events.size()) {
          const auto bin =
              static_cast<long long>(record.events[i].time / c_hat);
          std::size_t k = i;
          while (k + 1 < record.events.size() &&
                 static_cast<long long>(record.events[k + 1].time / c_hat) ==
                     bin)
            ++k;
          const auto rel = merger_spec(record.events[i - 1].state,
                                       record.events[k].state);
          if (const auto* spec = std::get_if<MergerSpec>(&rel))
            ++limit_groups[static_cast<std::size_t>(r)][static_cast<
                std::size_t>(std::min(spec->n_groups(), 4))];
          i = k + 1;
        }
      });

  std::vector<Verdict> verdicts;
  const auto ks = ks_test_two_sample(forward_times, limit_times);
  verdicts.push_back({"compare/absorption-time-ks", ks.p_value, level,
                      ks.p_value >= level, seed,
                      "two-sample KS D=" + std::to_string(ks.statistic) +
                          ", c_hat=" + std::to_string(c_hat) + " (" + c_source +
                          ")"});

  std::vector<long long> fg(4, 0), lg(4, 0);
  for (long long r = 0; r < reps; ++r)
    for (int g = 1; g <= 4; ++g) {
      fg[static_cast<std::size_t>(g - 1)] +=
          forward_groups[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)];
      lg[static_cast<std::size_t>(g - 1)] +=
          limit_groups[static_cast<std::size_t>(r)][static_cast<std::size_t>(g)];
    }
  try {
    const auto chi2 = chi2_two_sample(fg, lg);
    verdicts.push_back(
        {"compare/group-count-chi2", chi2.p_value, level,
         chi2.p_value >= level, seed,
         "chi2=" + std::to_string(chi2.statistic) +
             ", limit chain binned at width c_hat so both sides count "
             "within-generation composites"});
  } catch (const std::invalid_argument&) {
    verdicts.push_back({"compare/group-count-chi2", 0.0, level, true, seed,
                        "degenerate histograms (single populated cell); "
                        "nothing to test"});
  }

  std::ostringstream samples;
  samples << "side,replicate,value\n";
  for (long long r = 0; r < reps; ++r)
    samples << "forward," << r << "," << forward_times[static_cast<std::size_t>(r)]
            << "\n";
  for (long long r = 0; r < reps; ++r)
    samples << "limit," << r << "," << limit_times[static_cast<std::size_t>(r)]
            << "\n";
  samples << csv_trailer(seed);
  write_file(in.out(), "compare_samples.csv", samples.str());

  std::ostringstream groups;
  groups << "groups,forward,limit\n";
  for (int g = 1; g <= 4; ++g)
    groups << g << "," << fg[static_cast<std::size_t>(g - 1)] << ","
           << lg[static_cast<std::size_t>(g - 1)] << "\n";
  groups << csv_trailer(seed);
  write_file(in.out(), "compare_groups.csv", groups.str());

  nlohmann::json jv = nlohmann::json::array();
  bool pass = true;
  for (const auto& v : verdicts) {
    jv.push_back({{"test", v.test},
                  {"statistic", v.statistic},
                  {"threshold", v.threshold},
                  {"pass", v.pass},
                  {"seed", v.seed},
                  {"note", v.note}});
    pass = pass && v.pass;
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.test
              << " statistic=" << v.statistic << " threshold=" << v.threshold
              << "\n";
  }
  write_file(in.out(), "compare_verdicts.json", jv.dump(2) + "\n");
  return pass ? 0 : 1;
}

int cmd_recipe(Inputs& in, const std::string& name, bool list) {
  if (list) {
    for (const auto& r : recipe_names()) std::cout << r << "\n";
    return 0;
  }
  if (name.empty()) throw ConfigError("recipe: name required (or --list)");
  const std::uint64_t seed = in.require_seed();
  const int threads = resolve_threads(in.threads);

  const auto report = run_recipe(name, seed, threads);
  for (const auto& [file, content] : report.artifacts)
    write_file(in.out(), file, content);
  std::string json_name = report.name + "_verdicts.json";
  std::replace(json_name.begin(), json_name.end(), '-', '_');
  write_file(in.out(), json_name, to_json(report).dump(2) + "\n");

  for (const auto& v : report.verdicts)
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.test
              << " statistic=" << v.statistic << " threshold=" << v.threshold
              << (v.note.empty() ? "" : " (" + v.note + ")") << "\n";
  std::cout << "recipe " << report.name << ": "
            << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"diploid population models and their exchangeable coalescents"};
  app.set_version_flag("--version", std::string("dipcoal ") + kVersion);
  app.require_subcommand(1);

  Inputs rates_in, coal_in, fwd_in, cn_in, mohle_in, compare_in, recipe_in;
  int max_b = 10;
  bool use_quadrature = false;
  long long cn_reps = 100000;
  std::string recipe_name;
  bool recipe_list = false;

  auto* rates = app.add_subcommand("rates", "merger-class rate table CSV");
  add_common(rates, rates_in);
  rates->add_option("--measure", rates_in.measure_text,
                    "kingman | beta(FOLD,ALPHA) | point(FOLD,X0)");
  rates->add_option("--max-b", max_b, "largest block count (2..32)");
  rates->add_flag("--quadrature", use_quadrature,
                  "integrate numerically instead of the closed form");

  auto* coal = app.add_subcommand("simulate-coalescent",
                                  "replicate coalescent trees CSV");
  add_common(coal, coal_in);
  coal->add_option("--measure", coal_in.measure_text,
                   "kingman | beta(FOLD,ALPHA) | point(FOLD,X0)");
  coal->add_option("--n", coal_in.n, "sample size");

  auto* fwd = app.add_subcommand("simulate-forward",
                                 "discrete genealogies of a population model");
  add_common(fwd, fwd_in);
  fwd->add_option("--n", fwd_in.n, "sample size");
  fwd->add_flag("--trace", fwd_in.trace, "also dump full per-generation states");

  auto* cn = app.add_subcommand("estimate-cn",
                                "pair-coalescence probability estimates");
  add_common(cn, cn_in);

  auto* mohle = app.add_subcommand("mohle",
                                   "one-step matrix and its slow generator");
  add_common(mohle, mohle_in);
  mohle->add_option("--n", mohle_in.n, "sample size (1..4)");
  mohle->add_option("--cn-reps", cn_reps,
                    "replicates for the scale estimate when no closed form");

  auto* compare = app.add_subcommand(
      "compare", "forward genealogies vs the limiting coalescent");
  add_common(compare, compare_in);
  compare->add_option("--measure", compare_in.measure_text,
                      "kingman | beta(FOLD,ALPHA) | point(FOLD,X0)");
  compare->add_option("--n", compare_in.n, "sample size");

  auto* recipe = app.add_subcommand("recipe", "named acceptance experiments");
  add_common(recipe, recipe_in);
  recipe->add_option("name", recipe_name, "recipe name");
  recipe->add_flag("--list", recipe_list, "list recipe names");

  try {
    app.parse(argc, argv);
    if (rates->parsed()) {
      rates_in.load();
      return cmd_rates(rates_in, max_b, use_quadrature);
    }
    if (coal->parsed()) {
      coal_in.load();
      return cmd_simulate_coalescent(coal_in);
    }
    if (fwd->parsed()) {
      fwd_in.load();
      return cmd_simulate_forward(fwd_in);
    }
    if (cn->parsed()) {
      cn_in.load();
      return cmd_estimate_cn(cn_in);
    }
    if (mohle->parsed()) {
      mohle_in.load();
      return cmd_mohle(mohle_in, cn_reps);
    }
    if (compare->parsed()) {
      compare_in.load();
      return cmd_compare(compare_in);
    }
    if (recipe->parsed()) {
      recipe_in.load();
      return cmd_recipe(recipe_in, recipe_name, recipe_list);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
