#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dipcoal/analysis.hpp"
#include "dipcoal/ancestry.hpp"
#include "dipcoal/coalescent.hpp"
#include "dipcoal/config.hpp"
#include "dipcoal/forward_models.hpp"
#include "dipcoal/parallel.hpp"
#include "dipcoal/partitions.hpp"
#include "dipcoal/rates.hpp"
#include "dipcoal/recipes.hpp"
#include "dipcoal/rng.hpp"
#include "dipcoal/version.hpp"
#include "dipcoal/xi_measure.hpp"

namespace py = pybind11;

namespace dipcoal {
namespace {

// ModelConfig is a std::variant, which pybind11's stl casters would try to
// unpack by value; an opaque holder keeps the python side a single class.
struct PyModel {
  ModelConfig config;
};

std::vector<double> event_times(const GenealogyRecord& r) {
  std::vector<double> out;
  out.reserve(r.events.size());
  for (const auto& e : r.events) out.push_back(e.time);
  return out;
}

std::vector<std::string> event_states(const GenealogyRecord& r) {
  std::vector<std::string> out;
  out.reserve(r.events.size());
  for (const auto& e : r.events) out.push_back(to_string(e.state));
  return out;
}

std::vector<std::string> event_specs(const GenealogyRecord& r) {
  std::vector<std::string> out;
  out.reserve(r.specs.size());
  for (const auto& s : r.specs) out.push_back(to_string(s));
  return out;
}

}  // namespace
}  // namespace dipcoal

PYBIND11_MODULE(_core, m) {
  using namespace dipcoal;

  m.doc() =
      "Diploid exchangeable population models, their coalescent limits, and "
      "the estimators connecting the two.";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<MergerSpec>(m, "MergerSpec",
                         "Merger class (b; k_1..k_j; s): of b blocks, groups "
                         "of the given sizes merge and s stay untouched.")
      .def(py::init([](int b, std::vector<int> group_sizes, int singletons) {
             return MergerSpec{b, std::move(group_sizes), singletons};
           }),
           py::arg("b"), py::arg("group_sizes"), py::arg("singletons"))
      .def_readonly("b", &MergerSpec::b)
      .def_readonly("group_sizes", &MergerSpec::group_sizes)
      .def_readonly("singletons", &MergerSpec::singletons)
      .def("n_groups", &MergerSpec::n_groups)
      .def("total_merged", &MergerSpec::total_merged)
      .def("multiplicity",
           [](const MergerSpec& s) { return merger_spec_multiplicity(s); },
           "Number of labeled-partition targets realizing this class.")
      .def(py::self == py::self)
      .def("__repr__", [](const MergerSpec& s) { return to_string(s); });

  py::class_<XiMeasure>(m, "Measure",
                        "Finite mixture of k-fold mixing laws plus an "
                        "optional Kingman atom.")
      .def_static("kingman", &XiMeasure::kingman)
      .def_static("beta", &XiMeasure::beta, py::arg("fold"), py::arg("alpha"),
                  py::arg("weight") = 1.0)
      .def_static("point_mass", &XiMeasure::point_mass, py::arg("fold"),
                  py::arg("x0"), py::arg("weight") = 1.0)
      .def_static("parse", &measure_from_string, py::arg("text"),
                  "Shorthand: \"kingman\", \"beta(FOLD,ALPHA)\", or "
                  "\"point(FOLD,X0)\".")
      .def_static(
          "from_json",
          [](const std::string& text) {
            return measure_from_json(nlohmann::json::parse(text));
          },
          py::arg("text"))
      .def("to_json",
           [](const XiMeasure& x) { return to_json(x).dump(); })
      .def_property_readonly("id", &XiMeasure::id)
      .def_property_readonly("total_mass", &XiMeasure::total_mass)
      .def_property_readonly("normalized", &XiMeasure::normalized)
      .def("__repr__",
           [](const XiMeasure& x) { return "<Measure " + x.id() + ">"; });

  m.def("rate", &rate, py::arg("measure"), py::arg("spec"),
        "Closed-form transition rate of the merger class under the measure.");
  m.def("rate_quadrature", &rate_quadrature, py::arg("measure"),
        py::arg("spec"), py::arg("rel_tol") = 1e-10,
        "Same rate by adaptive quadrature of the raw integrand.");
  m.def("consistency_check", &consistency_check, py::arg("measure"),
        py::arg("max_b"),
        "Max violation of the one-extra-block rate recursion up to max_b.");
  m.def("generator_matrix", &generator_matrix, py::arg("measure"),
        py::arg("n"),
        "Jump-chain generator on the partitions of n points (n <= 8).");
  m.def("enumerate_merger_specs", &enumerate_merger_specs, py::arg("b"));
  m.def(
      "partitions",
      [](int n) {
        std::vector<std::string> out;
        for (const auto& p : enumerate_partitions(n)) out.push_back(to_string(p));
        return out;
      },
      py::arg("n"), "All partitions of {1..n} in enumeration order.");
  m.def(
      "diploid_states",
      [](int n) {
        std::vector<std::string> out;
        for (const auto& s : enumerate_diploid_states(n))
          out.push_back(to_string(s));
        return out;
      },
      py::arg("n"),
      "All pairing states over the partitions of {1..n} (n <= 8).");

  py::class_<GenealogyRecord>(m, "GenealogyRecord",
                              "Jump-chain trajectory down to one block; "
                              "discrete records carry generation numbers as "
                              "times.")
      .def_readonly("n", &GenealogyRecord::n)
      .def_readonly("seed", &GenealogyRecord::seed)
      .def_property_readonly("discrete",
                             [](const GenealogyRecord& r) {
                               return r.mode == GenealogyRecord::Mode::Discrete;
                             })
      .def_property_readonly("times", &event_times)
      .def_property_readonly("states", &event_states)
      .def_property_readonly("specs", &event_specs)
      .def_property_readonly(
          "n_events",
          [](const GenealogyRecord& r) { return r.specs.size(); })
      .def_property_readonly("absorbed", &GenealogyRecord::absorbed)
      .def_property_readonly("tmrca",
                             [](const GenealogyRecord& r) { return tmrca(r); })
      .def_property_readonly(
          "total_length",
          [](const GenealogyRecord& r) { return total_length(r); })
      .def_property_readonly(
          "branch_lengths",
          [](const GenealogyRecord& r) { return branch_lengths(r); },
          "Time integral of the count of blocks of each size 1..n-1 "
          "(continuous records only).")
      .def("__repr__", [](const GenealogyRecord& r) {
        return "<GenealogyRecord n=" + std::to_string(r.n) +
               " events=" + std::to_string(r.specs.size()) + ">";
      });

  m.def(
      "simulate_coalescent",
      [](const XiMeasure& measure, int n, std::uint64_t seed) {
        return simulate_coalescent(measure, n, seed);
      },
      py::arg("measure"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>(),
      "One continuous-time trajectory from n singleton blocks.");

  py::class_<PyModel>(m, "Model",
                      "Forward-in-time population model, constructed from "
                      "its JSON description.")
      .def_static(
          "from_json",
          [](const std::string& text) {
            return PyModel{model_from_json(nlohmann::json::parse(text))};
          },
          py::arg("text"))
      .def("to_json",
           [](const PyModel& p) { return to_json(p.config).dump(); })
      .def_property_readonly(
          "id", [](const PyModel& p) { return model_id(p.config); })
      .def_property_readonly(
          "population_size",
          [](const PyModel& p) { return population_size(p.config); })
      .def_property_readonly(
          "pair_coalescence_prob",
          [](const PyModel& p) { return pair_coalescence_prob(p.config); },
          "Analytic per-generation pair-coalescence probability, or None "
          "when the model has no closed form.")
      .def("__repr__", [](const PyModel& p) {
        return "<Model " + model_id(p.config) + ">";
      });

  m.def(
      "sample_offspring",
      [](const PyModel& model, std::uint64_t seed) {
        Xoshiro256 rng(seed, 0);
        const auto mtx = sample_offspring(model.config, rng);
        std::vector<std::tuple<int, int, long long>> out;
        out.reserve(mtx.entries.size());
        for (const auto& e : mtx.entries) out.emplace_back(e.i, e.j, e.count);
        return out;
      },
      py::arg("model"), py::arg("seed"),
      "One offspring matrix as (parent_i, parent_j, children) triples.");

  m.def(
      "run_genealogy",
      [](const PyModel& model, int n, std::uint64_t seed) {
        Xoshiro256 rng(seed, 0);
        return run_genealogy(model.config, n, rng);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>(),
      "Discrete-time genealogy of n sampled genes under the model.");

  py::class_<EstimateWithError>(m, "Estimate")
      .def_readonly("value", &EstimateWithError::value)
      .def_readonly("std_error", &EstimateWithError::std_error)
      .def_readonly("replicates", &EstimateWithError::replicates)
      .def("__repr__", [](const EstimateWithError& e) {
        return "<Estimate " + std::to_string(e.value) + " +/- " +
               std::to_string(e.std_error) + " (" +
               std::to_string(e.replicates) + " reps)>";
      });

  m.def(
      "estimate_cn",
      [](const PyModel& model, long long reps, std::uint64_t seed) {
        Xoshiro256 rng(seed, 0);
        return estimate_cn(model.config, reps, rng);
      },
      py::arg("model"), py::arg("reps"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>(),
      "Monte Carlo pair-coalescence probability with standard error.");

  m.def(
      "estimate_phi",
      [](const PyModel& model, const std::vector<int>& orders, long long reps,
         std::uint64_t seed) {
        Xoshiro256 rng(seed, 0);
        return estimate_phi(model.config, orders, reps, rng);
      },
      py::arg("model"), py::arg("orders"), py::arg("reps"), py::arg("seed"),
      py::call_guard<py::gil_scoped_release>(),
      "Scaled joint factorial moment of distinct individuals' offspring "
      "counts (up to three individuals).");

  m.def("tail_scaling_limit", &tail_scaling_limit, py::arg("alpha"),
        py::arg("x"),
        "Limit of (N / c_N) P(V_1 > N x) for Pareto(alpha) fitness.");

  py::class_<MohleDecomposition>(m, "MohleDecomposition",
                                 "Separation-of-timescales reading of a "
                                 "one-step transition matrix.")
      .def_property_readonly("states",
                             [](const MohleDecomposition& d) {
                               std::vector<std::string> out;
                               out.reserve(d.states.size());
                               for (const auto& s : d.states)
                                 out.push_back(to_string(s));
                               return out;
                             })
      .def_property_readonly(
          "A", [](const MohleDecomposition& d) { return d.A; })
      .def_property_readonly(
          "P", [](const MohleDecomposition& d) { return d.P; })
      .def_property_readonly(
          "B", [](const MohleDecomposition& d) { return d.B; })
      .def_property_readonly(
          "G", [](const MohleDecomposition& d) { return d.G; })
      .def_readonly("c_hat", &MohleDecomposition::c_hat);

  m.def(
      "mohle",
      [](const PyModel& model, int n, long long reps, std::uint64_t seed,
         std::optional<double> c_hat) {
        double c = 0.0;
        if (c_hat) {
          c = *c_hat;
        } else if (const auto analytic = pair_coalescence_prob(model.config)) {
          c = *analytic;
        } else {
          Xoshiro256 cn_rng(seed, 1u << 20);
          c = estimate_cn(model.config, 10000, cn_rng).value;
        }
        Xoshiro256 rng(seed, 0);
        const auto pi = estimate_transition_matrix(model.config, n, reps, rng);
        return mohle_decompose(pi, c, n);
      },
      py::arg("model"), py::arg("n"), py::arg("reps"), py::arg("seed"),
      py::arg("c_hat") = py::none(),
      py::call_guard<py::gil_scoped_release>(),
      "Estimates the one-step matrix on the diploid states of n genes and "
      "decomposes it as A + c B; c defaults to the model's analytic "
      "pair-coalescence probability, else a same-seed estimate.");

  m.def("recipe_names", [] { return recipe_names(); });
  m.def(
      "run_recipe_json",
      [](const std::string& name, std::uint64_t seed, int threads) {
        return to_json(run_recipe(name, seed, resolve_threads(threads)))
            .dump();
      },
      py::arg("name"), py::arg("seed"), py::arg("threads") = 0,
      py::call_guard<py::gil_scoped_release>(),
      "Runs a named experiment and returns its report as a JSON string.");
}
