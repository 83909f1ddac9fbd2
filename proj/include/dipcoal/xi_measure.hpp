#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dipcoal {

// Mixing laws for one k-fold component: mass x is spread over `fold` equal
// coordinates (x/k, ..., x/k, 0, ...).
struct BetaLaw {
  double alpha = 1.5;  // Beta(2 - alpha, alpha) density on (0, 1)
};
struct PointMassLaw {
  double x0 = 1.0;  // atom location in (0, 1]
};
using MixingLaw = std::variant<BetaLaw, PointMassLaw>;

struct XiComponent {
  int fold = 1;
  double weight = 1.0;
  MixingLaw law;
};

// Finite mixture of k-fold components plus an optional Kingman atom. Weights
// are taken literally; nothing is renormalized. The `normalized` flag is an
// assertion checked at construction.
class XiMeasure {
 public:
  XiMeasure(double kingman_mass, std::vector<XiComponent> components,
            bool normalized)
      : kingman_mass_(kingman_mass),
        components_(std::move(components)),
        normalized_(normalized) {
    if (!(kingman_mass_ >= 0.0))
      throw std::invalid_argument("XiMeasure: kingman_mass must be >= 0");
    for (const auto& c : components_) {
      if (c.fold < 1) throw std::invalid_argument("XiMeasure: fold must be >= 1");
      if (!(c.weight > 0.0))
        throw std::invalid_argument("XiMeasure: component weight must be > 0");
      if (const auto* b = std::get_if<BetaLaw>(&c.law)) {
        if (!(b->alpha > 1.0 && b->alpha < 2.0))
          throw std::invalid_argument("XiMeasure: alpha must lie in (1, 2)");
      } else {
        const auto& p = std::get<PointMassLaw>(c.law);
        if (!(p.x0 > 0.0 && p.x0 <= 1.0))
          throw std::invalid_argument("XiMeasure: point mass x0 must lie in (0, 1]");
      }
    }
    if (normalized_ && std::abs(total_mass() - 1.0) > 1e-12)
      throw std::invalid_argument(
          "XiMeasure: normalized flag set but total mass differs from 1");
  }

  static XiMeasure kingman() { return XiMeasure(1.0, {}, true); }

  static XiMeasure beta(int fold, double alpha, double weight = 1.0) {
    return XiMeasure(0.0, {XiComponent{fold, weight, BetaLaw{alpha}}},
                     weight == 1.0);
  }

  static XiMeasure point_mass(int fold, double x0, double weight = 1.0) {
    return XiMeasure(0.0, {XiComponent{fold, weight, PointMassLaw{x0}}},
                     weight == 1.0);
  }

  double kingman_mass() const { return kingman_mass_; }
  const std::vector<XiComponent>& components() const { return components_; }
  bool normalized() const { return normalized_; }

  double total_mass() const {
    double t = kingman_mass_;
    for (const auto& c : components_) t += c.weight;
    return t;
  }

  // Short text id used in CSV output.
  std::string id() const {
    std::string s;
    auto append = [&s](const std::string& part) {
      if (!s.empty()) s += "+";
      s += part;
    };
    if (kingman_mass_ > 0.0)
      append("kingman:" + trimmed(kingman_mass_));
    for (const auto& c : components_) {
      std::string part;
      if (const auto* b = std::get_if<BetaLaw>(&c.law))
        part = "beta(k=" + std::to_string(c.fold) + ",a=" + trimmed(b->alpha) + ")";
      else
        part = "point(k=" + std::to_string(c.fold) +
               ",x0=" + trimmed(std::get<PointMassLaw>(c.law).x0) + ")";
      append(part + ":" + trimmed(c.weight));
    }
    return s.empty() ? "zero" : s;
  }

 private:
  static std::string trimmed(double v) {
    std::string s = std::to_string(v);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  double kingman_mass_ = 0.0;
  std::vector<XiComponent> components_;
  bool normalized_ = false;
};

}  // namespace dipcoal
