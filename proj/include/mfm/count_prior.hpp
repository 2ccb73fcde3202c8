#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

#include "mfm/numeric.hpp"

namespace mfm {

/// Geometric prior on k in {1, 2, ...}: mass r (1 - r)^(k - 1).
struct Geometric {
  double r;
};

/// Uniform prior on k in {1, ..., kmax}.
struct UniformBounded {
  int kmax;
};

class ComponentCountPrior {
 public:
  using Variant = std::variant<Geometric, UniformBounded>;

  ComponentCountPrior(Geometric g) : v_(g) { validate(); }
  ComponentCountPrior(UniformBounded u) : v_(u) { validate(); }

  static ComponentCountPrior geometric(double r) { return Geometric{r}; }
  static ComponentCountPrior uniform(int kmax) { return UniformBounded{kmax}; }

  const Variant& variant() const { return v_; }
  bool bounded() const { return std::holds_alternative<UniformBounded>(v_); }

  /// Largest k with positive mass, if finite.
  std::optional<long> support_max() const {
    if (auto* u = std::get_if<UniformBounded>(&v_)) return u->kmax;
    return std::nullopt;
  }

  double log_mass(long k) const {
    if (k < 1) return kNegInf;
    if (auto* g = std::get_if<Geometric>(&v_))
      return std::log(g->r) + static_cast<double>(k - 1) * std::log1p(-g->r);
    const auto& u = std::get<UniformBounded>(v_);
    return k <= u.kmax ? -std::log(static_cast<double>(u.kmax)) : kNegInf;
  }

  std::string describe() const {
    if (auto* g = std::get_if<Geometric>(&v_)) return "geometric(r=" + std::to_string(g->r) + ")";
    return "uniform(1.." + std::to_string(std::get<UniformBounded>(v_).kmax) + ")";
  }

 private:
  void validate() const {
    if (auto* g = std::get_if<Geometric>(&v_)) {
      if (!(g->r > 0.0 && g->r < 1.0)) throw std::invalid_argument("geometric prior: r must lie in (0, 1)");
    } else if (std::get<UniformBounded>(v_).kmax < 1) {
      throw std::invalid_argument("uniform prior: kmax must be a positive integer");
    }
  }

  Variant v_;
};

inline double log_prior_k(const ComponentCountPrior& prior, long k) { return prior.log_mass(k); }

}  // namespace mfm
