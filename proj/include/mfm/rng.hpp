#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

#include "mfm/numeric.hpp"

namespace mfm {

/// Seedable random source with portable output.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Streams are derived by feeding (seed, stream) through
/// std::seed_seq, also fully specified. All variates are built here from raw
/// engine words rather than std::*_distribution, whose algorithms differ
/// between standard libraries, so traces match across platforms.
///
/// Variate methods:
///   uniform      53-bit mantissa fill, open interval (0, 1)
///   normal       Marsaglia polar method
///   gamma        Marsaglia-Tsang squeeze; shape < 1 via the U^(1/a) boost
///   uniform_int  rejection on the top bits (unbiased)
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    for (;;) {
      const std::uint64_t draw = engine_();
      if (draw < limit) return draw % n;
    }
  }

  bool coin() { return (engine_() >> 63) != 0; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential() { return -std::log(uniform()); }

  /// Laplace(loc, scale) by inverse CDF.
  double laplace(double loc, double scale) {
    const double u = uniform() - 0.5;
    return u < 0.0 ? loc + scale * std::log1p(2.0 * u) : loc - scale * std::log1p(-2.0 * u);
  }

  /// Gamma with shape-rate parameterization (mean shape / rate).
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw std::invalid_argument("gamma: shape and rate must be positive");
    if (shape < 1.0) {
      const double boost = std::pow(uniform(), 1.0 / shape);
      return gamma(shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  /// Draws an index with probability proportional to exp(log_weights[i]).
  std::size_t categorical_log(std::span<const double> log_weights) {
    double hi = kNegInf;
    for (double w : log_weights) hi = std::max(hi, w);
    if (hi == kNegInf) throw std::domain_error("categorical_log: all weights are -inf");
    double total = 0.0;
    for (double w : log_weights) total += std::exp(w - hi);
    double target = uniform() * total;
    for (std::size_t i = 0; i < log_weights.size(); ++i) {
      target -= std::exp(log_weights[i] - hi);
      if (target < 0.0) return i;
    }
    // Rounding residue: return the last category with nonzero weight.
    for (std::size_t i = log_weights.size(); i-- > 0;)
      if (log_weights[i] != kNegInf) return i;
    return 0;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Stream identifiers used when one replicate seed feeds several consumers.
namespace streams {
inline constexpr std::uint64_t kData = 0;
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kChain = 2;
}  // namespace streams

}  // namespace mfm
