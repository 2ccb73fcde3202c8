#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "mfm/model_config.hpp"
#include "mfm/numeric.hpp"
#include "mfm/suff_stats.hpp"

namespace mfm {

namespace detail {

template <typename Scalar>
void check_marginal_dims(const SuffStats<Scalar>& s, const ModelConfig& cfg) {
  if (s.dim() != cfg.dim()) throw std::invalid_argument("cluster marginal: dimension mismatch");
}

/// Posterior rate beta_n per dimension.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> posterior_rate(const SuffStats<Scalar>& s, const ModelConfig& cfg,
                                                       Scalar beta) {
  using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  const Vector c = cfg.c.template cast<Scalar>();
  if (s.n == 0) return Vector::Constant(s.dim(), beta);
  const Scalar n = Scalar(s.n);
  const Vector dev = s.mean() - cfg.m.template cast<Scalar>();
  return beta + Scalar(0.5) * s.centered_sumsq() + c * n * dev.square() / (Scalar(2) * (c + n));
}

}  // namespace detail

/// Log marginal likelihood of a cluster's members under the Normal-Gamma
/// prior, with theta and tau integrated out, summed over dimensions. Zero for
/// an empty cluster.
template <typename Scalar>
Scalar cluster_log_marginal(const SuffStats<Scalar>& s, const ModelConfig& cfg, double beta) {
  detail::check_marginal_dims(s, cfg);
  if (s.n == 0) return Scalar(0);
  const Scalar n = Scalar(s.n);
  const Scalar a = Scalar(cfg.alpha);
  const Scalar b = Scalar(beta);
  const Scalar log_two_pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  const auto c = cfg.c.template cast<Scalar>();
  const auto rate = detail::posterior_rate(s, cfg, b);

  const Scalar per_dim_const = -Scalar(0.5) * n * log_two_pi + log_gamma(a + n / Scalar(2)) - log_gamma(a) +
                               a * std::log(b);
  return Scalar(s.dim()) * per_dim_const + Scalar(0.5) * (c / (c + n)).log().sum() -
         (a + n / Scalar(2)) * rate.log().sum();
}

/// log p(x | members) = cluster_log_marginal(s + x) - cluster_log_marginal(s).
template <typename Scalar, typename Derived>
Scalar log_predictive(const SuffStats<Scalar>& s, const Eigen::DenseBase<Derived>& x, const ModelConfig& cfg,
                      double beta) {
  return cluster_log_marginal(suffstats_add(s, x), cfg, beta) - cluster_log_marginal(s, cfg, beta);
}

class PredictiveKernel;

/// Student-t posterior predictive of one cluster, cached for repeated evaluation.
///
/// Agrees with log_predictive; evaluating a point costs one log per
/// dimension instead of two full marginals.
class PredictiveDensity {
 public:
  PredictiveDensity() = default;
  PredictiveDensity(const SuffStatsd& s, const ModelConfig& cfg, double beta);

  template <typename Derived>
  double operator()(const Eigen::DenseBase<Derived>& x) const {
    double acc = constant_;
    for (Eigen::Index d = 0; d < rate_.size(); ++d) {
      const double dev = double(x.derived().coeff(d)) - center_[d];
      acc -= exponent_ * std::log(rate_[d] + spread_[d] * dev * dev);
    }
    return acc;
  }

  /// Single-dimension fast path.
  double scalar(double x) const {
    const double dev = x - center_[0];
    return constant_ - exponent_ * std::log(rate_[0] + spread_[0] * dev * dev);
  }

 private:
  friend class PredictiveKernel;

  double exponent_ = 0.0;  // shape + 1/2
  double constant_ = 0.0;
  Eigen::ArrayXd center_;
  Eigen::ArrayXd rate_;
  Eigen::ArrayXd spread_;
};

/// Fills PredictiveDensity objects for one (model, beta) pair without
/// allocating, using a table of log Gamma(alpha + n/2 + 1/2) - log Gamma(alpha + n/2).
class PredictiveKernel {
 public:
  PredictiveKernel(const ModelConfig& cfg, double beta, std::int64_t max_n = 0)
      : cfg_(cfg), beta_(beta), gamma_ratio_(static_cast<std::size_t>(max_n + 1)) {
    for (std::size_t n = 0; n < gamma_ratio_.size(); ++n) gamma_ratio_[n] = gamma_ratio(static_cast<std::int64_t>(n));
  }

  const ModelConfig& config() const { return cfg_; }
  double beta() const { return beta_; }
  void set_beta(double beta) { beta_ = beta; }

  void fill(PredictiveDensity& out, const SuffStatsd& s) const {
    detail::check_marginal_dims(s, cfg_);
    const Eigen::Index dim = s.dim();
    if (out.rate_.size() != dim) {
      out.center_.resize(dim);
      out.rate_.resize(dim);
      out.spread_.resize(dim);
    }
    const double n = static_cast<double>(s.n);
    const double shape = cfg_.alpha + 0.5 * n;
    const double ratio = static_cast<std::size_t>(s.n) < gamma_ratio_.size() ? gamma_ratio_[static_cast<std::size_t>(s.n)]
                                                                               : gamma_ratio(s.n);
    double constant = static_cast<double>(dim) * (ratio - 0.5 * std::log(2.0 * std::numbers::pi));
    for (Eigen::Index d = 0; d < dim; ++d) {
      const double c = cfg_.c[d];
      const double m = cfg_.m[d];
      double rate = beta_;
      double center = m;
      if (s.n > 0) {
        const double mean = s.sum[d] / n;
        const double ss = std::max(s.sumsq[d] - s.sum[d] * mean, 0.0);
        const double dev = mean - m;
        rate += 0.5 * ss + c * n * dev * dev / (2.0 * (c + n));
        center = (c * m + s.sum[d]) / (c + n);
      }
      const double precision = c + n;
      out.center_[d] = center;
      out.rate_[d] = rate;
      out.spread_[d] = precision / (2.0 * (precision + 1.0));
      constant += 0.5 * std::log(precision / (precision + 1.0)) + shape * std::log(rate);
    }
    out.exponent_ = shape + 0.5;
    out.constant_ = constant;
  }

  PredictiveDensity operator()(const SuffStatsd& s) const {
    PredictiveDensity out;
    fill(out, s);
    return out;
  }

 private:
  double gamma_ratio(std::int64_t n) const {
    const double shape = cfg_.alpha + 0.5 * static_cast<double>(n);
    return log_gamma(shape + 0.5) - log_gamma(shape);
  }

  ModelConfig cfg_;
  double beta_;
  std::vector<double> gamma_ratio_;
};

inline PredictiveDensity::PredictiveDensity(const SuffStatsd& s, const ModelConfig& cfg, double beta) {
  PredictiveKernel(cfg, beta).fill(*this, s);
}

}  // namespace mfm
