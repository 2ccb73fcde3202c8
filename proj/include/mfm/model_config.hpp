#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <variant>

#include "mfm/count_prior.hpp"

namespace mfm {

/// Gamma(shape, rate) hyperprior on the precision rate beta.
struct BetaHyperprior {
  double shape;
  double rate;
  double mean() const { return shape / rate; }
};

/// Hyperparameters of the diagonal Normal-Gamma mixture.
///
/// Per cluster j and dimension d:
///   tau_jd ~ Gamma(alpha, beta)            (shape-rate)
///   theta_jd | tau_jd ~ N(m_d, 1 / (c_d tau_jd))
/// with the Dirichlet(gamma, ..., gamma) weights and a prior on k.
struct ModelConfig {
  Eigen::ArrayXd m;
  Eigen::ArrayXd c;
  double alpha = 1.0;
  std::variant<double, BetaHyperprior> beta = 1.0;
  double gamma = 1.0;
  ComponentCountPrior count_prior = Geometric{0.1};

  Eigen::Index dim() const { return m.size(); }
  bool has_beta_hyperprior() const { return std::holds_alternative<BetaHyperprior>(beta); }

  double fixed_beta() const {
    if (auto* b = std::get_if<double>(&beta)) return *b;
    throw std::logic_error("ModelConfig: beta is random, not fixed");
  }
  const BetaHyperprior& beta_hyperprior() const {
    if (auto* h = std::get_if<BetaHyperprior>(&beta)) return *h;
    throw std::logic_error("ModelConfig: beta is fixed, no hyperprior configured");
  }
  /// Fixed beta, or the prior mean of beta when it is random.
  double beta_mean() const { return has_beta_hyperprior() ? beta_hyperprior().mean() : fixed_beta(); }

  void validate() const {
    if (m.size() == 0) throw std::invalid_argument("ModelConfig: dimension must be positive");
    if (c.size() != m.size()) throw std::invalid_argument("ModelConfig: c and m must have equal length");
    if (!(c > 0.0).all()) throw std::invalid_argument("ModelConfig: c must be positive");
    if (!m.allFinite()) throw std::invalid_argument("ModelConfig: m must be finite");
    if (!(alpha > 0.0)) throw std::invalid_argument("ModelConfig: alpha must be positive");
    if (!(gamma > 0.0)) throw std::invalid_argument("ModelConfig: gamma must be positive");
    if (auto* b = std::get_if<double>(&beta); b && !(*b > 0.0))
      throw std::invalid_argument("ModelConfig: beta must be positive");
    if (auto* h = std::get_if<BetaHyperprior>(&beta); h && !(h->shape > 0.0 && h->rate > 0.0))
      throw std::invalid_argument("ModelConfig: beta hyperprior shape and rate must be positive");
  }
};

/// Mean-precision scale c for which theta | tau ~ N(m, 1/(c tau)) has the
/// marginal prior variance 1/kappa of an independent N(m, 1/kappa) prior:
/// c = kappa beta / (alpha - 1). For alpha <= 1 that variance is infinite and
/// c = kappa beta / alpha is used instead.
inline Eigen::ArrayXd mean_precision_scale(const Eigen::ArrayXd& kappa, double alpha, double beta_mean) {
  const double denom = alpha > 1.0 ? alpha - 1.0 : alpha;
  return kappa * beta_mean / denom;
}

}  // namespace mfm
