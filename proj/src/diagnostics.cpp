#include "mfm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "mfm/coefficients.hpp"
#include "mfm/marginal.hpp"

namespace mfm {

std::vector<int> canonical_labels(std::span<const int> z) {
  std::map<int, int> relabel;
  std::vector<int> out;
  out.reserve(z.size());
  for (int label : z) {
    auto [it, inserted] = relabel.try_emplace(label, static_cast<int>(relabel.size()));
    out.push_back(it->second);
  }
  return out;
}

namespace {

void accumulate(Eigen::VectorXd& into, const Eigen::VectorXd& add, double weight) {
  if (into.size() < add.size()) into.conservativeResizeLike(Eigen::VectorXd::Zero(add.size()));
  into.head(add.size()) += weight * add;
}

}  // namespace

ExactPosterior exact_posterior_k(const DataMatrix& data, const ModelConfig& cfg, double beta) {
  const auto n = data.rows();
  if (n < 1) throw std::invalid_argument("exact_posterior_k: empty data");
  if (n > kMaxEnumerationSize)
    throw std::invalid_argument("exact_posterior_k: N=" + std::to_string(n) + " exceeds the enumeration cap of " +
                                std::to_string(kMaxEnumerationSize));
  cfg.validate();
  if (data.cols() != cfg.dim()) throw std::invalid_argument("exact_posterior_k: data dimension does not match the model");

  const CoefficientTable table = build_coefficient_table(cfg.count_prior, cfg.gamma, n, n);
  ExactPosterior out;
  Eigen::VectorXd log_t_mass = Eigen::VectorXd::Constant(n, kNegInf);
  std::vector<SuffStatsd> blocks(static_cast<std::size_t>(n), SuffStatsd(data.cols()));

  for_each_set_partition(static_cast<int>(n), [&](const std::vector<int>& rgs, int t) {
    const double log_v = table.log_v(t);
    if (log_v == kNegInf) {
      out.log_weights.push_back(kNegInf);
      return;
    }
    for (int b = 0; b < t; ++b) blocks[static_cast<std::size_t>(b)] = SuffStatsd(data.cols());
    for (Eigen::Index i = 0; i < n; ++i) blocks[static_cast<std::size_t>(rgs[static_cast<std::size_t>(i)])].add(data.row(i));
    double w = log_v;
    for (int b = 0; b < t; ++b) {
      const auto& s = blocks[static_cast<std::size_t>(b)];
      w += log_rising_factorial(cfg.gamma, s.n) + cluster_log_marginal(s, cfg, beta);
    }
    out.log_weights.push_back(w);
    log_t_mass[t - 1] = log_add_exp(log_t_mass[t - 1], w);
  });

  const double log_norm = log_sum_exp(log_t_mass);
  for (double& w : out.log_weights) w -= log_norm;
  // Scalar exp: Eigen's vectorized exp maps -inf to a denormal, not zero.
  out.posterior_t = log_t_mass.unaryExpr([&](double w) { return std::exp(w - log_norm); });

  out.posterior_k = Eigen::VectorXd::Zero(n);
  for (Eigen::Index t = 1; t <= n; ++t) {
    const double pt = out.posterior_t[t - 1];
    if (pt > 0.0) accumulate(out.posterior_k, posterior_k_given_partition(cfg.count_prior, cfg.gamma, n, t), pt);
  }
  return out;
}

KlEstimate mc_kl_estimate(const std::function<double(Rng&)>& sample_f0, const std::function<double(double)>& log_f0,
                          const std::function<double(double)>& log_f, std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("mc_kl_estimate: at least two samples required");
  Rng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const double x = sample_f0(rng);
    const double lf = log_f(x);
    if (lf == kNegInf) throw SupportViolation("mc_kl_estimate: log f is -inf at a draw from f0; KL is infinite");
    const double l0 = log_f0(x);
    if (!std::isfinite(l0) || !std::isfinite(lf)) throw std::domain_error("mc_kl_estimate: non-finite log density");
    const double v = l0 - lf;
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double var = m2 / static_cast<double>(n_samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(n_samples))};
}

std::optional<double> integrated_autocorrelation_time(std::span<const double> series) {
  const auto n = static_cast<Eigen::Index>(series.size());
  if (n < 2) return std::nullopt;
  const Eigen::Map<const Eigen::VectorXd> x(series.data(), n);
  const Eigen::VectorXd centered = x.array() - x.mean();
  const double c0 = centered.squaredNorm() / static_cast<double>(n);
  if (!(c0 > 0.0)) return std::nullopt;
  auto rho = [&](Eigen::Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / (static_cast<double>(n) * c0);
  };
  double tau = -1.0;
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = rho(2 * m) + rho(2 * m + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(tau, 0.0);
}

ChainStats chain_stats(const ChainOutput& out) {
  if (out.trace_t.empty()) throw std::invalid_argument("chain_stats: empty trace");
  ChainStats stats{};
  stats.sm_acceptance_rate =
      out.sm_proposed == 0 ? 0.0 : static_cast<double>(out.sm_accepted) / static_cast<double>(out.sm_proposed);
  const std::vector<double> t(out.trace_t.begin(), out.trace_t.end());
  stats.autocorrelation_time_t = integrated_autocorrelation_time(t);
  return stats;
}

Eigen::VectorXd rao_blackwell_posterior_k(const std::vector<long>& trace_t, const ComponentCountPrior& prior,
                                          double gamma, long n) {
  if (trace_t.empty()) throw std::invalid_argument("rao_blackwell_posterior_k: empty trace");
  std::map<long, long> counts;
  for (long t : trace_t) ++counts[t];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(1);
  for (const auto& [t, count] : counts)
    accumulate(out, posterior_k_given_partition(prior, gamma, n, t),
               static_cast<double>(count) / static_cast<double>(trace_t.size()));
  return out;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  const Eigen::Index len = std::max(p.size(), q.size());
  Eigen::VectorXd a = Eigen::VectorXd::Zero(len);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(len);
  a.head(p.size()) = p;
  b.head(q.size()) = q;
  return 0.5 * (a - b).cwiseAbs().sum();
}

}  // namespace mfm
