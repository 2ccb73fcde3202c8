#include "mfm/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mfm {

void ChainConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("chain: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw std::invalid_argument("chain: burn_in must lie in [0, iterations)");
  if (splitmerge_per_sweep < 0) throw std::invalid_argument("chain: splitmerge_per_sweep must be nonnegative");
  if (restricted_scans < 1) throw std::invalid_argument("chain: restricted_scans must be positive");
  if (record_every < 1) throw std::invalid_argument("chain: record_every must be positive");
  if (audit_every < 0) throw std::invalid_argument("chain: audit_every must be nonnegative");
}

Eigen::VectorXd histogram_k(const std::vector<long>& draws) {
  if (draws.empty()) throw std::invalid_argument("histogram_k: no draws");
  const long kmax = *std::max_element(draws.begin(), draws.end());
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(kmax);
  for (long k : draws) hist[k - 1] += 1.0;
  return hist / static_cast<double>(draws.size());
}

PartitionState init_partition(const DataMatrix& data, const ModelConfig& cfg, std::uint64_t seed) {
  if (data.rows() < 1) throw std::invalid_argument("init_partition: empty data");
  cfg.validate();
  if (data.cols() != cfg.dim()) throw std::invalid_argument("init_partition: data dimension does not match the model");
  double beta;
  if (cfg.has_beta_hyperprior()) {
    Rng rng(seed, streams::kInit);
    const auto& h = cfg.beta_hyperprior();
    beta = rng.gamma(h.shape, h.rate);
  } else {
    beta = cfg.fixed_beta();
  }
  PartitionState state(cfg, data.rows(), beta);
  const int id = state.open_cluster();
  SuffStatsd all = suffstats_of(data);
  for (Eigen::Index i = 0; i < data.rows(); ++i) state.relabel(i, id);
  state.set_stats(id, std::move(all));
  return state;
}

namespace {

double eval_predictive(const PredictiveDensity& p, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  return x.size() == 1 ? p.scalar(x[0]) : p(x);
}

double new_cluster_log_factor(long t, double gamma, CoefficientTable& table) {
  if (t == 0) return 0.0;
  table.extend(t + 1);
  return std::log(gamma) + log_v_ratio(table, t);
}

}  // namespace

Eigen::VectorXd urn_log_weights(const PartitionState& state, const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                const ModelConfig& cfg, CoefficientTable& table) {
  const auto& ids = state.active();
  const long t = state.num_clusters();
  Eigen::VectorXd w(t + 1);
  for (long c = 0; c < t; ++c) {
    const int id = ids[static_cast<std::size_t>(c)];
    w[c] = std::log(static_cast<double>(state.count(id)) + cfg.gamma) + eval_predictive(state.predictive(id), x);
  }
  const double factor = new_cluster_log_factor(t, cfg.gamma, table);
  w[t] = factor == kNegInf ? kNegInf : factor + eval_predictive(state.prior_predictive(), x);
  return w;
}

void gibbs_sweep(PartitionState& state, const DataMatrix& data, const ModelConfig& cfg, CoefficientTable& table,
                 Rng& rng) {
  state.recycle_ids();
  std::vector<double> weights;
  std::vector<int> ids;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const auto x = data.row(i);
    state.unassign(i, x);
    const long t = state.num_clusters();
    weights.resize(static_cast<std::size_t>(t + 1));
    ids.assign(state.active().begin(), state.active().end());
    if (x.size() == 1) {
      const double xs = x[0];
      for (long c = 0; c < t; ++c) {
        const int id = ids[static_cast<std::size_t>(c)];
        weights[static_cast<std::size_t>(c)] =
            std::log(static_cast<double>(state.count(id)) + cfg.gamma) + state.predictive(id).scalar(xs);
      }
    } else {
      for (long c = 0; c < t; ++c) {
        const int id = ids[static_cast<std::size_t>(c)];
        weights[static_cast<std::size_t>(c)] =
            std::log(static_cast<double>(state.count(id)) + cfg.gamma) + state.predictive(id)(x);
      }
    }
    const double factor = new_cluster_log_factor(t, cfg.gamma, table);
    weights[static_cast<std::size_t>(t)] =
        factor == kNegInf ? kNegInf : factor + eval_predictive(state.prior_predictive(), x);

    const std::size_t pick = rng.categorical_log(weights);
    const int target = pick == static_cast<std::size_t>(t) ? state.open_cluster() : ids[pick];
    state.assign(i, x, target);
  }
}

double restricted_scan(RestrictedPair& pair, const DataMatrix& data, const PredictiveKernel& kernel, Rng& rng,
                       const std::vector<std::uint8_t>* forced) {
  if (forced && forced->size() != pair.members.size())
    throw std::invalid_argument("restricted_scan: forced assignment has the wrong length");
  const double gamma = kernel.config().gamma;
  PredictiveDensity pred[2] = {kernel(pair.stats[0]), kernel(pair.stats[1])};
  double log_q = 0.0;
  for (std::size_t s = 0; s < pair.members.size(); ++s) {
    const auto x = data.row(pair.members[s]);
    const int from = pair.side[s];
    pair.stats[from].remove(x);
    kernel.fill(pred[from], pair.stats[from]);

    double w[2];
    for (int a = 0; a < 2; ++a)
      w[a] = std::log(static_cast<double>(pair.stats[a].n) + gamma) + eval_predictive(pred[a], x);
    const double norm = log_add_exp(w[0], w[1]);
    int to;
    if (forced) {
      to = (*forced)[s];
    } else {
      to = std::log(rng.uniform()) < w[0] - norm ? 0 : 1;
    }
    log_q += w[to] - norm;
    pair.side[s] = static_cast<std::uint8_t>(to);
    pair.stats[to].add(x);
    kernel.fill(pred[to], pair.stats[to]);
  }
  return log_q;
}

double log_split_ratio(const SuffStatsd& part_a, const SuffStatsd& part_b, long t_merged, const ModelConfig& cfg,
                       double beta, CoefficientTable& table) {
  table.extend(t_merged + 1);
  const double prior_t = log_v_ratio(table, t_merged);
  if (prior_t == kNegInf) return kNegInf;
  const SuffStatsd merged = part_a + part_b;
  const double prior_sizes = log_rising_factorial(cfg.gamma, part_a.n) + log_rising_factorial(cfg.gamma, part_b.n) -
                             log_rising_factorial(cfg.gamma, merged.n);
  const double lik = cluster_log_marginal(part_a, cfg, beta) + cluster_log_marginal(part_b, cfg, beta) -
                     cluster_log_marginal(merged, cfg, beta);
  return prior_t + prior_sizes + lik;
}

bool split_merge_move(PartitionState& state, const DataMatrix& data, const ModelConfig& cfg, CoefficientTable& table,
                      Rng& rng, int restricted_scans) {
  const auto n = static_cast<std::uint64_t>(data.rows());
  if (n < 2) throw std::invalid_argument("split_merge_move: needs at least two observations");
  const auto i = static_cast<Eigen::Index>(rng.uniform_int(n));
  auto j = static_cast<Eigen::Index>(rng.uniform_int(n - 1));
  if (j >= i) ++j;

  const int ci = state.assignment(i);
  const int cj = state.assignment(j);
  const bool split = ci == cj;
  const long t = state.num_clusters();
  const double beta = state.beta();

  if (split) {
    table.extend(t + 1);
    if (table.log_v(t + 1) == kNegInf) return false;
  }

  RestrictedPair pair;
  pair.stats[0] = SuffStatsd(data.cols());
  pair.stats[1] = SuffStatsd(data.cols());
  pair.stats[0].add(data.row(i));
  pair.stats[1].add(data.row(j));
  for (Eigen::Index k = 0; k < data.rows(); ++k) {
    if (k == i || k == j) continue;
    const int ck = state.assignment(k);
    if (ck != ci && ck != cj) continue;
    pair.members.push_back(k);
    const std::uint8_t s = rng.coin() ? 1 : 0;
    pair.side.push_back(s);
    pair.stats[s].add(data.row(k));
  }
  for (int scan = 0; scan < restricted_scans; ++scan) restricted_scan(pair, data, state.kernel(), rng);

  if (split) {
    const double log_q = restricted_scan(pair, data, state.kernel(), rng);
    const double log_accept = log_split_ratio(pair.stats[0], pair.stats[1], t, cfg, beta, table) - log_q;
    if (!(std::log(rng.uniform()) < log_accept)) return false;
    const int fresh = state.open_cluster();
    state.relabel(i, fresh);
    for (std::size_t s = 0; s < pair.members.size(); ++s)
      if (pair.side[s] == 0) state.relabel(pair.members[s], fresh);
    state.set_stats(fresh, std::move(pair.stats[0]));
    state.set_stats(ci, std::move(pair.stats[1]));
    return true;
  }

  std::vector<std::uint8_t> current(pair.members.size());
  for (std::size_t s = 0; s < pair.members.size(); ++s)
    current[s] = state.assignment(pair.members[s]) == ci ? 0 : 1;
  const double log_q = restricted_scan(pair, data, state.kernel(), rng, &current);
  const double log_accept = log_q - log_split_ratio(state.stats(ci), state.stats(cj), t - 1, cfg, beta, table);
  if (!(std::log(rng.uniform()) < log_accept)) return false;
  SuffStatsd merged = state.stats(ci) + state.stats(cj);
  for (Eigen::Index k = 0; k < data.rows(); ++k)
    if (state.assignment(k) == cj) state.relabel(k, ci);
  state.close_cluster(cj);
  state.set_stats(ci, std::move(merged));
  return true;
}

Eigen::MatrixXd draw_cluster_precisions(const PartitionState& state, const ModelConfig& cfg, Rng& rng) {
  const auto& ids = state.active();
  Eigen::MatrixXd tau(static_cast<Eigen::Index>(ids.size()), state.dim());
  for (std::size_t c = 0; c < ids.size(); ++c) {
    const auto& s = state.stats(ids[c]);
    const double shape = cfg.alpha + 0.5 * static_cast<double>(s.n);
    const Eigen::ArrayXd rate = detail::posterior_rate(s, cfg, state.beta());
    for (Eigen::Index d = 0; d < state.dim(); ++d) tau(static_cast<Eigen::Index>(c), d) = rng.gamma(shape, rate[d]);
  }
  return tau;
}

BetaHyperprior beta_conditional(const ModelConfig& cfg, const Eigen::MatrixXd& tau) {
  const auto& h = cfg.beta_hyperprior();
  return {h.shape + static_cast<double>(tau.size()) * cfg.alpha, h.rate + tau.sum()};
}

double resample_beta(PartitionState& state, const ModelConfig& cfg, Rng& rng) {
  const BetaHyperprior post = beta_conditional(cfg, draw_cluster_precisions(state, cfg, rng));
  const double beta = rng.gamma(post.shape, post.rate);
  state.set_beta(beta);
  return beta;
}

long ComponentCountSampler::draw(long t, Rng& rng) {
  auto it = cdf_.find(t);
  if (it == cdf_.end()) {
    const Eigen::VectorXd p = posterior_k_given_partition(prior_, gamma_, n_, t, tol_);
    std::vector<double> cdf(static_cast<std::size_t>(p.size()));
    double acc = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) cdf[static_cast<std::size_t>(k)] = acc += p[k];
    cdf.back() = 1.0;
    it = cdf_.emplace(t, std::move(cdf)).first;
  }
  const auto& cdf = it->second;
  const double u = rng.uniform();
  const auto pos = std::upper_bound(cdf.begin() + (t - 1), cdf.end(), u);
  return static_cast<long>(std::min<std::ptrdiff_t>(pos - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1)) + 1;
}

long draw_k_given_t(const ComponentCountPrior& prior, double gamma, long n, long t, Rng& rng) {
  ComponentCountSampler sampler(prior, gamma, n);
  return sampler.draw(t, rng);
}

ChainOutput run_chain(const DataMatrix& data, const ModelConfig& cfg, const ChainConfig& chain) {
  chain.validate();
  const auto start = std::chrono::steady_clock::now();
  const long n = static_cast<long>(data.rows());
  PartitionState state = init_partition(data, cfg, chain.seed);
  CoefficientTable table = build_coefficient_table(cfg.count_prior, cfg.gamma, n, default_t_max(cfg.count_prior, n));
  ComponentCountSampler count_sampler(cfg.count_prior, cfg.gamma, n);
  Rng rng(chain.seed, streams::kChain);

  ChainOutput out;
  const auto records = static_cast<std::size_t>(chain.num_records());
  out.trace_t.reserve(records);
  out.trace_k.reserve(records);
  out.trace_beta.reserve(records);

  for (std::int64_t iter = 0; iter < chain.iterations; ++iter) {
    gibbs_sweep(state, data, cfg, table, rng);
    if (n >= 2) {
      for (int m = 0; m < chain.splitmerge_per_sweep; ++m) {
        ++out.sm_proposed;
        if (split_merge_move(state, data, cfg, table, rng, chain.restricted_scans)) ++out.sm_accepted;
      }
    }
    if (cfg.has_beta_hyperprior()) resample_beta(state, cfg, rng);
    if (chain.audit_every > 0 && (iter + 1) % chain.audit_every == 0) {
      const double dev = state.audit(data);
      if (dev > 1e-8 * std::max(1.0, data.cwiseAbs2().sum()))
        throw std::logic_error("run_chain: cluster statistics drifted by " + std::to_string(dev));
    }
    if (iter >= chain.burn_in && (iter - chain.burn_in) % chain.record_every == 0) {
      const long t = state.num_clusters();
      out.trace_t.push_back(t);
      out.trace_k.push_back(count_sampler.draw(t, rng));
      out.trace_beta.push_back(state.beta());
    }
  }
  out.posterior_k = histogram_k(out.trace_k);
  out.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace mfm
