#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mfm/marginal.hpp"
#include "mfm/model_config.hpp"
#include "mfm/numeric.hpp"
#include "mfm/suff_stats.hpp"

namespace mfm {

/// Cluster assignments plus per-cluster statistics and cached predictives.
///
/// Cluster ids index a slot vector. Ids freed by `unassign` are parked until
/// `recycle_ids` is called, so an id is never reused within one sweep.
/// `active()` lists occupied ids in a deterministic order.
class PartitionState {
 public:
  static constexpr int kUnassigned = -1;

  PartitionState(const ModelConfig& cfg, Eigen::Index num_points, double beta);

  Eigen::Index size() const { return static_cast<Eigen::Index>(z_.size()); }
  Eigen::Index dim() const { return dim_; }
  long num_clusters() const { return static_cast<long>(active_.size()); }
  double beta() const { return kernel_.beta(); }
  const PredictiveKernel& kernel() const { return kernel_; }

  int assignment(Eigen::Index i) const { return z_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& assignments() const { return z_; }
  const std::vector<int>& active() const { return active_; }
  bool occupied(int id) const;

  const SuffStatsd& stats(int id) const { return slot(id).stats; }
  std::int64_t count(int id) const { return slot(id).stats.n; }
  const PredictiveDensity& predictive(int id) const { return slot(id).predictive; }
  /// Predictive of an empty cluster.
  const PredictiveDensity& prior_predictive() const { return prior_predictive_; }

  /// Opens an empty cluster and returns its id.
  int open_cluster();
  /// Adds point i (currently unassigned) to cluster `id`.
  void assign(Eigen::Index i, const Eigen::Ref<const Eigen::RowVectorXd>& x, int id);
  /// Removes point i from its cluster; the cluster is closed if emptied.
  void unassign(Eigen::Index i, const Eigen::Ref<const Eigen::RowVectorXd>& x);
  /// Replaces a cluster's statistics wholesale (used when applying split/merge proposals).
  void set_stats(int id, SuffStatsd stats);
  /// Moves point i to cluster `id` without touching statistics; pair with set_stats.
  void relabel(Eigen::Index i, int id);
  /// Closes a cluster that no point references any more.
  void close_cluster(int id);

  void set_beta(double beta);
  void recycle_ids();

  /// Largest absolute deviation between stored statistics and a from-scratch
  /// recount; throws std::logic_error if assignments and counts disagree.
  double audit(const DataMatrix& data) const;

 private:
  struct Slot {
    SuffStatsd stats;
    PredictiveDensity predictive;
    long position = -1;  // index into active_, -1 when free
  };

  Slot& slot(int id) { return slots_[static_cast<std::size_t>(id)]; }
  const Slot& slot(int id) const { return slots_[static_cast<std::size_t>(id)]; }
  void refresh(int id);

  PredictiveKernel kernel_;
  Eigen::Index dim_;
  std::vector<int> z_;
  std::vector<Slot> slots_;
  std::vector<int> active_;
  std::vector<int> free_;
  std::vector<int> retired_;
  PredictiveDensity prior_predictive_;
};

}  // namespace mfm
