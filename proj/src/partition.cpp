#include "mfm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfm {

PartitionState::PartitionState(const ModelConfig& cfg, Eigen::Index num_points, double beta)
    : kernel_(cfg, beta, num_points), dim_(cfg.dim()), z_(static_cast<std::size_t>(num_points), kUnassigned) {
  kernel_.fill(prior_predictive_, SuffStatsd(dim_));
}

bool PartitionState::occupied(int id) const {
  return id >= 0 && static_cast<std::size_t>(id) < slots_.size() && slot(id).position >= 0;
}

int PartitionState::open_cluster() {
  int id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
  } else {
    id = static_cast<int>(slots_.size());
    slots_.emplace_back();
  }
  Slot& s = slot(id);
  if (s.stats.dim() != dim_) s.stats = SuffStatsd(dim_);
  s.predictive = prior_predictive_;
  s.position = static_cast<long>(active_.size());
  active_.push_back(id);
  return id;
}

void PartitionState::assign(Eigen::Index i, const Eigen::Ref<const Eigen::RowVectorXd>& x, int id) {
  auto& zi = z_[static_cast<std::size_t>(i)];
  if (zi != kUnassigned) throw std::logic_error("PartitionState::assign: point already assigned");
  if (!occupied(id)) throw std::logic_error("PartitionState::assign: cluster is not open");
  zi = id;
  slot(id).stats.add(x);
  refresh(id);
}

void PartitionState::unassign(Eigen::Index i, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  auto& zi = z_[static_cast<std::size_t>(i)];
  if (zi == kUnassigned) throw std::logic_error("PartitionState::unassign: point is not assigned");
  const int id = zi;
  zi = kUnassigned;
  slot(id).stats.remove(x);
  if (slot(id).stats.empty())
    close_cluster(id);
  else
    refresh(id);
}

void PartitionState::set_stats(int id, SuffStatsd stats) {
  if (!occupied(id)) throw std::logic_error("PartitionState::set_stats: cluster is not open");
  slot(id).stats = std::move(stats);
  refresh(id);
}

void PartitionState::relabel(Eigen::Index i, int id) { z_[static_cast<std::size_t>(i)] = id; }

void PartitionState::close_cluster(int id) {
  Slot& s = slot(id);
  if (s.position < 0) throw std::logic_error("PartitionState::close_cluster: cluster is not open");
  const int last = active_.back();
  active_[static_cast<std::size_t>(s.position)] = last;
  slot(last).position = s.position;
  active_.pop_back();
  s.position = -1;
  s.stats.n = 0;
  s.stats.sum.setZero();
  s.stats.sumsq.setZero();
  retired_.push_back(id);
}

void PartitionState::set_beta(double beta) {
  kernel_.set_beta(beta);
  kernel_.fill(prior_predictive_, SuffStatsd(dim_));
  for (int id : active_) refresh(id);
}

void PartitionState::recycle_ids() {
  // Reverse so that the lowest retired id is handed out first.
  free_.insert(free_.end(), retired_.rbegin(), retired_.rend());
  retired_.clear();
}

void PartitionState::refresh(int id) { kernel_.fill(slot(id).predictive, slot(id).stats); }

double PartitionState::audit(const DataMatrix& data) const {
  if (data.rows() != size()) throw std::logic_error("audit: data row count does not match the partition");
  std::vector<SuffStatsd> recount(slots_.size(), SuffStatsd(dim_));
  for (Eigen::Index i = 0; i < size(); ++i) {
    const int id = assignment(i);
    if (!occupied(id)) throw std::logic_error("audit: point assigned to a closed cluster");
    recount[static_cast<std::size_t>(id)].add(data.row(i));
  }
  std::int64_t total = 0;
  double worst = 0.0;
  for (int id : active_) {
    const auto& have = slot(id).stats;
    const auto& want = recount[static_cast<std::size_t>(id)];
    if (have.n != want.n || have.n == 0) throw std::logic_error("audit: cluster count mismatch");
    total += have.n;
    worst = std::max({worst, (have.sum - want.sum).abs().maxCoeff(), (have.sumsq - want.sumsq).abs().maxCoeff()});
  }
  if (total != size()) throw std::logic_error("audit: cluster sizes do not sum to N");
  return worst;
}

}  // namespace mfm
