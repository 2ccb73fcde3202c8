#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>

namespace mfm {

/// Count, per-dimension sum and per-dimension sum of squares of a cluster's members.
template <typename Scalar>
struct SuffStats {
  using Vector = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  std::int64_t n = 0;
  Vector sum;
  Vector sumsq;

  SuffStats() = default;
  explicit SuffStats(Eigen::Index dim) : sum(Vector::Zero(dim)), sumsq(Vector::Zero(dim)) {}

  Eigen::Index dim() const { return sum.size(); }
  bool empty() const { return n == 0; }

  template <typename Derived>
  void add(const Eigen::DenseBase<Derived>& x) {
    check_dim(x.size());
    ++n;
    for (Eigen::Index d = 0; d < dim(); ++d) {
      const Scalar v = Scalar(x.derived().coeff(d));
      sum[d] += v;
      sumsq[d] += v * v;
    }
  }

  template <typename Derived>
  void remove(const Eigen::DenseBase<Derived>& x) {
    if (n == 0) throw std::logic_error("SuffStats::remove on empty statistics");
    check_dim(x.size());
    if (--n == 0) {
      sum.setZero();
      sumsq.setZero();
      return;
    }
    for (Eigen::Index d = 0; d < dim(); ++d) {
      const Scalar v = Scalar(x.derived().coeff(d));
      sum[d] -= v;
      sumsq[d] -= v * v;
    }
  }

  /// sum_i (x_id - mean_d)^2, clamped at zero against cancellation.
  Vector centered_sumsq() const {
    if (n == 0) return Vector::Zero(dim());
    return (sumsq - sum.square() / Scalar(n)).max(Scalar(0));
  }

  Vector mean() const { return n == 0 ? Vector::Zero(dim()) : Vector(sum / Scalar(n)); }

  SuffStats& operator+=(const SuffStats& other) {
    check_dim(other.dim());
    n += other.n;
    sum += other.sum;
    sumsq += other.sumsq;
    return *this;
  }

  friend SuffStats operator+(SuffStats a, const SuffStats& b) { return a += b; }

 private:
  void check_dim(Eigen::Index d) const {
    if (d != dim()) throw std::invalid_argument("SuffStats: dimension mismatch");
  }
};

using SuffStatsd = SuffStats<double>;

template <typename Scalar, typename Derived>
SuffStats<Scalar> suffstats_add(SuffStats<Scalar> s, const Eigen::DenseBase<Derived>& x) {
  s.add(x);
  return s;
}

template <typename Scalar, typename Derived>
SuffStats<Scalar> suffstats_remove(SuffStats<Scalar> s, const Eigen::DenseBase<Derived>& x) {
  s.remove(x);
  return s;
}

/// Statistics of every row of `rows`.
template <typename Derived>
SuffStats<typename Derived::Scalar> suffstats_of(const Eigen::DenseBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  SuffStats<Scalar> s(rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) s.add(rows.row(i));
  return s;
}

}  // namespace mfm
