#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace mfm {

/// Row-major data matrix: one observation per row.
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DataMatrix = Matrix<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Natural log of the gamma function for x > 0.
///
/// Lanczos approximation with g = 7 and nine coefficients; relative error in
/// Gamma is below 1e-15 over the positive axis. Arguments below 0.5 are
/// shifted up with Gamma(x) = Gamma(x + 1) / x.
template <typename Scalar>
Scalar log_gamma(Scalar x) {
  static constexpr std::array<long double, 9> kCoeff = {
      0.99999999999980993227684700473478L,  676.520368121885098567009190444019L,
      -1259.13921672240287047156078755283L, 771.3234287776530788486528258894L,
      -176.61502916214059906584551353999L,  12.507343278686904814458936853287L,
      -0.13857109526572011689554706984971L, 9.984369578019570859563e-6L,
      1.50563273514931155834e-7L};
  static constexpr Scalar kG = Scalar(7);
  static const Scalar kHalfLogTwoPi = Scalar(0.5) * std::log(Scalar(2) * std::numbers::pi_v<Scalar>);

  if (x < Scalar(0.5)) return log_gamma(x + Scalar(1)) - std::log(x);

  const Scalar y = x - Scalar(1);
  Scalar series = Scalar(kCoeff[0]);
  for (int i = 1; i < 9; ++i) series += Scalar(kCoeff[i]) / (y + Scalar(i));
  const Scalar t = y + kG + Scalar(0.5);
  return kHalfLogTwoPi + (y + Scalar(0.5)) * std::log(t) - t + std::log(series);
}

/// log(exp(a) + exp(b)) with max-shift; -inf is absorbing for both arguments.
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

/// log(sum(exp(v))) over an Eigen expression. Returns -inf for empty or all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return -std::numeric_limits<Scalar>::infinity();
  const Scalar hi = v.maxCoeff();
  if (hi == -std::numeric_limits<Scalar>::infinity()) return hi;
  // Scalar exp: Eigen's vectorized exp maps -inf to a denormal, not zero.
  return hi + std::log(v.derived().unaryExpr([hi](Scalar x) { return std::exp(x - hi); }).sum());
}

/// log of the rising factorial a (a+1) ... (a+n-1).
inline double log_rising_factorial(double a, long n) {
  return log_gamma(a + static_cast<double>(n)) - log_gamma(a);
}

/// log of the falling factorial k (k-1) ... (k-t+1); -inf when t > k.
inline double log_falling_factorial(long k, long t) {
  if (t > k) return kNegInf;
  return log_gamma(static_cast<double>(k + 1)) - log_gamma(static_cast<double>(k - t + 1));
}

}  // namespace mfm
