#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mfm/datagen.hpp"
#include "mfm/rng.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;

namespace {

mfm::MixtureSpec two_laplace() {
  return {{{mfm::Family::Laplace, -5.0, 1.5}, {mfm::Family::Laplace, 5.0, 1.0}}, {0.4, 0.6}};
}

mfm::MixtureSpec single(mfm::Family f, double loc, double scale) { return {{{f, loc, scale}}, {1.0}}; }

}  // namespace

TEST_CASE("single-component mixture labels everything zero") {
  mfm::Rng rng(1);
  const auto s = mfm::sample_mixture(single(mfm::Family::Normal, 0.0, 1.0), 100, rng);
  CHECK(s.values.rows() == 100);
  CHECK(s.values.cols() == 1);
  for (int l : s.labels) CHECK(l == 0);
}

TEST_CASE("normal sample mean obeys the CLT bound") {
  mfm::Rng rng(2);
  const int n = 100000;
  const auto s = mfm::sample_mixture(single(mfm::Family::Normal, 0.0, 1.0), n, rng);
  CHECK(std::abs(s.values.mean()) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("labels follow the weights and values follow the components") {
  mfm::Rng rng(3);
  const int n = 50000;
  const auto spec = two_laplace();
  const auto s = mfm::sample_mixture(spec, n, rng);
  double ones = 0;
  for (int l : s.labels) ones += l;
  CHECK(std::abs(ones / n - 0.6) <= 3.0 * std::sqrt(0.6 * 0.4 / n));
  std::vector<double> all(s.values.data(), s.values.data() + n);
  CHECK(oracle::ks_distance(all, [&](double x) { return spec.cdf(x); }) < 0.01);
}

TEST_CASE("mixture density and cdf are consistent") {
  const auto spec = two_laplace();
  // Trapezoid integral of the density reproduces the cdf increment.
  const double a = -7.0, b = 6.0;
  const int steps = 200000;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double x = a + (b - a) * i / steps;
    integral += (i == 0 || i == steps ? 0.5 : 1.0) * std::exp(spec.log_density(x));
  }
  integral *= (b - a) / steps;
  CHECK(integral == doctest::Approx(spec.cdf(b) - spec.cdf(a)).epsilon(1e-6));
  const auto normal = single(mfm::Family::Normal, 1.0, 2.0);
  CHECK(normal.cdf(1.0) == doctest::Approx(0.5));
  CHECK(normal.log_density(1.0) == doctest::Approx(-std::log(2.0 * std::sqrt(2.0 * M_PI))));
}

TEST_CASE("invalid mixtures are rejected") {
  mfm::Rng rng(4);
  mfm::MixtureSpec bad = two_laplace();
  bad.weights = {0.5, 0.6};
  CHECK_THROWS_AS(mfm::sample_mixture(bad, 10, rng), std::invalid_argument);
  bad = two_laplace();
  bad.components[0].scale = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(mfm::MixtureSpec{}.validate(), std::invalid_argument);
}

TEST_CASE("contamination flags") {
  mfm::Rng rng(5);
  mfm::ContaminationSpec spec{two_laplace(), single(mfm::Family::Laplace, 0.0, 1.0), 0.0};
  auto s = mfm::contaminate(spec, 1000, rng);
  CHECK(std::count(s.from_contaminant.begin(), s.from_contaminant.end(), true) == 0);
  spec.epsilon = 1.0;
  s = mfm::contaminate(spec, 1000, rng);
  CHECK(std::count(s.from_contaminant.begin(), s.from_contaminant.end(), true) == 1000);
  spec.epsilon = 0.1;
  const int n = 10000;
  s = mfm::contaminate(spec, n, rng);
  const double frac = static_cast<double>(std::count(s.from_contaminant.begin(), s.from_contaminant.end(), true)) / n;
  CHECK(std::abs(frac - 0.1) <= 3.0 * std::sqrt(0.1 * 0.9 / n));
  spec.epsilon = 1.5;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("generation is deterministic in the seed") {
  mfm::Rng a(6), b(6), c(7);
  const auto x = mfm::sample_mixture(two_laplace(), 500, a).values;
  CHECK(x == mfm::sample_mixture(two_laplace(), 500, b).values);
  CHECK(x != mfm::sample_mixture(two_laplace(), 500, c).values);
}

TEST_CASE("nested series share prefixes") {
  mfm::Rng rng(8);
  const auto full = mfm::sample_mixture(two_laplace(), 200, rng).values;
  const auto series = mfm::nested_series(full, {50, 200});
  CHECK(series.prefix(1).topRows(50) == series.prefix(0));
  CHECK(series.prefix(1) == full);
  const auto whole = mfm::nested_series(full, {200});
  CHECK(whole.prefix(0) == full);
  // Prefixes depend on row order.
  mfm::DataMatrix reversed = full.colwise().reverse();
  CHECK(mfm::nested_series(reversed, {50, 200}).prefix(0) != series.prefix(0));
  CHECK_THROWS_AS(mfm::nested_series(full, {200, 50}), std::invalid_argument);
  CHECK_THROWS_AS(mfm::nested_series(full, {201}), std::invalid_argument);
  CHECK_THROWS_AS(mfm::nested_series(full, {}), std::invalid_argument);
}

TEST_CASE("standardization") {
  mfm::DataMatrix two(2, 1);
  two << 0.0, 3.0;
  const auto z = mfm::standardize_columns(two);
  CHECK(z(0, 0) == doctest::Approx(-1.0));
  CHECK(z(1, 0) == doctest::Approx(1.0));

  mfm::Rng rng(9);
  mfm::DataMatrix data(500, 3);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.gamma(2.0, 0.1) * 100.0;
  const auto s = mfm::standardize_columns(data);
  for (Eigen::Index d = 0; d < 3; ++d) {
    const auto col = s.col(d).array();
    CHECK(std::abs(col.mean()) < 1e-10);
    CHECK(std::abs(std::sqrt((col - col.mean()).square().mean()) - 1.0) < 1e-10);
  }
  CHECK((mfm::standardize_columns(s) - s).cwiseAbs().maxCoeff() < 1e-12);

  const auto logged = mfm::log2_standardize(data);
  const mfm::DataMatrix manual = mfm::standardize_columns(((data.array() + 1.0).log() / std::log(2.0)).matrix());
  CHECK((logged - manual).cwiseAbs().maxCoeff() < 1e-12);

  mfm::DataMatrix flat = mfm::DataMatrix::Constant(4, 1, 2.0);
  CHECK_THROWS_AS(mfm::standardize_columns(flat), std::domain_error);
  CHECK_THROWS_AS(mfm::log2_standardize(-flat), std::invalid_argument);
}

TEST_CASE("empirical hyperparameters") {
  mfm::DataMatrix a(2, 1), b(3, 1);
  a << 0.0, 10.0;
  b << -5.0, 5.0, 1.0;
  auto h = mfm::empirical_hyperparams(a);
  CHECK(h.m[0] == 5.0);
  CHECK(h.kappa[0] == doctest::Approx(0.01));
  h = mfm::empirical_hyperparams(b);
  CHECK(h.m[0] == 0.0);
  CHECK(h.kappa[0] == doctest::Approx(0.01));
  mfm::DataMatrix same = mfm::DataMatrix::Constant(3, 1, 4.0);
  CHECK_THROWS(mfm::empirical_hyperparams(same));
}

TEST_CASE("matrix parsing") {
  const auto m = mfm::parse_matrix("1,2\n3,4\n", false);
  REQUIRE(m.values.rows() == 2);
  CHECK(m.values(0, 1) == 2.0);
  CHECK(m.values(1, 0) == 3.0);

  const auto h = mfm::parse_matrix("a,b\n1.5,-2e3\n", true);
  CHECK(h.header == std::vector<std::string>{"a", "b"});
  CHECK(h.values(0, 1) == -2000.0);

  try {
    mfm::parse_matrix("1,2\n3\n", false, "data.csv");
    FAIL("ragged input accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("data.csv:2") != std::string::npos);
  }
  try {
    mfm::parse_matrix("1,2\n3,x\n", false, "data.csv");
    FAIL("non-numeric input accepted");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("data.csv:2: column 2") != std::string::npos);
  }
  CHECK_THROWS(mfm::parse_matrix("", false));
}

TEST_CASE("matrix files round-trip exactly") {
  mfm::Rng rng(10);
  mfm::DataMatrix data(20, 3);
  for (Eigen::Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal(0.0, 1e3) / 7.0;
  const fs::path path = fs::temp_directory_path() / "mfm_roundtrip_test.csv";
  mfm::write_matrix(path, data, {"x", "y", "z"});
  const auto back = mfm::load_matrix(path, true);
  CHECK(back.values == data);
  CHECK(back.header == std::vector<std::string>{"x", "y", "z"});
  fs::remove(path);
  CHECK_THROWS(mfm::load_matrix(path, false));
}
