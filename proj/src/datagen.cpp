#include "mfm/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mfm {
namespace {

double component_log_density(const MixtureComponent& c, double x) {
  const double z = (x - c.loc) / c.scale;
  if (c.family == Family::Normal) return -0.5 * z * z - std::log(c.scale) - 0.5 * std::log(2.0 * std::numbers::pi);
  return -std::abs(z) - std::log(2.0 * c.scale);
}

double component_cdf(const MixtureComponent& c, double x) {
  const double z = (x - c.loc) / c.scale;
  if (c.family == Family::Normal) return 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
}

double component_draw(const MixtureComponent& c, Rng& rng) {
  return c.family == Family::Normal ? rng.normal(c.loc, c.scale) : rng.laplace(c.loc, c.scale);
}

std::size_t draw_label(const std::vector<double>& weights, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
    if (u < weights[k]) return k;
    u -= weights[k];
  }
  return weights.size() - 1;
}

}  // namespace

void MixtureSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("mixture: at least one component required");
  if (weights.size() != components.size()) throw std::invalid_argument("mixture: one weight per component required");
  for (const auto& c : components)
    if (!(c.scale > 0.0) || !std::isfinite(c.loc)) throw std::invalid_argument("mixture: scales must be positive");
  for (double w : weights)
    if (!(w >= 0.0)) throw std::invalid_argument("mixture: weights must be nonnegative");
  if (std::abs(std::accumulate(weights.begin(), weights.end(), 0.0) - 1.0) > 1e-12)
    throw std::invalid_argument("mixture: weights must sum to 1");
}

double MixtureSpec::log_density(double x) const {
  double acc = kNegInf;
  for (std::size_t k = 0; k < components.size(); ++k)
    if (weights[k] > 0.0) acc = log_add_exp(acc, std::log(weights[k]) + component_log_density(components[k], x));
  return acc;
}

double MixtureSpec::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < components.size(); ++k) acc += weights[k] * component_cdf(components[k], x);
  return acc;
}

void ContaminationSpec::validate() const {
  base.validate();
  contaminant.validate();
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("contamination: epsilon must lie in [0, 1]");
}

double ContaminationSpec::log_density(double x) const {
  const double a = epsilon < 1.0 ? std::log1p(-epsilon) + base.log_density(x) : kNegInf;
  const double b = epsilon > 0.0 ? std::log(epsilon) + contaminant.log_density(x) : kNegInf;
  return log_add_exp(a, b);
}

double ContaminationSpec::cdf(double x) const { return (1.0 - epsilon) * base.cdf(x) + epsilon * contaminant.cdf(x); }

LabeledSample sample_mixture(const MixtureSpec& spec, Eigen::Index n, Rng& rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_mixture: n must be positive");
  LabeledSample out{DataMatrix(n, 1), std::vector<int>(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t k = draw_label(spec.weights, rng);
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
    out.values(i, 0) = component_draw(spec.components[k], rng);
  }
  return out;
}

ContaminatedSample contaminate(const ContaminationSpec& spec, Eigen::Index n, Rng& rng) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("contaminate: n must be positive");
  ContaminatedSample out{DataMatrix(n, 1), std::vector<bool>(static_cast<std::size_t>(n))};
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool bad = rng.uniform() < spec.epsilon;
    const MixtureSpec& source = bad ? spec.contaminant : spec.base;
    out.from_contaminant[static_cast<std::size_t>(i)] = bad;
    out.values(i, 0) = component_draw(source.components[draw_label(source.weights, rng)], rng);
  }
  return out;
}

DatasetSeries nested_series(DataMatrix full, std::vector<Eigen::Index> sizes, std::uint64_t seed,
                            std::optional<std::vector<int>> labels) {
  if (sizes.empty()) throw std::invalid_argument("nested_series: no sizes given");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("nested_series: sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw std::invalid_argument("nested_series: sizes must be strictly ascending");
  }
  if (sizes.back() > full.rows()) throw std::invalid_argument("nested_series: largest size exceeds the row count");
  if (labels && static_cast<Eigen::Index>(labels->size()) != full.rows())
    throw std::invalid_argument("nested_series: one label per row required");
  return DatasetSeries{std::move(full), std::move(labels), std::move(sizes), seed};
}

DataMatrix standardize_columns(const Eigen::Ref<const DataMatrix>& data) {
  if (data.rows() < 1) throw std::invalid_argument("standardize: empty data");
  DataMatrix out = data;
  for (Eigen::Index d = 0; d < out.cols(); ++d) {
    auto col = out.col(d);
    const double mean = col.mean();
    col.array() -= mean;
    const double sd = std::sqrt(col.squaredNorm() / static_cast<double>(col.size()));
    if (!(sd > 0.0)) throw std::domain_error("standardize: column " + std::to_string(d) + " has zero variance");
    col /= sd;
  }
  return out;
}

DataMatrix log2_standardize(const Eigen::Ref<const DataMatrix>& counts) {
  if ((counts.array() < 0.0).any()) throw std::invalid_argument("log2_standardize: counts must be nonnegative");
  const DataMatrix logged = ((counts.array() + 1.0).log() / std::numbers::ln2).matrix();
  return standardize_columns(logged);
}

EmpiricalHyperparams empirical_hyperparams(const Eigen::Ref<const DataMatrix>& data) {
  if (data.rows() < 2) throw std::invalid_argument("empirical_hyperparams: at least two rows required");
  const Eigen::ArrayXd hi = data.colwise().maxCoeff().transpose();
  const Eigen::ArrayXd lo = data.colwise().minCoeff().transpose();
  const Eigen::ArrayXd range = hi - lo;
  if (!(range > 0.0).all()) throw std::domain_error("empirical_hyperparams: a dimension has zero range");
  return {(hi + lo) / 2.0, range.square().inverse()};
}

MatrixFile parse_matrix(const std::string& text, bool has_header, const std::string& source) {
  MatrixFile out;
  std::vector<double> values;
  Eigen::Index cols = -1;
  Eigen::Index rows = 0;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      std::stringstream fields(line);
      std::string name;
      while (std::getline(fields, name, ',')) out.header.push_back(name);
      cols = static_cast<Eigen::Index>(out.header.size());
      continue;
    }
    Eigen::Index field = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = std::min(line.find(',', pos), line.size());
      const char* first = line.data() + pos;
      const char* last = line.data() + end;
      while (first < last && *first == ' ') ++first;
      while (last > first && last[-1] == ' ') --last;
      double v = 0.0;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc() || res.ptr != last || first == last)
        throw std::runtime_error(source + ":" + std::to_string(line_no) + ": column " + std::to_string(field + 1) +
                                 ": cannot parse '" + std::string(first, last) + "' as a number");
      values.push_back(v);
      ++field;
      if (end == line.size()) break;
      pos = end + 1;
    }
    if (cols < 0) cols = field;
    if (field != cols)
      throw std::runtime_error(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                               " columns, found " + std::to_string(field));
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(source + ": no data rows");
  out.values = Eigen::Map<DataMatrix>(values.data(), rows, cols);
  return out;
}

MatrixFile load_matrix(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_matrix(buf.str(), has_header, path.string());
}

void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const DataMatrix>& values,
                  const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  if (!header.empty()) out << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", values(r, c));
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace mfm
