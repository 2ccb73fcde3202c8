#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mfm/numeric.hpp"
#include "mfm/rng.hpp"

namespace mfm {

enum class Family { Normal, Laplace };

/// For Normal, `scale` is the standard deviation; for Laplace it is the scale b.
struct MixtureComponent {
  Family family;
  double loc;
  double scale;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
  std::vector<double> weights;

  void validate() const;
  double log_density(double x) const;
  double cdf(double x) const;
};

struct ContaminationSpec {
  MixtureSpec base;
  MixtureSpec contaminant;
  double epsilon;

  void validate() const;
  double log_density(double x) const;
  double cdf(double x) const;
};

struct LabeledSample {
  DataMatrix values;
  std::vector<int> labels;
};

struct ContaminatedSample {
  DataMatrix values;
  std::vector<bool> from_contaminant;
};

/// n univariate draws: labels from the weights, values from the labelled
/// component (Laplace by inverse CDF, Normal by the Marsaglia polar method).
LabeledSample sample_mixture(const MixtureSpec& spec, Eigen::Index n, Rng& rng);

/// n draws from (1 - epsilon) base + epsilon contaminant.
ContaminatedSample contaminate(const ContaminationSpec& spec, Eigen::Index n, Rng& rng);

/// A dataset and a ladder of prefix sizes; the dataset of size sizes[i] is
/// the first sizes[i] rows of `full`.
struct DatasetSeries {
  DataMatrix full;
  std::optional<std::vector<int>> labels;
  std::vector<Eigen::Index> sizes;
  std::uint64_t seed = 0;

  DataMatrix prefix(std::size_t which) const { return full.topRows(sizes.at(which)); }
};

/// Throws std::invalid_argument unless sizes are strictly ascending, positive
/// and no larger than the row count.
DatasetSeries nested_series(DataMatrix full, std::vector<Eigen::Index> sizes, std::uint64_t seed = 0,
                            std::optional<std::vector<int>> labels = std::nullopt);

/// Per column: center to mean zero and scale to unit population standard
/// deviation. Throws std::domain_error on a zero-variance column.
DataMatrix standardize_columns(const Eigen::Ref<const DataMatrix>& data);

/// log2(1 + x) entrywise, then standardize_columns. Entries must be >= 0.
DataMatrix log2_standardize(const Eigen::Ref<const DataMatrix>& counts);

struct EmpiricalHyperparams {
  Eigen::ArrayXd m;
  Eigen::ArrayXd kappa;
};

/// Per dimension: m = (max + min) / 2 and kappa = (max - min)^-2.
EmpiricalHyperparams empirical_hyperparams(const Eigen::Ref<const DataMatrix>& data);

struct MatrixFile {
  DataMatrix values;
  std::vector<std::string> header;
};

/// Reads a comma-separated numeric matrix. With `has_header` the first line
/// is taken as column names. Errors name the offending line and column.
MatrixFile load_matrix(const std::filesystem::path& path, bool has_header);
MatrixFile parse_matrix(const std::string& text, bool has_header, const std::string& source = "<string>");

/// Writes values with 17 significant digits so that load_matrix round-trips exactly.
void write_matrix(const std::filesystem::path& path, const Eigen::Ref<const DataMatrix>& values,
                  const std::vector<std::string>& header = {});

}  // namespace mfm
