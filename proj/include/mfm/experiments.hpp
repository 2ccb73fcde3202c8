#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mfm/config.hpp"
#include "mfm/datagen.hpp"
#include "mfm/model_config.hpp"
#include "mfm/sampler.hpp"

namespace mfm {

enum class PriorMode { Fixed, VaryingWithN, Bounded };

std::string to_string(PriorMode mode);
PriorMode parse_prior_mode(const std::string& text);

struct FileSource {
  std::filesystem::path path;
  bool header = false;
  bool log2_standardize = false;
};

using DataSource = std::variant<MixtureSpec, ContaminationSpec, FileSource>;

/// A hyperparameter that is either fixed or computed from data by empirical_hyperparams.
struct Setting {
  std::optional<double> value;  // nullopt: empirical
};

/// Model settings before data-dependent quantities are resolved.
struct ModelTemplate {
  double alpha = 2.0;
  double gamma = 1.0;
  Setting m;
  Setting kappa;
  std::optional<double> c;  // overrides the kappa mapping when set
  std::optional<double> beta;  // fixed beta; otherwise Gamma(beta_shape, beta_rate)
  double beta_shape = 0.2;
  std::optional<double> beta_rate;  // nullopt: 10 / kappa
  ComponentCountPrior count_prior = Geometric{0.1};
};

struct SweepConfig {
  std::string dataset = "dataset";
  DataSource source;
  Eigen::Index rows = 0;  // rows generated for synthetic sources; 0 means max(sizes)
  std::vector<Eigen::Index> sizes;
  PriorMode prior_mode = PriorMode::Fixed;
  int bounded_kmax = 6;
  ModelTemplate model;
  ChainConfig chain;
  std::vector<std::uint64_t> seeds;
  unsigned threads = 1;

  void validate() const;
};

/// Builds a SweepConfig from a key-value config; unknown keys are errors.
/// Relative data paths resolve against `base_dir`.
SweepConfig sweep_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

/// Full dataset for one replicate seed (synthetic sources draw with that seed).
DataMatrix materialize_data(const SweepConfig& cfg, std::uint64_t seed);

/// Resolves the model for a prefix of `full`. Fixed and Bounded modes take
/// empirical settings from all of `full`; VaryingWithN from the prefix only.
ModelConfig resolve_model(const SweepConfig& cfg, const DataMatrix& full, Eigen::Index n);

struct Summary {
  Eigen::VectorXd posterior_k;  // entry i is k = i + 1
  double mean_k = 0.0;
  long mode_k = 0;
  double sm_accept_rate = 0.0;
};

/// Normalized histogram of the recorded k draws; mode ties go to the smaller k.
Summary summarize(const ChainOutput& out);
Summary summarize_posterior(const Eigen::VectorXd& posterior_k, double sm_accept_rate = 0.0);

struct CellResult {
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  std::string prior_mode;
  std::optional<Summary> summary;
  std::string error;
  ModelConfig model;
  std::vector<long> trace_t;
};

struct SweepResult {
  std::string dataset;
  std::vector<CellResult> cells;  // ordered by (seed, N) as listed in the config
};

/// Runs every (seed, N) cell, on `threads` workers when > 1. A failing cell
/// records its error and the others proceed. Output depends only on the config.
SweepResult run_sweep(const SweepConfig& cfg);

/// `dataset,seed,N,prior_mode,k,probability` rows.
void write_posterior_csv(std::ostream& out, const SweepResult& result, bool with_header = true);
/// `dataset,seed,N,mean_k,mode_k,sm_accept_rate` rows.
void write_summary_csv(std::ostream& out, const SweepResult& result, bool with_header = true);
/// `dataset,seed,N,error` rows for failed cells.
void write_errors_csv(std::ostream& out, const SweepResult& result);

/// Writes posterior_k.csv, summary.csv and, when any cell failed, errors.csv.
void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result);

std::string format_probability(double p);

/// A chain's traces plus identifying metadata, as stored by `run`.
struct ChainRecord {
  std::string dataset;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  std::string prior_mode;
  ChainOutput output;
};

void write_chain_record(const std::filesystem::path& path, const ChainRecord& record);
ChainRecord read_chain_record(const std::filesystem::path& path);

}  // namespace mfm
