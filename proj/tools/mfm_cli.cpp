// Command-line driver for the mixture-of-finite-mixtures sampler.
//
//   mfm generate  --config c.cfg --out dir [--seed S]
//   mfm run       --config c.cfg --out dir [--seed S] [--iters I] [--burnin B]
//   mfm sweep     --config c.cfg --out dir [--threads T] [--iters I] [--burnin B] [--seed S]
//   mfm exact     --config c.cfg --out dir [--seed S]
//   mfm summarize --in chain.json [--out dir]

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mfm/datagen.hpp"
#include "mfm/diagnostics.hpp"
#include "mfm/experiments.hpp"
#include "mfm/sampler.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iters;
  std::optional<std::int64_t> burnin;
  std::optional<unsigned> threads;
};

mfm::SweepConfig load_with_overrides(const fs::path& path, const Overrides& o) {
  mfm::SweepConfig cfg = mfm::load_sweep_config(path);
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.iters) cfg.chain.iterations = *o.iters;
  if (o.burnin) cfg.chain.burn_in = *o.burnin;
  if (o.threads) cfg.threads = *o.threads;
  cfg.validate();
  return cfg;
}

void emit_tables(const std::optional<fs::path>& out_dir, const mfm::SweepResult& result) {
  if (out_dir) {
    mfm::write_sweep_outputs(*out_dir, result);
    return;
  }
  mfm::write_posterior_csv(std::cout, result);
  std::cout << '\n';
  mfm::write_summary_csv(std::cout, result);
}

int cmd_generate(const fs::path& config, const fs::path& out_dir, const Overrides& o) {
  const auto cfg = load_with_overrides(config, o);
  fs::create_directories(out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  const mfm::DataMatrix data = mfm::materialize_data(cfg, seed);
  std::vector<std::string> header;
  for (Eigen::Index d = 0; d < data.cols(); ++d) header.push_back("x" + std::to_string(d));
  mfm::write_matrix(out_dir / "data.csv", data, header);
  std::cout << "wrote " << data.rows() << "x" << data.cols() << " dataset to " << (out_dir / "data.csv").string()
            << '\n';
  return 0;
}

int cmd_run(const fs::path& config, const fs::path& out_dir, const Overrides& o) {
  const auto cfg = load_with_overrides(config, o);
  fs::create_directories(out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  const Eigen::Index n = cfg.sizes.back();
  const mfm::DataMatrix full = mfm::materialize_data(cfg, seed);
  const mfm::ModelConfig model = mfm::resolve_model(cfg, full, n);
  mfm::ChainConfig chain = cfg.chain;
  chain.seed = seed;
  mfm::ChainRecord record{cfg.dataset, seed, n, mfm::to_string(cfg.prior_mode), mfm::run_chain(full.topRows(n), model, chain)};
  mfm::write_chain_record(out_dir / "chain.json", record);

  mfm::SweepResult result{cfg.dataset, {}};
  mfm::CellResult cell;
  cell.seed = seed;
  cell.n = n;
  cell.prior_mode = record.prior_mode;
  cell.summary = mfm::summarize(record.output);
  result.cells.push_back(cell);
  mfm::write_sweep_outputs(out_dir, result);
  std::cout << "N=" << n << " mode_k=" << cell.summary->mode_k << " mean_k=" << cell.summary->mean_k
            << " sm_accept=" << cell.summary->sm_accept_rate << " (" << record.output.wallclock << " s)\n";
  return 0;
}

int cmd_sweep(const fs::path& config, const fs::path& out_dir, const Overrides& o) {
  const auto cfg = load_with_overrides(config, o);
  const auto result = mfm::run_sweep(cfg);
  mfm::write_sweep_outputs(out_dir, result);
  int failed = 0;
  for (const auto& cell : result.cells) {
    if (cell.summary) {
      std::cout << "seed=" << cell.seed << " N=" << cell.n << " mode_k=" << cell.summary->mode_k
                << " mean_k=" << cell.summary->mean_k << '\n';
    } else {
      ++failed;
      std::cerr << "seed=" << cell.seed << " N=" << cell.n << " failed: " << cell.error << '\n';
    }
  }
  return failed == 0 ? 0 : 2;
}

int cmd_exact(const fs::path& config, const fs::path& out_dir, const Overrides& o) {
  const auto cfg = load_with_overrides(config, o);
  if (!cfg.model.beta) throw std::invalid_argument("exact: requires a fixed model.beta");
  mfm::SweepResult result{cfg.dataset, {}};
  for (std::uint64_t seed : cfg.seeds) {
    const mfm::DataMatrix full = mfm::materialize_data(cfg, seed);
    for (Eigen::Index n : cfg.sizes) {
      const mfm::ModelConfig model = mfm::resolve_model(cfg, full, n);
      const auto exact = mfm::exact_posterior_k(full.topRows(n), model, model.fixed_beta());
      mfm::CellResult cell;
      cell.seed = seed;
      cell.n = n;
      cell.prior_mode = "exact";
      cell.summary = mfm::summarize_posterior(exact.posterior_k);
      result.cells.push_back(cell);
    }
  }
  mfm::write_sweep_outputs(out_dir, result);
  return 0;
}

int cmd_summarize(const fs::path& in, const std::optional<fs::path>& out_dir) {
  const mfm::ChainRecord record = mfm::read_chain_record(in);
  mfm::SweepResult result{record.dataset, {}};
  mfm::CellResult cell;
  cell.seed = record.seed;
  cell.n = record.n;
  cell.prior_mode = record.prior_mode;
  cell.summary = mfm::summarize(record.output);
  result.cells.push_back(cell);
  emit_tables(out_dir, result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture-of-finite-mixtures collapsed sampler and experiment harness"};
  app.require_subcommand(1);

  fs::path config;
  fs::path out_dir = "out";
  fs::path in_path;
  Overrides o;
  std::uint64_t seed = 0;
  std::int64_t iters = 0;
  std::int64_t burnin = 0;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Key-value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Replace the configured seeds with this one");
  };
  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("--iters", iters, "Chain iterations");
    sub->add_option("--burnin", burnin, "Burn-in iterations");
  };

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  add_common(gen);
  auto* run = app.add_subcommand("run", "Run one chain on the largest configured size");
  add_common(run);
  add_chain(run);
  auto* sweep = app.add_subcommand("sweep", "Run the full (seed, N) grid");
  add_common(sweep);
  add_chain(sweep);
  sweep->add_option("--threads", threads, "Worker threads");
  auto* exact = app.add_subcommand("exact", "Exact posterior over k by partition enumeration (N <= 10)");
  add_common(exact);
  auto* summ = app.add_subcommand("summarize", "Tabulate a chain.json written by run");
  summ->add_option("--in", in_path, "Chain record")->required()->check(CLI::ExistingFile);
  auto* summ_out = summ->add_option("--out", out_dir, "Output directory (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : {gen, run, sweep, exact}) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed")) o.seed = seed;
  }
  if (run->count("--iters") || sweep->count("--iters")) o.iters = iters;
  if (run->count("--burnin") || sweep->count("--burnin")) o.burnin = burnin;
  if (sweep->count("--threads")) o.threads = threads;

  try {
    if (gen->parsed()) return cmd_generate(config, out_dir, o);
    if (run->parsed()) return cmd_run(config, out_dir, o);
    if (sweep->parsed()) return cmd_sweep(config, out_dir, o);
    if (exact->parsed()) return cmd_exact(config, out_dir, o);
    if (summ->parsed()) return cmd_summarize(in_path, summ_out->count() ? std::optional<fs::path>(out_dir) : std::nullopt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
