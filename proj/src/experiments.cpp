#include "mfm/experiments.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace mfm {

std::string to_string(PriorMode mode) {
  switch (mode) {
    case PriorMode::Fixed: return "fixed";
    case PriorMode::VaryingWithN: return "varying";
    case PriorMode::Bounded: return "bounded";
  }
  return "unknown";
}

PriorMode parse_prior_mode(const std::string& text) {
  if (text == "fixed") return PriorMode::Fixed;
  if (text == "varying") return PriorMode::VaryingWithN;
  if (text == "bounded") return PriorMode::Bounded;
  throw std::invalid_argument("unknown prior mode '" + text + "' (expected fixed, varying or bounded)");
}

void SweepConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("sweep: sizes must be nonempty");
  if (seeds.empty()) throw std::invalid_argument("sweep: seeds must be nonempty");
  for (std::size_t i = 0; i < sizes.size(); ++i)
    if (sizes[i] < 1 || (i > 0 && sizes[i] <= sizes[i - 1]))
      throw std::invalid_argument("sweep: sizes must be positive and strictly ascending");
  if (rows != 0 && rows < sizes.back()) throw std::invalid_argument("sweep: data.rows is smaller than the largest size");
  if (prior_mode == PriorMode::Bounded && bounded_kmax < 1) throw std::invalid_argument("sweep: prior.kmax must be positive");
  if (threads < 1) throw std::invalid_argument("sweep: threads must be positive");
  if (auto* m = std::get_if<MixtureSpec>(&source)) m->validate();
  if (auto* c = std::get_if<ContaminationSpec>(&source)) c->validate();
  chain.validate();
}

namespace {

Family parse_family(const std::string& name) {
  if (name == "normal" || name == "gaussian") return Family::Normal;
  if (name == "laplace") return Family::Laplace;
  throw std::invalid_argument("unknown component family '" + name + "' (expected normal or laplace)");
}

MixtureSpec mixture_from(const KeyValueConfig& kv, const std::string& prefix) {
  const auto families = kv.strings(prefix + ".family");
  const auto locs = kv.numbers(prefix + ".loc");
  const auto scales = kv.numbers(prefix + ".scale");
  const auto weights = kv.has(prefix + ".weight") ? kv.numbers(prefix + ".weight") : std::vector<double>{1.0};
  if (families.size() != locs.size() || locs.size() != scales.size() || scales.size() != weights.size())
    throw std::invalid_argument(prefix + ": family, loc, scale and weight lists must have equal length");
  MixtureSpec spec;
  for (std::size_t k = 0; k < families.size(); ++k)
    spec.components.push_back({parse_family(families[k]), locs[k], scales[k]});
  spec.weights = weights;
  spec.validate();
  return spec;
}

Setting setting_from(const KeyValueConfig& kv, const std::string& key) {
  if (!kv.has(key)) return {};
  if (kv.is_string(key)) {
    if (kv.string(key) != "empirical") throw std::invalid_argument(key + ": expected a number or \"empirical\"");
    return {};
  }
  return {kv.number(key)};
}

}  // namespace

SweepConfig sweep_config_from(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  SweepConfig cfg;
  cfg.dataset = kv.string_or("dataset", cfg.dataset);

  const std::string source = kv.string_or("data.source", "mixture");
  if (source == "mixture") {
    cfg.source = mixture_from(kv, "mixture");
  } else if (source == "contaminated") {
    cfg.source = ContaminationSpec{mixture_from(kv, "mixture"), mixture_from(kv, "contaminant"),
                                   kv.number("contamination.epsilon")};
  } else if (source == "file") {
    FileSource file;
    file.path = kv.string("data.path");
    if (file.path.is_relative() && !base_dir.empty()) file.path = base_dir / file.path;
    file.header = kv.boolean_or("data.header", false);
    const std::string transform = kv.string_or("data.transform", "none");
    if (transform != "none" && transform != "log2_standardize")
      throw std::invalid_argument("data.transform: expected \"none\" or \"log2_standardize\"");
    file.log2_standardize = transform == "log2_standardize";
    cfg.source = file;
  } else {
    throw std::invalid_argument("data.source: expected \"mixture\", \"contaminated\" or \"file\"");
  }
  cfg.rows = kv.integer_or("data.rows", 0);

  for (double n : kv.numbers("sweep.sizes")) cfg.sizes.push_back(static_cast<Eigen::Index>(n));
  for (double s : kv.has("sweep.seeds") ? kv.numbers("sweep.seeds") : std::vector<double>{1, 2, 3})
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  cfg.prior_mode = parse_prior_mode(kv.string_or("sweep.prior_mode", "fixed"));
  cfg.threads = static_cast<unsigned>(kv.integer_or("sweep.threads", 1));

  const std::string prior = kv.string_or("prior.kind", cfg.prior_mode == PriorMode::Bounded ? "uniform" : "geometric");
  const long kmax = kv.integer_or("prior.kmax", 6);
  if (prior == "geometric") {
    cfg.model.count_prior = Geometric{kv.number_or("prior.r", 0.1)};
  } else if (prior == "uniform") {
    cfg.model.count_prior = UniformBounded{static_cast<int>(kmax)};
  } else {
    throw std::invalid_argument("prior.kind: expected \"geometric\" or \"uniform\"");
  }
  cfg.bounded_kmax = static_cast<int>(kmax);

  auto& model = cfg.model;
  model.alpha = kv.number_or("model.alpha", model.alpha);
  model.gamma = kv.number_or("model.gamma", model.gamma);
  model.m = setting_from(kv, "model.m");
  model.kappa = setting_from(kv, "model.kappa");
  if (kv.has("model.c")) model.c = kv.number("model.c");
  if (kv.has("model.beta")) model.beta = kv.number("model.beta");
  model.beta_shape = kv.number_or("model.beta_shape", model.beta_shape);
  if (kv.has("model.beta_rate")) {
    if (kv.is_string("model.beta_rate")) {
      if (kv.string("model.beta_rate") != "ten_over_kappa")
        throw std::invalid_argument("model.beta_rate: expected a number or \"ten_over_kappa\"");
    } else {
      model.beta_rate = kv.number("model.beta_rate");
    }
  }

  auto& chain = cfg.chain;
  chain.iterations = kv.integer_or("chain.iterations", chain.iterations);
  chain.burn_in = kv.integer_or("chain.burn_in", chain.burn_in);
  chain.record_every = kv.integer_or("chain.record_every", chain.record_every);
  chain.splitmerge_per_sweep = static_cast<int>(kv.integer_or("chain.splitmerge_per_sweep", chain.splitmerge_per_sweep));
  chain.restricted_scans = static_cast<int>(kv.integer_or("chain.restricted_scans", chain.restricted_scans));

  kv.check_all_used();
  cfg.validate();
  return cfg;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return sweep_config_from(KeyValueConfig::load(path), path.parent_path());
}

DataMatrix materialize_data(const SweepConfig& cfg, std::uint64_t seed) {
  const Eigen::Index rows = cfg.rows > 0 ? cfg.rows : cfg.sizes.back();
  if (auto* mix = std::get_if<MixtureSpec>(&cfg.source)) {
    Rng rng(seed, streams::kData);
    return sample_mixture(*mix, rows, rng).values;
  }
  if (auto* cont = std::get_if<ContaminationSpec>(&cfg.source)) {
    Rng rng(seed, streams::kData);
    return contaminate(*cont, rows, rng).values;
  }
  const auto& file = std::get<FileSource>(cfg.source);
  DataMatrix values = load_matrix(file.path, file.header).values;
  if (file.log2_standardize) values = log2_standardize(values);
  if (values.rows() < cfg.sizes.back())
    throw std::invalid_argument(file.path.string() + ": fewer rows than the largest requested size");
  return values;
}

ModelConfig resolve_model(const SweepConfig& cfg, const DataMatrix& full, Eigen::Index n) {
  const ModelTemplate& t = cfg.model;
  const Eigen::Index dim = full.cols();
  const bool needs_empirical = !t.m.value || !t.kappa.value;
  EmpiricalHyperparams emp{Eigen::ArrayXd::Zero(dim), Eigen::ArrayXd::Ones(dim)};
  if (needs_empirical)
    emp = empirical_hyperparams(cfg.prior_mode == PriorMode::VaryingWithN ? DataMatrix(full.topRows(n)) : full);

  ModelConfig model;
  model.alpha = t.alpha;
  model.gamma = t.gamma;
  model.m = t.m.value ? Eigen::ArrayXd::Constant(dim, *t.m.value) : emp.m;
  const Eigen::ArrayXd kappa = t.kappa.value ? Eigen::ArrayXd::Constant(dim, *t.kappa.value) : emp.kappa;
  if (t.beta) {
    model.beta = *t.beta;
  } else {
    const double rate = t.beta_rate ? *t.beta_rate : 10.0 / kappa.mean();
    model.beta = BetaHyperprior{t.beta_shape, rate};
  }
  model.c = t.c ? Eigen::ArrayXd::Constant(dim, *t.c) : mean_precision_scale(kappa, model.alpha, model.beta_mean());
  model.count_prior = cfg.prior_mode == PriorMode::Bounded ? ComponentCountPrior(UniformBounded{cfg.bounded_kmax})
                                                           : t.count_prior;
  model.validate();
  return model;
}

Summary summarize_posterior(const Eigen::VectorXd& posterior_k, double sm_accept_rate) {
  if (posterior_k.size() == 0) throw std::invalid_argument("summarize: empty posterior");
  Summary s;
  s.posterior_k = posterior_k;
  Eigen::Index mode = 0;
  for (Eigen::Index k = 1; k < posterior_k.size(); ++k)
    if (posterior_k[k] > posterior_k[mode]) mode = k;
  s.mode_k = static_cast<long>(mode) + 1;
  s.mean_k = posterior_k.dot(Eigen::VectorXd::LinSpaced(posterior_k.size(), 1.0, static_cast<double>(posterior_k.size())));
  s.sm_accept_rate = sm_accept_rate;
  return s;
}

Summary summarize(const ChainOutput& out) {
  if (out.trace_k.empty()) throw std::invalid_argument("summarize: empty trace");
  const double rate =
      out.sm_proposed == 0 ? 0.0 : static_cast<double>(out.sm_accepted) / static_cast<double>(out.sm_proposed);
  return summarize_posterior(histogram_k(out.trace_k), rate);
}

SweepResult run_sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult result;
  result.dataset = cfg.dataset;
  for (std::uint64_t seed : cfg.seeds)
    for (Eigen::Index n : cfg.sizes) {
      CellResult cell;
      cell.seed = seed;
      cell.n = n;
      cell.prior_mode = to_string(cfg.prior_mode);
      result.cells.push_back(std::move(cell));
    }

  // Data depend only on the seed; generate each seed's dataset once, up front.
  std::vector<std::optional<DataMatrix>> data(cfg.seeds.size());
  std::vector<std::string> data_error(cfg.seeds.size());
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    try {
      data[s] = materialize_data(cfg, cfg.seeds[s]);
    } catch (const std::exception& e) {
      data_error[s] = e.what();
    }
  }

  auto run_cell = [&](std::size_t index) {
    CellResult& cell = result.cells[index];
    const std::size_t s = index / cfg.sizes.size();
    if (!data[s]) {
      cell.error = data_error[s];
      return;
    }
    try {
      const DataMatrix& full = *data[s];
      cell.model = resolve_model(cfg, full, cell.n);
      ChainConfig chain = cfg.chain;
      chain.seed = cell.seed;
      const ChainOutput out = run_chain(full.topRows(cell.n), cell.model, chain);
      cell.summary = summarize(out);
      cell.trace_t = out.trace_t;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  };

  const unsigned workers = std::min<unsigned>(cfg.threads, static_cast<unsigned>(result.cells.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < result.cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < result.cells.size(); i = next++) run_cell(i);
      });
  }
  return result;
}

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", p);
  return buf;
}

void write_posterior_csv(std::ostream& out, const SweepResult& result, bool with_header) {
  if (with_header) out << "dataset,seed,N,prior_mode,k,probability\n";
  for (const auto& cell : result.cells) {
    if (!cell.summary) continue;
    const auto& p = cell.summary->posterior_k;
    for (Eigen::Index k = 0; k < p.size(); ++k)
      out << result.dataset << ',' << cell.seed << ',' << cell.n << ',' << cell.prior_mode << ',' << k + 1 << ','
          << format_probability(p[k]) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SweepResult& result, bool with_header) {
  if (with_header) out << "dataset,seed,N,mean_k,mode_k,sm_accept_rate\n";
  for (const auto& cell : result.cells) {
    if (!cell.summary) continue;
    out << result.dataset << ',' << cell.seed << ',' << cell.n << ',' << format_probability(cell.summary->mean_k) << ','
        << cell.summary->mode_k << ',' << format_probability(cell.summary->sm_accept_rate) << '\n';
  }
}

void write_errors_csv(std::ostream& out, const SweepResult& result) {
  out << "dataset,seed,N,error\n";
  for (const auto& cell : result.cells) {
    if (cell.summary) continue;
    std::string message = cell.error;
    for (char& ch : message)
      if (ch == '"' || ch == '\n') ch = '\'';
    out << result.dataset << ',' << cell.seed << ',' << cell.n << ",\"" << message << "\"\n";
  }
}

void write_sweep_outputs(const std::filesystem::path& dir, const SweepResult& result) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("posterior_k.csv");
    write_posterior_csv(f, result);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, result);
  }
  bool any_error = false;
  for (const auto& cell : result.cells) any_error |= !cell.summary.has_value();
  if (any_error) {
    auto f = open("errors.csv");
    write_errors_csv(f, result);
  } else {
    std::filesystem::remove(dir / "errors.csv");
  }
}

void write_chain_record(const std::filesystem::path& path, const ChainRecord& record) {
  nlohmann::json j;
  j["dataset"] = record.dataset;
  j["seed"] = record.seed;
  j["N"] = record.n;
  j["prior_mode"] = record.prior_mode;
  j["trace_t"] = record.output.trace_t;
  j["trace_k"] = record.output.trace_k;
  j["trace_beta"] = record.output.trace_beta;
  j["sm_proposed"] = record.output.sm_proposed;
  j["sm_accepted"] = record.output.sm_accepted;
  j["wallclock"] = record.output.wallclock;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump() << '\n';
}

ChainRecord read_chain_record(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  ChainRecord record;
  try {
    record.dataset = j.at("dataset").get<std::string>();
    record.seed = j.at("seed").get<std::uint64_t>();
    record.n = j.at("N").get<Eigen::Index>();
    record.prior_mode = j.at("prior_mode").get<std::string>();
    record.output.trace_t = j.at("trace_t").get<std::vector<long>>();
    record.output.trace_k = j.at("trace_k").get<std::vector<long>>();
    record.output.trace_beta = j.at("trace_beta").get<std::vector<double>>();
    record.output.sm_proposed = j.at("sm_proposed").get<std::int64_t>();
    record.output.sm_accepted = j.at("sm_accepted").get<std::int64_t>();
    record.output.wallclock = j.value("wallclock", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed chain record: " + e.what());
  }
  if (record.output.trace_k.empty()) throw std::runtime_error(path.string() + ": chain record has an empty trace");
  record.output.posterior_k = histogram_k(record.output.trace_k);
  return record;
}

}  // namespace mfm
