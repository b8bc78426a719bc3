#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phiregret/adversary.hpp"
#include "phiregret/baselines.hpp"
#include "phiregret/errors.hpp"
#include "phiregret/learner.hpp"
#include "phiregret/phi_learner.hpp"
#include "phiregret/regret.hpp"

namespace phiregret {

inline const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names = {"wavelet", "mwu", "internal_mwu",
                                                 "blum_mansour"};
  return names;
}

inline std::unique_ptr<OnlineLearner> make_learner(const std::string& algorithm,
                                                   std::size_t d) {
  if (algorithm == "wavelet") return std::make_unique<PhiLearner>(d);
  if (algorithm == "mwu") return std::make_unique<MwuLearner>(d);
  if (algorithm == "internal_mwu") return std::make_unique<InternalMwuLearner>(d);
  if (algorithm == "blum_mansour") return std::make_unique<BlumMansourLearner>(d);
  throw ConfigError("algorithm", "unknown algorithm '" + algorithm + "'");
}

struct ExperimentConfig {
  std::string algorithm;
  std::size_t d = 0;
  std::int64_t horizon = 0;
  AdversarySpec adversary;
  std::vector<ComparatorSpec> comparators;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> checkpoints;  // empty -> powers of 2 up to horizon

  std::vector<std::int64_t> effective_checkpoints() const {
    if (!checkpoints.empty()) return checkpoints;
    std::vector<std::int64_t> out;
    for (std::int64_t c = 1; c < horizon; c *= 2) out.push_back(c);
    out.push_back(horizon);
    return out;
  }

  static ExperimentConfig from_json(const nlohmann::json& j,
                                    const std::string& path_prefix = "");
  nlohmann::json to_json() const;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j,
                                           const std::string& key,
                                           const std::string& prefix) {
  if (!j.is_object()) throw ConfigError(prefix, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(prefix.empty() ? key : prefix + "." + key,
                      "missing required field");
  }
  return *it;
}

inline std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

inline bool is_positive_integer(const nlohmann::json& j) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>() >= 1;
  return j.is_number_integer() && j.get<std::int64_t>() >= 1;
}

inline bool is_nonneg_integer(const nlohmann::json& j) {
  if (j.is_number_unsigned()) return true;
  return j.is_number_integer() && j.get<std::int64_t>() >= 0;
}

inline AdversarySpec adversary_from_json(const nlohmann::json& j,
                                         const std::string& prefix) {
  AdversarySpec spec;
  const auto& kind = require_field(j, "kind", prefix);
  const std::string name = kind.is_string() ? kind.get<std::string>() : "";
  if (name == "iid_uniform") {
    spec.kind = AdversaryKind::IidUniform;
  } else if (name == "segmented") {
    spec.kind = AdversaryKind::Segmented;
    const auto& seg = require_field(j, "segments", prefix);
    if (!is_positive_integer(seg)) {
      throw ConfigError(join_path(prefix, "segments"),
                        "must be a positive integer");
    }
    spec.segments = seg.get<std::size_t>();
  } else if (name == "spite_adaptive") {
    spec.kind = AdversaryKind::SpiteAdaptive;
  } else if (name == "swap_trap") {
    spec.kind = AdversaryKind::SwapTrap;
  } else {
    throw ConfigError(join_path(prefix, "kind"),
                      "unknown adversary '" + name + "'");
  }
  return spec;
}

inline nlohmann::json adversary_to_json(const AdversarySpec& spec) {
  nlohmann::json j;
  switch (spec.kind) {
    case AdversaryKind::IidUniform:
      j["kind"] = "iid_uniform";
      break;
    case AdversaryKind::Segmented:
      j["kind"] = "segmented";
      j["segments"] = spec.segments;
      break;
    case AdversaryKind::SpiteAdaptive:
      j["kind"] = "spite_adaptive";
      break;
    case AdversaryKind::SwapTrap:
      j["kind"] = "swap_trap";
      break;
  }
  return j;
}

inline ComparatorSpec comparator_from_json(const nlohmann::json& j,
                                           const std::string& prefix) {
  const auto& kind = require_field(j, "kind", prefix);
  const std::string name = kind.is_string() ? kind.get<std::string>() : "";
  if (name == "best_swap") return ComparatorSpec::best_swap();
  if (name == "constant") {
    const auto& u = require_field(j, "u", prefix);
    if (!u.is_array()) {
      throw ConfigError(join_path(prefix, "u"), "must be an array of reals");
    }
    return ComparatorSpec::constant(u.get<std::vector<double>>());
  }
  if (name == "block_constant") {
    const auto& k = require_field(j, "blocks", prefix);
    if (!is_positive_integer(k)) {
      throw ConfigError(join_path(prefix, "blocks"),
                        "must be a positive integer");
    }
    auto spec = ComparatorSpec::block_constant(k.get<std::size_t>());
    if (j.contains("rows")) {
      spec.block_rows = j.at("rows").get<std::vector<std::vector<double>>>();
    }
    return spec;
  }
  if (name == "self_modified") {
    const auto& k = require_field(j, "modified", prefix);
    if (!is_positive_integer(k)) {
      throw ConfigError(join_path(prefix, "modified"),
                        "must be a positive integer");
    }
    auto spec = ComparatorSpec::self_modified(k.get<std::size_t>());
    if (j.contains("targets")) {
      for (const auto& pair : j.at("targets")) {
        spec.targets.emplace_back(pair.at(0).get<std::size_t>(),
                                  pair.at(1).get<std::size_t>());
      }
    }
    return spec;
  }
  if (name == "random_stochastic") {
    const auto& s = require_field(j, "seed", prefix);
    if (!is_nonneg_integer(s)) {
      throw ConfigError(join_path(prefix, "seed"), "must be a nonnegative integer");
    }
    return ComparatorSpec::random_stochastic(s.get<std::uint64_t>());
  }
  throw ConfigError(join_path(prefix, "kind"),
                    "unknown comparator '" + name + "'");
}

inline nlohmann::json comparator_to_json(const ComparatorSpec& spec) {
  nlohmann::json j;
  j["kind"] = spec.kind_name();
  switch (spec.kind) {
    case ComparatorSpec::Kind::Constant:
      j["u"] = spec.constant_u;
      break;
    case ComparatorSpec::Kind::BlockConstant:
      j["blocks"] = spec.blocks;
      if (!spec.block_rows.empty()) j["rows"] = spec.block_rows;
      break;
    case ComparatorSpec::Kind::SelfModified:
      j["modified"] = spec.modified;
      if (!spec.targets.empty()) {
        auto arr = nlohmann::json::array();
        for (const auto& [a, b] : spec.targets) arr.push_back({a, b});
        j["targets"] = arr;
      }
      break;
    case ComparatorSpec::Kind::RandomStochastic:
      j["seed"] = spec.seed;
      break;
    case ComparatorSpec::Kind::BestSwapInHindsight:
      break;
  }
  return j;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j,
                                                    const std::string& prefix) {
  using detail::join_path;
  using detail::require_field;
  ExperimentConfig cfg;

  const auto& algo = require_field(j, "algorithm", prefix);
  if (!algo.is_string()) {
    throw ConfigError(join_path(prefix, "algorithm"), "must be a string");
  }
  cfg.algorithm = algo.get<std::string>();
  if (std::find(algorithm_names().begin(), algorithm_names().end(),
                cfg.algorithm) == algorithm_names().end()) {
    throw ConfigError(join_path(prefix, "algorithm"),
                      "unknown algorithm '" + cfg.algorithm + "'");
  }

  const auto& d = require_field(j, "d", prefix);
  if (!detail::is_positive_integer(d)) {
    throw ConfigError(join_path(prefix, "d"), "must be a positive integer");
  }
  cfg.d = d.get<std::size_t>();

  const auto& horizon = require_field(j, "T", prefix);
  if (!detail::is_positive_integer(horizon)) {
    throw ConfigError(join_path(prefix, "T"), "must be a positive integer");
  }
  cfg.horizon = horizon.get<std::int64_t>();

  cfg.adversary = detail::adversary_from_json(
      require_field(j, "adversary", prefix), join_path(prefix, "adversary"));

  const auto& comps = require_field(j, "comparators", prefix);
  if (!comps.is_array()) {
    throw ConfigError(join_path(prefix, "comparators"), "must be an array");
  }
  for (std::size_t i = 0; i < comps.size(); ++i) {
    cfg.comparators.push_back(detail::comparator_from_json(
        comps[i], join_path(prefix, "comparators[" + std::to_string(i) + "]")));
  }

  const auto& seed = require_field(j, "seed", prefix);
  if (!detail::is_nonneg_integer(seed)) {
    throw ConfigError(join_path(prefix, "seed"), "must be a nonnegative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();

  if (j.contains("checkpoints")) {
    for (const auto& c : j.at("checkpoints")) {
      if (!detail::is_positive_integer(c) ||
          c.get<std::int64_t>() > cfg.horizon) {
        throw ConfigError(join_path(prefix, "checkpoints"),
                          "entries must lie in [1, T]");
      }
      cfg.checkpoints.push_back(c.get<std::int64_t>());
    }
    std::sort(cfg.checkpoints.begin(), cfg.checkpoints.end());
  }

  if (cfg.algorithm == "internal_mwu" && cfg.d < 2) {
    throw ConfigError(join_path(prefix, "d"),
                      "internal_mwu needs at least two experts");
  }
  return cfg;
}

inline nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["d"] = d;
  j["T"] = horizon;
  j["adversary"] = detail::adversary_to_json(adversary);
  auto comps = nlohmann::json::array();
  for (const auto& c : comparators) comps.push_back(detail::comparator_to_json(c));
  j["comparators"] = comps;
  j["seed"] = seed;
  if (!checkpoints.empty()) j["checkpoints"] = checkpoints;
  return j;
}

// One metric value at one checkpoint.
struct ReportRow {
  std::int64_t checkpoint = 0;
  std::string comparator_kind;
  std::string comparator_params;
  double regret = 0.0;
  std::int64_t wallclock_ms = 0;
};

struct RegretReport {
  std::string run_id;
  ExperimentConfig config;
  std::vector<ReportRow> rows;
  double total_loss = 0.0;
};

struct RunResult {
  RegretReport report;
  Trace trace;  // populated only when keep_trace was requested
};

inline std::string run_id_of(const ExperimentConfig& cfg) {
  const std::string canonical = cfg.to_json().dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical)));
  return buf;
}

// Drives the interaction protocol for one configuration. Bitwise
// reproducible given (config, seed); wallclock fields are the only
// nondeterministic output.
inline RunResult run_experiment(const ExperimentConfig& cfg,
                                bool keep_trace = false) {
  const auto started = std::chrono::steady_clock::now();
  auto learner = make_learner(cfg.algorithm, cfg.d);
  Adversary adversary(cfg.adversary, cfg.d, cfg.horizon, cfg.seed);
  RegretAccumulator stats(cfg.d);

  RunResult result;
  result.report.config = cfg;
  result.report.run_id = run_id_of(cfg);
  result.trace.d = cfg.d;
  result.trace.seed = cfg.seed;
  result.trace.algorithm = cfg.algorithm;

  const auto checkpoints = cfg.effective_checkpoints();
  std::size_t next_checkpoint = 0;

  const auto default_quantiles = [&]() {
    std::vector<double> qs = {1.0 / static_cast<double>(cfg.d)};
    for (double q : {0.25, 0.5, 1.0}) {
      if (q > qs.front()) qs.push_back(q);
    }
    return qs;
  }();

  auto capture = [&](std::int64_t t) {
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    auto push = [&](const std::string& kind, const std::string& params,
                    double value) {
      result.report.rows.push_back(ReportRow{t, kind, params, value, wall});
    };
    for (const auto& spec : cfg.comparators) {
      push(spec.kind_name(), spec.params(), stats.regret_vs(spec.realize(stats)));
    }
    push("external", "", stats.external_regret());
    if (cfg.d >= 2) push("internal", "", stats.internal_regret());
    push("swap", "", stats.swap_regret());
    for (double q : default_quantiles) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "eps=%.10g", q);
      push("quantile", buf, stats.quantile_regret(q));
    }
  };

  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    ProbVector p = learner->step_predict();
    LossVector l = adversary.next(p);
    learner->step_update(l);
    stats.observe(p, l);
    if (keep_trace) result.trace.append(p, l);
    while (next_checkpoint < checkpoints.size() &&
           checkpoints[next_checkpoint] == t) {
      capture(t);
      ++next_checkpoint;
    }
  }
  result.report.total_loss = stats.algorithm_loss();
  return result;
}

inline constexpr const char* kCsvHeader =
    "run_id,algorithm,d,T_checkpoint,adversary,comparator_kind,"
    "comparator_params,regret_value,wallclock_ms";

inline std::string csv_rows(const RegretReport& report) {
  std::string out;
  char buf[512];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%zu,%lld,%s,%s,%s,%.17g,%lld\n",
                  report.run_id.c_str(), report.config.algorithm.c_str(),
                  report.config.d,
                  static_cast<long long>(row.checkpoint),
                  report.config.adversary.describe().c_str(),
                  row.comparator_kind.c_str(), row.comparator_params.c_str(),
                  row.regret, static_cast<long long>(row.wallclock_ms));
    out += buf;
  }
  return out;
}

inline nlohmann::json report_to_json(const RegretReport& report) {
  nlohmann::json j;
  j["run_id"] = report.run_id;
  j["algorithm"] = report.config.algorithm;
  j["d"] = report.config.d;
  j["T"] = report.config.horizon;
  j["adversary"] = report.config.adversary.describe();
  j["seed"] = report.config.seed;
  j["total_loss"] = report.total_loss;
  auto rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"T_checkpoint", row.checkpoint},
                    {"comparator_kind", row.comparator_kind},
                    {"comparator_params", row.comparator_params},
                    {"regret_value", row.regret},
                    {"wallclock_ms", row.wallclock_ms}});
  }
  j["rows"] = rows;
  return j;
}

// Grid sweep: cross product over the array-valued axes. Runs execute in
// parallel (one experiment per worker); emission order is the deterministic
// grid order regardless of completion order.
struct SweepConfig {
  std::vector<std::string> algorithms;
  std::vector<std::size_t> dims;
  std::vector<std::int64_t> horizons;
  std::vector<AdversarySpec> adversaries;
  std::vector<ComparatorSpec> comparators;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> checkpoints;

  static SweepConfig from_json(const nlohmann::json& j) {
    using detail::join_path;
    using detail::require_field;
    SweepConfig cfg;
    auto as_array = [&](const nlohmann::json& field) {
      return field.is_array() ? field : nlohmann::json::array({field});
    };
    for (const auto& a : as_array(require_field(j, "algorithm", ""))) {
      cfg.algorithms.push_back(a.get<std::string>());
    }
    for (const auto& d : as_array(require_field(j, "d", ""))) {
      cfg.dims.push_back(d.get<std::size_t>());
    }
    for (const auto& t : as_array(require_field(j, "T", ""))) {
      cfg.horizons.push_back(t.get<std::int64_t>());
    }
    for (const auto& adv : as_array(require_field(j, "adversary", ""))) {
      cfg.adversaries.push_back(detail::adversary_from_json(adv, "adversary"));
    }
    const auto& comps = require_field(j, "comparators", "");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      cfg.comparators.push_back(detail::comparator_from_json(
          comps[i], "comparators[" + std::to_string(i) + "]"));
    }
    cfg.seed = require_field(j, "seed", "").get<std::uint64_t>();
    if (j.contains("checkpoints")) {
      cfg.checkpoints = j.at("checkpoints").get<std::vector<std::int64_t>>();
    }
    return cfg;
  }

  std::vector<ExperimentConfig> expand() const {
    std::vector<ExperimentConfig> out;
    for (const auto& algo : algorithms) {
      for (std::size_t d : dims) {
        for (std::int64_t horizon : horizons) {
          for (const auto& adv : adversaries) {
            ExperimentConfig cfg;
            cfg.algorithm = algo;
            cfg.d = d;
            cfg.horizon = horizon;
            cfg.adversary = adv;
            cfg.comparators = comparators;
            cfg.seed = seed;
            cfg.checkpoints = checkpoints;
            out.push_back(std::move(cfg));
          }
        }
      }
    }
    return out;
  }
};

inline std::vector<RegretReport> run_sweep(const SweepConfig& sweep,
                                           std::size_t jobs = 1) {
  const auto grid = sweep.expand();
  std::vector<RegretReport> reports(grid.size());
  if (jobs < 1) jobs = 1;
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&]() {
    for (;;) {
      std::size_t mine;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= grid.size()) return;
        mine = next++;
      }
      reports[mine] = run_experiment(grid[mine]).report;
    }
  };
  std::vector<std::thread> pool;
  const std::size_t spawn = std::min(jobs, grid.size());
  pool.reserve(spawn);
  for (std::size_t w = 0; w < spawn; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return reports;
}

// Aggregation of CSV rows into summary tables, keyed by everything except
// the run and the value.
struct SummaryRow {
  std::string algorithm;
  std::string d;
  std::string adversary;
  std::string comparator_kind;
  std::string comparator_params;
  std::string checkpoint;
  std::size_t runs = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline std::vector<SummaryRow> summarize_csv_rows(
    const std::vector<std::string>& lines) {
  std::map<std::string, SummaryRow> groups;
  for (const auto& line : lines) {
    if (line.empty() || line.rfind("run_id,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) continue;
    const std::string key = fields[1] + "|" + fields[2] + "|" + fields[4] + "|" +
                            fields[5] + "|" + fields[6] + "|" + fields[3];
    const double value = std::strtod(fields[7].c_str(), nullptr);
    auto [it, inserted] = groups.try_emplace(key);
    SummaryRow& row = it->second;
    if (inserted) {
      row.algorithm = fields[1];
      row.d = fields[2];
      row.adversary = fields[4];
      row.comparator_kind = fields[5];
      row.comparator_params = fields[6];
      row.checkpoint = fields[3];
      row.min = value;
      row.max = value;
    }
    row.min = std::min(row.min, value);
    row.max = std::max(row.max, value);
    row.mean += value;
    ++row.runs;
  }
  std::vector<SummaryRow> out;
  out.reserve(groups.size());
  for (auto& [key, row] : groups) {
    row.mean /= static_cast<double>(row.runs);
    out.push_back(row);
  }
  return out;
}

}  // namespace phiregret
