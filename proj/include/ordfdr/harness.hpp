#pragma once

// Monte Carlo runner. Trials fan out over a worker pool; each worker writes
// only its own trial slots, and all aggregation happens afterwards in trial
// order, so outputs do not depend on the worker count.

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <system_error>
#include <thread>
#include <variant>
#include <vector>

#include "ordfdr/config.hpp"
#include "ordfdr/csv.hpp"
#include "ordfdr/lars.hpp"
#include "ordfdr/metrics.hpp"
#include "ordfdr/rules.hpp"
#include "ordfdr/simgen.hpp"

#ifndef ORDFDR_VERSION
#define ORDFDR_VERSION "0.0.0"
#endif

namespace ordfdr {

inline constexpr const char* kVersion = ORDFDR_VERSION;

/// Rules over statistics: TailStop reads them directly, every other rule
/// sees the conservative p-values exp(-T).
inline StopDecision apply_rule(RuleId rule, const StatSeries& stats, double alpha) {
  if (rule == RuleId::tail_stop) return tail_stop(stats, alpha);
  return apply_rule(rule, pvalues_from_stats(stats), alpha);
}

// ---------------------------------------------------------------------------
// stop: one rule on user data

struct StopResult {
  StopDecision decision;
  std::size_t m = 0;
  std::optional<TrialRecord> record;
};

inline StopResult run_stop(const csv::OrderedInput& input, RuleId rule, double alpha) {
  StopResult res;
  std::optional<Labels> labels;
  if (const auto* p = std::get_if<PValueSeries>(&input)) {
    if (rule == RuleId::tail_stop)
      throw Error("tail_stop needs an index,statistic file, not p-values");
    res.decision = apply_rule(rule, clamp(*p), alpha);
    res.m = p->size();
    labels = p->labels();
  } else {
    const auto& s = std::get<StatSeries>(input);
    res.decision = apply_rule(rule, s, alpha);
    res.m = s.size();
    labels = s.labels();
  }
  if (labels) res.record = score_trial(res.decision, *labels);
  return res;
}

inline StopResult run_stop(const std::string& path, RuleId rule, double alpha,
                           double clamp_epsilon = kDefaultClampEpsilon) {
  return run_stop(csv::load_ordered(path, clamp_epsilon), rule, alpha);
}

inline nlohmann::json record_to_json(const TrialRecord& r) {
  return {{"k_hat", r.k_hat}, {"v", r.v},         {"r", r.r},
          {"s", r.s},         {"m", r.m},         {"fdp", r.fdp()},
          {"power", r.power()}};
}

inline nlohmann::json to_json(const StopResult& res) {
  nlohmann::json j;
  j["rule"] = std::string(to_string(res.decision.rule));
  j["alpha"] = res.decision.alpha;
  j["m"] = res.m;
  j["k_hat"] = res.decision.k_hat;
  auto& tr = j["trace"] = nlohmann::json::array();
  for (std::size_t i = 0; i < res.decision.trace.size(); ++i) {
    const auto& t = res.decision.trace[i];
    tr.push_back({{"index", i + 1},
                  {"statistic", t.statistic},
                  {"threshold", t.threshold},
                  {"satisfied", t.satisfied}});
  }
  if (res.record) j["record"] = record_to_json(*res.record);
  return j;
}

// ---------------------------------------------------------------------------
// sweeps

struct ScenarioResult {
  SimScenario scenario;
  // records[trial] holds |rules| x |alphas| entries, rule-major
  std::vector<std::vector<TrialRecord>> records;
  std::vector<AggregateCurve> curves;  // one per configured rule
  bool perfect_separation = false;
};

struct ResultBundle {
  ExperimentConfig config;
  std::vector<ScenarioResult> scenarios;
  std::string version = kVersion;
  double wall_seconds = 0.0;
  std::size_t workers_used = 1;

  const ScenarioResult& scenario(const std::string& name) const {
    for (const auto& s : scenarios)
      if (s.scenario.name == name) return s;
    throw Error("no scenario named '" + name + "' in results");
  }
};

namespace detail {

template <class Series>
std::vector<TrialRecord> score_all(const ExperimentConfig& cfg, const Series& series,
                                   const Labels& labels) {
  std::vector<TrialRecord> out;
  out.reserve(cfg.rules.size() * cfg.alphas.size());
  for (RuleId r : cfg.rules)
    for (double a : cfg.alphas) out.push_back(score_trial(apply_rule(r, series, a), labels));
  return out;
}

inline std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, const SimScenario& sc,
                                          std::uint64_t trial) {
  switch (sc.kind) {
    case ScenarioKind::ordered: {
      const PValueSeries p = clamp(gen_ordered_pvalues(sc, trial));
      return score_all(cfg, p, *p.labels());
    }
    case ScenarioKind::harmonic: {
      const StatSeries t = gen_harmonic_stats(sc, trial);
      return score_all(cfg, t, *t.labels());
    }
    case ScenarioKind::regression: {
      const RegressionProblem prob = gen_regression_problem(sc, trial);
      const LarPath path = lar_path(prob, sc.p);
      const Labels labels = path_labels(path, prob.support_true);
      const StatSeries t(covariance_stats(path).values(), labels);
      return score_all(cfg, t, labels);
    }
  }
  return {};
}

/// Run fn(i) for i in [0, count) on `workers` threads. The first exception
/// stops the pool and is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          failed = true;
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Run every scenario in the config. Regression scenarios go through
/// lar_path -> covariance_stats; the rest use their generators directly.
inline ResultBundle run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  for (auto& sc : cfg.scenarios) sc.seed = cfg.seed;
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  ResultBundle bundle;
  bundle.config = cfg;
  bundle.workers_used = resolve_workers(cfg.workers);
  for (const auto& sc : cfg.scenarios) {
    ScenarioResult res;
    res.scenario = sc;
    res.perfect_separation = sc.kind == ScenarioKind::harmonic ||
                             (sc.kind == ScenarioKind::ordered && sc.placement == Placement::perfect);
    res.records.resize(cfg.trials);
    detail::parallel_for(cfg.trials, bundle.workers_used, [&](std::size_t t) {
      res.records[t] = detail::run_trial(cfg, sc, t);
    });

    const std::size_t na = cfg.alphas.size();
    for (std::size_t ri = 0; ri < cfg.rules.size(); ++ri) {
      std::vector<MetricAccumulator> acc(na);
      for (const auto& trial : res.records)
        for (std::size_t a = 0; a < na; ++a) acc[a].add(trial[ri * na + a]);
      AggregateCurve curve;
      curve.rule = cfg.rules[ri];
      for (std::size_t a = 0; a < na; ++a) curve.points.push_back(summarize(cfg.alphas[a], acc[a]));
      res.curves.push_back(std::move(curve));
    }
    bundle.scenarios.push_back(std::move(res));
  }
  bundle.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return bundle;
}

/// `sweep`: ordered-hypothesis and harmonic scenarios only.
inline ResultBundle run_sweep(const ExperimentConfig& cfg) {
  for (const auto& sc : cfg.scenarios)
    if (sc.kind == ScenarioKind::regression)
      throw Error("sweep: scenario '" + sc.name + "' is a regression scenario; use regress");
  return run_experiment(cfg);
}

/// `regress`: orthogonal-lasso scenarios scored by full-model false discoveries.
inline ResultBundle run_regression_sweep(const ExperimentConfig& cfg) {
  for (const auto& sc : cfg.scenarios) {
    if (sc.kind != ScenarioKind::regression)
      throw Error("regress: scenario '" + sc.name + "' is not a regression scenario");
    if (sc.design != Design::orthogonal)
      throw Error("regress: covariance statistics require an orthogonal design (scenario '" +
                  sc.name + "')");
  }
  return run_experiment(cfg);
}

// ---------------------------------------------------------------------------
// output

inline void write_trials_csv(const ResultBundle& b, std::ostream& out) {
  csv::Writer w(out);
  w.row("scenario", "trial", "rule", "alpha", "k_hat", "v", "r", "s", "m", "fdp", "power");
  for (const auto& sr : b.scenarios)
    for (std::size_t t = 0; t < sr.records.size(); ++t)
      for (const auto& r : sr.records[t])
        w.row(sr.scenario.name, t, to_string(r.rule), r.alpha, r.k_hat, r.v, r.r, r.s, r.m, r.fdp(),
              r.power());
}

inline std::string_view fwer_label(const ScenarioResult& sr) {
  return sr.perfect_separation ? "fwer" : "false_rejection_rate";
}

inline void write_aggregate_csv(const ResultBundle& b, std::ostream& out) {
  csv::Writer w(out);
  w.row("scenario", "rule", "alpha", "n_trials", "fdr", "fdr_se", "fwer_kind", "fwer", "fwer_se",
        "power", "power_se");
  for (const auto& sr : b.scenarios)
    for (const auto& c : sr.curves)
      for (const auto& p : c.points)
        w.row(sr.scenario.name, to_string(c.rule), p.alpha, p.n_trials, p.fdr, p.fdr_se,
              fwer_label(sr), p.fwer, p.fwer_se, p.power, p.power_se);
}

/// Long format for plotting: one row per (scenario, rule, alpha, metric).
inline void write_curves_csv(const ResultBundle& b, std::ostream& out) {
  csv::Writer w(out);
  w.row("scenario", "rule", "alpha", "metric", "estimate", "std_err");
  for (const auto& sr : b.scenarios)
    for (const auto& c : sr.curves)
      for (const auto& p : c.points) {
        w.row(sr.scenario.name, to_string(c.rule), p.alpha, "fdr", p.fdr, p.fdr_se);
        w.row(sr.scenario.name, to_string(c.rule), p.alpha, fwer_label(sr), p.fwer, p.fwer_se);
        w.row(sr.scenario.name, to_string(c.rule), p.alpha, "power", p.power, p.power_se);
      }
}

/// Write the bundle into `dir`. Files go to a sibling staging directory that
/// is renamed into place at the end, so `dir` either holds a complete run or
/// does not exist. An existing non-empty `dir` is refused.
inline void write_bundle(const ResultBundle& b, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir) || !fs::is_empty(dir))
      throw Error("output directory '" + dir.string() + "' already exists and is not empty");
  }
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent, ec);
  if (ec) throw Error("cannot create '" + parent.string() + "': " + ec.message());
  const fs::path staging =
      parent / (dir.filename().string() + ".partial-" +
                std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directory(staging, ec);
  if (ec) throw Error("output directory not writable: '" + parent.string() + "': " + ec.message());

  try {
    auto open = [&](const char* name) {
      std::ofstream f(staging / name, std::ios::binary);
      if (!f) throw Error(std::string("cannot write ") + name);
      return f;
    };
    {
      auto f = open("trials.csv");
      write_trials_csv(b, f);
    }
    {
      auto f = open("aggregate.csv");
      write_aggregate_csv(b, f);
    }
    {
      auto f = open("curves.csv");
      write_curves_csv(b, f);
    }
    {
      auto f = open("config.echo");
      f << config_to_json(b.config).dump(2) << "\n";
    }
    {
      auto f = open("meta.json");
      const nlohmann::json meta = {{"version", b.version},
                                   {"wall_seconds", b.wall_seconds},
                                   {"workers", b.workers_used}};
      f << meta.dump(2) << "\n";
    }
    if (fs::exists(dir)) fs::remove(dir);
    fs::rename(staging, dir);
  } catch (...) {
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace ordfdr
