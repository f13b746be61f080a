#pragma once

// Experiment configuration: a JSON document with a versioned schema.
//
//   {
//     "schema_version": 1,
//     "scenarios": [ {"preset": "medium"}, {"name": "wide", "preset": "easy", "m": 1000, "s": 200} ],
//     "rules": ["forward_stop", "strong_stop", "alpha_threshold", "alpha_investing"],
//     "alphas": "standard" | "curve" | [0.05, 0.1, ...],
//     "trials": 2000,
//     "workers": 0,
//     "seed": 20240501,
//     "output": "runs/medium"
//   }
//
// A single "scenario" object is accepted in place of "scenarios". Unknown keys
// are rejected so that typos cannot silently fall back to defaults.

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ordfdr/rules.hpp"
#include "ordfdr/simgen.hpp"

namespace ordfdr {

inline constexpr int kConfigSchemaVersion = 1;

/// The five target levels used for the standard tables.
inline std::vector<double> standard_alphas() { return {0.05, 0.1, 0.2, 0.35, 0.5}; }

/// 21 evenly spaced levels on [0.01, 0.5] merged with the five named levels.
inline std::vector<double> curve_alphas() {
  std::vector<double> a;
  for (int i = 0; i <= 20; ++i) a.push_back(0.01 + 0.49 * i / 20.0);
  for (double x : standard_alphas()) a.push_back(x);
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double x : a)
    if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
  return out;
}

/// Named scenarios. Ordered: easy/medium/hard with m=100, s=20. The large-*
/// variants scale to m=1000, s=200. ortho-* are orthogonal-lasso problems
/// with n=200, p=100, s=10.
inline SimScenario preset_scenario(const std::string& name) {
  SimScenario sc;
  sc.name = name;
  auto ordered = [&](double b, Placement pl, double g, std::size_t m, std::size_t s) {
    sc.kind = ScenarioKind::ordered;
    sc.beta_b = b;
    sc.placement = pl;
    sc.gamma = g;
    sc.m = m;
    sc.s = s;
  };
  auto ortho = [&](double g) {
    sc.kind = ScenarioKind::regression;
    sc.n = 200;
    sc.p = 100;
    sc.s = 10;
    sc.m = 100;
    sc.gamma_signal = g;
    sc.sigma = 1.0;
    sc.design = Design::orthogonal;
  };
  if (name == "easy") ordered(23, Placement::perfect, 0, 100, 20);
  else if (name == "medium") ordered(14, Placement::weighted, 8, 100, 20);
  else if (name == "hard") ordered(8, Placement::weighted, 4, 100, 20);
  else if (name == "large-easy") ordered(23, Placement::perfect, 0, 1000, 200);
  else if (name == "large-medium") ordered(14, Placement::weighted, 8, 1000, 200);
  else if (name == "large-hard") ordered(8, Placement::weighted, 4, 1000, 200);
  else if (name == "harmonic") {
    sc.kind = ScenarioKind::harmonic;
    sc.m = 100;
    sc.s = 20;
  } else if (name == "ortho-easy") ortho(2.0);
  else if (name == "ortho-medium") ortho(1.5);
  else if (name == "ortho-hard") ortho(1.0);
  else throw Error("unknown scenario preset '" + name + "'");
  return sc;
}

inline std::vector<std::string> preset_names() {
  return {"easy",      "medium",    "hard",         "large-easy",    "large-medium",
          "large-hard", "harmonic",  "ortho-easy",   "ortho-medium", "ortho-hard"};
}

struct ExperimentConfig {
  std::vector<SimScenario> scenarios;
  std::vector<RuleId> rules;
  std::vector<double> alphas = standard_alphas();
  std::size_t trials = 1;
  std::size_t workers = 0;  // 0: ORDFDR_WORKERS or hardware concurrency
  std::uint64_t seed = 1;
  std::string output;

  void validate() const {
    if (scenarios.empty()) throw Error("config: no scenarios");
    if (rules.empty()) throw Error("config: no rules");
    if (alphas.empty()) throw Error("config: empty alpha grid");
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      if (!(alphas[i] > 0.0 && alphas[i] < 1.0)) throw Error("config: alphas must lie in (0,1)");
      if (i > 0 && !(alphas[i] > alphas[i - 1]))
        throw Error("config: alphas must be strictly increasing");
    }
    if (trials < 1) throw Error("config: trials must be >= 1");
    std::set<std::string> names;
    for (const auto& sc : scenarios) {
      sc.validate();
      if (!names.insert(sc.name).second) throw Error("config: duplicate scenario name '" + sc.name + "'");
      for (RuleId r : rules)
        if (r == RuleId::tail_stop && sc.kind == ScenarioKind::ordered)
          throw Error("config: tail_stop needs test statistics; scenario '" + sc.name +
                      "' produces p-values");
    }
  }
};

inline std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ORDFDR_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return it.key() == a; }))
      throw Error(where + ": unknown key '" + it.key() + "'");
  }
}

inline SimScenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw Error("config: scenario must be an object");
  reject_unknown(j,
                 {"name", "preset", "kind", "m", "s", "beta_b", "placement", "gamma",
                  "signal_shift", "signal_mean", "n", "p", "gamma_signal", "sigma", "design"},
                 "scenario");
  SimScenario sc;
  if (j.contains("preset")) sc = preset_scenario(j.at("preset").get<std::string>());
  if (j.contains("name")) sc.name = j.at("name").get<std::string>();
  if (j.contains("kind")) {
    const auto k = j.at("kind").get<std::string>();
    if (k == "ordered") sc.kind = ScenarioKind::ordered;
    else if (k == "harmonic") sc.kind = ScenarioKind::harmonic;
    else if (k == "regression") sc.kind = ScenarioKind::regression;
    else throw Error("scenario: unknown kind '" + k + "'");
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("m", sc.m);
  get("s", sc.s);
  get("beta_b", sc.beta_b);
  get("gamma", sc.gamma);
  get("signal_shift", sc.signal_shift);
  get("signal_mean", sc.signal_mean);
  get("n", sc.n);
  get("p", sc.p);
  get("gamma_signal", sc.gamma_signal);
  get("sigma", sc.sigma);
  if (j.contains("placement")) {
    const auto pl = j.at("placement").get<std::string>();
    if (pl == "perfect") sc.placement = Placement::perfect;
    else if (pl == "weighted") sc.placement = Placement::weighted;
    else throw Error("scenario: unknown placement '" + pl + "'");
  }
  if (j.contains("design")) {
    const auto d = j.at("design").get<std::string>();
    if (d == "orthogonal") sc.design = Design::orthogonal;
    else if (d == "gaussian") sc.design = Design::gaussian;
    else throw Error("scenario: unknown design '" + d + "'");
  }
  if (sc.kind == ScenarioKind::regression) sc.m = sc.p;
  return sc;
}

inline json scenario_to_json(const SimScenario& sc) {
  json j;
  j["name"] = sc.name;
  j["kind"] = std::string(to_string(sc.kind));
  j["s"] = sc.s;
  switch (sc.kind) {
    case ScenarioKind::ordered:
      j["m"] = sc.m;
      j["beta_b"] = sc.beta_b;
      j["placement"] = std::string(to_string(sc.placement));
      j["gamma"] = sc.gamma;
      break;
    case ScenarioKind::harmonic:
      j["m"] = sc.m;
      j["signal_shift"] = sc.signal_shift;
      j["signal_mean"] = sc.signal_mean;
      break;
    case ScenarioKind::regression:
      j["n"] = sc.n;
      j["p"] = sc.p;
      j["gamma_signal"] = sc.gamma_signal;
      j["sigma"] = sc.sigma;
      j["design"] = std::string(to_string(sc.design));
      break;
  }
  return j;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::json;
  if (!j.is_object()) throw Error("config: document must be a JSON object");
  detail::reject_unknown(j,
                         {"schema_version", "scenario", "scenarios", "rules", "alphas", "trials",
                          "workers", "seed", "output"},
                         "config");
  const int version = j.value("schema_version", kConfigSchemaVersion);
  if (version != kConfigSchemaVersion)
    throw Error("config: unsupported schema_version " + std::to_string(version));

  ExperimentConfig cfg;
  try {
    if (j.contains("scenario") && j.contains("scenarios"))
      throw Error("config: give either 'scenario' or 'scenarios', not both");
    if (j.contains("scenario")) cfg.scenarios.push_back(detail::scenario_from_json(j.at("scenario")));
    if (j.contains("scenarios")) {
      if (!j.at("scenarios").is_array()) throw Error("config: 'scenarios' must be an array");
      for (const auto& s : j.at("scenarios")) cfg.scenarios.push_back(detail::scenario_from_json(s));
    }
    if (j.contains("rules")) {
      for (const auto& r : j.at("rules")) cfg.rules.push_back(parse_rule(r.get<std::string>()));
    } else {
      cfg.rules = {RuleId::forward_stop, RuleId::strong_stop, RuleId::alpha_threshold,
                   RuleId::alpha_investing};
    }
    if (j.contains("alphas")) {
      const auto& a = j.at("alphas");
      if (a.is_string()) {
        const auto g = a.get<std::string>();
        if (g == "standard") cfg.alphas = standard_alphas();
        else if (g == "curve") cfg.alphas = curve_alphas();
        else throw Error("config: unknown alpha grid '" + g + "'");
      } else {
        cfg.alphas = a.get<std::vector<double>>();
      }
    }
    cfg.trials = j.value("trials", std::size_t{1});
    cfg.workers = j.value("workers", std::size_t{0});
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.output = j.value("output", std::string{});
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  for (auto& sc : cfg.scenarios) sc.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

/// Fully expanded config; feeding it back reproduces the run exactly.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["scenarios"] = nlohmann::json::array();
  for (const auto& sc : cfg.scenarios) j["scenarios"].push_back(detail::scenario_to_json(sc));
  j["rules"] = nlohmann::json::array();
  for (RuleId r : cfg.rules) j["rules"].push_back(std::string(to_string(r)));
  j["alphas"] = cfg.alphas;
  j["trials"] = cfg.trials;
  j["workers"] = cfg.workers;
  j["seed"] = cfg.seed;
  j["output"] = cfg.output;
  return j;
}

/// Apply a seed override to the config and every scenario in it.
inline void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  for (auto& sc : cfg.scenarios) sc.seed = seed;
}

}  // namespace ordfdr
