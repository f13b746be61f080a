// ordfdr: ordered-hypothesis FDR stopping rules from the command line.
//
//   ordfdr stop --input pvalues.csv --rule forward_stop --alpha 0.2
//   ordfdr sweep --config configs/ordered.json --output runs/ordered
//   ordfdr sweep --preset easy --trials 2000 --output runs/easy
//   ordfdr regress --preset ortho-medium --trials 2000 --output runs/ortho
//   ordfdr validate-config configs/ordered.json

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ordfdr/ordfdr.hpp"

namespace {

using namespace ordfdr;

struct SweepOptions {
  std::string config_path;
  std::vector<std::string> presets;
  std::vector<std::string> rules;
  std::string alphas;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::string output;
};

std::vector<double> parse_alpha_list(const std::string& text) {
  if (text == "standard") return standard_alphas();
  if (text == "curve") return curve_alphas();
  std::vector<double> out;
  for (const auto& tok : CLI::detail::split(text, ',')) out.push_back(std::stod(tok));
  return out;
}

ExperimentConfig build_config(const SweepOptions& o, bool regression) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    if (!o.presets.empty()) throw Error("give either --config or --preset, not both");
    cfg = load_config(o.config_path);
  } else {
    if (o.presets.empty()) throw Error("need --config or at least one --preset");
    for (const auto& p : o.presets) cfg.scenarios.push_back(preset_scenario(p));
    if (regression)
      cfg.rules = {RuleId::forward_stop, RuleId::strong_stop, RuleId::alpha_threshold,
                   RuleId::alpha_investing, RuleId::tail_stop};
    else
      cfg.rules = {RuleId::forward_stop, RuleId::strong_stop, RuleId::alpha_threshold,
                   RuleId::alpha_investing};
  }
  if (!o.rules.empty()) {
    cfg.rules.clear();
    for (const auto& r : o.rules) cfg.rules.push_back(parse_rule(r));
  }
  if (!o.alphas.empty()) cfg.alphas = parse_alpha_list(o.alphas);
  if (o.trials) cfg.trials = *o.trials;
  if (o.workers) cfg.workers = *o.workers;
  if (!o.output.empty()) cfg.output = o.output;
  set_seed(cfg, o.seed.value_or(cfg.seed));
  cfg.validate();
  if (cfg.output.empty()) throw Error("no output directory (use --output or set \"output\")");
  return cfg;
}

void add_sweep_options(CLI::App* cmd, SweepOptions& o) {
  cmd->add_option("--config,-c", o.config_path, "JSON experiment config");
  cmd->add_option("--preset,-p", o.presets, "named scenario (repeatable)");
  cmd->add_option("--rules", o.rules, "rules to run")->delimiter(',');
  cmd->add_option("--alphas", o.alphas, "'standard', 'curve' or a comma-separated list");
  cmd->add_option("--trials,-n", o.trials, "Monte Carlo trials per scenario");
  cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
  cmd->add_option("--workers,-j", o.workers,
                  "worker threads (default: $ORDFDR_WORKERS or all cores)");
  cmd->add_option("--output,-o", o.output, "output directory (must not exist or be empty)");
}

void print_summary(const ResultBundle& b) {
  for (const auto& sr : b.scenarios) {
    std::cout << "scenario " << sr.scenario.name << " (" << b.config.trials << " trials)\n";
    for (const auto& c : sr.curves)
      for (const auto& p : c.points)
        std::cout << "  " << to_string(c.rule) << " alpha=" << p.alpha << " fdr=" << p.fdr
                  << " power=" << p.power << "\n";
  }
  std::cout << "wrote " << b.config.output << " in " << b.wall_seconds << " s on "
            << b.workers_used << " worker(s)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ordered-hypothesis FDR stopping rules"};
  app.set_version_flag("--version", std::string(ordfdr::kVersion));
  app.require_subcommand(1);

  std::string input, rule_name;
  double alpha = 0.1;
  double epsilon = ordfdr::kDefaultClampEpsilon;
  auto* stop = app.add_subcommand("stop", "apply one rule to an ordered p-value or statistic CSV");
  stop->add_option("--input,-i", input, "CSV with header index,p_value[,label] or index,statistic[,label]")
      ->required();
  stop->add_option("--rule,-r", rule_name, "stopping rule")->required();
  stop->add_option("--alpha,-a", alpha, "target level in (0,1)")->required();
  stop->add_option("--epsilon", epsilon, "p-value clamp margin");

  SweepOptions sweep_opts, regress_opts;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over ordered-hypothesis scenarios");
  add_sweep_options(sweep, sweep_opts);
  auto* regress = app.add_subcommand("regress", "Monte Carlo over orthogonal-lasso scenarios");
  add_sweep_options(regress, regress_opts);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate-config", "check an experiment config");
  validate->add_option("config", validate_path, "JSON experiment config")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stop) {
      const auto res = ordfdr::run_stop(input, ordfdr::parse_rule(rule_name), alpha, epsilon);
      std::cout << ordfdr::to_json(res).dump(2) << "\n";
    } else if (*sweep || *regress) {
      const bool is_regress = static_cast<bool>(*regress);
      const auto cfg = build_config(is_regress ? regress_opts : sweep_opts, is_regress);
      const auto bundle = is_regress ? ordfdr::run_regression_sweep(cfg) : ordfdr::run_sweep(cfg);
      ordfdr::write_bundle(bundle, cfg.output);
      print_summary(bundle);
    } else if (*validate) {
      const auto cfg = ordfdr::load_config(validate_path);
      std::cout << ordfdr::config_to_json(cfg).dump(2) << "\n";
      std::cerr << "config ok: " << cfg.scenarios.size() << " scenario(s), " << cfg.rules.size()
                << " rule(s), " << cfg.alphas.size() << " alpha level(s)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
