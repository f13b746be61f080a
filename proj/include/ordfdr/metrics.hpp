#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ordfdr/rules.hpp"
#include "ordfdr/series.hpp"

namespace ordfdr {

/// Outcome of one rule on one trial, scored against ground truth.
struct TrialRecord {
  std::size_t k_hat = 0;
  std::size_t v = 0;  // rejected nulls
  std::size_t r = 0;  // rejections
  std::size_t s = 0;  // non-null hypotheses in the trial
  std::size_t m = 0;
  RuleId rule = RuleId::forward_stop;
  double alpha = 0.0;

  /// V / max(k_hat, 1).
  double fdp() const noexcept {
    return k_hat == 0 ? 0.0 : static_cast<double>(v) / static_cast<double>(k_hat);
  }
  /// (k_hat - V) / s; zero when there are no non-nulls.
  double power() const noexcept {
    return s == 0 ? 0.0 : static_cast<double>(k_hat - v) / static_cast<double>(s);
  }
  bool any_false_rejection() const noexcept { return v >= 1; }
};

inline TrialRecord score_trial(const StopDecision& decision, std::span<const Label> labels) {
  const std::size_t m = labels.size();
  if (!decision.trace.empty() && decision.trace.size() != m)
    throw Error("score_trial: labels length " + std::to_string(m) +
                " does not match decision length " + std::to_string(decision.trace.size()));
  if (decision.k_hat > m) throw Error("score_trial: k_hat exceeds number of labels");
  TrialRecord rec;
  rec.k_hat = decision.k_hat;
  rec.r = decision.k_hat;
  rec.m = m;
  rec.rule = decision.rule;
  rec.alpha = decision.alpha;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] == Label::nonnull) ++rec.s;
    if (i < decision.k_hat && labels[i] == Label::null) ++rec.v;
  }
  return rec;
}

/// Running sums for one (rule, alpha) cell. merge() is associative and
/// commutative, so trials can be folded in any grouping.
struct MetricAccumulator {
  std::size_t n = 0;
  double fdp_sum = 0.0, fdp_sq = 0.0;
  double fwer_sum = 0.0;
  double power_sum = 0.0, power_sq = 0.0;

  void add(const TrialRecord& r) {
    const double f = r.fdp();
    const double w = r.any_false_rejection() ? 1.0 : 0.0;
    const double p = r.power();
    ++n;
    fdp_sum += f;
    fdp_sq += f * f;
    fwer_sum += w;
    power_sum += p;
    power_sq += p * p;
  }

  void merge(const MetricAccumulator& o) {
    n += o.n;
    fdp_sum += o.fdp_sum;
    fdp_sq += o.fdp_sq;
    fwer_sum += o.fwer_sum;
    power_sum += o.power_sum;
    power_sq += o.power_sq;
  }
};

namespace detail {

// Sample standard deviation / sqrt(n); zero for a single trial.
inline double std_err(double sum, double sq, std::size_t n) {
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double mean = sum / dn;
  const double var = std::max(0.0, (sq - dn * mean * mean) / (dn - 1.0));
  return std::sqrt(var / dn);
}

}  // namespace detail

struct AggregatePoint {
  double alpha = 0.0;
  std::size_t n_trials = 0;
  double fdr = 0.0, fdr_se = 0.0;
  double fwer = 0.0, fwer_se = 0.0;  // fraction of trials with V >= 1
  double power = 0.0, power_se = 0.0;
};

inline AggregatePoint summarize(double alpha, const MetricAccumulator& acc) {
  if (acc.n == 0) throw Error("aggregate: empty group");
  const double n = static_cast<double>(acc.n);
  AggregatePoint pt;
  pt.alpha = alpha;
  pt.n_trials = acc.n;
  pt.fdr = acc.fdp_sum / n;
  pt.fdr_se = detail::std_err(acc.fdp_sum, acc.fdp_sq, acc.n);
  pt.fwer = acc.fwer_sum / n;
  // the indicator is 0/1, so its sum of squares equals its sum
  pt.fwer_se = detail::std_err(acc.fwer_sum, acc.fwer_sum, acc.n);
  pt.power = acc.power_sum / n;
  pt.power_se = detail::std_err(acc.power_sum, acc.power_sq, acc.n);
  return pt;
}

/// FDR / FWER / power versus alpha for one rule.
struct AggregateCurve {
  RuleId rule = RuleId::forward_stop;
  std::vector<AggregatePoint> points;  // one per alpha, in grid order

  const AggregatePoint& at(double alpha) const {
    for (const auto& p : points)
      if (p.alpha == alpha) return p;
    throw Error("aggregate curve has no point at requested alpha");
  }
};

inline AggregateCurve aggregate(std::span<const TrialRecord> records, RuleId rule,
                                std::span<const double> alphas) {
  AggregateCurve curve;
  curve.rule = rule;
  std::vector<MetricAccumulator> acc(alphas.size());
  for (const auto& r : records) {
    if (r.rule != rule) continue;
    for (std::size_t a = 0; a < alphas.size(); ++a)
      if (r.alpha == alphas[a]) acc[a].add(r);
  }
  curve.points.reserve(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) curve.points.push_back(summarize(alphas[a], acc[a]));
  return curve;
}

}  // namespace ordfdr
