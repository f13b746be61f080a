#pragma once

// Stopping rules for ordered hypotheses. Every rule returns a prefix length
// k_hat: hypotheses 1..k_hat are rejected, and k_hat = 0 means no rejection.
//
// The max-form rules (ForwardStop, Renyi-BH, StrongStop, TailStop) pick the
// largest k whose inequality holds, so they can step over isolated large
// p-values early in the sequence. The two baselines stop at the first failure.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ordfdr/series.hpp"

namespace ordfdr {

enum class RuleId : unsigned char {
  forward_stop,
  renyi_bh_stop,
  strong_stop,
  tail_stop,
  alpha_threshold,
  alpha_investing,
};

inline constexpr std::array<RuleId, 6> kAllRules = {
    RuleId::forward_stop, RuleId::renyi_bh_stop,   RuleId::strong_stop,
    RuleId::tail_stop,    RuleId::alpha_threshold, RuleId::alpha_investing};

inline std::string_view to_string(RuleId r) {
  switch (r) {
    case RuleId::forward_stop: return "forward_stop";
    case RuleId::renyi_bh_stop: return "renyi_bh_stop";
    case RuleId::strong_stop: return "strong_stop";
    case RuleId::tail_stop: return "tail_stop";
    case RuleId::alpha_threshold: return "alpha_threshold";
    case RuleId::alpha_investing: return "alpha_investing";
  }
  return "?";
}

inline RuleId parse_rule(std::string_view s) {
  for (RuleId r : kAllRules)
    if (to_string(r) == s) return r;
  throw Error("unknown rule '" + std::string(s) + "'");
}

/// True for rules of the form max{k : condition(k)}.
inline bool is_max_form(RuleId r) {
  return r != RuleId::alpha_threshold && r != RuleId::alpha_investing;
}

struct TraceEntry {
  double statistic = 0.0;
  double threshold = 0.0;
  bool satisfied = false;
};

struct StopDecision {
  std::size_t k_hat = 0;
  RuleId rule = RuleId::forward_stop;
  double alpha = 0.0;
  std::vector<TraceEntry> trace;  // one entry per index 1..m
};

enum class Direction : unsigned char { forward, backward };

/// Renyi-transformed p-values. Forward: y_i = -log(1-p_i),
/// z_i = sum_{j<=i} y_j/(m-j+1), q_i = 1-exp(-z_i). Backward: y_i = -log p_i,
/// z_i = sum_{j>=i} y_j/j, q_i = exp(-z_i). Under the global null both q
/// sequences are distributed as sorted uniforms.
struct TransformedSeries {
  Direction direction = Direction::forward;
  std::vector<double> y;
  std::vector<double> z;
  std::vector<double> q;
};

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0,1)");
}

inline PValueSeries clamped_copy(const PValueSeries& s) {
  return s.clamped() ? s : clamp(s);
}

// BH step-up on an already-monotone statistic: max{k : stat_k <= alpha k / m}.
inline StopDecision bh_on_sorted(const std::vector<double>& stat, double alpha, RuleId rule) {
  StopDecision d;
  d.rule = rule;
  d.alpha = alpha;
  const std::size_t m = stat.size();
  d.trace.resize(m);
  for (std::size_t k = 1; k <= m; ++k) {
    const double thr = alpha * static_cast<double>(k) / static_cast<double>(m);
    const bool ok = stat[k - 1] <= thr;
    d.trace[k - 1] = {stat[k - 1], thr, ok};
    if (ok) d.k_hat = k;
  }
  return d;
}

}  // namespace detail

inline TransformedSeries renyi_forward(const PValueSeries& series) {
  if (series.empty()) throw Error("renyi_forward: empty p-value series");
  const PValueSeries p = detail::clamped_copy(series);
  const std::size_t m = p.size();
  TransformedSeries t;
  t.direction = Direction::forward;
  t.y.resize(m);
  t.z.resize(m);
  t.q.resize(m);
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    t.y[i] = -std::log1p(-p[i]);
    z += t.y[i] / static_cast<double>(m - i);
    t.z[i] = z;
    t.q[i] = -std::expm1(-z);
  }
  return t;
}

inline TransformedSeries renyi_backward(const PValueSeries& series) {
  if (series.empty()) throw Error("renyi_backward: empty p-value series");
  const PValueSeries p = detail::clamped_copy(series);
  const std::size_t m = p.size();
  TransformedSeries t;
  t.direction = Direction::backward;
  t.y.resize(m);
  t.z.resize(m);
  t.q.resize(m);
  for (std::size_t i = 0; i < m; ++i) t.y[i] = -std::log(p[i]);
  double z = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    z += t.y[i] / static_cast<double>(i + 1);
    t.z[i] = z;
    t.q[i] = std::exp(-z);
  }
  return t;
}

/// ForwardStop: largest k whose running mean of -log(1-p_i) is <= alpha.
inline StopDecision forward_stop(const PValueSeries& series, double alpha) {
  detail::check_alpha(alpha);
  const PValueSeries p = detail::clamped_copy(series);
  StopDecision d;
  d.rule = RuleId::forward_stop;
  d.alpha = alpha;
  d.trace.resize(p.size());
  double sum = 0.0;
  for (std::size_t k = 1; k <= p.size(); ++k) {
    sum += -std::log1p(-p[k - 1]);
    const double mean = sum / static_cast<double>(k);
    const bool ok = mean <= alpha;
    d.trace[k - 1] = {mean, alpha, ok};
    if (ok) d.k_hat = k;
  }
  return d;
}

/// BH applied to the forward Renyi statistics q_i. ForwardStop is the
/// limit of this rule as infinitely many null p-values are appended.
inline StopDecision renyi_bh_stop(const PValueSeries& series, double alpha) {
  detail::check_alpha(alpha);
  if (series.empty()) return {0, RuleId::renyi_bh_stop, alpha, {}};
  return detail::bh_on_sorted(renyi_forward(series).q, alpha, RuleId::renyi_bh_stop);
}

/// StrongStop: BH applied to the backward statistics. Controls FWER when
/// all non-null hypotheses precede the nulls.
inline StopDecision strong_stop(const PValueSeries& series, double alpha) {
  detail::check_alpha(alpha);
  if (series.empty()) return {0, RuleId::strong_stop, alpha, {}};
  return detail::bh_on_sorted(renyi_backward(series).q, alpha, RuleId::strong_stop);
}

/// TailStop on raw statistics: q*_i = exp(-sum_{j>=i} T_j), then BH.
inline StopDecision tail_stop(const StatSeries& stats, double alpha) {
  detail::check_alpha(alpha);
  const std::size_t m = stats.size();
  std::vector<double> q(m);
  double tail = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    tail += stats[i];
    q[i] = std::exp(-tail);
  }
  return detail::bh_on_sorted(q, alpha, RuleId::tail_stop);
}

/// Reject everything before the first p-value that exceeds alpha.
inline StopDecision alpha_threshold_stop(const PValueSeries& series, double alpha) {
  detail::check_alpha(alpha);
  const PValueSeries p = detail::clamped_copy(series);
  StopDecision d;
  d.rule = RuleId::alpha_threshold;
  d.alpha = alpha;
  d.trace.resize(p.size());
  bool stopped = false;
  d.k_hat = p.size();
  for (std::size_t k = 1; k <= p.size(); ++k) {
    const bool ok = p[k - 1] <= alpha;
    d.trace[k - 1] = {p[k - 1], alpha, ok};
    if (!ok && !stopped) {
      d.k_hat = k - 1;
      stopped = true;
    }
  }
  return d;
}

/// Alpha-investing with wealth spent to zero at the first failure:
/// stop at the first k with p_{k+1} > (k+1)a / (1 + (k+1)a). If no p-value
/// ever exceeds its threshold the whole series is rejected.
inline StopDecision alpha_invest_stop(const PValueSeries& series, double alpha) {
  detail::check_alpha(alpha);
  const PValueSeries p = detail::clamped_copy(series);
  StopDecision d;
  d.rule = RuleId::alpha_investing;
  d.alpha = alpha;
  d.trace.resize(p.size());
  bool stopped = false;
  d.k_hat = p.size();
  for (std::size_t k = 1; k <= p.size(); ++k) {
    const double ka = static_cast<double>(k) * alpha;
    const double thr = ka / (1.0 + ka);
    const bool ok = !(p[k - 1] > thr);
    d.trace[k - 1] = {p[k - 1], thr, ok};
    if (!ok && !stopped) {
      d.k_hat = k - 1;
      stopped = true;
    }
  }
  return d;
}

/// Dispatch for the rules that consume p-values. tail_stop needs raw
/// statistics and is rejected here.
inline StopDecision apply_rule(RuleId rule, const PValueSeries& series, double alpha) {
  switch (rule) {
    case RuleId::forward_stop: return forward_stop(series, alpha);
    case RuleId::renyi_bh_stop: return renyi_bh_stop(series, alpha);
    case RuleId::strong_stop: return strong_stop(series, alpha);
    case RuleId::alpha_threshold: return alpha_threshold_stop(series, alpha);
    case RuleId::alpha_investing: return alpha_invest_stop(series, alpha);
    case RuleId::tail_stop: break;
  }
  throw Error("tail_stop requires test statistics, not p-values");
}

/// Append `count` synthetic null p-values, all equal to `value`, labelled null.
/// With the default value 1 the padded entries never satisfy a BH inequality,
/// so only the first m indices can be selected.
inline PValueSeries pad_with_nulls(const PValueSeries& series, std::size_t count,
                                   double value = 1.0) {
  std::vector<double> v = series.values();
  v.resize(v.size() + count, value);
  std::optional<Labels> labels;
  if (series.labels()) {
    labels = *series.labels();
    labels->resize(v.size(), Label::null);
  }
  PValueSeries out(std::move(v), std::move(labels), series.clamp_epsilon());
  return series.clamped() ? clamp(std::move(out)) : out;
}

}  // namespace ordfdr
