#pragma once

// Synthetic scenarios: ordered p-values with Beta(1,b) alternatives, harmonic
// null statistics, and sparse linear-regression problems. Every generator is
// a pure function of (scenario, trial_index).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ordfdr/lars.hpp"
#include "ordfdr/random.hpp"
#include "ordfdr/series.hpp"

namespace ordfdr {

enum class ScenarioKind : unsigned char { ordered, harmonic, regression };
enum class Placement : unsigned char { perfect, weighted };

inline std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::ordered: return "ordered";
    case ScenarioKind::harmonic: return "harmonic";
    case ScenarioKind::regression: return "regression";
  }
  return "?";
}

inline std::string_view to_string(Placement p) {
  return p == Placement::perfect ? "perfect" : "weighted";
}

struct SimScenario {
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::ordered;
  std::size_t m = 100;  // hypotheses (regression: m == p)
  std::size_t s = 20;   // non-nulls

  // ordered p-values
  double beta_b = 23.0;
  Placement placement = Placement::perfect;
  double gamma = 0.0;  // null placement weight i^gamma

  // harmonic statistics: non-null T = signal_shift + Exp(signal_mean)
  double signal_shift = 10.0;
  double signal_mean = 1.0;

  // regression
  std::size_t n = 200;
  std::size_t p = 100;
  double gamma_signal = 1.0;
  double sigma = 1.0;
  Design design = Design::orthogonal;

  std::uint64_t seed = 1;

  std::size_t num_hypotheses() const noexcept { return kind == ScenarioKind::regression ? p : m; }

  void validate() const {
    if (kind == ScenarioKind::regression) {
      if (s > p) throw Error("scenario '" + name + "': s exceeds p");
      if (p == 0 || n == 0) throw Error("scenario '" + name + "': n and p must be positive");
      if (design == Design::orthogonal && p > n)
        throw Error("scenario '" + name + "': orthogonal design needs p <= n");
      if (!(sigma > 0.0)) throw Error("scenario '" + name + "': sigma must be positive");
      if (!(gamma_signal >= 0.0)) throw Error("scenario '" + name + "': gamma_signal must be >= 0");
      return;
    }
    if (m == 0) throw Error("scenario '" + name + "': m must be positive");
    if (s > m) throw Error("scenario '" + name + "': s exceeds m");
    if (kind == ScenarioKind::ordered) {
      if (!(beta_b > 0.0)) throw Error("scenario '" + name + "': beta_b must be positive");
      if (!(gamma >= 0.0)) throw Error("scenario '" + name + "': gamma must be >= 0");
    } else {
      if (!(signal_shift >= 0.0 && signal_mean >= 0.0))
        throw Error("scenario '" + name + "': signal law parameters must be >= 0");
    }
  }
};

inline Rng trial_rng(const SimScenario& sc, std::uint64_t trial_index) {
  return Rng(derive_seed(sc.seed, fnv1a64(sc.name), trial_index));
}

/// Weighted sampling without replacement of `count` items from weights
/// given as logarithms. Exponential-key form: item i gets key E_i / w_i and
/// the smallest keys win, which is the same law as successive draws with
/// renormalized weights. Returned in draw order.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    const std::vector<double>& log_weights, std::size_t count, Rng& rng) {
  const std::size_t n = log_weights.size();
  if (count > n) throw Error("weighted sample: count exceeds population");
  std::vector<double> key(n);
  for (std::size_t i = 0; i < n; ++i) key[i] = std::log(rng.exponential()) - log_weights[i];
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                    [&](std::size_t a, std::size_t b) { return key[a] < key[b] || (key[a] == key[b] && a < b); });
  idx.resize(count);
  return idx;
}

/// Null indicator per position: the last m-s for perfect separation,
/// otherwise m-s positions drawn with probability proportional to i^gamma.
inline std::vector<bool> null_positions(const SimScenario& sc, Rng& rng) {
  std::vector<bool> is_null(sc.m, false);
  const std::size_t nulls = sc.m - sc.s;
  if (sc.placement == Placement::perfect) {
    for (std::size_t i = sc.s; i < sc.m; ++i) is_null[i] = true;
    return is_null;
  }
  std::vector<double> lw(sc.m);
  for (std::size_t i = 0; i < sc.m; ++i) lw[i] = sc.gamma * std::log(static_cast<double>(i + 1));
  for (std::size_t i : weighted_sample_without_replacement(lw, nulls, rng)) is_null[i] = true;
  return is_null;
}

inline PValueSeries gen_ordered_pvalues(const SimScenario& sc, std::uint64_t trial_index) {
  if (sc.kind != ScenarioKind::ordered) throw Error("gen_ordered_pvalues: scenario is not ordered");
  sc.validate();
  Rng rng = trial_rng(sc, trial_index);
  const std::vector<bool> is_null = null_positions(sc, rng);
  std::vector<double> p(sc.m);
  Labels labels(sc.m);
  for (std::size_t i = 0; i < sc.m; ++i) {
    labels[i] = is_null[i] ? Label::null : Label::nonnull;
    p[i] = is_null[i] ? rng.uniform() : rng.beta1(sc.beta_b);
  }
  return PValueSeries(std::move(p), std::move(labels));
}

/// First s statistics from the synthetic signal law, then T_{s+j} ~ Exp(mean 1/j).
inline StatSeries gen_harmonic_stats(const SimScenario& sc, std::uint64_t trial_index) {
  if (sc.kind != ScenarioKind::harmonic) throw Error("gen_harmonic_stats: scenario is not harmonic");
  sc.validate();
  Rng rng = trial_rng(sc, trial_index);
  std::vector<double> t(sc.m);
  Labels labels(sc.m);
  for (std::size_t i = 0; i < sc.s; ++i) {
    t[i] = sc.signal_shift + rng.exponential(sc.signal_mean);
    labels[i] = Label::nonnull;
  }
  for (std::size_t j = 1; sc.s + j <= sc.m; ++j) {
    t[sc.s + j - 1] = rng.exponential(1.0 / static_cast<double>(j));
    labels[sc.s + j - 1] = Label::null;
  }
  return StatSeries(std::move(t), std::move(labels));
}

/// Nonzero coefficients equally spaced from 2*gamma to gamma*sqrt(2 log p).
inline std::vector<double> signal_grid(std::size_t s, std::size_t p, double gamma_signal) {
  std::vector<double> b(s);
  const double lo = 2.0 * gamma_signal;
  const double hi = gamma_signal * std::sqrt(2.0 * std::log(static_cast<double>(p)));
  for (std::size_t k = 0; k < s; ++k)
    b[k] = s == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(s - 1);
  return b;
}

inline RegressionProblem gen_regression_problem(const SimScenario& sc, std::uint64_t trial_index) {
  if (sc.kind != ScenarioKind::regression)
    throw Error("gen_regression_problem: scenario is not a regression scenario");
  sc.validate();
  Rng rng = trial_rng(sc, trial_index);
  const auto n = static_cast<Eigen::Index>(sc.n);
  const auto p = static_cast<Eigen::Index>(sc.p);

  Eigen::MatrixXd A(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = rng.normal();

  RegressionProblem prob;
  prob.design = sc.design;
  prob.sigma = sc.sigma;
  if (sc.design == Design::orthogonal) {
    // the first p columns of Q from a Householder QR of a Gaussian matrix
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    prob.X = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
  } else {
    prob.X = A;
    for (Eigen::Index j = 0; j < p; ++j) {
      auto col = prob.X.col(j);
      col.array() -= col.mean();
      col /= col.norm();
    }
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  const std::vector<double> grid = signal_grid(sc.s, sc.p, sc.gamma_signal);
  for (std::size_t k = 0; k < sc.s; ++k) {
    beta[static_cast<Eigen::Index>(k)] = grid[k];
    prob.support_true.push_back(k);
  }
  Eigen::VectorXd noise(n);
  for (Eigen::Index i = 0; i < n; ++i) noise[i] = rng.normal();
  prob.y = prob.X * beta + sc.sigma * noise;
  prob.beta_true = std::move(beta);
  return prob;
}

}  // namespace ordfdr
