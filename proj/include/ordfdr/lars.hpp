#pragma once

// Least-angle regression knots and the test statistics built from them:
// covariance-test statistics for orthogonal designs and the first spacing
// test p-value.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ordfdr/normal_tail.hpp"
#include "ordfdr/series.hpp"

namespace ordfdr {

enum class Design : unsigned char { orthogonal, gaussian };

inline std::string_view to_string(Design d) {
  return d == Design::orthogonal ? "orthogonal" : "gaussian";
}

struct RegressionProblem {
  Eigen::MatrixXd X;  // n x p, columns scaled to unit norm
  Eigen::VectorXd y;
  double sigma = 1.0;
  Design design = Design::gaussian;
  std::optional<Eigen::VectorXd> beta_true;
  std::vector<std::size_t> support_true;  // 0-based, ascending
};

/// Variables in the order they join the active set, with the value of the
/// maximal absolute correlation at each entry (the knots).
struct LarPath {
  std::vector<std::size_t> entry_order;  // 0-based column indices
  std::vector<double> knots;             // nonincreasing, >= 0
  std::size_t num_predictors = 0;
  bool orthogonal_design = false;

  std::size_t steps() const noexcept { return knots.size(); }
};

/// Closed form for X'X = I: variables enter in order of decreasing |X'y|,
/// and the knots are those absolute correlations. Ties go to the lower index.
inline LarPath lar_path_orthogonal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                   std::size_t max_steps) {
  const auto p = static_cast<std::size_t>(X.cols());
  if (max_steps > p) throw Error("lar_path: max_steps exceeds number of predictors");
  const Eigen::VectorXd c = X.transpose() * y;
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(c[static_cast<Eigen::Index>(a)]) > std::abs(c[static_cast<Eigen::Index>(b)]);
  });
  LarPath path;
  path.num_predictors = p;
  path.orthogonal_design = true;
  order.resize(max_steps);
  path.entry_order = order;
  path.knots.reserve(max_steps);
  for (std::size_t j : order) path.knots.push_back(std::abs(c[static_cast<Eigen::Index>(j)]));
  return path;
}

/// The least-angle recursion for a general standardized design. Variables
/// only enter (no lasso drops). Throws if the active set loses rank.
inline LarPath lar_path_general(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                std::size_t max_steps) {
  using Eigen::Index;
  const Index n = X.rows();
  const Index p = X.cols();
  if (max_steps > static_cast<std::size_t>(p))
    throw Error("lar_path: max_steps exceeds number of predictors");
  if (y.size() != n) throw Error("lar_path: response length does not match design rows");

  LarPath path;
  path.num_predictors = static_cast<std::size_t>(p);
  if (max_steps == 0) return path;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd c = X.transpose() * y;
  std::vector<bool> active(static_cast<std::size_t>(p), false);
  std::vector<Index> act;

  Index first = 0;
  for (Index j = 1; j < p; ++j)
    if (std::abs(c[j]) > std::abs(c[first])) first = j;
  double lambda = std::abs(c[first]);
  act.push_back(first);
  active[static_cast<std::size_t>(first)] = true;
  path.entry_order.push_back(static_cast<std::size_t>(first));
  path.knots.push_back(lambda);

  const double tiny = 1e-12 * std::max(lambda, 1.0);
  // every active set is factored, including the final one, so a degenerate
  // entry is reported even when it is the last step
  for (;;) {
    const auto k = static_cast<Index>(act.size());
    Eigen::MatrixXd XA(n, k);
    Eigen::VectorXd sA(k);
    for (Index i = 0; i < k; ++i) {
      XA.col(i) = X.col(act[static_cast<std::size_t>(i)]);
      sA[i] = c[act[static_cast<std::size_t>(i)]] >= 0.0 ? 1.0 : -1.0;
    }
    const Eigen::MatrixXd G = XA.transpose() * XA;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    const Eigen::VectorXd D = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || D.minCoeff() <= 1e-10 * std::max(1.0, D.maxCoeff()))
      throw Error("lar_path: rank-degenerate active set at step " +
                  std::to_string(path.knots.size()));
    if (path.knots.size() >= max_steps || lambda <= tiny) break;
    const Eigen::VectorXd w = ldlt.solve(sA);
    const Eigen::VectorXd u = XA * w;
    const Eigen::VectorXd a = X.transpose() * u;

    // step length gamma until an inactive correlation ties the active ones
    double gamma = lambda;
    Index entering = -1;
    for (Index j = 0; j < p; ++j) {
      if (active[static_cast<std::size_t>(j)]) continue;
      for (double g : {(lambda - c[j]) / (1.0 - a[j]), (lambda + c[j]) / (1.0 + a[j])}) {
        // a candidate equal to lambda still enters (zero correlation at the end)
        if (std::isfinite(g) && g > tiny && (g < gamma || (entering < 0 && g <= gamma))) {
          gamma = g;
          entering = j;
        }
      }
    }

    for (Index i = 0; i < k; ++i) beta[act[static_cast<std::size_t>(i)]] += gamma * w[i];
    c = X.transpose() * (y - X * beta);
    lambda -= gamma;
    if (entering < 0) break;  // reached the least-squares fit of the active set

    act.push_back(entering);
    active[static_cast<std::size_t>(entering)] = true;
    path.entry_order.push_back(static_cast<std::size_t>(entering));
    path.knots.push_back(std::max(lambda, 0.0));
  }
  return path;
}

inline LarPath lar_path(const RegressionProblem& problem, std::size_t max_steps) {
  if (problem.design == Design::orthogonal) return lar_path_orthogonal(problem.X, problem.y, max_steps);
  return lar_path_general(problem.X, problem.y, max_steps);
}

/// Covariance-test statistics T_k = lambda_k (lambda_k - lambda_{k+1}) with
/// lambda_{p+1} = 0. Only defined for a complete orthogonal-design path.
inline StatSeries covariance_stats(const LarPath& path) {
  if (!path.orthogonal_design)
    throw Error("covariance_stats: only supported for orthogonal designs");
  if (path.knots.size() != path.num_predictors)
    throw Error("covariance_stats: path must contain all p knots");
  const std::size_t K = path.knots.size();
  std::vector<double> t(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double next = k + 1 < K ? path.knots[k + 1] : 0.0;
    t[k] = std::max(0.0, path.knots[k] * (path.knots[k] - next));
  }
  return StatSeries(std::move(t));
}

/// First spacing-test p-value (1 - Phi(l1/sigma)) / (1 - Phi(l2/sigma)).
inline double spacing_test_first(const LarPath& path, double sigma) {
  if (path.knots.size() < 2) throw Error("spacing_test_first: need at least two knots");
  if (!(sigma > 0.0)) throw Error("spacing_test_first: sigma must be positive");
  const double l1 = path.knots[0] / sigma;
  const double l2 = path.knots[1] / sigma;
  return std::clamp(normal_upper_tail_ratio(l1, l2), 0.0, 1.0);
}

/// Conservative p-values p_j = exp(-T_j), labels passed through.
inline PValueSeries pvalues_from_stats(const StatSeries& stats) {
  std::vector<double> p(stats.size());
  for (std::size_t j = 0; j < stats.size(); ++j) p[j] = std::exp(-stats[j]);
  return PValueSeries(std::move(p), stats.labels());
}

/// Ground-truth labels along the path: entry k is nonnull when the k-th
/// entering variable is in the true support.
inline Labels path_labels(const LarPath& path, const std::vector<std::size_t>& support) {
  Labels out;
  out.reserve(path.entry_order.size());
  for (std::size_t j : path.entry_order)
    out.push_back(std::binary_search(support.begin(), support.end(), j) ? Label::nonnull
                                                                         : Label::null);
  return out;
}

}  // namespace ordfdr
