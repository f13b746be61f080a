#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "ordfdr/rules.hpp"

using namespace ordfdr;
using Catch::Approx;

namespace {

const std::vector<double> kWorked = {0.00, 0.08, 0.34, 0.15, 0.93, 0.12, 0.64, 0.25, 0.49};

PValueSeries ps(std::vector<double> v) { return clamp(PValueSeries(std::move(v))); }

std::vector<double> random_pvalues(std::mt19937_64& g, std::size_t m) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution small(0.4);
  std::vector<double> p(m);
  for (auto& x : p) x = small(g) ? u(g) * 0.02 : u(g);
  return p;
}

}  // namespace

TEST_CASE("clamp moves boundary values inside the unit interval", "[rules][clamp]") {
  const auto c = clamp(PValueSeries({0.0, 0.5, 1.0}));
  CHECK(c[0] == 1e-15);
  CHECK(c[1] == 0.5);
  CHECK(c[2] == 1.0 - 1e-15);
  CHECK(clamp(PValueSeries({0.3}))[0] == 0.3);
  CHECK(clamp(PValueSeries({1e-20}))[0] == 1e-15);

  const auto labelled = clamp(PValueSeries({0.0, 1.0}, Labels{Label::nonnull, Label::null}));
  REQUIRE(labelled.labels());
  CHECK((*labelled.labels())[1] == Label::null);

  CHECK(clamp(PValueSeries({0.0}, std::nullopt, 1e-6))[0] == 1e-6);
}

TEST_CASE("p-value series rejects values outside [0,1]", "[rules][errors]") {
  CHECK_THROWS_AS(PValueSeries({0.2, 1.5}), Error);
  CHECK_THROWS_AS(PValueSeries({-0.1}), Error);
  CHECK_THROWS_AS(PValueSeries({std::nan("")}), Error);
  CHECK_THROWS_AS(PValueSeries({0.1, 0.2}, Labels{Label::null}), Error);
  CHECK_THROWS_AS(StatSeries({1.0, -2.0}), Error);
  CHECK_THROWS_AS(StatSeries({INFINITY}), Error);
}

TEST_CASE("renyi_forward", "[rules][renyi]") {
  SECTION("m = 1 reproduces the p-value") {
    const auto t = renyi_forward(ps({0.5}));
    CHECK(t.y[0] == Approx(std::log(2.0)));
    CHECK(t.z[0] == Approx(std::log(2.0)));
    CHECK(t.q[0] == Approx(0.5).epsilon(1e-14));
  }
  SECTION("m = 2, p = (0.2, 0.2)") {
    const auto t = renyi_forward(ps({0.2, 0.2}));
    CHECK(t.y[0] == Approx(0.2231435513142097).epsilon(1e-14));
    CHECK(t.z[0] == Approx(0.11157177565710485).epsilon(1e-14));
    CHECK(t.z[1] == Approx(0.33471532697131456).epsilon(1e-14));
    CHECK(t.q[0] == Approx(0.1055728090000841).epsilon(1e-14));
    CHECK(t.q[1] == Approx(0.28445824720006724).epsilon(1e-14));
  }
  SECTION("zeros after clamping stay at first order in epsilon") {
    const auto t = renyi_forward(ps({0.0, 0.0}));
    CHECK(t.q[0] == Approx(5e-16).epsilon(1e-6));
    CHECK(t.q[1] == Approx(1.5e-15).epsilon(1e-6));
  }
  SECTION("empty input is rejected") { CHECK_THROWS_AS(renyi_forward(PValueSeries(std::vector<double>{})), Error); }
}

TEST_CASE("renyi_backward", "[rules][renyi]") {
  CHECK(renyi_backward(ps({0.04})).q[0] == Approx(0.04).epsilon(1e-14));

  const auto t = renyi_backward(ps({0.01, 0.04}));
  CHECK(t.q[0] == Approx(0.002).epsilon(1e-13));
  CHECK(t.q[1] == Approx(0.2).epsilon(1e-14));

  const auto ones = renyi_backward(ps({1.0, 1.0}));
  CHECK(ones.q[0] < 1.0);
  CHECK(1.0 - ones.q[0] < 1e-14);
  CHECK(1.0 - ones.q[1] < 1e-14);

  CHECK_THROWS_AS(renyi_backward(PValueSeries(std::vector<double>{})), Error);
}

TEST_CASE("forward_stop", "[rules][forward]") {
  SECTION("worked sequence at alpha = 0.2") {
    const auto d = forward_stop(ps(kWorked), 0.2);
    CHECK(d.k_hat == 4);
    REQUIRE(d.trace.size() == 9);
    // running means recomputed independently in double precision
    const std::vector<double> means = {1.0000000000000007e-15, 0.04169080446952603,
                                       0.16629901763357263,    0.16535399559962322,
                                       0.6641352038662542,     0.5747515651401928,
                                       0.6385943769104482,     0.5947303388531148,
                                       0.6034652515654093};
    for (std::size_t i = 0; i < 9; ++i) CHECK(d.trace[i].statistic == Approx(means[i]).epsilon(1e-12));
    CHECK(d.k_hat == oracle::forward_stop_brute(clamp(PValueSeries(kWorked)).values(), 0.2));
  }
  SECTION("every running mean exactly at alpha rejects all") {
    for (double a : {0.05, 0.1, 0.2, 0.5}) {
      const double p = -std::expm1(-a);
      const auto d = forward_stop(ps(std::vector<double>(7, p)), a);
      INFO("alpha = " << a << " Y = " << -std::log1p(-p));
      CHECK(d.k_hat == 7);
    }
  }
  SECTION("a large first p-value blocks every prefix") {
    CHECK(forward_stop(ps({0.9, 1e-6, 1e-6}), 0.1).k_hat == 0);
  }
  SECTION("alpha must lie in (0,1)") {
    CHECK_THROWS_AS(forward_stop(ps({0.1}), 0.0), Error);
    CHECK_THROWS_AS(forward_stop(ps({0.1}), 1.0), Error);
  }
}

TEST_CASE("renyi_bh_stop", "[rules][renyi]") {
  CHECK(renyi_bh_stop(ps({0.04}), 0.05).k_hat == 1);
  const auto d = renyi_bh_stop(ps({0.2, 0.2}), 0.25);
  CHECK(d.k_hat == 1);
  CHECK(d.trace[0].satisfied);
  CHECK_FALSE(d.trace[1].satisfied);
  CHECK(d.trace[0].threshold == 0.125);
}

TEST_CASE("renyi_bh_stop on padded series converges to forward_stop", "[rules][renyi]") {
  std::mt19937_64 g(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = ps(random_pvalues(g, 10));
    const double a = 0.05 + 0.05 * (rep % 8);
    const auto padded = pad_with_nulls(p, 1'000'000);
    CHECK(padded.size() == 1'000'010);
    CHECK(renyi_bh_stop(padded, a).k_hat == forward_stop(p, a).k_hat);
  }
}

TEST_CASE("strong_stop", "[rules][strong]") {
  const auto d = strong_stop(ps({0.01, 0.04}), 0.2);
  CHECK(d.k_hat == 2);
  CHECK(d.trace[0].statistic == Approx(0.002).epsilon(1e-13));
  CHECK(d.trace[1].threshold == 0.2);
  CHECK(strong_stop(ps({0.5}), 0.05).k_hat == 0);

  std::mt19937_64 g(11);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = ps(random_pvalues(g, 1 + rep % 30));
    CHECK(strong_stop(p, 0.2).k_hat == oracle::strong_stop_brute(p.values(), 0.2));
  }
}

TEST_CASE("tail_stop", "[rules][tail]") {
  CHECK(tail_stop(StatSeries({0.0, 0.0, 0.0}), 0.9).k_hat == 0);

  const auto d = tail_stop(StatSeries({3.0, 0.5}), 0.5);
  CHECK(d.k_hat == 1);
  CHECK(d.trace[0].statistic == Approx(0.0301973834223185).epsilon(1e-13));
  CHECK(d.trace[1].statistic == Approx(0.6065306597126334).epsilon(1e-13));

  const auto d2 = tail_stop(StatSeries({3.0, 3.0}), 0.5);
  CHECK(d2.k_hat == 2);
  CHECK(d2.trace[1].statistic == Approx(0.049787068367863944).epsilon(1e-13));
}

TEST_CASE("alpha_threshold_stop", "[rules][baseline]") {
  CHECK(alpha_threshold_stop(ps({0.01, 0.3, 0.01}), 0.05).k_hat == 1);
  CHECK(alpha_threshold_stop(ps({0.3, 0.01, 0.01}), 0.05).k_hat == 0);
  CHECK(alpha_threshold_stop(ps({0.01, 0.02}), 0.05).k_hat == 2);
}

TEST_CASE("alpha_invest_stop", "[rules][baseline]") {
  const auto d = alpha_invest_stop(ps({0.05, 0.2}), 0.1);
  CHECK(d.k_hat == 1);
  CHECK(d.trace[0].threshold == Approx(0.09090909090909091).epsilon(1e-14));
  CHECK(d.trace[1].threshold == Approx(0.16666666666666669).epsilon(1e-14));
  CHECK(alpha_invest_stop(ps({0.5, 0.01, 0.01}), 0.1).k_hat == 0);
  for (double a : {0.01, 0.2, 0.7}) CHECK(alpha_invest_stop(ps({0.0, 0.0, 0.0, 0.0}), a).k_hat == 4);
}

TEST_CASE("apply_rule dispatch", "[rules]") {
  const auto p = ps(kWorked);
  for (RuleId r : kAllRules) {
    if (r == RuleId::tail_stop) {
      CHECK_THROWS_AS(apply_rule(r, p, 0.2), Error);
      continue;
    }
    const auto d = apply_rule(r, p, 0.2);
    CHECK(d.rule == r);
    CHECK(parse_rule(to_string(r)) == r);
  }
  CHECK_THROWS_AS(parse_rule("backward_stop"), Error);
}

// ---------------------------------------------------------------------------
// properties over random inputs

TEST_CASE("Renyi transforms are nondecreasing inside [0,1)", "[rules][property]") {
  std::mt19937_64 g(2024);
  for (int rep = 0; rep < 500; ++rep) {
    const auto p = ps(random_pvalues(g, 1 + rep % 50));
    for (const auto& t : {renyi_forward(p), renyi_backward(p)}) {
      for (std::size_t i = 0; i < t.q.size(); ++i) {
        CHECK(t.q[i] >= 0.0);
        CHECK(t.q[i] < 1.0);
        if (i > 0) CHECK(t.q[i] >= t.q[i - 1]);
      }
    }
    const auto f = renyi_forward(p);
    for (std::size_t i = 1; i < f.z.size(); ++i) CHECK(f.z[i] >= f.z[i - 1]);
  }
}

TEST_CASE("max-form rules: condition holds at k_hat and fails beyond it", "[rules][property]") {
  std::mt19937_64 g(99);
  std::uniform_real_distribution<double> ua(0.01, 0.6);
  std::exponential_distribution<double> ex(1.0);
  for (int rep = 0; rep < 400; ++rep) {
    const std::size_t m = 1 + rep % 40;
    const auto p = ps(random_pvalues(g, m));
    std::vector<double> t(m);
    for (auto& x : t) x = ex(g) * (rep % 3 == 0 ? 5.0 : 1.0);
    const double a = ua(g);
    std::vector<StopDecision> ds = {forward_stop(p, a), renyi_bh_stop(p, a), strong_stop(p, a),
                                    tail_stop(StatSeries(t), a)};
    for (const auto& d : ds) {
      REQUIRE(d.trace.size() == m);
      if (d.k_hat >= 1) CHECK(d.trace[d.k_hat - 1].satisfied);
      for (std::size_t k = d.k_hat + 1; k <= m; ++k) CHECK_FALSE(d.trace[k - 1].satisfied);
      for (const auto& e : d.trace) CHECK(e.satisfied == (e.statistic <= e.threshold));
    }
  }
}

TEST_CASE("ForwardStop decision is fixed once a prefix mean passes", "[rules][property]") {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> v = random_pvalues(g, 25);
    const auto d = forward_stop(ps(v), 0.2);
    for (std::size_t k = 1; k <= v.size(); ++k) {
      if (!d.trace[k - 1].satisfied) continue;
      auto w = v;
      for (std::size_t i = k; i < w.size(); ++i) w[i] = u(g);
      CHECK(forward_stop(ps(w), 0.2).k_hat >= k);
    }
  }
}

TEST_CASE("StrongStop statistic at k ignores p_1..p_{k-1}", "[rules][property]") {
  std::mt19937_64 g(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v = random_pvalues(g, 20);
    const auto base = renyi_backward(ps(v));
    const std::size_t k = rep % 20;
    auto w = v;
    for (std::size_t i = 0; i < k; ++i) w[i] = u(g);
    const auto moved = renyi_backward(ps(w));
    for (std::size_t i = k; i < 20; ++i) CHECK(moved.q[i] == base.q[i]);
  }
}

TEST_CASE("TailStop q*_1 depends only on the multiset of statistics", "[rules][property]") {
  std::mt19937_64 g(8);
  std::exponential_distribution<double> ex(0.5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> t(15);
    for (auto& x : t) x = ex(g);
    const double q1 = tail_stop(StatSeries(t), 0.1).trace[0].statistic;
    std::shuffle(t.begin(), t.end(), g);
    CHECK(tail_stop(StatSeries(t), 0.1).trace[0].statistic == Approx(q1).epsilon(1e-12));
  }
}

TEST_CASE("global null: q_k and backward q_k follow Beta(k, m-k+1)", "[rules][property][distribution]") {
  // m = 5 here; the acceptance suite repeats this at m = 20 with 1e5 replications
  constexpr std::size_t m = 5;
  constexpr std::size_t reps = 20000;
  std::mt19937_64 g(31337);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> fwd(m), bwd(m);
  for (std::size_t r = 0; r < reps; ++r) {
    std::vector<double> p(m);
    for (auto& x : p) x = u(g);
    const auto series = ps(p);
    const auto f = renyi_forward(series);
    const auto b = renyi_backward(series);
    for (std::size_t k = 0; k < m; ++k) {
      fwd[k].push_back(f.q[k]);
      bwd[k].push_back(b.q[k]);
    }
  }
  for (std::size_t k = 1; k <= m; ++k) {
    auto cdf = [k](double x) { return oracle::beta_cdf(double(k), double(m - k + 1), x); };
    INFO("k = " << k);
    CHECK(oracle::ks_pvalue(fwd[k - 1], cdf) > 1e-3);
    CHECK(oracle::ks_pvalue(bwd[k - 1], cdf) > 1e-3);
  }
}

TEST_CASE("global null: StrongStop rejects anything with probability exactly alpha", "[rules][strong][distribution]") {
  // BH on the backward statistics is Simes' test of the global null
  constexpr std::size_t m = 10;
  constexpr std::size_t reps = 40000;
  std::mt19937_64 g(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double alpha : {0.05, 0.2}) {
    std::size_t any = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      std::vector<double> p(m);
      for (auto& x : p) x = u(g);
      any += strong_stop(ps(p), alpha).k_hat > 0;
    }
    const double rate = double(any) / reps;
    const double se = std::sqrt(alpha * (1.0 - alpha) / reps);
    INFO("alpha = " << alpha << " rate = " << rate);
    CHECK(std::abs(rate - alpha) <= 4.0 * se);
  }
}
