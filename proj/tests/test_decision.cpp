#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "oeoe/decision.hpp"

using namespace oeoe;

namespace {

// Trajectory law by exhaustive enumeration, keyed by (s, a, r) sequences.
std::map<std::vector<int>, double> enumerate(const TabularMdp& m, const Policy& pi) {
  std::map<std::vector<int>, double> out;
  std::vector<int> path;
  std::function<void(int, int, double)> go = [&](int h, int s, double p) {
    if (p == 0.0) return;
    if (h == m.H) {
      path.push_back(s);
      out[path] += p;
      path.pop_back();
      return;
    }
    for (int a = 0; a < m.n_a; ++a) {
      const double pa = pi[h][s * m.n_a + a];
      const auto row = m.row(h, s, a);
      for (int r = 0; r < m.n_r(); ++r)
        for (int s2 = 0; s2 < m.n_s; ++s2) {
          path.insert(path.end(), {s, a, r});
          go(h + 1, s2, p * pa * row[r * m.n_s + s2]);
          path.resize(path.size() - 3);
        }
    }
  };
  for (int s = 0; s < m.n_s; ++s) go(0, s, m.d1[s]);
  return out;
}

Policy uniform_policy(const TabularMdp& m) {
  return Policy(m.H, std::vector<double>(m.n_s * m.n_a, 1.0 / m.n_a));
}

}  // namespace

TEST_CASE("inverse gap weighting") {
  const std::vector<double> g = {0.6, 0.4};
  const auto p = igw_distribution(g, 1.0);
  // Offset 2·γ·gap = 0.4: 1/λ + 1/(λ + 0.4) = 1 → λ² − 1.6λ − 0.4 = 0.
  const double lambda = (1.6 + std::sqrt(2.56 + 1.6)) / 2.0;
  CHECK(p[0] == doctest::Approx(1.0 / lambda));
  CHECK(p[1] == doctest::Approx(1.0 / (lambda + 0.4)));
  CHECK(p[0] == doctest::Approx(0.54951).epsilon(1e-4));
  const auto q = igw_distribution(g, 1.0, 4.0);
  CHECK(q[1] < p[1]);
  const std::vector<double> flat = {0.3, 0.3, 0.3};
  for (double v : igw_distribution(flat, 5.0)) CHECK(v == doctest::Approx(1.0 / 3));
  const std::vector<double> many = {0.9, 0.1, 0.5, 0.2};
  double s = 0.0;
  for (double v : igw_distribution(many, 10.0)) s += v;
  CHECK(s == doctest::Approx(1.0));
  CHECK(total_variation(p, q) == doctest::Approx(std::abs(p[0] - q[0])));
}

TEST_CASE("contextual bandit class") {
  CbInstance cb;
  cb.n_s = 2;
  cb.n_a = 2;
  cb.g = {{0.2, 0.7, 0.9, 0.4}, {0.5, 0.5, 0.1, 0.6}};
  const DmsoClass cls = cb_class(cb);
  CHECK(cls.n_pi == 4);
  CHECK(cls.n_models() == 2);
  // π = 1: action 1 in context 0, action 0 in context 1.
  CHECK(policy_action(1, 0, 2) == 1);
  CHECK(policy_action(1, 1, 2) == 0);
  CHECK(cls.mean_reward(0, 1) == doctest::Approx(0.5 * (0.7 + 0.9)));
  CHECK(cls.best_decision(0) == 1);
  CHECK(cls.best_decision(1) == 2);  // tie between 2 and 3
  // Σ_s d1(s)(g0 − g1)² under π = 2 (action 0, then action 1).
  CHECK(cls.divergence_between(0, 1, 2) ==
        doctest::Approx(0.5 * (0.09 + 0.04)));

  const std::vector<double> mu = {0.25, 0.75};
  const double gamma = 3.0;
  const auto a = dec_payoff(cls, mu, gamma);
  for (int pi = 0; pi < 4; ++pi)
    for (int m = 0; m < 2; ++m) {
      double div = 0.0;
      for (int h = 0; h < 2; ++h) div += mu[h] * cls.divergence_between(h, m, pi);
      const double best = cls.mean_reward(m, cls.best_decision(m));
      CHECK(a[pi * 2 + m] == doctest::Approx(best - cls.mean_reward(m, pi) - gamma * div));
    }

  const std::vector<std::vector<double>> ps = {{1, 0, 0, 0}, {0, 0.5, 0.5, 0}};
  // Model 0 rewards per policy: .55, .8, .3, .55.
  CHECK(regret(cls, 0, ps) == doctest::Approx(0.25 + 0.5 * 0.5));
}

TEST_CASE("decision-estimation coefficient") {
  CbInstance cb;
  cb.n_s = 1;
  cb.n_a = 2;
  cb.g = {{0.7, 0.3}};
  const DmsoClass single = cb_class(cb);
  const std::vector<double> mu = {1.0};
  const auto r = dec_value(single, mu, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(r.lower <= r.value + 1e-12);

  cb.g = {{0.7, 0.3}, {0.3, 0.7}};
  const DmsoClass two = cb_class(cb);
  const std::vector<double> half = {0.5, 0.5};
  const auto small = dec_value(two, half, 0.5);
  const auto large = dec_value(two, half, 50.0);
  CHECK(small.converged);
  CHECK(large.converged);
  // The coefficient is nonincreasing in γ and bounded by the reward range.
  CHECK(large.value <= small.value + 1e-3);
  CHECK(small.value <= 1.0);
  CHECK(small.lower <= small.value + 1e-12);
  double ps = 0.0;
  for (double v : small.p) ps += v;
  CHECK(ps == doctest::Approx(1.0));
}

TEST_CASE("occupancy, trajectory divergence and coverability") {
  const TabularMdp m = random_mdp(2, 2, 2, {0.0, 1.0}, 4);
  const TabularMdp m2 = random_mdp(2, 2, 2, {0.0, 1.0}, 5);
  const Policy u = uniform_policy(m);

  const auto law = enumerate(m, u);
  const auto d = occupancy_measure(m, u);
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a) {
        double expect = 0.0;
        for (const auto& [path, p] : law)
          if (path[3 * h] == s && path[3 * h + 1] == a) expect += p;
        CHECK(d[h][s * 2 + a] == doctest::Approx(expect));
      }

  const auto law2 = enumerate(m2, u);
  double bc = 0.0;
  for (const auto& [path, p] : law) {
    auto it = law2.find(path);
    if (it != law2.end()) bc += std::sqrt(p * it->second);
  }
  CHECK(trajectory_hellinger(m, m2, u) == doctest::Approx(1.0 - bc));
  CHECK(trajectory_hellinger(m, m, u) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(layerwise_divergence(m, m, u) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<Policy> pis;
  for (int code = 0; code < 16; ++code) {
    std::vector<int> acts(4);
    for (int i = 0; i < 4; ++i) acts[i] = (code >> i) & 1;
    pis.push_back(deterministic_policy(m, acts));
  }
  const std::vector<Policy> one(pis.begin(), pis.begin() + 1);
  CHECK(coverability(m, one) == doctest::Approx(1.0));
  double prev = 0.0;
  for (std::size_t k = 1; k <= pis.size(); ++k) {
    const std::vector<Policy> sub(pis.begin(), pis.begin() + k);
    const double c = coverability(m, sub);
    CHECK(c >= prev - 1e-12);
    CHECK(c <= m.n_s * m.n_a + 1e-12);
    prev = c;
  }
}

TEST_CASE("single-layer coverability equals the action count") {
  const TabularMdp m = random_mdp(1, 3, 4, {0.0, 0.5, 1.0}, 8);
  std::vector<Policy> pis;
  for (int code = 0; code < 64; ++code) {
    std::vector<int> acts = {code % 4, (code / 4) % 4, code / 16};
    pis.push_back(deterministic_policy(m, acts));
  }
  CHECK(coverability(m, pis) == doctest::Approx(4.0));
}

TEST_CASE("count estimator recovers the model") {
  const TabularMdp m = random_mdp(2, 2, 2, {0.0, 1.0}, 12);
  const Policy u = uniform_policy(m);
  CountMle est(m);
  Stream rng(3);
  for (int i = 0; i < 20000; ++i) est.add(sample_trajectory(m, u, rng));
  const TabularMdp e = est.estimate();
  CHECK(trajectory_hellinger(m, e, u) < 1e-3);
  const Trajectory tr = sample_trajectory(m, u, rng);
  CHECK(tr.s.size() == 3);
  CHECK(tr.a.size() == 2);
}

TEST_CASE("contextual bandit lower-bound construction") {
  // β = 1/2, T = 8: N = 4 contexts in blocks of ⌊Nβ⌋ = 2 rounds.
  const CbLowerBound lb = cb_lower_bound_instance(0.5, 8);
  CHECK(lb.n == 4);
  CHECK(lb.block == 2);
  CHECK(lb.flagged == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3});
  CHECK(lb.oracle_valid);
  // Each round costs 1/N online: T/N = 2.
  CHECK(lb.online_error == doctest::Approx(2.0));
  CHECK(lb.half_sqrt == doctest::Approx(1.0));
  CHECK(lb.offline_used == std::vector<double>{0, 0.25, 0, 0.25, 0, 0.25, 0, 0.25});
  CHECK_THROWS_AS(cb_lower_bound_instance(0.5, 7), Error);
}

TEST_CASE("e2d run is reproducible") {
  CbInstance cb;
  cb.n_s = 1;
  cb.n_a = 2;
  cb.g = {{0.8, 0.2}, {0.2, 0.8}};
  const DmsoClass cls = cb_class(cb);
  E2dConfig cfg;
  cfg.gamma = 4.0;
  cfg.T = 30;
  cfg.seed = 7;
  cfg.m_star = 1;
  cfg.beta = 4.0 * std::log(2.0 / 0.05);
  const E2dLog a = run_e2d_off(cls, cfg);
  const E2dLog b = run_e2d_off(cls, cfg);
  REQUIRE(a.steps.size() == 30);
  CHECK(a.regret == b.regret);
  CHECK(a.ps == b.ps);
  CHECK(a.regret == doctest::Approx(regret(cls, 1, a.ps)));
  CHECK(a.regret <= 0.6 * 30);
}
