#include <doctest.h>

#include <cmath>
#include <vector>

#include "oeoe/core.hpp"
#include "oeoe/harness.hpp"

using namespace oeoe;

namespace {

double loss1(LossKind k, double a, double b) {
  const double x[1] = {a}, y[1] = {b};
  return eval_loss(make_loss(k), x, y);
}

// Independent reference for the online error: Σ_t Σ_atoms w·D.
double brute_online(const Instance& inst, const ExperimentLog& log) {
  const Table& fs = inst.cls[log.f_star];
  double s = 0.0;
  for (const auto& st : log.steps) {
    double tot = 0.0, acc = 0.0;
    for (std::size_t a = 0; a < st.mu.atoms.size(); ++a) {
      tot += st.mu.weights[a];
      acc += st.mu.weights[a] * inst.d(st.mu.atoms[a], fs, st.x);
    }
    s += acc / tot;
  }
  return s;
}

}  // namespace

TEST_CASE("rng substreams are deterministic and distinct") {
  Stream a = substream(42, "oracle", 3), b = substream(42, "oracle", 3);
  Stream c = substream(42, "oracle", 4), d = substream(42, "learner", 3);
  const auto va = a();
  CHECK(va == b());
  CHECK(va != c());
  CHECK(va != d());
  Stream u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("loss values") {
  CHECK(loss1(LossKind::zero_one, 0, 1) == 1.0);
  CHECK(loss1(LossKind::zero_one, 1, 1) == 0.0);
  CHECK(loss1(LossKind::square, 0.25, 0.75) == doctest::Approx(0.25));
  // Square loss clamps to [0,1].
  CHECK(loss1(LossKind::square, -1.0, 2.0) == doctest::Approx(1.0));

  const std::vector<double> p = {0.5, 0.5}, q = {1.0, 0.0};
  // ½((√.5−1)² + .5) = 1 − √.5
  CHECK(hellinger_sq(p, q) == doctest::Approx(1.0 - std::sqrt(0.5)));
  CHECK(eval_loss(make_loss(LossKind::kl), q, p) == doctest::Approx(std::log(2.0)));
  CHECK(std::isinf(eval_loss(make_loss(LossKind::kl), p, q)));

  const std::vector<double> g1 = {0.2, 0.6}, g2 = {0.4, 0.6};
  CHECK(eval_loss(make_loss(LossKind::cb_square), g1, g2) == doctest::Approx(0.02));

  CHECK(make_loss(LossKind::zero_one).c_d == 1.0);
  CHECK(make_loss(LossKind::square).c_d == 2.0);
  CHECK(make_loss(LossKind::hellinger).c_d == 2.0);

  const std::vector<double> one = {1.0}, two = {1.0, 0.0};
  CHECK_THROWS_AS(eval_loss(make_loss(LossKind::square), one, two), Error);
}

TEST_CASE("square loss satisfies the relaxed triangle inequality on a grid") {
  const Loss l = make_loss(LossKind::square);
  double worst = -1.0;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j)
      for (int k = 0; k <= 20; ++k) {
        const double a[1] = {i / 20.0}, b[1] = {j / 20.0}, m[1] = {k / 20.0};
        worst = std::max(worst, eval_loss(l, a, b) -
                                    l.c_d * (eval_loss(l, a, m) + eval_loss(l, m, b)));
      }
  CHECK(worst <= 1e-12);
}

TEST_CASE("name round trips and config errors") {
  for (auto k : {LossKind::zero_one, LossKind::square, LossKind::hellinger,
                 LossKind::kl, LossKind::cb_square})
    CHECK(loss_kind_from(to_string(k)) == k);
  for (auto k : {ValueKind::binary, ValueKind::real, ValueKind::prob})
    CHECK(value_kind_from(to_string(k)) == k);
  for (auto k : {KernelKind::dirac, KernelKind::gaussian, KernelKind::categorical})
    CHECK(kernel_kind_from(to_string(k)) == k);
  CHECK_THROWS_AS(loss_kind_from("absolute"), Error);
}

TEST_CASE("mixture sampling follows the weights") {
  Mixture mu;
  mu.atoms = {{0.0}, {1.0}};
  mu.weights = {0.25, 0.75};
  mu.index = {0, 1};
  Stream rng(11);
  int ones = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) ones += mu.sample(rng);
  CHECK(ones / double(n) == doctest::Approx(0.75).epsilon(0.02));
  CHECK(mu.total() == doctest::Approx(1.0));
}

TEST_CASE("offline and online error against brute force") {
  const Instance inst = threshold_instance(5);
  const std::vector<int> xs = {0, 4, 2, 2, 1};
  // f_0 ≡ 1, f_3 = 1{j ≥ 3}: disagree on 0, 1, 2.
  CHECK(offline_error(inst, xs, inst.cls[0], inst.cls[3]) == 4.0);

  ExperimentLog log;
  log.f_star = 2;
  log.T = 3;
  const std::vector<int> ids = {0, 1, 4};
  for (int t = 0; t < 3; ++t) {
    StepRecord st;
    st.x = xs[t];
    st.mu = Mixture::uniform_over(inst, ids);
    st.mu.weights = {0.5, 0.25, 0.25};
    log.steps.push_back(st);
  }
  CHECK(online_error(inst, log) == doctest::Approx(brute_online(inst, log)));
  // x=0: only f_0 disagrees with f_2 (.5); x=4: none; x=2: only f_4 (.25).
  CHECK(online_error(inst, log) == doctest::Approx(0.75));
}

TEST_CASE("potential sum stays below ln x_1") {
  const std::vector<double> xs = {64, 32, 32, 10, 3, 1};
  double expect = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) expect += (xs[i] - xs[i + 1]) / xs[i];
  CHECK(potential_sum(xs) == doctest::Approx(expect));
  CHECK(potential_sum(xs) <= std::log(64.0));
}

TEST_CASE("chain joint and subadditivity") {
  Chain p, q;
  p.alphabet = q.alphabet = {2, 2};
  p.cond = {{0.3, 0.7}, {0.9, 0.1, 0.4, 0.6}};
  q.cond = {{0.6, 0.4}, {0.5, 0.5, 0.2, 0.8}};
  const auto jp = p.joint();
  REQUIRE(jp.size() == 4);
  CHECK(jp[0] == doctest::Approx(0.27));
  CHECK(jp[3] == doctest::Approx(0.42));
  const auto rep = hellinger_subadditivity_check(p, q);
  CHECK(rep.lhs == doctest::Approx(hellinger_sq(jp, q.joint())));
  CHECK(rep.pass);
  CHECK(rep.lhs <= rep.rhs);
}
