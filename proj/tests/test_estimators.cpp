#include <doctest.h>

#include <cmath>
#include <vector>

#include "oeoe/estimators.hpp"
#include "oeoe/harness.hpp"

using namespace oeoe;

TEST_CASE("exponential weights rate") {
  const double eta = ew_eta();
  CHECK(eta == doctest::Approx(1.5936).epsilon(1e-4));
  CHECK(eta / (1.0 - std::exp(-eta)) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("exponential weights distribution is the Gibbs law") {
  ExpWeights ew(3, 0.5);
  const std::vector<std::vector<double>> losses = {{1, 0, 0.5}, {0, 1, 0.5}, {1, 1, 0}};
  std::vector<double> cum(3, 0.0);
  for (const auto& l : losses) {
    ew.update(l);
    for (int i = 0; i < 3; ++i) cum[i] += l[i];
  }
  double z = 0.0;
  for (double c : cum) z += std::exp(-0.5 * c);
  const auto p = ew.distribution();
  for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(std::exp(-0.5 * cum[i]) / z));
  CHECK(ew.rounds() == 3);
}

TEST_CASE("round robin assigns round t to copy (t-1) mod N") {
  RoundRobin rr(3, 2, 1.0);
  CHECK(rr.copy_of(1) == 0);
  CHECK(rr.copy_of(3) == 2);
  CHECK(rr.copy_of(4) == 0);
  const std::vector<double> l = {1.0, 0.0};
  rr.feed(2, l);
  CHECK(rr.copy(1).rounds() == 1);
  CHECK(rr.copy(0).rounds() == 0);
  CHECK(rr.distribution(5)[1] > rr.distribution(5)[0]);
  CHECK(rr.distribution(4)[0] == doctest::Approx(0.5));
}

TEST_CASE("aggregation rules") {
  const std::vector<Table> ts = {{0, 1, 1, 0}, {1, 1, 0, 0}};
  CHECK(average_tables(ts) == Table{0.5, 1.0, 0.5, 0.0});
  // Ties go to 1.
  CHECK(majority_vote(ts) == Table{1, 1, 1, 0});
  const std::vector<Table> three = {{0, 1}, {0, 1}, {1, 0}};
  CHECK(majority_vote(three) == Table{0, 1});
}

TEST_CASE("reference parameters average the next N oracle outputs") {
  const std::vector<Table> fhats = {{0.0}, {0.2}, {0.4}, {0.6}, {0.8}};
  const auto refs = reference_parameters(fhats, 2, Aggregation::mean);
  REQUIRE(refs.size() == 5);
  // t=1: mean(.2,.4); t=4: mean(.8, pad .8); t=5: pad twice.
  CHECK(refs[0][0] == doctest::Approx(0.3));
  CHECK(refs[2][0] == doctest::Approx(0.7));
  CHECK(refs[3][0] == doctest::Approx(0.8));
  CHECK(refs[4][0] == doctest::Approx(0.8));
}

TEST_CASE("delay tuning") {
  // round(√(C_D·β·T / (C_D + ln|F|))).
  CHECK(tune_delay(4.0, 100.0, 2.0, 2.0) == 14);
  CHECK(tune_delay(1.0, 64.0, 1.0, 3.0) == 4);
  CHECK(tune_delay(0.0, 100.0, 2.0, 2.0) == 1);
  CHECK(tune_delay_beta_free(100.0, 2.0, 2.0) == tune_delay(1.0, 100.0, 2.0, 2.0));
}

TEST_CASE("version space averaging keeps exactly the consistent members") {
  const Instance inst = random_binary_instance(40, 8, 9);
  const double beta = 1.0;
  Vsa vsa(inst, beta);
  Stream rng(5);
  std::vector<Table> fhats;
  std::vector<int> xs;
  for (int t = 1; t <= 12; ++t) {
    const Table& fhat = inst.cls[rng() % 4];
    fhats.push_back(fhat);
    // Brute force: f survives iff every constraint s ≤ t holds.
    std::vector<int> expect;
    for (int f = 0; f < inst.size(); ++f) {
      bool ok = true;
      for (int s = 0; s < t && ok; ++s) {
        double sum = 0.0;
        for (int tau = 0; tau < s; ++tau)
          sum += inst.d(fhats[s], inst.cls[f], xs[tau]);
        ok = sum <= beta;
      }
      if (ok) expect.push_back(f);
    }
    if (expect.empty()) {
      CHECK_THROWS_AS(vsa.step(fhat, -1), Error);
      break;
    }
    const Mixture mu = vsa.step(fhat, -1);
    CHECK(vsa.survivors() == expect);
    CHECK(mu.atoms.size() == expect.size());
    for (double w : mu.weights) CHECK(w == doctest::Approx(1.0 / expect.size()));
    const int x = static_cast<int>(rng() % inst.n_x);
    xs.push_back(x);
    vsa.reveal(x);
  }
}

TEST_CASE("version space averaging signals an invalid oracle") {
  const Instance inst = threshold_instance(3);
  Vsa vsa(inst, 0.0);
  vsa.step(inst.cls[0], 0);
  vsa.reveal(0);
  vsa.step(inst.cls[0], 0);  // keeps f_0 only
  vsa.reveal(2);
  // f_2 disagrees with f_0 at covariate 0, which is the only survivor.
  CHECK_THROWS_AS(vsa.step(inst.cls[2], 2), Error);
}

TEST_CASE("averaged variant needs a convex value space") {
  const Instance bin = threshold_instance(3);
  CHECK_THROWS_AS(Vsa(bin, 1.0, 1.0, true), Error);
  const Instance sq = square_instance(4, 3, 1);
  Vsa vsa(sq, 100.0, 1.0, true);
  const Mixture mu = vsa.step(sq.cls[0], 0);
  REQUIRE(mu.atoms.size() == 1);
  for (int x = 0; x < 3; ++x) {
    double m = 0.0;
    for (const auto& f : sq.cls) m += f[x] / 4.0;
    CHECK(mu.atoms[0][x] == doctest::Approx(m));
  }
}

TEST_CASE("delayed reduction starts uniform and follows round robin") {
  const Instance inst = square_instance(5, 4, 2);
  DelayedReduction dr(inst, 2, Aggregation::mean, 1.0);
  std::vector<Table> fhats;
  for (int t = 1; t <= 6; ++t) {
    const Table& fhat = inst.cls[t % 5];
    fhats.push_back(fhat);
    const Mixture mu = dr.step(fhat, t % 5);
    if (t <= 2)
      for (double w : mu.weights) CHECK(w == doctest::Approx(0.2));
    CHECK(mu.total() == doctest::Approx(1.0));
    dr.reveal(t % 4);
  }
  // Rounds 1..4 have had their references revealed (s = t − N).
  REQUIRE(dr.references().size() == 4);
  const auto refs = reference_parameters(fhats, 2, Aggregation::mean);
  for (int s = 0; s < 4; ++s) CHECK(dr.references()[s] == refs[s]);
  CHECK_THROWS_AS(DelayedReduction(threshold_instance(3), 2, Aggregation::mean), Error);
}

TEST_CASE("learner names") {
  CHECK(learner_kind_from("vsa") == LearnerKind::vsa);
  CHECK(learner_kind_from("cde-stack") == LearnerKind::cde_stack);
  CHECK_THROWS_AS(learner_kind_from("oracle"), Error);
}
