#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "oeoe/cde.hpp"
#include "oeoe/harness.hpp"
#include "oeoe/oracles.hpp"

using namespace oeoe;

namespace {

History random_history(const Instance& inst, const Table& truth, int n,
                       std::uint64_t seed, bool noisy) {
  Stream rng(seed);
  History h;
  for (int s = 0; s < n; ++s) {
    const int x = static_cast<int>(rng() % inst.n_x);
    h.xs.push_back(x);
    h.ys.push_back(noisy ? sample_outcome(inst.kernel, inst.at(truth, x), rng)
                         : truth[x]);
  }
  return h;
}

// Lowest index attaining the minimum of a score vector.
int argmin_first(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

}  // namespace

TEST_CASE("erm matches a brute-force scan") {
  const Instance inst = square_instance(12, 6, 3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const History h = random_history(inst, inst.cls[seed % 12], 30, seed, true);
    std::vector<double> risk(inst.size(), 0.0);
    for (int f = 0; f < inst.size(); ++f)
      for (int s = 0; s < h.size(); ++s)
        risk[f] += std::pow(inst.cls[f][h.xs[s]] - h.ys[s], 2);
    CHECK(erm_square(inst, h) == argmin_first(risk));
  }
}

TEST_CASE("mle matches a brute-force scan") {
  const Instance inst = make_cde_instance(6, 3, 3, 0.05, 0.95, 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const History h = random_history(inst, inst.cls[seed % 6], 25, seed, true);
    std::vector<double> nll(inst.size(), 0.0);
    for (int f = 0; f < inst.size(); ++f)
      for (int s = 0; s < h.size(); ++s)
        nll[f] -= std::log(inst.cls[f][h.xs[s] * inst.dim + int(h.ys[s])]);
    CHECK(mle(inst, h) == argmin_first(nll));
  }
}

TEST_CASE("consistency oracle returns the first consistent member") {
  const Instance inst = all_binary_instance(4);
  REQUIRE(inst.size() == 16);
  for (int truth = 0; truth < 16; ++truth) {
    const History h = random_history(inst, inst.cls[truth], 6, truth, false);
    int expect = -1;
    for (int f = 0; f < 16 && expect < 0; ++f) {
      bool ok = true;
      for (int s = 0; s < h.size(); ++s) ok = ok && inst.cls[f][h.xs[s]] == h.ys[s];
      if (ok) expect = f;
    }
    CHECK(consistent_binary(inst, h) == expect);
    CHECK(expect <= truth);
  }
  History bad;
  bad.xs = {0, 0};
  bad.ys = {0, 1};
  CHECK_THROWS_AS(consistent_binary(inst, bad), Error);
  // Ties resolve to the lowest index; the empty history returns f_0.
  CHECK(consistent_binary(inst, History{}) == 0);
  CHECK(erm_square(inst, History{}) == 0);
}

TEST_CASE("mle reports degenerate likelihoods") {
  Instance inst;
  inst.n_x = 1;
  inst.n_y = 2;
  inst.dim = 2;
  inst.value = ValueKind::prob;
  inst.kernel = {KernelKind::categorical, 1.0};
  inst.loss = make_loss(LossKind::hellinger);
  inst.cls = {{1.0, 0.0}, {1.0, 0.0}};
  History h;
  h.xs = {0};
  h.ys = {1};
  CHECK_THROWS_AS(mle(inst, h), Error);
}

TEST_CASE("shifted proper oracle") {
  // Blocks of ⌊β⌋+1 = 3 rounds: t = 4 is in block 2, so f_2 (index 1).
  CHECK(shifted_proper_oracle(4, 2.0, 10) == 1);
  CHECK(shifted_proper_oracle(1, 2.0, 10) == 0);
  CHECK(shifted_proper_oracle(3, 2.0, 10) == 0);
  CHECK(shifted_proper_oracle(7, 2.0, 10) == 2);
  CHECK(shifted_proper_oracle(1000, 2.0, 10) == 9);
  CHECK(shifted_proper_oracle(5, 0.5, 10) == 4);
}

TEST_CASE("block delay oracle reveals a covariate after beta sightings") {
  const Instance inst = all_binary_instance(3);
  const Table& fs = inst.cls[7];  // all ones
  const std::vector<int> xs = {0, 0, 1};
  const Table f = block_delay_oracle(inst, xs, fs, 2.0);
  CHECK(f == Table{1.0, 0.0, 0.0});
}

TEST_CASE("unseen covariate oracle") {
  const Instance inst = indicator_instance(5);
  // β = 1: blocks of 2. At t = 3 the first block (covariates 0, 2) is past.
  const std::vector<int> xs = {0, 2};
  const Table f = unseen_covariate_oracle(inst, xs, 2, 1.0, 3);
  CHECK(f == Table{0.0, 1.0, 1.0, 1.0, 1.0});
  const Table g = unseen_covariate_oracle(inst, xs, 4, 1.0, 2);
  CHECK(g == Table{1.0, 1.0, 1.0, 1.0, 1.0});
}

TEST_CASE("projection picks the closest member under the weighted loss") {
  const Instance inst = threshold_instance(4);
  const Table fhat = {0.0, 1.0, 0.0, 1.0};
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  std::vector<double> dist(inst.size(), 0.0);
  for (int f = 0; f < inst.size(); ++f)
    for (int x = 0; x < 4; ++x) dist[f] += p[x] * (fhat[x] != inst.cls[f][x]);
  CHECK(project_to_proper(inst, fhat, p) == argmin_first(dist));
  CHECK(project_to_proper(inst, fhat, p) == 3);
}

TEST_CASE("offline budget accounting") {
  const Instance inst = threshold_instance(4);
  const Table& fs = inst.cls[2];
  const std::vector<Table> fhats = {inst.cls[0], inst.cls[0], inst.cls[1], inst.cls[2]};
  const std::vector<int> xs = {0, 1, 3, 0};
  const auto used = offline_budget_used(inst, fhats, xs, fs);
  // f_0 and f_2 differ on covariates 0 and 1; f_1 and f_2 on covariate 1.
  CHECK(used == std::vector<double>{0.0, 1.0, 1.0, 0.0});
  CHECK(verify_offline_guarantee(inst, fhats, xs, fs, 1.0));
  CHECK_FALSE(verify_offline_guarantee(inst, fhats, xs, fs, 0.5));
}

TEST_CASE("oracle factory") {
  const Instance inst = threshold_instance(6);
  OracleSpec spec;
  spec.kind = OracleKind::shifted_proper;
  spec.beta = 2.0;
  auto o = make_oracle(inst, spec, 5);
  History h;
  h.xs = {0, 1, 2};
  h.ys = {1, 1, 1};
  const Estimate e = o->estimate(h);
  CHECK(e.index == 1);
  CHECK(e.table == inst.cls[1]);
  CHECK(oracle_kind_from("erm-square") == OracleKind::erm_square);
  CHECK_THROWS_AS(oracle_kind_from("nearest-neighbour"), Error);
}
