#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oeoe/cde.hpp"
#include "oeoe/harness.hpp"
#include "oeoe/suites.hpp"

using namespace oeoe;
namespace fs = std::filesystem;

namespace {

const fs::path kData = OEOE_TEST_DATA;

json read(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("oeoe_test_" + name);
  fs::remove_all(p);
  return p;
}

json base_config() { return read(kData / "vsa_threshold.json"); }

}  // namespace

TEST_CASE("config parsing") {
  const RunConfig cfg = parse_config(base_config(), kData);
  CHECK(cfg.T == 40);
  CHECK(cfg.seed == 1);
  CHECK(cfg.f_star == 5);
  CHECK(cfg.instance.size() == 8);
  CHECK(cfg.oracle.kind == OracleKind::consistent_binary);
  CHECK(cfg.learner.kind == LearnerKind::vsa);
  CHECK(cfg.adversary.kind == AdversaryKind::iid);

  const RunConfig e = load_config(kData / "e2d_bandit.json");
  CHECK(e.mode == "e2d");
  CHECK(e.dmso.n_models() == 2);
  CHECK(e.e2d.m_star == 1);
}

TEST_CASE("malformed configs are config errors") {
  auto expect_config_error = [](const json& doc) {
    try {
      parse_config(doc, kData);
      FAIL("accepted a malformed config: " << doc.dump());
    } catch (const Error& e) {
      CHECK(e.code == Errc::config);
    }
  };
  json doc = base_config();
  doc.erase("seed");
  expect_config_error(doc);
  doc = base_config();
  doc["T"] = 0;
  expect_config_error(doc);
  doc = base_config();
  doc["f_star"] = 8;
  expect_config_error(doc);
  doc = base_config();
  doc["learner"]["kind"] = "psychic";
  expect_config_error(doc);
  doc = base_config();
  doc["adversary"]["mode"] = "clairvoyant";
  expect_config_error(doc);
  doc = base_config();
  doc["instance"] = {{"file", "missing.json"}};
  expect_config_error(doc);
  doc = base_config();
  doc["instance"]["generator"]["kind"] = "spiral";
  expect_config_error(doc);
  doc = base_config();
  doc["mode"] = "bandit";
  expect_config_error(doc);
}

TEST_CASE("dotted keys") {
  json doc = base_config();
  set_dotted(doc, "learner.kind", "identity");
  set_dotted(doc, "oracle.beta", 2.5);
  set_dotted(doc, "extra.deep.key", 1);
  CHECK(doc["learner"]["kind"] == "identity");
  CHECK(doc["oracle"]["beta"] == 2.5);
  CHECK(doc["extra"]["deep"]["key"] == 1);
}

TEST_CASE("instance json round trip") {
  for (const Instance& inst :
       {threshold_instance(5), square_instance(4, 3, 2), make_cde_instance(3, 2, 3, 0.1, 0.9, 4)}) {
    const Instance back = instance_from_json(instance_to_json(inst));
    CHECK(back.cls == inst.cls);
    CHECK(back.n_x == inst.n_x);
    CHECK(back.dim == inst.dim);
    CHECK(back.value == inst.value);
    CHECK(back.loss.kind == inst.loss.kind);
    CHECK(back.kernel.kind == inst.kernel.kind);
  }
  const TabularMdp m = random_mdp(2, 2, 2, {0.0, 1.0}, 1);
  const TabularMdp mb = mdp_from_json(mdp_to_json(m));
  CHECK(mb.pbar == m.pbar);
  CHECK(mb.d1 == m.d1);
}

TEST_CASE("adversaries") {
  const Instance inst = threshold_instance(4);
  const Mixture mu = Mixture::point(inst.cls[0], 0);
  AdversarySpec block;
  block.kind = AdversaryKind::block;
  block.beta = 1.5;  // blocks of ⌈β⌉ = 2
  auto a = make_adversary(inst, block, 0, Stream(1));
  std::vector<int> got;
  for (int t = 1; t <= 10; ++t) got.push_back(a->select(t, mu, 0, got));
  CHECK(got == std::vector<int>{0, 0, 1, 1, 2, 2, 3, 3, 3, 3});

  AdversarySpec shift = block;
  shift.kind = AdversaryKind::shifting_threshold;  // blocks of ⌊β⌋+1 = 2
  shift.beta = 1.0;
  auto b = make_adversary(inst, shift, 0, Stream(1));
  CHECK(b->select(3, mu, 0, {}) == 1);

  AdversarySpec unseen;
  unseen.kind = AdversaryKind::unseen;
  unseen.beta = 1.0;
  auto u = make_adversary(inst, unseen, 1, Stream(1));
  got.clear();
  for (int t = 1; t <= 8; ++t) got.push_back(u->select(t, mu, 0, got));
  // Skips i★ = 1 and anything seen before the current block.
  CHECK(got == std::vector<int>{0, 0, 2, 2, 3, 3, 1, 1});

  // μ = f_0 ≡ 1 against f★ = f_3: worst covariates are 0, 1, 2; lowest wins.
  AdversarySpec worst;
  worst.kind = AdversaryKind::worst_of_k;
  auto w = make_adversary(inst, worst, 3, Stream(1));
  CHECK(w->select(1, mu, 0, {}) == 0);

  AdversarySpec bad;
  bad.kind = AdversaryKind::fixed;
  CHECK_THROWS_AS(make_adversary(inst, bad, 0, Stream(1)), Error);
  bad.kind = AdversaryKind::iid;
  bad.dist = {0.5, 0.5};
  CHECK_THROWS_AS(make_adversary(inst, bad, 0, Stream(1)), Error);
}

TEST_CASE("protocol run: determinism, accounting and persistence") {
  const RunConfig cfg = parse_config(base_config(), kData);
  const ExperimentLog log = run_protocol(cfg);
  REQUIRE(log.steps.size() == 40);
  CHECK(log.steps.back().est_cum == doctest::Approx(online_error(cfg.instance, log)));
  for (const auto& st : log.steps) CHECK(st.offline_used <= log.beta + 1e-9);

  std::ostringstream a, b;
  write_csv(a, log);
  write_csv(b, run_protocol(cfg));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("t,x,y,est_step,est_cum,offline_budget_used\n", 0) == 0);

  CHECK(log_from_json(log_to_json(log)) == log);

  json other = base_config();
  other["seed"] = 2;
  std::ostringstream c;
  write_csv(c, run_protocol(parse_config(other, kData)));
  CHECK(c.str() != a.str());

  const fs::path out = scratch("run");
  const RunSummary s = run_and_write(cfg, out);
  CHECK(slurp(out / "transcript.csv") == a.str());
  CHECK(fs::exists(out / "summary.json"));
  CHECK(read(out / "summary.json").is_object());
  CHECK(s.value == doctest::Approx(log.steps.back().est_cum));
  fs::remove_all(out);
}

TEST_CASE("the oracle check names the violating round") {
  json doc = base_config();
  doc["oracle"] = {{"kind", "shifted-proper"}, {"beta", 0.0}};
  // f_2 already disagrees with f★ = f_5 on covariate 4 at round 2.
  doc["adversary"] = {{"kind", "fixed"}, {"sequence", {4}}};
  const RunConfig cfg = parse_config(doc, kData);
  try {
    run_protocol(cfg);
    FAIL("expected an oracle violation");
  } catch (const Error& e) {
    CHECK(e.code == Errc::oracle_violation);
    CHECK(e.round == 2);
  }
}

TEST_CASE("e2d runs write a decision transcript") {
  const RunConfig cfg = load_config(kData / "e2d_bandit.json");
  const fs::path out = scratch("e2d");
  const RunSummary s = run_and_write(cfg, out);
  const std::string csv = slurp(out / "decisions.csv");
  CHECK(csv.rfind("t,pi,r,regret_cum,est_cum\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 41);
  CHECK(s.value >= 0.0);
  CHECK(run_to_summary(cfg).csv == s.csv);
  fs::remove_all(out);
}

TEST_CASE("sweeps match single runs") {
  const json base = base_config();
  const json grid = read(kData / "grid.json");
  const fs::path out = scratch("sweep");
  const SweepReport rep = run_sweep(base, kData, grid, 1, out);
  CHECK(rep.failures.empty());
  REQUIRE(rep.rows.size() == 2);
  for (std::size_t c = 0; c < 2; ++c) {
    json doc = base;
    set_dotted(doc, "learner.kind", rep.rows[c].params["learner.kind"]);
    const RunSummary single = run_to_summary(parse_config(doc, kData));
    CHECK(rep.rows[c].n == 1);
    CHECK(rep.rows[c].mean == single.value);
    CHECK(rep.rows[c].se == 0.0);
    CHECK(slurp(out / "cells" / ("cell" + std::to_string(c) + "_seed0.csv")) == single.csv);
  }
  CHECK(fs::exists(out / "sweep.csv"));

  const SweepReport three = run_sweep(base, kData, grid, 3, scratch("sweep3"));
  REQUIRE(three.rows.size() == 2);
  CHECK(three.rows[0].n == 3);
  CHECK(three.rows[0].se >= 0.0);
  fs::remove_all(out);
  fs::remove_all(scratch("sweep3"));

  CHECK_THROWS_AS(run_sweep(base, kData, json::object(), 1, scratch("empty")), Error);
}

TEST_CASE("suite registry") {
  CHECK(suites().size() == 12);
  for (int k = 1; k <= 12; ++k) CHECK(suites()[k - 1].criterion == k);
  CHECK(find_suite("cb-lower") != nullptr);
  CHECK(find_suite("nope") == nullptr);
}
