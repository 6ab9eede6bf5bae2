#include "oeoe/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <omp.h>

#include "oeoe/cde.hpp"

namespace oeoe {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(Errc::config, what);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    config_error("'" + path.string() + "': " + e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Instance binary_shell(int n_x) {
  Instance inst;
  inst.n_x = n_x;
  inst.dim = 1;
  inst.value = ValueKind::binary;
  inst.kernel = {KernelKind::dirac, 1.0};
  inst.loss = make_loss(LossKind::zero_one);
  return inst;
}

}  // namespace

// ---------------------------------------------------------------- instances

json instance_to_json(const Instance& inst) {
  json j;
  std::vector<int> xs(inst.n_x);
  for (int x = 0; x < inst.n_x; ++x) xs[x] = x;
  j["covariates"] = xs;
  std::vector<int> ys(inst.n_y);
  for (int y = 0; y < inst.n_y; ++y) ys[y] = y;
  j["outcomes"] = ys;
  j["value"] = to_string(inst.value);
  j["dim"] = inst.dim;
  j["kernel"] = {{"kind", to_string(inst.kernel.kind)},
                 {"sigma", inst.kernel.sigma}};
  j["loss"] = {{"kind", to_string(inst.loss.kind)}, {"c_d", inst.loss.c_d}};
  json cls = json::array();
  for (const auto& f : inst.cls) {
    json row = json::array();
    for (int x = 0; x < inst.n_x; ++x) {
      auto z = inst.at(f, x);
      if (inst.dim == 1)
        row.push_back(z[0]);
      else
        row.push_back(std::vector<double>(z.begin(), z.end()));
    }
    cls.push_back(std::move(row));
  }
  j["class"] = std::move(cls);
  return j;
}

Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    const auto& cov = j.at("covariates");
    inst.n_x = cov.is_array() ? static_cast<int>(cov.size()) : cov.get<int>();
    if (j.contains("outcomes")) {
      const auto& out = j.at("outcomes");
      inst.n_y = out.is_array() ? static_cast<int>(out.size()) : out.get<int>();
    }
    inst.value = value_kind_from(j.at("value").get<std::string>());
    inst.dim = j.value("dim", inst.value == ValueKind::prob ? inst.n_y : 1);
    const auto& k = j.at("kernel");
    inst.kernel.kind = kernel_kind_from(k.at("kind").get<std::string>());
    inst.kernel.sigma = k.value("sigma", 1.0);
    const auto& l = j.at("loss");
    inst.loss = make_loss(loss_kind_from(l.at("kind").get<std::string>()));
    inst.loss.c_d = l.value("c_d", inst.loss.c_d);
    for (const auto& row : j.at("class")) {
      if (static_cast<int>(row.size()) != inst.n_x)
        config_error("class member does not cover every covariate");
      Table t;
      for (const auto& z : row) {
        if (z.is_array())
          for (const auto& v : z) t.push_back(v.get<double>());
        else
          t.push_back(z.get<double>());
      }
      inst.cls.push_back(std::move(t));
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    config_error(std::string("instance: ") + e.what());
  } catch (const Error& e) {
    config_error(std::string("instance: ") + e.what());
  }
}

Instance random_binary_instance(int n_f, int n_x, std::uint64_t seed) {
  if (n_x < 1 || n_x > 62 || (n_x < 62 && n_f > (1LL << n_x)))
    throw Error(Errc::invalid_argument, "more functions than labelings");
  Instance inst = binary_shell(n_x);
  Stream rng = substream(seed, "instance");
  std::set<std::uint64_t> seen;
  const std::uint64_t mask =
      n_x == 64 ? ~0ULL : ((1ULL << n_x) - 1);
  while (static_cast<int>(inst.cls.size()) < n_f) {
    const std::uint64_t bits = rng() & mask;
    if (!seen.insert(bits).second) continue;
    Table t(n_x);
    for (int x = 0; x < n_x; ++x) t[x] = static_cast<double>((bits >> x) & 1);
    inst.cls.push_back(std::move(t));
  }
  return inst;
}

Instance all_binary_instance(int n_x) {
  if (n_x < 1 || n_x > 20)
    throw Error(Errc::invalid_argument, "all-binary needs 1 <= |X| <= 20");
  Instance inst = binary_shell(n_x);
  for (int f = 0; f < (1 << n_x); ++f) {
    Table t(n_x);
    for (int x = 0; x < n_x; ++x) t[x] = static_cast<double>((f >> x) & 1);
    inst.cls.push_back(std::move(t));
  }
  return inst;
}

Instance threshold_instance(int n) {
  Instance inst = binary_shell(n);
  for (int i = 0; i < n; ++i) {
    Table t(n);
    for (int j = 0; j < n; ++j) t[j] = j >= i ? 1.0 : 0.0;
    inst.cls.push_back(std::move(t));
  }
  return inst;
}

Instance indicator_instance(int n) {
  Instance inst = binary_shell(n);
  for (int i = 0; i < n; ++i) {
    Table t(n, 0.0);
    t[i] = 1.0;
    inst.cls.push_back(std::move(t));
  }
  return inst;
}

Instance square_instance(int n_f, int n_x, std::uint64_t seed) {
  Instance inst;
  inst.n_x = n_x;
  inst.dim = 1;
  inst.value = ValueKind::real;
  inst.kernel = {KernelKind::gaussian, 1.0};
  inst.loss = make_loss(LossKind::square);
  Stream rng = substream(seed, "instance");
  for (int f = 0; f < n_f; ++f) {
    Table t(n_x);
    for (double& v : t) v = rng.uniform();
    inst.cls.push_back(std::move(t));
  }
  inst.validate();
  return inst;
}

Instance generate_instance(const json& gen) {
  try {
    const std::string kind = gen.at("kind").get<std::string>();
    const std::uint64_t seed = gen.value("seed", std::uint64_t{0});
    if (kind == "random-binary")
      return random_binary_instance(gen.at("n_f"), gen.at("n_x"), seed);
    if (kind == "all-binary") return all_binary_instance(gen.at("n_x"));
    if (kind == "threshold") return threshold_instance(gen.at("n"));
    if (kind == "indicator") return indicator_instance(gen.at("n"));
    if (kind == "square")
      return square_instance(gen.at("n_f"), gen.at("n_x"), seed);
    if (kind == "cde")
      return make_cde_instance(gen.at("n_f"), gen.at("n_x"), gen.value("n_y", 2),
                               gen.value("lo", 0.05), gen.value("hi", 0.95),
                               seed);
    config_error("unknown instance generator '" + kind + "'");
  } catch (const json::exception& e) {
    config_error(std::string("generator: ") + e.what());
  }
}

json dmso_to_json(const DmsoClass& cls) {
  return {{"n_pi", cls.n_pi},
          {"n_o", cls.n_o},
          {"reward_grid", cls.reward_grid},
          {"divergence", to_string(cls.divergence)},
          {"law", cls.law}};
}

DmsoClass dmso_from_json(const json& j) {
  try {
    DmsoClass cls;
    if (j.contains("cb")) {
      const auto& c = j.at("cb");
      CbInstance cb;
      cb.n_s = c.at("n_s");
      cb.n_a = c.at("n_a");
      cb.d1 = c.value("d1", std::vector<double>{});
      cb.g = c.at("g").get<std::vector<std::vector<double>>>();
      return cb_class(cb);
    }
    cls.n_pi = j.at("n_pi");
    cls.n_o = j.value("n_o", 1);
    cls.reward_grid = j.value("reward_grid", default_reward_grid());
    cls.divergence = loss_kind_from(j.value("divergence", std::string("cb-square")));
    cls.law = j.at("law").get<std::vector<std::vector<std::vector<double>>>>();
    cls.validate();
    return cls;
  } catch (const json::exception& e) {
    config_error(std::string("model class: ") + e.what());
  } catch (const Error& e) {
    config_error(std::string("model class: ") + e.what());
  }
}

json mdp_to_json(const TabularMdp& m) {
  return {{"H", m.H},         {"n_s", m.n_s},   {"n_a", m.n_a},
          {"reward_grid", m.reward_grid}, {"d1", m.d1}, {"pbar", m.pbar}};
}

TabularMdp mdp_from_json(const json& j) {
  try {
    TabularMdp m;
    m.H = j.at("H");
    m.n_s = j.at("n_s");
    m.n_a = j.at("n_a");
    m.reward_grid = j.value("reward_grid", default_reward_grid());
    m.d1 = j.at("d1").get<std::vector<double>>();
    m.pbar = j.at("pbar").get<std::vector<std::vector<double>>>();
    for (const auto& layer : m.pbar)
      if (layer.size() != static_cast<std::size_t>(m.n_s) * m.n_a * m.row_size())
        config_error("mdp layer has wrong size");
    m.validate();
    return m;
  } catch (const json::exception& e) {
    config_error(std::string("mdp: ") + e.what());
  } catch (const Error& e) {
    if (e.code == Errc::config) throw;
    config_error(std::string("mdp: ") + e.what());
  }
}

// ---------------------------------------------------------------- adversary

AdversaryKind adversary_kind_from(const std::string& s) {
  if (s == "fixed") return AdversaryKind::fixed;
  if (s == "block") return AdversaryKind::block;
  if (s == "shifting-threshold") return AdversaryKind::shifting_threshold;
  if (s == "unseen") return AdversaryKind::unseen;
  if (s == "iid") return AdversaryKind::iid;
  if (s == "worst-of-k") return AdversaryKind::worst_of_k;
  config_error("unknown adversary kind '" + s + "'");
}

namespace {

class FixedAdversary : public Adversary {
 public:
  explicit FixedAdversary(std::vector<int> seq) : seq_(std::move(seq)) {}
  int select(int t, const Mixture&, int, std::span<const int>) override {
    return seq_[(t - 1) % seq_.size()];
  }

 private:
  std::vector<int> seq_;
};

// Blocks of fixed length walk through covariates 0, 1, ... and stay on the
// last one.
class BlockAdversary : public Adversary {
 public:
  BlockAdversary(int block, int n_x) : block_(block), n_x_(n_x) {}
  int select(int t, const Mixture&, int, std::span<const int>) override {
    return std::min((t + block_ - 1) / block_, n_x_) - 1;
  }

 private:
  int block_, n_x_;
};

class UnseenAdversary : public Adversary {
 public:
  UnseenAdversary(int block, int n_x, int i_star)
      : block_(block), n_x_(n_x), i_star_(i_star) {}
  int select(int t, const Mixture&, int, std::span<const int> past) override {
    const int start = ((t - 1) / block_) * block_;  // rounds before the block
    std::vector<bool> seen(n_x_, false);
    for (int s = 0; s < start; ++s) seen[past[s]] = true;
    for (int j = 0; j < n_x_; ++j)
      if (j != i_star_ && !seen[j]) return j;
    return i_star_;
  }

 private:
  int block_, n_x_, i_star_;
};

class IidAdversary : public Adversary {
 public:
  IidAdversary(std::vector<double> dist, Stream rng)
      : dist_(std::move(dist)), rng_(rng) {}
  int select(int, const Mixture&, int, std::span<const int>) override {
    return sample_row(dist_, rng_);
  }

 private:
  std::vector<double> dist_;
  Stream rng_;
};

class WorstOfK : public Adversary {
 public:
  WorstOfK(const Instance& inst, const Table& f_star, int k, bool realized,
           Stream rng)
      : inst_(inst), f_star_(f_star), k_(k), realized_(realized), rng_(rng) {}
  int select(int, const Mixture& mu, int realized,
             std::span<const int>) override {
    std::vector<int> cand;
    if (k_ <= 0 || k_ >= inst_.n_x) {
      for (int x = 0; x < inst_.n_x; ++x) cand.push_back(x);
    } else {
      for (int i = 0; i < k_; ++i)
        cand.push_back(static_cast<int>(rng_() % inst_.n_x));
      std::sort(cand.begin(), cand.end());
    }
    int best = cand.front();
    double worst = -1.0;
    for (int x : cand) {
      const double l =
          realized_ ? inst_.d(mu.atoms[realized], f_star_, x)
                    : expected_loss(inst_, mu, x, f_star_);
      if (l > worst) {
        worst = l;
        best = x;
      }
    }
    return best;
  }

 private:
  const Instance& inst_;
  const Table& f_star_;
  int k_;
  bool realized_;
  Stream rng_;
};

}  // namespace

std::unique_ptr<Adversary> make_adversary(const Instance& inst,
                                          const AdversarySpec& spec,
                                          int f_star, Stream rng) {
  switch (spec.kind) {
    case AdversaryKind::fixed:
      if (spec.sequence.empty()) config_error("fixed adversary needs a sequence");
      for (int x : spec.sequence)
        if (x < 0 || x >= inst.n_x) config_error("sequence covariate outside X");
      return std::make_unique<FixedAdversary>(spec.sequence);
    case AdversaryKind::block:
      return std::make_unique<BlockAdversary>(
          std::max(1, static_cast<int>(std::ceil(spec.beta))), inst.n_x);
    case AdversaryKind::shifting_threshold:
      return std::make_unique<BlockAdversary>(
          static_cast<int>(std::floor(spec.beta)) + 1, inst.n_x);
    case AdversaryKind::unseen:
      return std::make_unique<UnseenAdversary>(
          static_cast<int>(std::floor(spec.beta)) + 1, inst.n_x, f_star);
    case AdversaryKind::iid: {
      std::vector<double> d = spec.dist;
      if (d.empty()) d.assign(inst.n_x, 1.0 / inst.n_x);
      if (static_cast<int>(d.size()) != inst.n_x)
        config_error("iid distribution must cover X");
      return std::make_unique<IidAdversary>(std::move(d), rng);
    }
    case AdversaryKind::worst_of_k:
      return std::make_unique<WorstOfK>(inst, inst.cls[f_star], spec.k,
                                        spec.realized, rng);
  }
  config_error("bad adversary");
}

// ---------------------------------------------------------------- config

RunConfig parse_config(const json& doc, const fs::path& base_dir) {
  RunConfig cfg;
  cfg.source = doc;
  try {
    cfg.mode = doc.value("mode", std::string("estimation"));
    if (!doc.contains("seed")) config_error("config has no seed");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.T = doc.at("T").get<int>();
    if (cfg.T < 1) config_error("T must be >= 1");

    if (cfg.mode == "e2d") {
      json cls = doc.at("model_class");
      if (cls.is_string()) cls = read_json(base_dir / cls.get<std::string>());
      cfg.dmso = dmso_from_json(cls);
      auto& e = cfg.e2d;
      e.T = cfg.T;
      e.seed = cfg.seed;
      e.gamma = doc.at("gamma").get<double>();
      e.m_star = doc.value("m_star", 0);
      e.beta = doc.at("beta").get<double>();
      e.multiplier = doc.value("multiplier", 1.0);
      if (doc.contains("dec")) {
        e.dec.max_iter = doc["dec"].value("max_iter", e.dec.max_iter);
        e.dec.tol = doc["dec"].value("tol", e.dec.tol);
      }
      if (e.m_star < 0 || e.m_star >= cfg.dmso.n_models())
        config_error("m_star outside the model class");
      return cfg;
    }
    if (cfg.mode != "estimation") config_error("unknown mode '" + cfg.mode + "'");

    const json& ins = doc.at("instance");
    if (ins.contains("generator"))
      cfg.instance = generate_instance(ins.at("generator"));
    else if (ins.contains("file")) {
      const fs::path p = base_dir / ins.at("file").get<std::string>();
      if (!fs::exists(p)) config_error("instance file '" + p.string() + "' missing");
      cfg.instance = instance_from_json(read_json(p));
    } else
      cfg.instance = instance_from_json(ins);

    cfg.f_star = doc.value("f_star", 0);
    if (cfg.f_star < 0 || cfg.f_star >= cfg.instance.size())
      config_error("f_star outside the class");

    const json& o = doc.at("oracle");
    cfg.oracle.kind = oracle_kind_from(o.at("kind").get<std::string>());
    cfg.oracle.beta = o.value("beta", 0.0);
    if (o.contains("tables_file")) {
      const fs::path p = base_dir / o.at("tables_file").get<std::string>();
      cfg.oracle.tables = read_json(p).get<std::vector<Table>>();
    } else if (o.contains("tables"))
      cfg.oracle.tables = o.at("tables").get<std::vector<Table>>();

    const json& l = doc.at("learner");
    cfg.learner.kind = learner_kind_from(l.at("kind").get<std::string>());
    cfg.learner.multiplier = l.value("multiplier", 1.0);
    cfg.learner.delay = l.value("delay", 0);
    cfg.learner.eta = l.value("eta", 0.0);
    cfg.learner.replays = l.value("replays", 0);
    cfg.learner.parallel = l.value("parallel", true);

    const json& a = doc.at("adversary");
    cfg.adversary.kind = adversary_kind_from(a.at("kind").get<std::string>());
    cfg.adversary.sequence = a.value("sequence", std::vector<int>{});
    cfg.adversary.beta = a.value("beta", cfg.oracle.beta);
    cfg.adversary.dist = a.value("dist", std::vector<double>{});
    cfg.adversary.k = a.value("k", 0);
    const std::string mode = a.value("mode", std::string("mu"));
    if (mode != "mu" && mode != "realized")
      config_error("adversary mode must be 'mu' or 'realized'");
    cfg.adversary.realized = mode == "realized";

    if (doc.contains("verify")) {
      cfg.verify_oracle = doc["verify"].value("oracle", true);
      cfg.log_mixtures = doc["verify"].value("log_mixtures", true);
    }
  } catch (const json::exception& e) {
    config_error(std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code == Errc::config) throw;
    config_error(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  return parse_config(read_json(path), path.parent_path());
}

std::unique_ptr<OnlineLearner> make_learner(const Instance& inst,
                                            const LearnerSpec& spec,
                                            double beta, int T,
                                            std::uint64_t seed) {
  const double eta = spec.eta > 0.0 ? spec.eta : ew_eta();
  const double ln_f = std::log(static_cast<double>(inst.size()));
  switch (spec.kind) {
    case LearnerKind::vsa:
      return std::make_unique<Vsa>(inst, beta, spec.multiplier);
    case LearnerKind::vsa_averaged:
      return std::make_unique<Vsa>(inst, beta, spec.multiplier, true);
    case LearnerKind::identity:
      return std::make_unique<IdentityLearner>();
    case LearnerKind::delayed:
    case LearnerKind::majority: {
      const int n = spec.delay > 0 ? spec.delay
                                   : tune_delay(beta, T, inst.loss.c_d, ln_f);
      return std::make_unique<DelayedReduction>(
          inst, n,
          spec.kind == LearnerKind::delayed ? Aggregation::mean
                                            : Aggregation::majority,
          eta);
    }
    case LearnerKind::cde_stack: {
      EwLogLoss proto(inst);
      const int n = spec.delay > 0
                        ? spec.delay
                        : tune_stack_delay(proto.c_f(), beta, T,
                                           std::log(ratio_bound(inst)),
                                           proto.r_cde(T));
      const int local = (T + n - 1) / n;
      const int L = spec.replays > 0
                        ? spec.replays
                        : replay_count(local, inst.size(), inst.n_x, 1.0 / n);
      return std::make_unique<OeoeCdeStack>(inst, proto, n, L, seed,
                                            spec.parallel);
    }
  }
  config_error("bad learner");
}

// ---------------------------------------------------------------- running

ExperimentLog run_protocol(const RunConfig& cfg) {
  if (cfg.mode != "estimation")
    throw Error(Errc::config, "run_protocol needs an estimation config");
  const Instance& inst = cfg.instance;
  const Table& f_star = inst.cls.at(cfg.f_star);
  auto oracle = make_oracle(inst, cfg.oracle, cfg.f_star);
  auto learner = make_learner(inst, cfg.learner, cfg.oracle.beta, cfg.T,
                              mix(cfg.seed, fnv1a("learner-replays")));
  auto adversary = make_adversary(inst, cfg.adversary, cfg.f_star,
                                  substream(cfg.seed, "adversary"));
  Stream rng_learner = substream(cfg.seed, "learner");
  Stream rng_kernel = substream(cfg.seed, "kernel");

  ExperimentLog log;
  log.T = cfg.T;
  log.beta = cfg.oracle.beta;
  log.seed = cfg.seed;
  log.f_star = cfg.f_star;
  History h;
  double cum = 0.0;
  for (int t = 1; t <= cfg.T; ++t) {
    Estimate e = oracle->estimate(h);
    inst.check_table(e.table);
    const double used = offline_error(inst, h.xs, e.table, f_star);
    if (cfg.verify_oracle && used > cfg.oracle.beta + 1e-9)
      throw Error(Errc::oracle_violation,
                  "offline error " + fmt(used) + " exceeds beta " +
                      fmt(cfg.oracle.beta),
                  t);
    Mixture mu = learner->step(e.table, e.index);
    const int realized = mu.sample(rng_learner);
    const int x = adversary->select(t, mu, realized, h.xs);
    if (x < 0 || x >= inst.n_x)
      throw Error(Errc::invalid_argument, "adversary left X", t);
    learner->reveal(x);
    // y^(t) goes to the oracle history only.
    const double y = sample_outcome(inst.kernel, inst.at(f_star, x), rng_kernel);
    h.xs.push_back(x);
    h.ys.push_back(y);

    StepRecord r;
    r.x = x;
    r.y = y;
    r.est_step = expected_loss(inst, mu, x, f_star);
    cum += r.est_step;
    r.est_cum = cum;
    r.offline_used = used;
    r.fhat = std::move(e.table);
    r.fhat_index = e.index;
    r.realized = realized;
    if (cfg.log_mixtures) r.mu = std::move(mu);
    log.steps.push_back(std::move(r));
  }
  return log;
}

void write_csv(std::ostream& os, const ExperimentLog& log) {
  os << "t,x,y,est_step,est_cum,offline_budget_used\n";
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto& r = log.steps[i];
    os << i + 1 << ',' << r.x << ',' << fmt(r.y) << ',' << fmt(r.est_step)
       << ',' << fmt(r.est_cum) << ',' << fmt(r.offline_used) << '\n';
  }
}

void write_decision_csv(std::ostream& os, const E2dLog& log) {
  os << "t,pi,r,regret_cum,est_cum\n";
  for (const auto& r : log.steps)
    os << r.t << ',' << r.pi << ',' << fmt(r.r) << ',' << fmt(r.regret_cum)
       << ',' << fmt(r.est_cum) << '\n';
}

json log_to_json(const ExperimentLog& log) {
  json steps = json::array();
  for (const auto& r : log.steps)
    steps.push_back({{"x", r.x},
                     {"y", r.y},
                     {"fhat", r.fhat},
                     {"fhat_index", r.fhat_index},
                     {"mu",
                      {{"atoms", r.mu.atoms},
                       {"weights", r.mu.weights},
                       {"index", r.mu.index},
                       {"support_size", r.mu.support_size}}},
                     {"realized", r.realized},
                     {"est_step", r.est_step},
                     {"est_cum", r.est_cum},
                     {"offline_used", r.offline_used}});
  return {{"T", log.T},
          {"beta", log.beta},
          {"seed", log.seed},
          {"f_star", log.f_star},
          {"steps", std::move(steps)}};
}

ExperimentLog log_from_json(const json& j) {
  ExperimentLog log;
  log.T = j.at("T");
  log.beta = j.at("beta");
  log.seed = j.at("seed");
  log.f_star = j.at("f_star");
  for (const auto& s : j.at("steps")) {
    StepRecord r;
    r.x = s.at("x");
    r.y = s.at("y");
    r.fhat = s.at("fhat").get<Table>();
    r.fhat_index = s.at("fhat_index");
    const auto& mu = s.at("mu");
    r.mu.atoms = mu.at("atoms").get<std::vector<Table>>();
    r.mu.weights = mu.at("weights").get<std::vector<double>>();
    r.mu.index = mu.at("index").get<std::vector<int>>();
    r.mu.support_size = mu.at("support_size");
    r.realized = s.at("realized");
    r.est_step = s.at("est_step");
    r.est_cum = s.at("est_cum");
    r.offline_used = s.at("offline_used");
    log.steps.push_back(std::move(r));
  }
  return log;
}

bool operator==(const Mixture& a, const Mixture& b) {
  return a.atoms == b.atoms && a.weights == b.weights && a.index == b.index &&
         a.support_size == b.support_size;
}

bool operator==(const StepRecord& a, const StepRecord& b) {
  return a.x == b.x && a.y == b.y && a.fhat == b.fhat &&
         a.fhat_index == b.fhat_index && a.mu == b.mu &&
         a.realized == b.realized && a.est_step == b.est_step &&
         a.est_cum == b.est_cum && a.offline_used == b.offline_used;
}

bool operator==(const ExperimentLog& a, const ExperimentLog& b) {
  return a.T == b.T && a.beta == b.beta && a.seed == b.seed &&
         a.f_star == b.f_star && a.steps == b.steps;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::config, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error(Errc::config, "short write to '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

RunSummary run_to_summary(const RunConfig& cfg) {
  RunSummary s;
  std::ostringstream csv;
  if (cfg.mode == "e2d") {
    const E2dLog log = run_e2d_off(cfg.dmso, cfg.e2d);
    write_decision_csv(csv, log);
    s.value = log.regret;
    s.log = {{"regret", log.regret},
             {"est", log.est},
             {"beta_used", log.beta_used},
             {"ps", log.ps}};
  } else {
    const ExperimentLog log = run_protocol(cfg);
    write_csv(csv, log);
    s.value = log.steps.empty() ? 0.0 : log.steps.back().est_cum;
    s.log = log_to_json(log);
  }
  s.csv = csv.str();
  return s;
}

RunSummary run_and_write(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  RunSummary s = run_to_summary(cfg);
  const bool e2d = cfg.mode == "e2d";
  write_file_atomic(out / (e2d ? "decisions.csv" : "transcript.csv"), s.csv);
  write_file_atomic(out / "log.json", s.log.dump());
  write_file_atomic(out / "config.json", cfg.source.dump(2));
  json summary = {{"seed", cfg.seed}, {"T", cfg.T}};
  summary[e2d ? "regret" : "est_on"] = s.value;
  write_file_atomic(out / "summary.json", summary.dump(2) + "\n");
  return s;
}

// ---------------------------------------------------------------- sweeps

void set_dotted(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot - start);
    if (part.empty()) config_error("empty component in grid key '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

SweepReport run_sweep(const json& base, const fs::path& base_dir,
                      const json& grid, int n_seeds, const fs::path& out) {
  if (!grid.is_object() || grid.empty()) config_error("sweep grid is empty");
  if (n_seeds < 1) config_error("sweep needs at least one seed");
  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (auto it = grid.begin(); it != grid.end(); ++it) {
    if (!it.value().is_array() || it.value().empty())
      config_error("grid entry '" + it.key() + "' must be a nonempty array");
    keys.push_back(it.key());
    values.emplace_back(it.value().begin(), it.value().end());
  }
  std::vector<json> cells;
  std::vector<std::size_t> pos(keys.size(), 0);
  for (;;) {
    json p = json::object();
    for (std::size_t k = 0; k < keys.size(); ++k) p[keys[k]] = values[k][pos[k]];
    cells.push_back(std::move(p));
    std::size_t k = keys.size();
    while (k > 0) {
      --k;
      if (++pos[k] < values[k].size()) break;
      pos[k] = 0;
      if (k == 0) goto done;
    }
    if (keys.empty()) break;
  }
done:
  const std::uint64_t seed0 = base.value("seed", std::uint64_t{0});
  fs::create_directories(out / "cells");
  const int jobs = static_cast<int>(cells.size()) * n_seeds;
  std::vector<double> value(jobs, 0.0);
  std::vector<std::string> error(jobs);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < jobs; ++j) {
    const int c = j / n_seeds;
    const int s = j % n_seeds;
    try {
      json doc = base;
      for (auto it = cells[c].begin(); it != cells[c].end(); ++it)
        set_dotted(doc, it.key(), it.value());
      doc["seed"] = seed0 + static_cast<std::uint64_t>(s);
      const RunConfig cfg = parse_config(doc, base_dir);
      const RunSummary sum = run_to_summary(cfg);
      value[j] = sum.value;
      write_file_atomic(out / "cells" /
                            ("cell" + std::to_string(c) + "_seed" +
                             std::to_string(s) + ".csv"),
                        sum.csv);
    } catch (const std::exception& e) {
      error[j] = e.what();
    }
  }
  SweepReport rep;
  std::ostringstream table;
  for (const auto& k : keys) table << k << ',';
  table << "n,mean,stderr\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row;
    row.params = cells[c];
    std::vector<double> ok;
    for (int s = 0; s < n_seeds; ++s) {
      const int j = static_cast<int>(c) * n_seeds + s;
      if (error[j].empty())
        ok.push_back(value[j]);
      else
        rep.failures.push_back("cell " + std::to_string(c) + " seed " +
                               std::to_string(s) + ": " + error[j]);
    }
    row.n = static_cast<int>(ok.size());
    for (double v : ok) row.mean += v;
    if (row.n) row.mean /= row.n;
    if (row.n > 1) {
      double ss = 0.0;
      for (double v : ok) ss += (v - row.mean) * (v - row.mean);
      row.se = std::sqrt(ss / (row.n - 1) / row.n);
    }
    for (const auto& k : keys) {
      const json& v = cells[c][k];
      table << (v.is_string() ? v.get<std::string>() : v.dump()) << ',';
    }
    table << row.n << ',' << fmt(row.mean) << ',' << fmt(row.se) << '\n';
    rep.rows.push_back(std::move(row));
  }
  write_file_atomic(out / "sweep.csv", table.str());
  if (!rep.failures.empty()) {
    std::string f;
    for (const auto& s : rep.failures) f += s + '\n';
    write_file_atomic(out / "failures.txt", f);
  }
  return rep;
}

}  // namespace oeoe
