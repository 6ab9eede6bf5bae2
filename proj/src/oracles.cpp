#include "oeoe/oracles.hpp"

#include <cmath>
#include <limits>

namespace oeoe {

int erm_square(const Instance& inst, const History& h) {
  int best = 0;
  double best_risk = std::numeric_limits<double>::infinity();
  for (int f = 0; f < inst.size(); ++f) {
    double risk = 0.0;
    for (int s = 0; s < h.size(); ++s) {
      const double r = inst.cls[f][h.xs[s]] - h.ys[s];
      risk += r * r;
    }
    if (risk < best_risk) {
      best_risk = risk;
      best = f;
    }
  }
  return best;
}

int mle(const Instance& inst, const History& h) {
  constexpr double kFloor = 1e-12;
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  bool any_supported = h.size() == 0;
  for (int f = 0; f < inst.size(); ++f) {
    double ll = 0.0;
    bool supported = true;
    for (int s = 0; s < h.size(); ++s) {
      const double p =
          inst.at(inst.cls[f], h.xs[s])[static_cast<int>(h.ys[s])];
      if (p <= 0.0) supported = false;
      ll += std::log(std::max(p, kFloor));
    }
    any_supported = any_supported || supported;
    if (ll > best_ll) {
      best_ll = ll;
      best = f;
    }
  }
  if (!any_supported)
    throw Error(Errc::degenerate_likelihood,
                "every candidate assigns zero likelihood", h.size() + 1);
  return best;
}

int consistent_binary(const Instance& inst, const History& h) {
  for (int f = 0; f < inst.size(); ++f) {
    bool ok = true;
    for (int s = 0; s < h.size() && ok; ++s)
      ok = inst.cls[f][h.xs[s]] == h.ys[s];
    if (ok) return f;
  }
  throw Error(Errc::realizability_violation, "no class member fits the labels",
              h.size() + 1);
}

Table block_delay_oracle(const Instance& inst, std::span<const int> xs,
                         const Table& f_star, double beta) {
  std::vector<int> count(inst.n_x, 0);
  for (int x : xs) ++count[x];
  Table f(inst.n_x);
  for (int x = 0; x < inst.n_x; ++x)
    f[x] = static_cast<double>(count[x]) < beta ? 0.0 : f_star[x];
  return f;
}

Table unseen_covariate_oracle(const Instance& inst, std::span<const int> xs,
                              int i_star, double beta, int t) {
  const int block = static_cast<int>(std::floor(beta)) + 1;
  const int tau = (t + block - 1) / block;
  const std::size_t before =
      std::min(xs.size(), static_cast<std::size_t>((tau - 1) * block));
  Table f(inst.n_x, 1.0);
  for (std::size_t s = 0; s < before; ++s) f[xs[s]] = 0.0;
  f[i_star] = 1.0;
  return f;
}

int shifted_proper_oracle(int t, double beta, int n) {
  const int block = static_cast<int>(std::floor(beta)) + 1;
  const int tau = (t + block - 1) / block;
  return std::min(tau, n) - 1;
}

int project_to_proper(const Instance& inst, const Table& fhat,
                      std::span<const double> p) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int f = 0; f < inst.size(); ++f) {
    double d = 0.0;
    for (int x = 0; x < inst.n_x; ++x)
      if (p[x] != 0.0) d += p[x] * inst.d(fhat, inst.cls[f], x);
    if (d < best_d) {
      best_d = d;
      best = f;
    }
  }
  return best;
}

std::vector<double> offline_budget_used(const Instance& inst,
                                        std::span<const Table> fhats,
                                        std::span<const int> xs,
                                        const Table& f_star) {
  std::vector<double> used(fhats.size());
  for (std::size_t t = 0; t < fhats.size(); ++t)
    used[t] = offline_error(inst, xs.first(std::min(t, xs.size())), fhats[t],
                            f_star);
  return used;
}

bool verify_offline_guarantee(const Instance& inst,
                              std::span<const Table> fhats,
                              std::span<const int> xs, const Table& f_star,
                              double beta) {
  for (double u : offline_budget_used(inst, fhats, xs, f_star))
    if (u > beta + 1e-9) return false;
  return true;
}

OracleKind oracle_kind_from(const std::string& s) {
  if (s == "erm-square") return OracleKind::erm_square;
  if (s == "mle") return OracleKind::mle;
  if (s == "consistent-binary") return OracleKind::consistent_binary;
  if (s == "block-delay") return OracleKind::block_delay;
  if (s == "unseen-covariate") return OracleKind::unseen_covariate;
  if (s == "shifted-proper") return OracleKind::shifted_proper;
  if (s == "custom-table") return OracleKind::custom_table;
  throw Error(Errc::config, "unknown oracle kind '" + s + "'");
}

namespace {

class IndexOracle : public OfflineOracle {
 public:
  using Fn = int (*)(const Instance&, const History&);
  IndexOracle(const Instance& inst, Fn fn) : inst_(inst), fn_(fn) {}
  Estimate estimate(const History& h) override {
    const int i = fn_(inst_, h);
    return {inst_.cls[i], i};
  }

 private:
  const Instance& inst_;
  Fn fn_;
};

class BlockDelay : public OfflineOracle {
 public:
  BlockDelay(const Instance& inst, int f_star) : inst_(inst), f_star_(f_star) {}
  Estimate estimate(const History& h) override {
    return {block_delay_oracle(inst_, h.xs, inst_.cls[f_star_], beta), -1};
  }

 private:
  const Instance& inst_;
  int f_star_;
};

class UnseenCovariate : public OfflineOracle {
 public:
  UnseenCovariate(const Instance& inst, int f_star)
      : inst_(inst), f_star_(f_star) {}
  Estimate estimate(const History& h) override {
    return {unseen_covariate_oracle(inst_, h.xs, f_star_, beta, h.size() + 1),
            -1};
  }

 private:
  const Instance& inst_;
  int f_star_;
};

class ShiftedProper : public OfflineOracle {
 public:
  explicit ShiftedProper(const Instance& inst) : inst_(inst) {}
  Estimate estimate(const History& h) override {
    const int i = shifted_proper_oracle(h.size() + 1, beta, inst_.size());
    return {inst_.cls[i], i};
  }

 private:
  const Instance& inst_;
};

class CustomTable : public OfflineOracle {
 public:
  explicit CustomTable(std::vector<Table> tables) : tables_(std::move(tables)) {}
  Estimate estimate(const History& h) override {
    const std::size_t t = std::min<std::size_t>(h.size(), tables_.size() - 1);
    return {tables_[t], -1};
  }

 private:
  std::vector<Table> tables_;
};

}  // namespace

std::unique_ptr<OfflineOracle> make_oracle(const Instance& inst,
                                           const OracleSpec& spec,
                                           int f_star) {
  std::unique_ptr<OfflineOracle> o;
  switch (spec.kind) {
    case OracleKind::erm_square:
      o = std::make_unique<IndexOracle>(inst, &erm_square);
      break;
    case OracleKind::mle:
      o = std::make_unique<IndexOracle>(inst, &mle);
      break;
    case OracleKind::consistent_binary:
      o = std::make_unique<IndexOracle>(inst, &consistent_binary);
      break;
    case OracleKind::block_delay:
      o = std::make_unique<BlockDelay>(inst, f_star);
      break;
    case OracleKind::unseen_covariate:
      o = std::make_unique<UnseenCovariate>(inst, f_star);
      break;
    case OracleKind::shifted_proper:
      o = std::make_unique<ShiftedProper>(inst);
      break;
    case OracleKind::custom_table:
      if (spec.tables.empty())
        throw Error(Errc::config, "custom-table oracle needs tables");
      for (const auto& t : spec.tables) inst.check_table(t);
      o = std::make_unique<CustomTable>(spec.tables);
      break;
  }
  o->beta = spec.beta;
  return o;
}

}  // namespace oeoe
