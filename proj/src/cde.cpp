#include "oeoe/cde.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <random>

#include <omp.h>

namespace oeoe {

EwLogLoss::EwLogLoss(const Instance& inst)
    : inst_(&inst), n_f_(inst.size()), logw_(inst.size(), 0.0) {
  if (inst.value != ValueKind::prob)
    throw Error(Errc::unsupported_instance, "density learner needs prob values");
  logf_.resize(static_cast<std::size_t>(inst.n_x) * inst.n_y * n_f_);
  for (int x = 0; x < inst.n_x; ++x)
    for (int y = 0; y < inst.n_y; ++y)
      for (int f = 0; f < n_f_; ++f)
        logf_[(static_cast<std::size_t>(x) * inst.n_y + y) * n_f_ + f] =
            std::log(std::max(inst.at(inst.cls[f], x)[y], 1e-300));
}

std::unique_ptr<CdeBase> EwLogLoss::clone() const {
  return std::make_unique<EwLogLoss>(*this);
}

void EwLogLoss::reset() { std::fill(logw_.begin(), logw_.end(), 0.0); }

void EwLogLoss::observe(int x, int y) {
  const double* row =
      logf_.data() + (static_cast<std::size_t>(x) * inst_->n_y + y) * n_f_;
  for (int f = 0; f < n_f_; ++f) logw_[f] += row[f];
}

Table EwLogLoss::predict() const {
  const double m = *std::max_element(logw_.begin(), logw_.end());
  std::vector<double> w(n_f_);
  double z = 0.0;
  for (int f = 0; f < n_f_; ++f) z += w[f] = std::exp(logw_[f] - m);
  Table out(static_cast<std::size_t>(inst_->n_x) * inst_->n_y, 0.0);
  for (int f = 0; f < n_f_; ++f) {
    const double a = w[f] / z;
    const Table& g = inst_->cls[f];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * g[i];
  }
  return out;
}

int sample_row(std::span<const double> row, Stream& rng) {
  const double u = rng.uniform();
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < row.size(); ++i) {
    c += row[i];
    if (u < c) return static_cast<int>(i);
  }
  return static_cast<int>(row.size()) - 1;
}

CdewroLearner::CdewroLearner(std::unique_ptr<CdeBase> base)
    : base_(std::move(base)) {}

void CdewroLearner::feed(int x, std::span<const double> ref_row, Stream& rng) {
  base_->observe(x, sample_row(ref_row, rng));
}

double cdewro_bound(double c_f, double ln_v, double zeta, double r_cde,
                    double T) {
  if (T <= 0.0) return 0.0;
  return 3.0 * c_f * ln_v * zeta + r_cde + 2.0 * c_f * std::log(c_f * T);
}

namespace {

Table replay_one(const Instance& inst, CdewroLearner& learner,
                 std::span<const int> xs, std::span<const Table> refs,
                 std::uint64_t seed, int t, int i) {
  Stream rng = substream(seed, "replay", static_cast<std::uint64_t>(t),
                         static_cast<std::uint64_t>(i));
  learner.reset();
  for (std::size_t s = 0; s < xs.size(); ++s)
    learner.feed(xs[s], inst.at(refs[s], xs[s]), rng);
  return learner.predict();
}

}  // namespace

std::vector<Table> replay_serial(const Instance& inst, const CdeBase& proto,
                                 std::span<const int> xs,
                                 std::span<const Table> refs, int L,
                                 std::uint64_t seed, int t) {
  if (L < 1) throw Error(Errc::invalid_argument, "replay count L must be >= 1");
  std::vector<Table> out(L);
  CdewroLearner learner(proto.clone());
  for (int i = 0; i < L; ++i)
    out[i] = replay_one(inst, learner, xs, refs, seed, t, i);
  return out;
}

std::vector<Table> replay_parallel(const Instance& inst, const CdeBase& proto,
                                   std::span<const int> xs,
                                   std::span<const Table> refs, int L,
                                   std::uint64_t seed, int t) {
  if (L < 1) throw Error(Errc::invalid_argument, "replay count L must be >= 1");
  std::vector<Table> out(L);
#pragma omp parallel
  {
    CdewroLearner learner(proto.clone());
#pragma omp for schedule(static)
    for (int i = 0; i < L; ++i)
      out[i] = replay_one(inst, learner, xs, refs, seed, t, i);
  }
  return out;
}

Mixture collapse(const std::vector<Table>& tables) {
  Mixture m;
  std::map<Table, std::size_t> slot;
  for (const auto& tab : tables) {
    auto [it, fresh] = slot.try_emplace(tab, m.atoms.size());
    if (fresh) {
      m.atoms.push_back(tab);
      m.weights.push_back(0.0);
      m.index.push_back(-1);
    }
    m.weights[it->second] += 1.0;
  }
  for (double& w : m.weights) w /= static_cast<double>(tables.size());
  m.support_size = tables.size();
  return m;
}

CdewrpLearner::CdewrpLearner(const Instance& inst, const CdeBase& proto, int L)
    : inst_(&inst), proto_(&proto), L_(L) {
  if (L < 1) throw Error(Errc::invalid_argument, "replay count L must be >= 1");
}

void CdewrpLearner::append(int x, Table ref) {
  xs_.push_back(x);
  refs_.push_back(std::move(ref));
}

Mixture CdewrpLearner::predict(std::uint64_t seed, int t, bool parallel) const {
  auto tables = parallel ? replay_parallel(*inst_, *proto_, xs_, refs_, L_,
                                           seed, t)
                         : replay_serial(*inst_, *proto_, xs_, refs_, L_,
                                         seed, t);
  return collapse(tables);
}

CdewdrpLearner::CdewdrpLearner(const Instance& inst, const CdeBase& proto,
                               int n, int L)
    : n_(n) {
  if (n < 1) throw Error(Errc::invalid_argument, "delay must be >= 1");
  copies_.reserve(n);
  for (int i = 0; i < n; ++i) copies_.emplace_back(inst, proto, L);
}

void CdewdrpLearner::reveal_reference(int s, int x, Table ref) {
  copies_[copy_of(s)].append(x, std::move(ref));
}

Mixture CdewdrpLearner::predict(std::uint64_t seed, int t,
                                bool parallel) const {
  return copies_[copy_of(t)].predict(seed, t, parallel);
}

OeoeCdeStack::OeoeCdeStack(const Instance& inst, const CdeBase& proto, int n,
                           int L, std::uint64_t seed, bool parallel)
    : inst_(inst),
      n_(n),
      seed_(seed),
      parallel_(parallel),
      proto_(proto.clone()),
      drp_(inst, *proto_, n, L) {}

Mixture OeoeCdeStack::step(const Table& fhat, int) {
  fhats_.push_back(fhat);
  const int t = static_cast<int>(fhats_.size());
  if (t > n_) {
    const int s = t - n_;
    drp_.reveal_reference(
        s, xs_[s - 1],
        average_tables(std::span<const Table>(fhats_.data() + s, n_)));
  }
  return drp_.predict(seed_, t, parallel_);
}

double ratio_bound(const Instance& inst) {
  double v = std::exp(1.0);
  for (int x = 0; x < inst.n_x; ++x)
    for (int y = 0; y < inst.n_y; ++y) {
      double lo = 1.0, hi = 0.0;
      for (const auto& f : inst.cls) {
        const double p = inst.at(f, x)[y];
        lo = std::min(lo, p);
        hi = std::max(hi, p);
      }
      if (lo <= 0.0) {
        if (hi > 0.0) return std::numeric_limits<double>::infinity();
        continue;
      }
      v = std::max(v, hi / lo);
    }
  return v;
}

int replay_count(double T, int n_f, int n_x, double eps, double c) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "epsilon must be > 0");
  const double arg = std::max(T * n_f * n_x, std::exp(1.0));
  return std::max(1, static_cast<int>(std::ceil(c * T * std::log(arg) / eps)));
}

int tune_stack_delay(double c_f, double beta, double T, double ln_v,
                     double r_cde) {
  const double v = std::exp(ln_v);
  const double denom = r_cde + c_f * std::log(v * c_f * T);
  if (!(denom > 0.0)) return 1;
  const double n = std::sqrt(c_f * beta * T * ln_v / denom);
  return std::max(1, static_cast<int>(std::lround(n)));
}

Instance make_cde_instance(int n_f, int n_x, int n_y, double lo, double hi,
                           std::uint64_t seed) {
  Instance inst;
  inst.n_x = n_x;
  inst.n_y = n_y;
  inst.dim = n_y;
  inst.value = ValueKind::prob;
  inst.kernel = {KernelKind::categorical, 1.0};
  inst.loss = make_loss(LossKind::hellinger);
  Stream rng = substream(seed, "cde-instance");
  for (int f = 0; f < n_f; ++f) {
    Table t(static_cast<std::size_t>(n_x) * n_y);
    for (int x = 0; x < n_x; ++x) {
      double* row = t.data() + static_cast<std::size_t>(x) * n_y;
      if (n_y == 2) {
        row[0] = lo + (hi - lo) * rng.uniform();
        row[1] = 1.0 - row[0];
        continue;
      }
      double z = 0.0;
      for (int y = 0; y < n_y; ++y) z += row[y] = rng.uniform();
      const double free = 1.0 - n_y * lo;
      for (int y = 0; y < n_y; ++y) row[y] = lo + free * row[y] / z;
    }
    inst.cls.push_back(std::move(t));
  }
  inst.validate();
  return inst;
}

}  // namespace oeoe
