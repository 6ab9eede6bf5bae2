#include "oeoe/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace oeoe {

Vsa::Vsa(const Instance& inst, double beta, double multiplier, bool averaged)
    : inst_(inst), threshold_(multiplier * beta), averaged_(averaged) {
  if (averaged_ && inst.value == ValueKind::binary)
    throw Error(Errc::unsupported_instance,
                "averaged prediction needs a convex value space");
  alive_.resize(inst.size());
  for (int f = 0; f < inst.size(); ++f) alive_[f] = f;
}

Mixture Vsa::step(const Table& fhat, int) {
  // Only the new constraint s = t can remove members: older constraints sum
  // over covariates that were already fixed when they were added.
  const int t = static_cast<int>(xs_.size()) + 1;
  std::vector<int> keep;
  keep.reserve(alive_.size());
  for (int f : alive_) {
    double s = 0.0;
    for (int x : xs_) {
      s += inst_.d(fhat, inst_.cls[f], x);
      if (s > threshold_ + 1e-9) break;
    }
    if (s <= threshold_ + 1e-9) keep.push_back(f);
  }
  if (keep.empty())
    throw Error(Errc::oracle_violation, "version space is empty", t);
  alive_ = std::move(keep);
  if (!averaged_) return Mixture::uniform_over(inst_, alive_);
  std::vector<Table> members;
  for (int f : alive_) members.push_back(inst_.cls[f]);
  Mixture m = Mixture::point(average_tables(members));
  m.support_size = 1;
  return m;
}

double ew_eta() {
  static const double eta = [] {
    // η/(1−e^{−η}) is increasing in η, equal to 1 at 0.
    double lo = 1e-9, hi = 10.0;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      if (mid / (1.0 - std::exp(-mid)) < 2.0)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return eta;
}

ExpWeights::ExpWeights(int n, double eta) : logw_(n, 0.0), eta_(eta) {}

std::vector<double> ExpWeights::distribution() const {
  const double m = *std::max_element(logw_.begin(), logw_.end());
  std::vector<double> p(logw_.size());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) z += p[i] = std::exp(logw_[i] - m);
  for (double& v : p) v /= z;
  return p;
}

void ExpWeights::update(std::span<const double> loss) {
  for (std::size_t i = 0; i < logw_.size(); ++i) logw_[i] -= eta_ * loss[i];
  ++rounds_;
}

RoundRobin::RoundRobin(int n_copies, int n_experts, double eta)
    : n_(n_copies), copies_(n_copies, ExpWeights(n_experts, eta)) {
  if (n_copies < 1) throw Error(Errc::invalid_argument, "delay must be >= 1");
}

std::vector<double> RoundRobin::distribution(int t) const {
  return copies_[copy_of(t)].distribution();
}

void RoundRobin::feed(int round, std::span<const double> loss) {
  copies_[copy_of(round)].update(loss);
}

Table average_tables(std::span<const Table> tables) {
  Table out(tables.front().size(), 0.0);
  for (const auto& t : tables)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  for (double& v : out) v /= static_cast<double>(tables.size());
  return out;
}

Table majority_vote(std::span<const Table> tables) {
  Table out(tables.front().size(), 0.0);
  for (const auto& t : tables)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  const double half = 0.5 * static_cast<double>(tables.size());
  for (double& v : out) v = v >= half ? 1.0 : 0.0;
  return out;
}

std::vector<Table> reference_parameters(std::span<const Table> fhats, int n,
                                        Aggregation agg) {
  const int T = static_cast<int>(fhats.size());
  std::vector<Table> refs;
  refs.reserve(T);
  std::vector<Table> window(n);
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < n; ++i) window[i] = fhats[std::min(t + 1 + i, T) - 1];
    refs.push_back(agg == Aggregation::mean ? average_tables(window)
                                            : majority_vote(window));
  }
  return refs;
}

DelayedReduction::DelayedReduction(const Instance& inst, int n,
                                   Aggregation agg, double eta)
    : inst_(inst), n_(n), agg_(agg), rr_(n, inst.size(), eta) {
  if (agg == Aggregation::mean && inst.value == ValueKind::binary)
    throw Error(Errc::unsupported_instance,
                "averaging needs a convex value space; use the majority "
                "variant");
  if (agg == Aggregation::majority && inst.value != ValueKind::binary)
    throw Error(Errc::unsupported_instance, "majority vote needs binary values");
}

Mixture DelayedReduction::step(const Table& fhat, int) {
  fhats_.push_back(fhat);
  const int t = static_cast<int>(fhats_.size());
  if (t > n_) {
    const int s = t - n_;
    std::span<const Table> window(fhats_.data() + s, n_);
    refs_.push_back(agg_ == Aggregation::mean ? average_tables(window)
                                              : majority_vote(window));
    const Table& ref = refs_.back();
    const int x = xs_[s - 1];
    std::vector<double> loss(inst_.size());
    for (int f = 0; f < inst_.size(); ++f)
      loss[f] = inst_.d(ref, inst_.cls[f], x);
    rr_.feed(s, loss);
    losses_.push_back(std::move(loss));
  }
  const auto p = rr_.distribution(t);
  Mixture m;
  for (int f = 0; f < inst_.size(); ++f) {
    m.atoms.push_back(inst_.cls[f]);
    m.weights.push_back(p[f]);
    m.index.push_back(f);
  }
  m.support_size = p.size();
  return m;
}

int tune_delay(double beta, double T, double c_d, double ln_f) {
  const double n = std::sqrt(c_d * beta * T / (c_d + ln_f));
  return std::max(1, static_cast<int>(std::lround(n)));
}

int tune_delay_beta_free(double T, double c_d, double ln_f) {
  return tune_delay(1.0, T, c_d, ln_f);
}

LearnerKind learner_kind_from(const std::string& s) {
  if (s == "vsa") return LearnerKind::vsa;
  if (s == "vsa-averaged") return LearnerKind::vsa_averaged;
  if (s == "identity") return LearnerKind::identity;
  if (s == "delayed") return LearnerKind::delayed;
  if (s == "majority") return LearnerKind::majority;
  if (s == "cde-stack") return LearnerKind::cde_stack;
  throw Error(Errc::config, "unknown learner kind '" + s + "'");
}

}  // namespace oeoe
