// Oracle-efficient online learners. A learner sees covariates and oracle
// outputs only; outcomes never reach it.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "oeoe/core.hpp"

namespace oeoe {

class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;
  // Round t: consume f̂^(t), emit μ^(t).
  virtual Mixture step(const Table& fhat, int fhat_index) = 0;
  // x^(t) is revealed after μ^(t) has been published.
  virtual void reveal(int x) = 0;
};

// Version space averaging. Constraint s keeps f iff
// Σ_{τ<s} D(f̂^(s)(x^(τ)), f(x^(τ))) ≤ multiplier·β.
class Vsa : public OnlineLearner {
 public:
  Vsa(const Instance& inst, double beta, double multiplier = 1.0,
      bool averaged = false);
  Mixture step(const Table& fhat, int fhat_index) override;
  void reveal(int x) override { xs_.push_back(x); }

  const std::vector<int>& survivors() const { return alive_; }
  double threshold() const { return threshold_; }

 private:
  const Instance& inst_;
  double threshold_;
  bool averaged_;
  std::vector<int> xs_;
  std::vector<int> alive_;
};

// Memoryless: returns f̂^(t).
class IdentityLearner : public OnlineLearner {
 public:
  Mixture step(const Table& fhat, int fhat_index) override {
    return Mixture::point(fhat, fhat_index);
  }
  void reveal(int) override {}
};

// Root of η/(1−e^{−η}) = 2, by bisection.
double ew_eta();

class ExpWeights {
 public:
  explicit ExpWeights(int n, double eta = ew_eta());
  std::vector<double> distribution() const;
  void update(std::span<const double> loss);
  double eta() const { return eta_; }
  int rounds() const { return rounds_; }

 private:
  std::vector<double> logw_;
  double eta_;
  int rounds_ = 0;
};

// N base copies; copy ((t−1) mod N) predicts at round t and later consumes
// the loss of round t.
class RoundRobin {
 public:
  RoundRobin(int n_copies, int n_experts, double eta = ew_eta());
  std::vector<double> distribution(int t) const;
  void feed(int round, std::span<const double> loss);
  int copy_of(int t) const { return (t - 1) % n_; }
  const ExpWeights& copy(int i) const { return copies_[i]; }
  int delay() const { return n_; }

 private:
  int n_;
  std::vector<ExpWeights> copies_;
};

enum class Aggregation { mean, majority };

// Pointwise mean of value tables.
Table average_tables(std::span<const Table> tables);
// 1{Σ f ≥ N/2} pointwise (ties go to 1).
Table majority_vote(std::span<const Table> tables);

// f̃^(t) = agg(f̂^(t+1..t+N)) for t = 1..T, padding f̂^(T+s) = f̂^(T).
std::vector<Table> reference_parameters(std::span<const Table> fhats, int n,
                                        Aggregation agg);

// Delayed online learning reduction with round-robin exponential weights.
class DelayedReduction : public OnlineLearner {
 public:
  DelayedReduction(const Instance& inst, int n, Aggregation agg,
                   double eta = ew_eta());
  Mixture step(const Table& fhat, int fhat_index) override;
  void reveal(int x) override { xs_.push_back(x); }

  const RoundRobin& learner() const { return rr_; }
  const std::vector<Table>& references() const { return refs_; }
  const std::vector<std::vector<double>>& losses() const { return losses_; }

 private:
  const Instance& inst_;
  int n_;
  Aggregation agg_;
  RoundRobin rr_;
  std::vector<Table> fhats_;
  std::vector<int> xs_;
  std::vector<Table> refs_;
  std::vector<std::vector<double>> losses_;
};

int tune_delay(double beta, double T, double c_d, double ln_f);
int tune_delay_beta_free(double T, double c_d, double ln_f);

enum class LearnerKind { vsa, vsa_averaged, identity, delayed, majority, cde_stack };
LearnerKind learner_kind_from(const std::string& s);

}  // namespace oeoe
