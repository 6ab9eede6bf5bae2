// Conditional density estimation: the reduction stack that turns an
// unrestricted online density estimator into an oracle-efficient one.
//
//   OeoeCdeStack      oracle outputs -> delayed reference parameters
//   CdewdrpLearner    N round-robin copies (delay)
//   CdewrpLearner     L fictitious replays per round (revealed parameters)
//   CdewroLearner     base learner fed reference-sampled outcomes
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "oeoe/core.hpp"
#include "oeoe/estimators.hpp"

namespace oeoe {

class CdeBase {
 public:
  virtual ~CdeBase() = default;
  virtual std::unique_ptr<CdeBase> clone() const = 0;
  virtual void reset() = 0;
  virtual void observe(int x, int y) = 0;
  virtual Table predict() const = 0;
  // Declared guarantee Est_H(T) ≤ R_CDE(T) + C_F·ln(1/δ).
  virtual double r_cde(double T) const = 0;
  virtual double c_f() const = 0;
};

// Exponential weights over F with log loss (η = 1): the posterior mixture.
class EwLogLoss : public CdeBase {
 public:
  explicit EwLogLoss(const Instance& inst);
  std::unique_ptr<CdeBase> clone() const override;
  void reset() override;
  void observe(int x, int y) override;
  Table predict() const override;
  double r_cde(double) const override { return std::log(double(n_f_)); }
  double c_f() const override { return 1.0; }

 private:
  const Instance* inst_;
  int n_f_;
  std::vector<double> logf_;  // [(x·|Y| + y)·|F| + f]
  std::vector<double> logw_;
};

// Draws an outcome index from a probability row.
int sample_row(std::span<const double> row, Stream& rng);

class CdewroLearner {
 public:
  explicit CdewroLearner(std::unique_ptr<CdeBase> base);
  void feed(int x, std::span<const double> ref_row, Stream& rng);
  Table predict() const { return base_->predict(); }
  void reset() { base_->reset(); }

 private:
  std::unique_ptr<CdeBase> base_;
};

// 3·C_F·ln V·ζ + R_CDE(T) + 2·C_F·ln(C_F·T).
double cdewro_bound(double c_f, double ln_v, double zeta, double r_cde,
                    double T);

// One replay per i ∈ [L]: y_i^(s) ~ f̃^(s)(x^(s)) for every stored round s,
// fed through a fresh CDEwRO learner. Streams come from (seed, t, i), so both
// kernels return identical tables.
std::vector<Table> replay_serial(const Instance& inst, const CdeBase& proto,
                                 std::span<const int> xs,
                                 std::span<const Table> refs, int L,
                                 std::uint64_t seed, int t);
std::vector<Table> replay_parallel(const Instance& inst, const CdeBase& proto,
                                   std::span<const int> xs,
                                   std::span<const Table> refs, int L,
                                   std::uint64_t seed, int t);

// Empirical distribution over replay outputs; identical tables are merged
// with weight multiplicity/L, support_size stays L.
Mixture collapse(const std::vector<Table>& tables);

class CdewrpLearner {
 public:
  CdewrpLearner(const Instance& inst, const CdeBase& proto, int L);
  void append(int x, Table ref);
  Mixture predict(std::uint64_t seed, int t, bool parallel = true) const;
  int rounds() const { return static_cast<int>(xs_.size()); }
  int replays() const { return L_; }

 private:
  const Instance* inst_;
  const CdeBase* proto_;
  int L_;
  std::vector<int> xs_;
  std::vector<Table> refs_;
};

class CdewdrpLearner {
 public:
  CdewdrpLearner(const Instance& inst, const CdeBase& proto, int n, int L);
  // f̃^(s) for covariate x^(s), revealed N rounds late.
  void reveal_reference(int s, int x, Table ref);
  Mixture predict(std::uint64_t seed, int t, bool parallel = true) const;
  int copy_of(int t) const { return (t - 1) % n_; }
  const CdewrpLearner& copy(int i) const { return copies_[i]; }

 private:
  int n_;
  std::vector<CdewrpLearner> copies_;
};

class OeoeCdeStack : public OnlineLearner {
 public:
  OeoeCdeStack(const Instance& inst, const CdeBase& proto, int n, int L,
               std::uint64_t seed, bool parallel = true);
  Mixture step(const Table& fhat, int fhat_index) override;
  void reveal(int x) override { xs_.push_back(x); }

  int delay() const { return n_; }
  const std::vector<Table>& oracle_outputs() const { return fhats_; }

 private:
  const Instance& inst_;
  int n_;
  std::uint64_t seed_;
  bool parallel_;
  std::unique_ptr<CdeBase> proto_;
  CdewdrpLearner drp_;
  std::vector<Table> fhats_;
  std::vector<int> xs_;
};

// V = max(e, sup f(y|x)/f'(y|x)).
double ratio_bound(const Instance& inst);

// L = ⌈c·T·ln(T·|F|·|X|)/ε⌉.
int replay_count(double T, int n_f, int n_x, double eps, double c = 8.0);

int tune_stack_delay(double c_f, double beta, double T, double ln_v,
                     double r_cde);

// Random CDE instance with every density coordinate in [lo, hi].
Instance make_cde_instance(int n_f, int n_x, int n_y, double lo, double hi,
                           std::uint64_t seed);

}  // namespace oeoe
