// Estimation framework: instances, losses, kernels, transcripts and the exact
// offline/online error functionals.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oeoe/rng.hpp"

namespace oeoe {

enum class Errc {
  invalid_argument,
  degenerate_likelihood,
  realizability_violation,
  oracle_violation,
  unsupported_instance,
  convergence_failure,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, int round = -1)
      : std::runtime_error(round >= 0 ? what + " (round " +
                                            std::to_string(round) + ")"
                                      : what),
        code(code),
        round(round) {}
  Errc code;
  int round;
};

enum class ValueKind { binary, real, prob };
enum class LossKind { zero_one, square, hellinger, kl, layerwise, cb_square };
enum class KernelKind { dirac, gaussian, categorical };

std::string to_string(ValueKind);
std::string to_string(LossKind);
std::string to_string(KernelKind);
ValueKind value_kind_from(const std::string&);
LossKind loss_kind_from(const std::string&);
KernelKind kernel_kind_from(const std::string&);

struct Loss {
  LossKind kind = LossKind::zero_one;
  double c_d = 1.0;
};

// Default triangle constants: 1 for zero-one, 2 for square / Hellinger.
Loss make_loss(LossKind kind);

// D(z1, z2). Values are spans of equal length: one entry for binary/real,
// |Y| entries for probability vectors. cb_square averages squared
// differences over components (uniform context weights).
double eval_loss(const Loss& loss, std::span<const double> z1,
                 std::span<const double> z2);

struct Kernel {
  KernelKind kind = KernelKind::dirac;
  double sigma = 1.0;
};

// Outcome ~ K(z). Categorical outcomes are returned as the category index.
double sample_outcome(const Kernel& kernel, std::span<const double> z,
                      Stream& rng);

// Estimator as an explicit value table over X, row-major by covariate.
using Table = std::vector<double>;

struct Instance {
  int n_x = 0;
  int n_y = 0;  // 0 for real-valued outcomes
  int dim = 1;  // entries per value
  ValueKind value = ValueKind::binary;
  Kernel kernel;
  Loss loss;
  std::vector<Table> cls;

  int size() const { return static_cast<int>(cls.size()); }
  std::span<const double> at(const Table& f, int x) const {
    return {f.data() + static_cast<std::size_t>(x) * dim,
            static_cast<std::size_t>(dim)};
  }
  double d(const Table& a, const Table& b, int x) const {
    return eval_loss(loss, at(a, x), at(b, x));
  }
  void check_table(const Table& f) const;
  void validate() const;
};

// Finite-support randomization μ. Atoms carry class indices when they are
// class members (-1 for improper tables) and integer multiplicities when the
// distribution is an empirical one over `support_size` draws.
struct Mixture {
  std::vector<Table> atoms;
  std::vector<double> weights;
  std::vector<int> index;
  std::size_t support_size = 0;

  static Mixture point(const Table& f, int idx = -1);
  static Mixture uniform_over(const Instance& inst, std::span<const int> ids);
  double total() const;
  int sample(Stream& rng) const;
};

double expected_loss(const Instance& inst, const Mixture& mu, int x,
                     const Table& f_star);

struct StepRecord {
  int x = 0;
  double y = 0.0;
  Table fhat;
  int fhat_index = -1;
  Mixture mu;
  int realized = 0;  // atom index of f̄^(t)
  double est_step = 0.0;
  double est_cum = 0.0;
  double offline_used = 0.0;
};

struct ExperimentLog {
  int T = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int f_star = 0;
  std::vector<StepRecord> steps;
};

// Σ_s D(f̂(x^(s)), f★(x^(s))).
double offline_error(const Instance& inst, std::span<const int> xs,
                     const Table& fhat, const Table& f_star);

// Exact Σ_t E_{f̄~μ^(t)} D(f̄(x^(t)), f★(x^(t))).
double online_error(const Instance& inst, const ExperimentLog& log);

// Chained finite conditionals P^(i)(x_i | x_{1:i-1}); cond[i] is a flat
// table of shape (Π_{j<i} k_j) × k_i.
struct Chain {
  std::vector<int> alphabet;
  std::vector<std::vector<double>> cond;
  std::vector<double> joint() const;
};

struct SubadditivityReport {
  double lhs = 0.0;  // D²_H(P, Q)
  double rhs = 0.0;  // 7·E_P Σ_i D²_H(P^(i), Q^(i))
  bool pass = false;
};

SubadditivityReport hellinger_subadditivity_check(const Chain& p,
                                                  const Chain& q);

double hellinger_sq(std::span<const double> p, std::span<const double> q);

// Σ (x_t − x_{t+1}) / x_t for a nonincreasing sequence bounded below by 1;
// the potential lemma bounds it by ln x_1.
double potential_sum(std::span<const double> xs);

}  // namespace oeoe
