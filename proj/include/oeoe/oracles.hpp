// Offline estimation oracles: statistical (ERM, MLE, consistency), the
// adversarial constructions used by the lower bounds, and projection.
#pragma once

#include <memory>
#include <span>
#include <vector>

#include "oeoe/core.hpp"

namespace oeoe {

struct History {
  std::vector<int> xs;
  std::vector<double> ys;
  int size() const { return static_cast<int>(xs.size()); }
};

struct Estimate {
  Table table;
  int index = -1;  // class index, or -1 for improper tables
};

// All ties resolve to the lowest class index.
int erm_square(const Instance& inst, const History& h);
int mle(const Instance& inst, const History& h);
int consistent_binary(const Instance& inst, const History& h);

// f̂(x) = 0 if x was seen fewer than β times, f★(x) otherwise.
Table block_delay_oracle(const Instance& inst, std::span<const int> xs,
                         const Table& f_star, double beta);

// Indicator of the covariates unseen before the current block, plus i★.
// Block length ⌊β⌋+1; t is the 1-based round.
Table unseen_covariate_oracle(const Instance& inst, std::span<const int> xs,
                              int i_star, double beta, int t);

// Index (0-based) of f_{min(τ_t, N)} with τ_t = ⌈t/(⌊β⌋+1)⌉.
int shifted_proper_oracle(int t, double beta, int n);

// argmin_f Σ_x p(x) D(f̂(x), f(x)).
int project_to_proper(const Instance& inst, const Table& fhat,
                      std::span<const double> p);

// used[t-1] = Σ_{s<t} D(f̂^(t)(x^(s)), f★(x^(s))).
std::vector<double> offline_budget_used(const Instance& inst,
                                        std::span<const Table> fhats,
                                        std::span<const int> xs,
                                        const Table& f_star);

bool verify_offline_guarantee(const Instance& inst,
                              std::span<const Table> fhats,
                              std::span<const int> xs, const Table& f_star,
                              double beta);

enum class OracleKind {
  erm_square,
  mle,
  consistent_binary,
  block_delay,
  unseen_covariate,
  shifted_proper,
  custom_table,
};

OracleKind oracle_kind_from(const std::string& s);

class OfflineOracle {
 public:
  virtual ~OfflineOracle() = default;
  // Called at round t = h.size() + 1.
  virtual Estimate estimate(const History& h) = 0;
  double beta = 0.0;
};

struct OracleSpec {
  OracleKind kind = OracleKind::consistent_binary;
  double beta = 0.0;
  std::vector<Table> tables;  // custom-table rounds
};

std::unique_ptr<OfflineOracle> make_oracle(const Instance& inst,
                                           const OracleSpec& spec,
                                           int f_star);

}  // namespace oeoe
