// Decision making with structured observations: DEC, E2D with offline
// oracles, inverse gap weighting, and tabular-MDP coverability tools.
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "oeoe/core.hpp"

namespace oeoe {

// Finite model class. law[m][π] is a joint distribution over
// (reward grid index r, observation o), flattened as r·n_o + o.
struct DmsoClass {
  int n_pi = 0;
  int n_o = 1;
  std::vector<double> reward_grid;
  std::vector<std::vector<std::vector<double>>> law;
  LossKind divergence = LossKind::cb_square;

  int n_models() const { return static_cast<int>(law.size()); }
  int n_r() const { return static_cast<int>(reward_grid.size()); }
  double mean_reward(int m, int pi) const;
  int best_decision(int m) const;  // π_M, lowest index on ties
  // D(M1(π), M2(π)): cb_square compares conditional mean rewards given o
  // weighted by M1's observation marginal; hellinger uses the joint law.
  double divergence_between(int m1, int m2, int pi) const;
  void validate() const;
};

std::vector<double> default_reward_grid();  // {0, 0.1, ..., 1}

// Contextual bandit: uniform or given context law, mean rewards per model.
struct CbInstance {
  int n_s = 1;
  int n_a = 2;
  std::vector<double> d1;
  std::vector<std::vector<double>> g;  // g[m][s·n_a + a] ∈ [0,1]
};

// Decisions are all deterministic policies S → A (π encodes actions in base
// n_a, context 0 least significant). Rewards are Bernoulli on the grid ends.
DmsoClass cb_class(const CbInstance& cb);
int policy_action(int pi, int s, int n_a);

struct DecOptions {
  int max_iter = 100000;
  double tol = 1e-4;
  bool throw_on_failure = true;
};

struct DecResult {
  double value = 0.0;  // sup_M objective at the returned p (upper bound)
  double lower = 0.0;  // certified lower bound on the game value
  double gap = 0.0;
  std::vector<double> p;
  int iterations = 0;
  bool converged = false;
};

// inf_p sup_M E_{π~p, M̂~μ}[g^M(π_M) − g^M(π) − γ·D(M̂(π), M(π))], solved by
// optimistic exponential-weights self-play with exact best-response
// certificates.
DecResult dec_value(const DmsoClass& cls, std::span<const double> mu,
                    double gamma, const DecOptions& opts = {});

// Payoff matrix A[π·|M| + m] of the game above.
std::vector<double> dec_payoff(const DmsoClass& cls, std::span<const double> mu,
                               double gamma);

// p(a) = 1/(λ + scale·γ·(ĝ(â) − ĝ(a))), λ ∈ [1, |A|] chosen so Σp = 1.
std::vector<double> igw_distribution(std::span<const double> ghat,
                                     double gamma, double scale = 2.0);

double total_variation(std::span<const double> p, std::span<const double> q);

// Exact expected regret Σ_t E_{π~p^(t)}[g★(π★) − g★(π)].
double regret(const DmsoClass& cls, int m_star,
              const std::vector<std::vector<double>>& ps);

// Values for the online learner: per decision, conditional mean rewards
// (cb_square) or the joint law (hellinger).
Instance dmso_instance(const DmsoClass& cls);

struct DecisionRecord {
  int t = 0;
  int pi = 0;
  double r = 0.0;
  int o = 0;
  double regret_cum = 0.0;
  double est_cum = 0.0;
  double offline_used = 0.0;
};

struct E2dConfig {
  double gamma = 1.0;
  int T = 1;
  std::uint64_t seed = 0;
  int m_star = 0;
  double beta = 1.0;
  double multiplier = 1.0;
  DecOptions dec;
};

struct E2dLog {
  std::vector<DecisionRecord> steps;
  std::vector<std::vector<double>> ps;
  double regret = 0.0;
  double est = 0.0;
  double beta_used = 0.0;
};

// DEC minimizers keyed by the model weights μ.
using DecCache = std::map<std::vector<double>, std::vector<double>>;

// E2D with an offline MLE oracle over the class and version space averaging
// as the oracle-efficient online estimator. `shared` is consulted read-only
// before solving (and memoizing locally).
E2dLog run_e2d_off(const DmsoClass& cls, const E2dConfig& cfg,
                   const DecCache* shared = nullptr);

// ---------------------------------------------------------------------------
// Tabular MDPs. Layers share the state set; pbar[h] holds the joint law of
// (r_h, s_{h+1}) for each (s, a), flattened as ((s·A + a)·R + r)·S + s'.

struct TabularMdp {
  int H = 1;
  int n_s = 1;
  int n_a = 1;
  std::vector<double> reward_grid;
  std::vector<double> d1;
  std::vector<std::vector<double>> pbar;

  int n_r() const { return static_cast<int>(reward_grid.size()); }
  int row_size() const { return n_r() * n_s; }
  std::span<const double> row(int h, int s, int a) const {
    return {pbar[h].data() + static_cast<std::size_t>(s * n_a + a) * row_size(),
            static_cast<std::size_t>(row_size())};
  }
  void validate() const;
};

// Policy π[h][s·A + a] = π_h(a | s).
using Policy = std::vector<std::vector<double>>;

Policy deterministic_policy(const TabularMdp& m, const std::vector<int>& acts);

TabularMdp random_mdp(int H, int n_s, int n_a, std::vector<double> grid,
                      std::uint64_t seed);

// d[h][s·A + a] by forward dynamic programming.
std::vector<std::vector<double>> occupancy_measure(const TabularMdp& m,
                                                   const Policy& pi);

// max_h Σ_{s,a} max_π d_h^π(s,a).
double coverability(const TabularMdp& m, std::span<const Policy> pis);

// Σ_h E^{M′,π}[D²_H(P̄^{M′}_h(s,a), P̄^M_h(s,a))].
double layerwise_divergence(const TabularMdp& m, const TabularMdp& m_prime,
                            const Policy& pi);

// D²_H(M(π), M′(π)) over whole trajectories, by enumeration.
double trajectory_hellinger(const TabularMdp& m, const TabularMdp& m_prime,
                            const Policy& pi);

struct Trajectory {
  std::vector<int> s, a, r;  // s has H+1 entries
};

Trajectory sample_trajectory(const TabularMdp& m, const Policy& pi,
                             Stream& rng);

// Count-based MLE: empirical joint of (r, s') per (h, s, a); unvisited pairs
// get the uniform row. The initial law is taken as known.
class CountMle {
 public:
  explicit CountMle(const TabularMdp& shape);
  void add(const Trajectory& tr);
  TabularMdp estimate() const;

 private:
  TabularMdp shape_;
  std::vector<std::vector<double>> counts_;
};

struct ConversionReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double beta = 0.0;
  double c_cov = 0.0;
  bool pass = false;
};

// Σ_t D^RL(M̂^(t)(π^(t)) ‖ M★(π^(t))) against
// c·(√(H·C_cov·β·T·ln T) + H·C_cov), with β the largest offline budget used.
ConversionReport coverability_conversion_check(
    const TabularMdp& truth, std::span<const Policy> pis,
    std::span<const int> sequence, std::span<const TabularMdp> estimates,
    double c);

// ---------------------------------------------------------------------------

struct CbLowerBound {
  int n = 0;       // contexts
  int block = 0;   // ⌊Nβ⌋
  int T = 0;
  std::vector<int> flagged;  // context index whose a_1 is played at round t
  std::vector<double> offline_used;
  double online_error = 0.0;
  bool oracle_valid = false;
  double half_sqrt = 0.0;  // ½√(Tβ)
};

CbLowerBound cb_lower_bound_instance(double beta, int T);

}  // namespace oeoe
