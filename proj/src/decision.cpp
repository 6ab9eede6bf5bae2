#include "oeoe/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "oeoe/cde.hpp"
#include "oeoe/estimators.hpp"

namespace oeoe {

std::vector<double> default_reward_grid() {
  std::vector<double> g(11);
  for (int i = 0; i <= 10; ++i) g[i] = i / 10.0;
  return g;
}

double DmsoClass::mean_reward(int m, int pi) const {
  const auto& l = law[m][pi];
  double s = 0.0;
  for (int r = 0; r < n_r(); ++r)
    for (int o = 0; o < n_o; ++o) s += reward_grid[r] * l[r * n_o + o];
  return s;
}

int DmsoClass::best_decision(int m) const {
  int best = 0;
  double v = -std::numeric_limits<double>::infinity();
  for (int pi = 0; pi < n_pi; ++pi) {
    const double g = mean_reward(m, pi);
    if (g > v + 1e-15) {
      v = g;
      best = pi;
    }
  }
  return best;
}

double DmsoClass::divergence_between(int m1, int m2, int pi) const {
  const auto& a = law[m1][pi];
  const auto& b = law[m2][pi];
  if (divergence == LossKind::hellinger) return hellinger_sq(a, b);
  if (divergence != LossKind::cb_square)
    throw Error(Errc::unsupported_instance,
                "model divergence must be cb-square or squared-hellinger");
  double d = 0.0;
  for (int o = 0; o < n_o; ++o) {
    double pa = 0.0, pb = 0.0, ma = 0.0, mb = 0.0;
    for (int r = 0; r < n_r(); ++r) {
      pa += a[r * n_o + o];
      pb += b[r * n_o + o];
      ma += reward_grid[r] * a[r * n_o + o];
      mb += reward_grid[r] * b[r * n_o + o];
    }
    if (pa <= 0.0) continue;
    const double diff = ma / pa - (pb > 0.0 ? mb / pb : 0.0);
    d += pa * diff * diff;
  }
  return d;
}

void DmsoClass::validate() const {
  if (n_pi < 1 || law.empty())
    throw Error(Errc::invalid_argument, "empty decision or model set");
  for (double r : reward_grid)
    if (r < 0.0 || r > 1.0)
      throw Error(Errc::invalid_argument, "reward grid outside [0,1]");
  for (const auto& m : law) {
    if (static_cast<int>(m.size()) != n_pi)
      throw Error(Errc::invalid_argument, "model misses decisions");
    for (const auto& l : m) {
      if (static_cast<int>(l.size()) != n_r() * n_o)
        throw Error(Errc::invalid_argument, "law has wrong size");
      double s = 0.0;
      for (double v : l) {
        if (v < 0.0) throw Error(Errc::invalid_argument, "negative mass");
        s += v;
      }
      if (std::abs(s - 1.0) > 1e-9)
        throw Error(Errc::invalid_argument, "law does not sum to 1");
    }
  }
}

int policy_action(int pi, int s, int n_a) {
  for (int i = 0; i < s; ++i) pi /= n_a;
  return pi % n_a;
}

DmsoClass cb_class(const CbInstance& cb) {
  DmsoClass c;
  c.n_pi = 1;
  for (int s = 0; s < cb.n_s; ++s) c.n_pi *= cb.n_a;
  c.n_o = cb.n_s;
  c.reward_grid = default_reward_grid();
  c.divergence = LossKind::cb_square;
  std::vector<double> d1 = cb.d1;
  if (d1.empty()) d1.assign(cb.n_s, 1.0 / cb.n_s);
  const int top = c.n_r() - 1;
  for (const auto& g : cb.g) {
    std::vector<std::vector<double>> m(c.n_pi);
    for (int pi = 0; pi < c.n_pi; ++pi) {
      std::vector<double> l(c.n_r() * c.n_o, 0.0);
      for (int s = 0; s < cb.n_s; ++s) {
        const double mean = g[s * cb.n_a + policy_action(pi, s, cb.n_a)];
        l[0 * c.n_o + s] = d1[s] * (1.0 - mean);
        l[top * c.n_o + s] = d1[s] * mean;
      }
      m[pi] = std::move(l);
    }
    c.law.push_back(std::move(m));
  }
  c.validate();
  return c;
}

std::vector<double> dec_payoff(const DmsoClass& cls, std::span<const double> mu,
                               double gamma) {
  const int k = cls.n_models();
  std::vector<double> best(k);
  for (int m = 0; m < k; ++m) best[m] = cls.mean_reward(m, cls.best_decision(m));
  std::vector<int> support;
  for (int h = 0; h < k; ++h)
    if (mu[h] != 0.0) support.push_back(h);
  std::vector<double> a(static_cast<std::size_t>(cls.n_pi) * k);
  for (int pi = 0; pi < cls.n_pi; ++pi)
    for (int m = 0; m < k; ++m) {
      double div = 0.0;
      for (int h : support) div += mu[h] * cls.divergence_between(h, m, pi);
      a[pi * k + m] = best[m] - cls.mean_reward(m, pi) - gamma * div;
    }
  return a;
}

namespace {

void softmax(std::vector<double>& v, double sign, double eta) {
  double m = -std::numeric_limits<double>::infinity();
  for (double& x : v) {
    x *= sign * eta;
    m = std::max(m, x);
  }
  double z = 0.0;
  for (double& x : v) z += x = std::exp(x - m);
  for (double& x : v) x /= z;
}

}  // namespace

DecResult dec_value(const DmsoClass& cls, std::span<const double> mu,
                    double gamma, const DecOptions& opts) {
  if (!(gamma > 0.0)) throw Error(Errc::invalid_argument, "gamma must be > 0");
  const int n = cls.n_pi;
  const int k = cls.n_models();
  const auto a = dec_payoff(cls, mu, gamma);
  DecResult res;
  if (n == 1) {
    res.p = {1.0};
    res.value = res.lower = *std::max_element(a.begin(), a.end());
    res.converged = true;
    return res;
  }
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  const double range = std::max(*hi - *lo, 1e-12);
  const double eta = 1.0 / range;

  // Optimistic hedge for both players. Every iterate yields certificates:
  // max_m (pᵀA)_m ≥ value ≥ min_π (Aq)_π, so the gap only shrinks.
  std::vector<double> cum_p(n, 0.0), cum_q(k, 0.0), last_p(n, 0.0),
      last_q(k, 0.0), p(n), q(k), lp(n), gq(k), avg_p(n, 0.0), avg_q(k, 0.0);
  double best_upper = std::numeric_limits<double>::infinity();
  double best_lower = -std::numeric_limits<double>::infinity();
  std::vector<double> best_p(n, 1.0 / n);
  auto upper_of = [&](const std::vector<double>& pp) {
    double u = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < k; ++m) {
      double s = 0.0;
      for (int pi = 0; pi < n; ++pi) s += pp[pi] * a[pi * k + m];
      u = std::max(u, s);
    }
    return u;
  };
  auto lower_of = [&](const std::vector<double>& qq) {
    double l = std::numeric_limits<double>::infinity();
    for (int pi = 0; pi < n; ++pi) {
      double s = 0.0;
      for (int m = 0; m < k; ++m) s += a[pi * k + m] * qq[m];
      l = std::min(l, s);
    }
    return l;
  };
  int it = 0;
  for (it = 1; it <= opts.max_iter; ++it) {
    for (int i = 0; i < n; ++i) p[i] = cum_p[i] + last_p[i];
    for (int m = 0; m < k; ++m) q[m] = cum_q[m] + last_q[m];
    softmax(p, -1.0, eta);
    softmax(q, 1.0, eta);
    std::fill(lp.begin(), lp.end(), 0.0);
    std::fill(gq.begin(), gq.end(), 0.0);
    for (int pi = 0; pi < n; ++pi) {
      const double* row = a.data() + static_cast<std::size_t>(pi) * k;
      double s = 0.0;
      for (int m = 0; m < k; ++m) {
        s += row[m] * q[m];
        gq[m] += p[pi] * row[m];
      }
      lp[pi] = s;
    }
    const double up = *std::max_element(gq.begin(), gq.end());
    const double low = *std::min_element(lp.begin(), lp.end());
    if (up < best_upper) {
      best_upper = up;
      best_p = p;
    }
    best_lower = std::max(best_lower, low);
    for (int i = 0; i < n; ++i) {
      cum_p[i] += lp[i];
      last_p[i] = lp[i];
      avg_p[i] += p[i];
    }
    for (int m = 0; m < k; ++m) {
      cum_q[m] += gq[m];
      last_q[m] = gq[m];
      avg_q[m] += q[m];
    }
    if (it % 64 == 0) {
      std::vector<double> ap(n), aq(k);
      for (int i = 0; i < n; ++i) ap[i] = avg_p[i] / it;
      for (int m = 0; m < k; ++m) aq[m] = avg_q[m] / it;
      const double u = upper_of(ap);
      if (u < best_upper) {
        best_upper = u;
        best_p = ap;
      }
      best_lower = std::max(best_lower, lower_of(aq));
    }
    if (best_upper - best_lower <= opts.tol) break;
  }
  res.value = best_upper;
  res.lower = best_lower;
  res.gap = best_upper - best_lower;
  res.p = best_p;
  res.iterations = std::min(it, opts.max_iter);
  res.converged = res.gap <= opts.tol;
  if (!res.converged && opts.throw_on_failure)
    throw Error(Errc::convergence_failure,
                "dec_value: gap " + std::to_string(res.gap) +
                    " above tolerance after " +
                    std::to_string(res.iterations) + " iterations");
  return res;
}

std::vector<double> igw_distribution(std::span<const double> ghat,
                                     double gamma, double scale) {
  const int n = static_cast<int>(ghat.size());
  const double top = *std::max_element(ghat.begin(), ghat.end());
  auto mass = [&](double lambda) {
    double s = 0.0;
    for (double g : ghat) s += 1.0 / (lambda + scale * gamma * (top - g));
    return s;
  };
  // mass is decreasing in λ, mass(1) ≥ 1 ≥ mass(|A|).
  double lo = 1.0, hi = static_cast<double>(n);
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) > 1.0 ? lo : hi) = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  std::vector<double> p(n);
  double z = 0.0;
  for (int i = 0; i < n; ++i)
    z += p[i] = 1.0 / (lambda + scale * gamma * (top - ghat[i]));
  for (double& v : p) v /= z;
  return p;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double regret(const DmsoClass& cls, int m_star,
              const std::vector<std::vector<double>>& ps) {
  const double best = cls.mean_reward(m_star, cls.best_decision(m_star));
  std::vector<double> g(cls.n_pi);
  for (int pi = 0; pi < cls.n_pi; ++pi) g[pi] = cls.mean_reward(m_star, pi);
  double r = 0.0;
  for (const auto& p : ps)
    for (int pi = 0; pi < cls.n_pi; ++pi) r += p[pi] * (best - g[pi]);
  return r;
}

Instance dmso_instance(const DmsoClass& cls) {
  Instance inst;
  inst.n_x = cls.n_pi;
  if (cls.divergence == LossKind::cb_square) {
    inst.value = ValueKind::real;
    inst.dim = cls.n_o;
    inst.kernel = {KernelKind::gaussian, 1.0};
    inst.loss = make_loss(LossKind::cb_square);
    for (int m = 0; m < cls.n_models(); ++m) {
      Table t;
      for (int pi = 0; pi < cls.n_pi; ++pi) {
        const auto& l = cls.law[m][pi];
        for (int o = 0; o < cls.n_o; ++o) {
          double po = 0.0, mo = 0.0;
          for (int r = 0; r < cls.n_r(); ++r) {
            po += l[r * cls.n_o + o];
            mo += cls.reward_grid[r] * l[r * cls.n_o + o];
          }
          if (std::abs(po - 1.0 / cls.n_o) > 1e-9)
            throw Error(Errc::unsupported_instance,
                        "cb-square learner values need uniform contexts");
          t.push_back(mo / po);
        }
      }
      inst.cls.push_back(std::move(t));
    }
  } else {
    inst.value = ValueKind::prob;
    inst.n_y = cls.n_r() * cls.n_o;
    inst.dim = inst.n_y;
    inst.kernel = {KernelKind::categorical, 1.0};
    inst.loss = make_loss(LossKind::hellinger);
    for (int m = 0; m < cls.n_models(); ++m) {
      Table t;
      for (int pi = 0; pi < cls.n_pi; ++pi)
        t.insert(t.end(), cls.law[m][pi].begin(), cls.law[m][pi].end());
      inst.cls.push_back(std::move(t));
    }
  }
  return inst;
}

E2dLog run_e2d_off(const DmsoClass& cls, const E2dConfig& cfg,
                   const DecCache* shared) {
  const Instance inst = dmso_instance(cls);
  const int k = cls.n_models();
  Vsa vsa(inst, cfg.beta, cfg.multiplier);
  std::vector<double> loglik(k, 0.0);
  std::vector<int> pis;
  DecCache memo;
  Stream rng_dec = substream(cfg.seed, "decision");
  Stream rng_kernel = substream(cfg.seed, "kernel");
  DecOptions opts = cfg.dec;
  opts.throw_on_failure = false;
  const Table& f_star = inst.cls[cfg.m_star];
  const double best = cls.mean_reward(cfg.m_star, cls.best_decision(cfg.m_star));
  E2dLog log;
  double reg = 0.0, est = 0.0;
  for (int t = 1; t <= cfg.T; ++t) {
    const int mhat = static_cast<int>(
        std::max_element(loglik.begin(), loglik.end()) - loglik.begin());
    const double used = offline_error(inst, pis, inst.cls[mhat], f_star);
    log.beta_used = std::max(log.beta_used, used);
    const Mixture mu = vsa.step(inst.cls[mhat], mhat);
    std::vector<double> w(k, 0.0);
    for (std::size_t i = 0; i < mu.atoms.size(); ++i) w[mu.index[i]] += mu.weights[i];
    const std::vector<double>* found = nullptr;
    if (shared) {
      auto it = shared->find(w);
      if (it != shared->end()) found = &it->second;
    }
    if (!found) {
      auto it = memo.find(w);
      if (it == memo.end())
        it = memo.emplace(w, dec_value(cls, w, cfg.gamma, opts).p).first;
      found = &it->second;
    }
    const std::vector<double>& p = *found;
    int pi = 0;
    {
      const double u = rng_dec.uniform();
      double c = 0.0;
      pi = cls.n_pi - 1;
      for (int i = 0; i < cls.n_pi; ++i) {
        c += p[i];
        if (u < c) {
          pi = i;
          break;
        }
      }
    }
    const int cell = sample_row(cls.law[cfg.m_star][pi], rng_kernel);
    const int r = cell / cls.n_o;
    const int o = cell % cls.n_o;
    for (int i = 0; i < cls.n_pi; ++i)
      reg += p[i] * (best - cls.mean_reward(cfg.m_star, i));
    est += expected_loss(inst, mu, pi, f_star);
    vsa.reveal(pi);
    pis.push_back(pi);
    for (int m = 0; m < k; ++m)
      loglik[m] += std::log(std::max(cls.law[m][pi][cell], 1e-12));
    log.ps.push_back(p);
    log.steps.push_back({t, pi, cls.reward_grid[r], o, reg, est, used});
  }
  log.regret = reg;
  log.est = est;
  return log;
}

// ---------------------------------------------------------------------------

void TabularMdp::validate() const {
  auto check = [](std::span<const double> row, const char* what) {
    double s = 0.0;
    for (double v : row) {
      if (v < 0.0) throw Error(Errc::invalid_argument, what);
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw Error(Errc::invalid_argument, what);
  };
  check(d1, "initial law is not a distribution");
  if (static_cast<int>(pbar.size()) != H)
    throw Error(Errc::invalid_argument, "wrong number of layers");
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < n_s; ++s)
      for (int a = 0; a < n_a; ++a) check(row(h, s, a), "transition row");
  for (double r : reward_grid)
    if (r < 0.0 || r > 1.0)
      throw Error(Errc::invalid_argument, "reward grid outside [0,1]");
}

Policy deterministic_policy(const TabularMdp& m, const std::vector<int>& acts) {
  Policy pi(m.H, std::vector<double>(m.n_s * m.n_a, 0.0));
  for (int h = 0; h < m.H; ++h)
    for (int s = 0; s < m.n_s; ++s) pi[h][s * m.n_a + acts[h * m.n_s + s]] = 1.0;
  return pi;
}

TabularMdp random_mdp(int H, int n_s, int n_a, std::vector<double> grid,
                      std::uint64_t seed) {
  TabularMdp m;
  m.H = H;
  m.n_s = n_s;
  m.n_a = n_a;
  m.reward_grid = std::move(grid);
  Stream rng = substream(seed, "mdp");
  auto simplex = [&](int n) {
    std::vector<double> v(n);
    double z = 0.0;
    for (double& x : v) z += x = 0.05 + rng.uniform();
    for (double& x : v) x /= z;
    return v;
  };
  m.d1 = simplex(n_s);
  const int nr = m.n_r();
  m.pbar.assign(H, std::vector<double>(static_cast<std::size_t>(n_s) * n_a * nr * n_s));
  for (int h = 0; h < H; ++h)
    for (int sa = 0; sa < n_s * n_a; ++sa) {
      const auto rew = simplex(nr);
      const auto nxt = simplex(n_s);
      for (int r = 0; r < nr; ++r)
        for (int s2 = 0; s2 < n_s; ++s2)
          m.pbar[h][(static_cast<std::size_t>(sa) * nr + r) * n_s + s2] =
              rew[r] * nxt[s2];
    }
  return m;
}

std::vector<std::vector<double>> occupancy_measure(const TabularMdp& m,
                                                   const Policy& pi) {
  std::vector<std::vector<double>> d(m.H, std::vector<double>(m.n_s * m.n_a));
  std::vector<double> state = m.d1;
  for (int h = 0; h < m.H; ++h) {
    std::vector<double> next(m.n_s, 0.0);
    for (int s = 0; s < m.n_s; ++s)
      for (int a = 0; a < m.n_a; ++a) {
        const double w = state[s] * pi[h][s * m.n_a + a];
        d[h][s * m.n_a + a] = w;
        if (w == 0.0) continue;
        auto row = m.row(h, s, a);
        for (int r = 0; r < m.n_r(); ++r)
          for (int s2 = 0; s2 < m.n_s; ++s2) next[s2] += w * row[r * m.n_s + s2];
      }
    state = std::move(next);
  }
  return d;
}

double coverability(const TabularMdp& m, std::span<const Policy> pis) {
  std::vector<std::vector<double>> mx(m.H, std::vector<double>(m.n_s * m.n_a, 0.0));
  for (const auto& pi : pis) {
    const auto d = occupancy_measure(m, pi);
    for (int h = 0; h < m.H; ++h)
      for (int i = 0; i < m.n_s * m.n_a; ++i) mx[h][i] = std::max(mx[h][i], d[h][i]);
  }
  double c = 0.0;
  for (const auto& layer : mx) {
    double s = 0.0;
    for (double v : layer) s += v;
    c = std::max(c, s);
  }
  return c;
}

namespace {

// H[h][s·A + a] = D²_H(P̄^{a}_h(s,a), P̄^{b}_h(s,a)).
std::vector<std::vector<double>> hellinger_rows(const TabularMdp& a,
                                                const TabularMdp& b) {
  std::vector<std::vector<double>> out(a.H, std::vector<double>(a.n_s * a.n_a));
  for (int h = 0; h < a.H; ++h)
    for (int s = 0; s < a.n_s; ++s)
      for (int x = 0; x < a.n_a; ++x)
        out[h][s * a.n_a + x] = hellinger_sq(a.row(h, s, x), b.row(h, s, x));
  return out;
}

double dot_layers(const std::vector<std::vector<double>>& d,
                  const std::vector<std::vector<double>>& w) {
  double s = 0.0;
  for (std::size_t h = 0; h < d.size(); ++h)
    for (std::size_t i = 0; i < d[h].size(); ++i) s += d[h][i] * w[h][i];
  return s;
}

}  // namespace

double layerwise_divergence(const TabularMdp& m, const TabularMdp& m_prime,
                            const Policy& pi) {
  return dot_layers(occupancy_measure(m_prime, pi), hellinger_rows(m_prime, m));
}

double trajectory_hellinger(const TabularMdp& m, const TabularMdp& m_prime,
                            const Policy& pi) {
  // Affinity Σ_τ √(P(τ)Q(τ)) factorizes along the trajectory; v[s] is the
  // affinity of the suffix starting in state s at layer h.
  std::vector<double> v(m.n_s, 1.0);
  for (int h = m.H - 1; h >= 0; --h) {
    std::vector<double> u(m.n_s, 0.0);
    for (int s = 0; s < m.n_s; ++s)
      for (int a = 0; a < m.n_a; ++a) {
        const double w = pi[h][s * m.n_a + a];
        if (w == 0.0) continue;
        auto p = m.row(h, s, a);
        auto q = m_prime.row(h, s, a);
        double acc = 0.0;
        for (int r = 0; r < m.n_r(); ++r)
          for (int s2 = 0; s2 < m.n_s; ++s2) {
            const int i = r * m.n_s + s2;
            acc += std::sqrt(p[i] * q[i]) * v[s2];
          }
        u[s] += w * acc;
      }
    v = std::move(u);
  }
  double bc = 0.0;
  for (int s = 0; s < m.n_s; ++s) bc += std::sqrt(m.d1[s] * m_prime.d1[s]) * v[s];
  return std::max(0.0, 1.0 - bc);
}

Trajectory sample_trajectory(const TabularMdp& m, const Policy& pi,
                             Stream& rng) {
  Trajectory tr;
  int s = sample_row(m.d1, rng);
  tr.s.push_back(s);
  for (int h = 0; h < m.H; ++h) {
    const int a = sample_row(
        std::span<const double>(pi[h].data() + s * m.n_a, m.n_a), rng);
    const int cell = sample_row(m.row(h, s, a), rng);
    tr.a.push_back(a);
    tr.r.push_back(cell / m.n_s);
    s = cell % m.n_s;
    tr.s.push_back(s);
  }
  return tr;
}

CountMle::CountMle(const TabularMdp& shape) : shape_(shape) {
  counts_.assign(shape.H, std::vector<double>(shape.pbar[0].size(), 0.0));
}

void CountMle::add(const Trajectory& tr) {
  const int rs = shape_.row_size();
  for (int h = 0; h < shape_.H; ++h) {
    const int sa = tr.s[h] * shape_.n_a + tr.a[h];
    counts_[h][static_cast<std::size_t>(sa) * rs + tr.r[h] * shape_.n_s +
               tr.s[h + 1]] += 1.0;
  }
}

TabularMdp CountMle::estimate() const {
  TabularMdp m = shape_;
  const int rs = m.row_size();
  for (int h = 0; h < m.H; ++h)
    for (int sa = 0; sa < m.n_s * m.n_a; ++sa) {
      const double* c = counts_[h].data() + static_cast<std::size_t>(sa) * rs;
      double* out = m.pbar[h].data() + static_cast<std::size_t>(sa) * rs;
      double n = 0.0;
      for (int i = 0; i < rs; ++i) n += c[i];
      for (int i = 0; i < rs; ++i) out[i] = n > 0.0 ? c[i] / n : 1.0 / rs;
    }
  return m;
}

ConversionReport coverability_conversion_check(
    const TabularMdp& truth, std::span<const Policy> pis,
    std::span<const int> sequence, std::span<const TabularMdp> estimates,
    double c) {
  std::vector<std::vector<std::vector<double>>> occ;
  for (const auto& pi : pis) occ.push_back(occupancy_measure(truth, pi));
  ConversionReport rep;
  std::vector<int> counts(pis.size(), 0);
  const int T = static_cast<int>(sequence.size());
  for (int t = 0; t < T; ++t) {
    const auto rows = hellinger_rows(truth, estimates[t]);
    double used = 0.0;
    for (std::size_t i = 0; i < pis.size(); ++i)
      if (counts[i]) used += counts[i] * dot_layers(occ[i], rows);
    rep.beta = std::max(rep.beta, used);
    rep.lhs += dot_layers(occ[sequence[t]], rows);
    ++counts[sequence[t]];
  }
  rep.c_cov = coverability(truth, pis);
  const double H = truth.H;
  rep.rhs = c * (std::sqrt(H * rep.c_cov * rep.beta * T * std::log(double(T))) +
                 H * rep.c_cov);
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

// ---------------------------------------------------------------------------

CbLowerBound cb_lower_bound_instance(double beta, int T) {
  int n = 0;
  for (int cand = 1; cand <= T; ++cand) {
    const int k = static_cast<int>(std::floor(cand * beta));
    if (k >= 1 && cand * beta > 1.0 && cand * k == T) {
      n = cand;
      break;
    }
  }
  if (n == 0) {
    int nearest = 0;
    for (int cand = 1; cand <= 2 * T + 2; ++cand) {
      const int k = static_cast<int>(std::floor(cand * beta));
      if (k < 1 || cand * beta <= 1.0) continue;
      const int adm = cand * k;
      if (nearest == 0 || std::abs(adm - T) < std::abs(nearest - T)) nearest = adm;
    }
    throw Error(Errc::invalid_argument,
                "no N with T = N*floor(N*beta); nearest admissible T = " +
                    std::to_string(nearest));
  }
  CbLowerBound out;
  out.n = n;
  out.block = static_cast<int>(std::floor(n * beta));
  out.T = T;
  // Rounds are grouped into N blocks of ⌊Nβ⌋; block b flags context b.
  for (int t = 1; t <= T; ++t) out.flagged.push_back((t + out.block - 1) / out.block - 1);
  auto ghat = [&](int t, int s, int a) {
    return (s == out.flagged[t - 1] && a == 1) ? 1.0 : 0.0;
  };
  auto act = [&](int t, int s) { return s == out.flagged[t - 1] ? 1 : 0; };
  // D_CB(M̂^(u)(π^(v)), M★(π^(v))) with g★ ≡ 0 and uniform contexts.
  auto dcb = [&](int u, int v) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) {
      const double diff = ghat(u, c, act(v, c)) - 0.0;
      s += diff * diff;
    }
    return s / n;
  };
  out.oracle_valid = true;
  for (int t = 1; t <= T; ++t) {
    double used = 0.0;
    for (int s = 1; s < t; ++s) used += dcb(t, s);
    out.offline_used.push_back(used);
    if (used > beta + 1e-12) out.oracle_valid = false;
    out.online_error += dcb(t, t);
  }
  out.half_sqrt = 0.5 * std::sqrt(T * beta);
  return out;
}

}  // namespace oeoe
