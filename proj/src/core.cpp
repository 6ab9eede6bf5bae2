#include "oeoe/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace oeoe {

namespace {

template <class E>
struct Names {
  E value;
  const char* name;
};

constexpr Names<ValueKind> kValueNames[] = {
    {ValueKind::binary, "binary"},
    {ValueKind::real, "real"},
    {ValueKind::prob, "prob"},
};
constexpr Names<LossKind> kLossNames[] = {
    {LossKind::zero_one, "zero-one"},   {LossKind::square, "square"},
    {LossKind::hellinger, "squared-hellinger"}, {LossKind::kl, "kl"},
    {LossKind::layerwise, "layerwise"}, {LossKind::cb_square, "cb-square"},
};
constexpr Names<KernelKind> kKernelNames[] = {
    {KernelKind::dirac, "dirac"},
    {KernelKind::gaussian, "gaussian"},
    {KernelKind::categorical, "categorical"},
};

template <class E, std::size_t N>
std::string name_of(const Names<E> (&table)[N], E v) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

template <class E, std::size_t N>
E parse_name(const Names<E> (&table)[N], const std::string& s,
             const char* what) {
  for (const auto& e : table)
    if (s == e.name) return e.value;
  throw Error(Errc::config, std::string("unknown ") + what + " '" + s + "'");
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

std::string to_string(ValueKind v) { return name_of(kValueNames, v); }
std::string to_string(LossKind v) { return name_of(kLossNames, v); }
std::string to_string(KernelKind v) { return name_of(kKernelNames, v); }
ValueKind value_kind_from(const std::string& s) {
  return parse_name(kValueNames, s, "value kind");
}
LossKind loss_kind_from(const std::string& s) {
  if (s == "hellinger") return LossKind::hellinger;
  return parse_name(kLossNames, s, "loss kind");
}
KernelKind kernel_kind_from(const std::string& s) {
  return parse_name(kKernelNames, s, "kernel kind");
}

Loss make_loss(LossKind kind) {
  switch (kind) {
    case LossKind::zero_one:
      return {kind, 1.0};
    case LossKind::square:
    case LossKind::hellinger:
    case LossKind::cb_square:
      return {kind, 2.0};
    case LossKind::kl:
    case LossKind::layerwise:
      return {kind, 2.0};
  }
  return {kind, 1.0};
}

double hellinger_sq(std::span<const double> p, std::span<const double> q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(std::max(p[i], 0.0)) -
                     std::sqrt(std::max(q[i], 0.0));
    s += d * d;
  }
  return 0.5 * s;
}

double eval_loss(const Loss& loss, std::span<const double> z1,
                 std::span<const double> z2) {
  if (z1.size() != z2.size() || z1.empty())
    throw Error(Errc::invalid_argument, "eval_loss: mismatched value kinds");
  switch (loss.kind) {
    case LossKind::zero_one:
      for (std::size_t i = 0; i < z1.size(); ++i)
        if (z1[i] != z2[i]) return 1.0;
      return 0.0;
    case LossKind::square: {
      double s = 0.0;
      for (std::size_t i = 0; i < z1.size(); ++i) {
        const double d = clamp01(z1[i]) - clamp01(z2[i]);
        s += d * d;
      }
      return s;
    }
    case LossKind::hellinger:
      return hellinger_sq(z1, z2);
    case LossKind::kl: {
      double s = 0.0;
      for (std::size_t i = 0; i < z1.size(); ++i) {
        if (z1[i] <= 0.0) continue;
        if (z2[i] <= 0.0) return std::numeric_limits<double>::infinity();
        s += z1[i] * std::log(z1[i] / z2[i]);
      }
      return std::max(s, 0.0);
    }
    case LossKind::cb_square: {
      double s = 0.0;
      for (std::size_t i = 0; i < z1.size(); ++i) {
        const double d = z1[i] - z2[i];
        s += d * d;
      }
      return s / static_cast<double>(z1.size());
    }
    case LossKind::layerwise:
      // Needs the model and policy; see decision.hpp.
      throw Error(Errc::unsupported_instance,
                  "layerwise divergence requires model context");
  }
  return 0.0;
}

double sample_outcome(const Kernel& kernel, std::span<const double> z,
                      Stream& rng) {
  switch (kernel.kind) {
    case KernelKind::dirac:
      return z[0];
    case KernelKind::gaussian: {
      std::normal_distribution<double> n(z[0], kernel.sigma);
      return n(rng);
    }
    case KernelKind::categorical: {
      const double u = rng.uniform();
      double c = 0.0;
      for (std::size_t i = 0; i < z.size(); ++i) {
        c += z[i];
        if (u < c) return static_cast<double>(i);
      }
      // u landed in the rounding slack; return the last supported outcome
      for (std::size_t i = z.size(); i-- > 0;)
        if (z[i] > 0.0) return static_cast<double>(i);
      return 0.0;
    }
  }
  return 0.0;
}

void Instance::check_table(const Table& f) const {
  if (f.size() != static_cast<std::size_t>(n_x) * dim)
    throw Error(Errc::invalid_argument, "estimator table has wrong size");
  for (int x = 0; x < n_x; ++x) {
    auto z = at(f, x);
    switch (value) {
      case ValueKind::binary:
        if (z[0] != 0.0 && z[0] != 1.0)
          throw Error(Errc::invalid_argument, "binary value outside {0,1}");
        break;
      case ValueKind::real:
        for (double v : z)
          if (!std::isfinite(v))
            throw Error(Errc::invalid_argument, "non-finite real value");
        break;
      case ValueKind::prob: {
        double s = 0.0;
        for (double v : z) {
          if (v < 0.0)
            throw Error(Errc::invalid_argument, "negative probability");
          s += v;
        }
        if (std::abs(s - 1.0) > 1e-9)
          throw Error(Errc::invalid_argument,
                      "probability vector does not sum to 1");
        break;
      }
    }
  }
}

void Instance::validate() const {
  if (n_x <= 0) throw Error(Errc::invalid_argument, "empty covariate set");
  if (cls.empty()) throw Error(Errc::invalid_argument, "empty class");
  if (value == ValueKind::prob && dim != n_y)
    throw Error(Errc::invalid_argument, "probability values need dim = |Y|");
  if (value == ValueKind::binary && dim != 1)
    throw Error(Errc::invalid_argument, "binary values need dim = 1");
  const bool kernel_ok =
      (kernel.kind == KernelKind::dirac && value == ValueKind::binary) ||
      (kernel.kind == KernelKind::gaussian && value == ValueKind::real) ||
      (kernel.kind == KernelKind::categorical && value == ValueKind::prob);
  if (!kernel_ok)
    throw Error(Errc::invalid_argument, "kernel does not match value space");
  if (kernel.kind == KernelKind::gaussian && !(kernel.sigma > 0.0))
    throw Error(Errc::invalid_argument, "gaussian kernel needs sigma > 0");
  for (const auto& f : cls) check_table(f);
  std::vector<const Table*> sorted;
  for (const auto& f : cls) sorted.push_back(&f);
  std::sort(sorted.begin(), sorted.end(),
            [](const Table* a, const Table* b) { return *a < *b; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (*sorted[i] == *sorted[i - 1])
      throw Error(Errc::invalid_argument, "duplicate class member");
}

Mixture Mixture::point(const Table& f, int idx) {
  Mixture m;
  m.atoms.push_back(f);
  m.weights.push_back(1.0);
  m.index.push_back(idx);
  m.support_size = 1;
  return m;
}

Mixture Mixture::uniform_over(const Instance& inst, std::span<const int> ids) {
  Mixture m;
  const double w = 1.0 / static_cast<double>(ids.size());
  for (int i : ids) {
    m.atoms.push_back(inst.cls[i]);
    m.weights.push_back(w);
    m.index.push_back(i);
  }
  m.support_size = ids.size();
  return m;
}

double Mixture::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

int Mixture::sample(Stream& rng) const {
  const double u = rng.uniform() * total();
  double c = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    c += weights[i];
    if (u < c) return static_cast<int>(i);
  }
  return static_cast<int>(weights.size()) - 1;
}

double expected_loss(const Instance& inst, const Mixture& mu, int x,
                     const Table& f_star) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    if (mu.weights[i] != 0.0) s += mu.weights[i] * inst.d(mu.atoms[i], f_star, x);
  return s;
}

double offline_error(const Instance& inst, std::span<const int> xs,
                     const Table& fhat, const Table& f_star) {
  double s = 0.0;
  for (int x : xs) s += inst.d(fhat, f_star, x);
  return s;
}

double online_error(const Instance& inst, const ExperimentLog& log) {
  const Table& f_star = inst.cls.at(log.f_star);
  double s = 0.0;
  for (const auto& r : log.steps) s += expected_loss(inst, r.mu, r.x, f_star);
  return s;
}

std::vector<double> Chain::joint() const {
  std::vector<double> p{1.0};
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    const int k = alphabet[i];
    std::vector<double> next(p.size() * k);
    for (std::size_t pre = 0; pre < p.size(); ++pre)
      for (int a = 0; a < k; ++a)
        next[pre * k + a] = p[pre] * cond[i][pre * k + a];
    p = std::move(next);
  }
  return p;
}

SubadditivityReport hellinger_subadditivity_check(const Chain& p,
                                                  const Chain& q) {
  if (p.alphabet != q.alphabet)
    throw Error(Errc::invalid_argument, "chains over different alphabets");
  SubadditivityReport r;
  r.lhs = hellinger_sq(p.joint(), q.joint());
  // marginal of P over prefixes, grown one coordinate at a time
  std::vector<double> prefix{1.0};
  double sum = 0.0;
  for (std::size_t i = 0; i < p.alphabet.size(); ++i) {
    const int k = p.alphabet[i];
    std::vector<double> next(prefix.size() * k);
    for (std::size_t pre = 0; pre < prefix.size(); ++pre) {
      std::span<const double> pc(p.cond[i].data() + pre * k, k);
      std::span<const double> qc(q.cond[i].data() + pre * k, k);
      sum += prefix[pre] * hellinger_sq(pc, qc);
      for (int a = 0; a < k; ++a) next[pre * k + a] = prefix[pre] * pc[a];
    }
    prefix = std::move(next);
  }
  r.rhs = 7.0 * sum;
  r.pass = r.lhs <= r.rhs + 1e-12;
  return r;
}

double potential_sum(std::span<const double> xs) {
  double s = 0.0;
  for (std::size_t t = 0; t + 1 < xs.size(); ++t)
    s += (xs[t] - xs[t + 1]) / xs[t];
  return s;
}

}  // namespace oeoe
