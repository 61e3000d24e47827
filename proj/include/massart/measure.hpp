#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>

#include "massart/domain.hpp"

namespace massart {

// All logarithms and exponentials in this library are natural-base.

/// M(v) = 1 for v < 0, e^{-v} otherwise.
inline double m_weight(double v) { return v < 0.0 ? 1.0 : std::exp(-v); }

/// phi(v) = integral_v^inf M(z) dz in closed form.
inline double phi_point(double v) { return v >= 0.0 ? std::exp(-v) : 1.0 - v; }

/// mu_{g,s}(x, y) = M(y g(x)) if |g(x)| < s, else 0.
///
/// `g` is any real-valued map on the domain. When the examples come from a
/// finite distribution, `atom_values` may carry g precomputed per atom; it is
/// then used instead of calling `g`. With `withhold == false` the |g| >= s
/// exclusion is disabled (ablation only).
template <class Point>
class Measure {
 public:
  using Field = std::function<double(const Point&)>;

  Measure(Field g, double s, bool withhold = true) : g_(std::move(g)), s_(s), withhold_(withhold) {}
  Measure(Field g, std::span<const double> atom_values, double s, bool withhold = true)
      : g_(std::move(g)), atom_values_(atom_values), s_(s), withhold_(withhold) {}

  double s() const { return s_; }
  bool withholds() const { return withhold_; }

  double g(const Point& x, std::size_t atom = kNoAtom) const {
    if (atom != kNoAtom && atom < atom_values_.size()) return atom_values_[atom];
    return g_(x);
  }

  bool risky(double gx) const { return std::abs(gx) >= s_; }

  /// Weight of label y at a point whose field value is gx.
  double weight_at(double gx, Label y) const {
    if (withhold_ && risky(gx)) return 0.0;
    return m_weight(to_real(y) * gx);
  }

  double operator()(const Point& x, Label y, std::size_t atom = kNoAtom) const {
    return weight_at(g(x, atom), y);
  }
  double operator()(const LabeledExample<Point>& e) const { return (*this)(e.x, e.y, e.atom); }

 private:
  Field g_;
  std::span<const double> atom_values_;
  double s_;
  bool withhold_;
};

template <class Point>
double mu_weight(const Measure<Point>& measure, const Point& x, Label y) {
  return measure(x, y);
}

/// d(mu) = E_{(x,y)~D}[mu(x,y)], exactly.
template <class Point>
double exact_density(const FiniteMassartDist<Point>& dist, const Measure<Point>& measure) {
  double d = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    const double gx = measure.g(a.x, i);
    d += a.p * ((1.0 - a.eta) * measure.weight_at(gx, a.f) + a.eta * measure.weight_at(gx, flip(a.f)));
  }
  return d;
}

/// Phi = E_{(x,y)~D}[phi(y g(x))], exactly.
template <class Point, class Field>
double exact_potential(const FiniteMassartDist<Point>& dist, Field&& g) {
  double phi = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    const double margin = to_real(a.f) * g(a.x);
    phi += a.p * ((1.0 - a.eta) * phi_point(margin) + a.eta * phi_point(-margin));
  }
  return phi;
}

template <class Point>
double exact_potential(const FiniteMassartDist<Point>& dist, std::span<const double> g_values) {
  double phi = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    const double margin = to_real(a.f) * g_values[i];
    phi += a.p * ((1.0 - a.eta) * phi_point(margin) + a.eta * phi_point(-margin));
  }
  return phi;
}

/// Conditional flip probability of atom `i` under D_mu.
/// Throws ZeroMass when both label weights vanish (the atom is withheld).
template <class Point>
double reweighted_noise_rate(const FiniteMassartDist<Point>& dist, const Measure<Point>& measure,
                             std::size_t i) {
  const auto& a = dist[i];
  const double gx = measure.g(a.x, i);
  const double w_true = measure.weight_at(gx, a.f);
  const double w_flip = measure.weight_at(gx, flip(a.f));
  if (w_true + w_flip <= 0.0) throw Error(ErrorCode::kZeroMass, "point is excluded from D_mu");
  const double noisy = a.eta * w_flip;
  const double clean = (1.0 - a.eta) * w_true;
  return noisy + clean > 0.0 ? noisy / (noisy + clean) : 0.0;
}

template <class Point>
double reweighted_noise_rate(const FiniteMassartDist<Point>& dist, const Measure<Point>& measure,
                             const Point& x) {
  const std::size_t i = dist.find(x);
  if (i == kNoAtom) throw Error(ErrorCode::kInvalidParameter, "point not in support");
  return reweighted_noise_rate(dist, measure, i);
}

/// Largest conditional flip probability over atoms that D_mu can emit.
template <class Point>
double max_reweighted_noise_rate(const FiniteMassartDist<Point>& dist, const Measure<Point>& measure) {
  double worst = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    if (a.p <= 0.0) continue;
    const double gx = measure.g(a.x, i);
    const double w_true = measure.weight_at(gx, a.f);
    const double w_flip = measure.weight_at(gx, flip(a.f));
    const double noisy = a.eta * w_flip;
    const double clean = (1.0 - a.eta) * w_true;
    if (noisy + clean > 0.0) worst = std::max(worst, noisy / (noisy + clean));
  }
  return worst;
}

/// (1/2) E_{D_mu}[h(x) y]: advantage of h against the reweighted distribution.
template <class Point>
double exact_reweighted_advantage(const FiniteMassartDist<Point>& dist, const Measure<Point>& measure,
                                  std::span<const double> h_values) {
  double corr = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    const double gx = measure.g(a.x, i);
    const double w_true = a.p * (1.0 - a.eta) * measure.weight_at(gx, a.f);
    const double w_flip = a.p * a.eta * measure.weight_at(gx, flip(a.f));
    corr += h_values[i] * to_real(a.f) * (w_true - w_flip);
    mass += w_true + w_flip;
  }
  if (mass <= 0.0) throw Error(ErrorCode::kZeroMass, "measure has zero density");
  return 0.5 * corr / mass;
}

}  // namespace massart
