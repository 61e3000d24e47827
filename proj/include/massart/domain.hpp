#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "massart/core.hpp"

namespace massart {

// ---------------------------------------------------------------------------
// Point helpers. Overloads for each supported point type.

inline bool point_less(const RealPoint& a, const RealPoint& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}
inline bool point_equal(const RealPoint& a, const RealPoint& b) {
  return a.size() == b.size() && std::equal(a.data(), a.data() + a.size(), b.data());
}
inline bool point_finite(const RealPoint& a) { return a.allFinite(); }
inline int point_dim(const RealPoint& a) { return static_cast<int>(a.size()); }

inline bool point_less(BitPoint a, BitPoint b) { return a < b; }
inline bool point_equal(BitPoint a, BitPoint b) { return a == b; }
inline bool point_finite(BitPoint) { return true; }
inline int point_dim(BitPoint) { return 1; }

// ---------------------------------------------------------------------------

/// One support point of a finite Massart distribution.
template <class Point>
struct Atom {
  Point x;
  double p = 0.0;           ///< base probability D_x(x)
  Label f = Label::kPositive;  ///< true label
  double eta = 0.0;         ///< flip probability eta(x)
};

/// Explicit finite-support Massart distribution. Every expectation over it can
/// be computed exactly. Construct through make_massart().
template <class Point>
class FiniteMassartDist {
 public:
  const std::vector<Atom<Point>>& atoms() const { return atoms_; }
  const Atom<Point>& operator[](std::size_t i) const { return atoms_[i]; }
  std::size_t size() const { return atoms_.size(); }
  double eta_bound() const { return eta_bound_; }
  int dim() const { return atoms_.empty() ? 0 : point_dim(atoms_.front().x); }

  /// Inverse-CDF lookup for u in [0, 1).
  std::size_t index_for(double u) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    auto i = static_cast<std::size_t>(it - cumulative_.begin());
    // Trailing zero-mass atoms are never returned.
    if (i >= atoms_.size()) i = last_positive_;
    return i;
  }

  /// Linear lookup of an atom by point; kNoAtom when absent.
  std::size_t find(const Point& x) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      if (point_equal(atoms_[i].x, x)) return i;
    return kNoAtom;
  }

 private:
  template <class P>
  friend FiniteMassartDist<P> make_massart(std::vector<Atom<P>> atoms, double eta_bound);

  std::vector<Atom<Point>> atoms_;
  std::vector<double> cumulative_;
  std::size_t last_positive_ = 0;
  double eta_bound_ = 0.0;
};

/// Validates and normalizes a raw atom list.
template <class Point>
FiniteMassartDist<Point> make_massart(std::vector<Atom<Point>> atoms, double eta_bound) {
  if (!(eta_bound >= 0.0) || eta_bound >= 0.5)
    throw Error(ErrorCode::kBoundNotBelowHalf, "eta_bound must lie in [0, 1/2)");
  if (atoms.empty()) throw Error(ErrorCode::kBadProbability, "distribution has no atoms");

  double total = 0.0;
  for (const auto& a : atoms) {
    if (!point_finite(a.x)) throw Error(ErrorCode::kNonFiniteCoordinate, "non-finite coordinate");
    if (!std::isfinite(a.p) || a.p < 0.0)
      throw Error(ErrorCode::kBadProbability, "atom probability must be finite and >= 0");
    if (!std::isfinite(a.eta) || a.eta < 0.0)
      throw Error(ErrorCode::kBadProbability, "flip probability must be finite and >= 0");
    if (a.eta > eta_bound)
      throw Error(ErrorCode::kNoiseExceedsBound,
                  "flip probability " + std::to_string(a.eta) + " exceeds bound " + std::to_string(eta_bound));
    total += a.p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw Error(ErrorCode::kBadProbability, "probabilities sum to " + std::to_string(total));

  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return point_less(atoms[a].x, atoms[b].x); });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (point_equal(atoms[order[i - 1]].x, atoms[order[i]].x))
      throw Error(ErrorCode::kDuplicatePoint, "atoms " + std::to_string(order[i - 1]) + " and " +
                                                  std::to_string(order[i]) + " share a point");

  FiniteMassartDist<Point> dist;
  dist.eta_bound_ = eta_bound;
  dist.cumulative_.reserve(atoms.size());
  double running = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    atoms[i].p /= total;
    running += atoms[i].p;
    dist.cumulative_.push_back(running);
    if (atoms[i].p > 0.0) dist.last_positive_ = i;
  }
  dist.atoms_ = std::move(atoms);
  return dist;
}

// ---------------------------------------------------------------------------

/// Marginal sampler + concept + noise function for continuous domains.
template <class Point>
struct GenerativeSource {
  std::function<Point(Rng&)> sample_x;
  std::function<Label(const Point&)> label;
  std::function<double(const Point&)> noise;
  double eta_bound = 0.0;
};

/// Noisy example oracle EX^Mas(f, D_x, eta(x)). Owns its random stream, so an
/// identical seed and call sequence reproduce the example stream bit for bit.
template <class Point>
class MassartOracle {
 public:
  MassartOracle(std::shared_ptr<const FiniteMassartDist<Point>> dist, std::uint64_t seed)
      : finite_(std::move(dist)), rng_(seed) {}
  MassartOracle(GenerativeSource<Point> source, std::uint64_t seed)
      : generative_(std::move(source)), rng_(seed) {}

  LabeledExample<Point> draw() {
    ++draws_;
    if (finite_) {
      const std::size_t i = finite_->index_for(rng_.uniform());
      const auto& a = (*finite_)[i];
      const bool flipped = rng_.bernoulli(a.eta);
      return {a.x, flipped ? flip(a.f) : a.f, i};
    }
    Point x = generative_->sample_x(rng_);
    const Label f = generative_->label(x);
    const bool flipped = rng_.bernoulli(generative_->noise(x));
    return {std::move(x), flipped ? flip(f) : f, kNoAtom};
  }

  std::uint64_t draws() const { return draws_; }
  const FiniteMassartDist<Point>* finite() const { return finite_.get(); }
  std::shared_ptr<const FiniteMassartDist<Point>> finite_shared() const { return finite_; }
  const GenerativeSource<Point>* generative() const {
    return generative_ ? &*generative_ : nullptr;
  }
  double eta_bound() const { return finite_ ? finite_->eta_bound() : generative_->eta_bound; }

 private:
  std::shared_ptr<const FiniteMassartDist<Point>> finite_;
  std::optional<GenerativeSource<Point>> generative_;
  Rng rng_;
  std::uint64_t draws_ = 0;
};

template <class Point>
LabeledExample<Point> sample_example(MassartOracle<Point>& oracle) {
  return oracle.draw();
}

// ---------------------------------------------------------------------------
// Exact metrics over finite support.

/// Per-atom hypothesis values, computed once.
template <class Point>
std::vector<double> evaluate_on_atoms(const FiniteMassartDist<Point>& dist, const Hypothesis<Point>& h) {
  std::vector<double> out(dist.size());
  for (std::size_t i = 0; i < dist.size(); ++i) out[i] = h(dist[i].x);
  return out;
}

/// Misclassification error of sign(h), from precomputed per-atom values.
template <class Point>
double exact_lerr(const FiniteMassartDist<Point>& dist, std::span<const double> h_values) {
  double err = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    err += a.p * (sign_label(h_values[i]) != a.f ? 1.0 - a.eta : a.eta);
  }
  return err;
}

template <class Point>
double exact_lerr(const FiniteMassartDist<Point>& dist, const Hypothesis<Point>& h) {
  return exact_lerr(dist, std::span<const double>(evaluate_on_atoms(dist, h)));
}

/// Pr_{x~D_x}[sign(h(x)) != f(x)].
template <class Point>
double exact_ferr(const FiniteMassartDist<Point>& dist, std::span<const double> h_values) {
  double err = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (sign_label(h_values[i]) != dist[i].f) err += dist[i].p;
  return err;
}

template <class Point>
double exact_ferr(const FiniteMassartDist<Point>& dist, const Hypothesis<Point>& h) {
  return exact_ferr(dist, std::span<const double>(evaluate_on_atoms(dist, h)));
}

/// (1/2) E_{(x,y)~D}[h(x) y]. For {-1,+1}-valued h this is 1/2 - lerr(h).
template <class Point>
double exact_advantage(const FiniteMassartDist<Point>& dist, std::span<const double> h_values) {
  double corr = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    corr += a.p * h_values[i] * to_real(a.f) * (1.0 - 2.0 * a.eta);
  }
  return 0.5 * corr;
}

template <class Point>
double exact_advantage(const FiniteMassartDist<Point>& dist, const Hypothesis<Point>& h) {
  return exact_advantage(dist, std::span<const double>(evaluate_on_atoms(dist, h)));
}

/// OPT = E_x[eta(x)], the error of f itself.
template <class Point>
double exact_opt(const FiniteMassartDist<Point>& dist) {
  double opt = 0.0;
  for (const auto& a : dist.atoms()) opt += a.p * a.eta;
  return opt;
}

/// The true concept as a hypothesis (finite support lookup).
template <class Point>
Hypothesis<Point> target_hypothesis(std::shared_ptr<const FiniteMassartDist<Point>> dist) {
  return [dist](const Point& x) {
    const std::size_t i = dist->find(x);
    return i == kNoAtom ? 1.0 : to_real((*dist)[i].f);
  };
}

}  // namespace massart
