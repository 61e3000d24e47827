#pragma once

#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "massart/domain.hpp"
#include "massart/learner.hpp"

namespace massart {

/// Half-space on one coordinate: direction * x[axis] < threshold, direction = +-1.
struct Inequality {
  int axis = 0;
  int direction = 1;
  double threshold = 0.0;

  double project(const RealPoint& x) const { return direction * x[axis]; }
  bool holds(const RealPoint& x) const { return project(x) < threshold; }
  bool operator==(const Inequality&) const = default;
};

/// Index of the signed axis (axis, direction) in [0, 2d).
inline int signed_axis(int axis, int direction) { return 2 * axis + (direction < 0 ? 1 : 0); }

/// Open axis-aligned rectangle: intersection of strict inequalities.
struct Rectangle {
  std::vector<Inequality> ineqs;

  bool contains(const RealPoint& x) const {
    for (const auto& q : ineqs)
      if (!q.holds(x)) return false;
    return true;
  }
};

struct RectangleUnion {
  int d = 0;
  std::vector<Rectangle> rects;

  std::size_t k() const { return rects.size(); }
};

/// +1 iff x lies strictly inside some rectangle.
Label rect_union_eval(const RectangleUnion& u, const RealPoint& x);

/// Closed box: intersection of direction * x[axis] >= threshold. Empty list = whole space.
struct ClosedBox {
  std::vector<Inequality> ineqs;

  bool contains(const RealPoint& x) const {
    for (const auto& q : ineqs)
      if (q.project(x) < q.threshold) return false;
    return true;
  }
};

/// -1 inside the box, z outside; constant +1 when `constant` is set.
struct BoxHypothesis {
  ClosedBox box;
  Label z = Label::kPositive;
  bool constant = false;

  double operator()(const RealPoint& x) const {
    if (constant) return 1.0;
    return box.contains(x) ? -1.0 : to_real(z);
  }
};

struct BoxSearchStats {
  std::size_t candidates = 0;   ///< boxes enumerated (including the empty box)
  std::size_t admissible = 0;   ///< boxes above the mass floor
  bool no_candidate = false;    ///< nothing met the floor; majority constant returned
  std::size_t inside = 0;       ///< |S_B| of the chosen box
  std::size_t inside_positive = 0;
};

/// ceil(scale * k (C d)^k / alpha^2).
std::size_t wkl_box_sample_size(int d, int k, double alpha, double C = 2.0, double scale = 1.0);

/// Empirical mass floor alpha / (8 (2d)^k).
double wkl_box_mass_floor(int d, int k, double alpha);

/// Box weak learner. Among boxes of at most k closed inequalities with
/// thresholds at sample coordinates and empirical mass above the floor,
/// picks the one with the smallest positive fraction. Ties: larger |S_B|,
/// then fewer inequalities, then lexicographically smaller (signed axis,
/// threshold) list.
BoxHypothesis wkl_box(const std::vector<LabeledExample<RealPoint>>& sample, int d, int k, double alpha,
                      BoxSearchStats* stats = nullptr);

class BoxWeakLearner final : public WeakLearner<RealPoint> {
 public:
  BoxWeakLearner(int d, int k, double alpha, double C = 2.0, double scale = 1.0)
      : d_(d), k_(k), alpha_(alpha), m_(wkl_box_sample_size(d, k, alpha, C, scale)) {}

  std::string name() const override { return "box"; }
  std::size_t sample_size() const override { return m_; }
  Hypothesis<RealPoint> learn(ExampleSource<RealPoint>& source, Rng& rng) override;

  const BoxSearchStats& last_stats() const { return last_; }

 private:
  int d_;
  int k_;
  double alpha_;
  std::size_t m_;
  BoxSearchStats last_;
};

struct NegativeBox {
  ClosedBox box;
  double mass = 0.0;
};

/// Over all ways of violating one inequality per rectangle, the closed box
/// with the largest mass under `dist` (mass 0 when none exists).
NegativeBox enumerate_negative_subrectangles(const RectangleUnion& u, const FiniteMassartDist<RealPoint>& dist);

/// Mass of the negative region of u under dist.
double negative_mass(const RectangleUnion& u, const FiniteMassartDist<RealPoint>& dist);

// ---------------------------------------------------------------------------
// Instances.

enum class NoiseModel { kConstant, kUniform };

/// k random rectangles inside [0,1]^d, each with sides of length in [min_side, max_side].
RectangleUnion random_rectangle_union(int d, int k, Rng& rng, double min_side = 0.3, double max_side = 0.6);

/// `atoms` equal-mass uniform points in [0,1]^d labeled by u, with eta(x) = eta
/// (constant) or uniform on [0, eta].
FiniteMassartDist<RealPoint> discretize_union(const RectangleUnion& u, std::size_t atoms, double eta,
                                              NoiseModel noise, Rng& rng);

/// Generative oracle source: uniform on [0,1]^d labeled by u.
GenerativeSource<RealPoint> union_source(const RectangleUnion& u, double eta, NoiseModel noise);

/// Text format: header `d k`, then one inequality per line `rect_id axis direction threshold`
/// with direction written as + or -.
void write_union(std::ostream& out, const RectangleUnion& u);
RectangleUnion read_union(std::istream& in);

}  // namespace massart
