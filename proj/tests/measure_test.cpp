#include <gtest/gtest.h>

#include <cmath>

#include "massart/booster.hpp"
#include "massart/measure.hpp"

using namespace massart;

namespace {

RealPoint pt(double v) {
  RealPoint x(1);
  x[0] = v;
  return x;
}

Measure<RealPoint> constant_field(double g, double s) {
  return Measure<RealPoint>([g](const RealPoint&) { return g; }, s);
}

// The field x -> x[0].
Measure<RealPoint> identity_field(double s, bool withhold = true) {
  return Measure<RealPoint>([](const RealPoint& x) { return x[0]; }, s, withhold);
}

}  // namespace

TEST(MWeight, Examples) {
  EXPECT_EQ(m_weight(-0.5), 1.0);
  EXPECT_EQ(m_weight(0.0), 1.0);
  EXPECT_NEAR(m_weight(1.0), 0.36787944117144233, 1e-16);
}

TEST(MuWeight, Examples) {
  const auto m = constant_field(0.3, 1.79);
  EXPECT_NEAR(mu_weight(m, pt(0), Label::kPositive), 0.74081822068171788, 1e-15);
  EXPECT_EQ(mu_weight(m, pt(0), Label::kNegative), 1.0);
  const auto big = constant_field(2.0, 1.79);
  EXPECT_EQ(mu_weight(big, pt(0), Label::kPositive), 0.0);
  EXPECT_EQ(mu_weight(big, pt(0), Label::kNegative), 0.0);
}

TEST(MuWeight, BoundaryIsRisky) {
  const auto m = constant_field(1.5, 1.5);
  EXPECT_EQ(mu_weight(m, pt(0), Label::kNegative), 0.0);
  const auto below = constant_field(std::nextafter(1.5, 0.0), 1.5);
  EXPECT_EQ(mu_weight(below, pt(0), Label::kNegative), 1.0);
}

TEST(ExactDensity, Examples) {
  auto two = make_massart<RealPoint>(
      {{pt(-1.0), 0.5, Label::kPositive, 0.0}, {pt(3.0), 0.5, Label::kPositive, 0.0}}, 0.1);
  EXPECT_DOUBLE_EQ(exact_density(two, constant_field(0.0, 1.0)), 1.0);
  // g = -1 on the first atom (label +1, weight 1), g = 3 >= s on the second.
  EXPECT_DOUBLE_EQ(exact_density(two, identity_field(2.0)), 0.5);

  auto one = make_massart<RealPoint>({{pt(0.5), 1.0, Label::kPositive, 0.0}}, 0.1);
  // only the true label is ever drawn
  EXPECT_NEAR(exact_density(one, constant_field(0.5, 2.0)), std::exp(-0.5), 1e-15);
}

TEST(ExactDensity, AveragesLabelWeights) {
  // Two atoms at the same g with opposite true labels, noiseless: the
  // expectation averages e^{-0.5} and 1.
  auto dist = make_massart<RealPoint>(
      {{pt(0.0), 0.5, Label::kPositive, 0.0}, {pt(1.0), 0.5, Label::kNegative, 0.0}}, 0.1);
  EXPECT_NEAR(exact_density(dist, constant_field(0.5, 2.0)), 0.80326532985631671, 1e-15);
}

TEST(PhiPoint, Examples) {
  EXPECT_EQ(phi_point(0.0), 1.0);
  EXPECT_NEAR(phi_point(1.0), std::exp(-1.0), 1e-16);
  EXPECT_EQ(phi_point(-0.5), 1.5);
}

TEST(ExactPotential, Examples) {
  auto one = make_massart<RealPoint>({{pt(1.0), 1.0, Label::kPositive, 0.0}}, 0.1);
  EXPECT_EQ(exact_potential(one, [](const RealPoint&) { return 0.0; }), 1.0);
  EXPECT_NEAR(exact_potential(one, [](const RealPoint& x) { return x[0]; }), std::exp(-1.0), 1e-16);

  auto two = make_massart<RealPoint>(
      {{pt(1.0), 0.5, Label::kPositive, 0.0}, {pt(2.0), 0.5, Label::kNegative, 0.0}}, 0.1);
  // margins: +1 on the first atom, -1 on the second (g = 1 everywhere)
  EXPECT_NEAR(exact_potential(two, [](const RealPoint&) { return 1.0; }), (std::exp(-1.0) + 2.0) / 2.0, 1e-15);
  std::vector<double> g{1.0, 1.0};
  EXPECT_NEAR(exact_potential(two, std::span<const double>(g)), (std::exp(-1.0) + 2.0) / 2.0, 1e-15);
}

TEST(ReweightedNoiseRate, Examples) {
  auto clean = make_massart<RealPoint>({{pt(0.4), 1.0, Label::kPositive, 0.0}}, 0.1);
  EXPECT_EQ(reweighted_noise_rate(clean, identity_field(1.0), pt(0.4)), 0.0);

  auto noisy = make_massart<RealPoint>({{pt(0.0), 1.0, Label::kPositive, 0.07}}, 0.1);
  EXPECT_NEAR(reweighted_noise_rate(noisy, identity_field(1.0), pt(0.0)), 0.07, 1e-16);
}

TEST(ReweightedNoiseRate, WorstCaseApproachesHalfMinusAlpha) {
  const double eta = 0.1, alpha = 0.1;
  const double c = 4 * eta * alpha / (1 - 2 * alpha);
  const double s = std::log((1 - eta) / (eta + c));
  EXPECT_NEAR(c, 0.05, 1e-15);
  EXPECT_NEAR(s, std::log(6.0), 1e-15);
  const double g = std::nextafter(s, 0.0);
  auto dist = make_massart<RealPoint>({{pt(g), 1.0, Label::kPositive, eta}}, eta);
  const double rate = reweighted_noise_rate(dist, identity_field(s), pt(g));
  EXPECT_NEAR(rate, eta / (2 * eta + c), 1e-12);
  EXPECT_NEAR(rate, 0.4, 1e-12);
  EXPECT_LE(rate, 0.5 - alpha + 1e-12);
}

TEST(ReweightedNoiseRate, RiskyPointHasZeroMass) {
  auto dist = make_massart<RealPoint>({{pt(2.0), 1.0, Label::kPositive, 0.1}}, 0.1);
  try {
    reweighted_noise_rate(dist, identity_field(1.79), pt(2.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroMass);
  }
}

TEST(MeasureProperties, WeightBoundedByPhi) {
  Rng rng(5);
  for (int i = 0; i < 20000; ++i) {
    const double s = rng.uniform(0.1, 4.0);
    const double g = rng.uniform(-5.0, 5.0);
    const auto m = constant_field(g, s);
    for (Label y : {Label::kPositive, Label::kNegative}) {
      const double w = mu_weight(m, pt(0), y);
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      EXPECT_LE(w, phi_point(to_real(y) * g));
      if (std::abs(g) < s && sign_label(g) != y) {
        EXPECT_EQ(w, 1.0);
      }
    }
  }
}

TEST(MeasureProperties, MonotoneInMargin) {
  double prev = 2.0;
  for (double v = -3.0; v <= 3.0; v += 0.01) {
    const double w = m_weight(v);
    EXPECT_LE(w, prev);
    prev = w;
  }
}

TEST(MeasureProperties, DensityBelowPotential) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Atom<RealPoint>> atoms;
    const int n = 20;
    for (int i = 0; i < n; ++i)
      atoms.push_back({pt(rng.uniform(-3.0, 3.0) + i * 10.0), 1.0 / n,
                       rng.bernoulli(0.5) ? Label::kPositive : Label::kNegative, rng.uniform(0.0, 0.3)});
    const auto dist = make_massart(std::move(atoms), 0.3);
    const double s = rng.uniform(0.5, 3.0);
    const auto field = [](const RealPoint& x) { return x[0] - 10.0 * std::round(x[0] / 10.0); };
    const Measure<RealPoint> m(field, s);
    EXPECT_LE(exact_density(dist, m), exact_potential(dist, field) + 1e-15);
  }
}

TEST(MeasureProperties, MassartPreservedOnSafeSet) {
  Rng rng(13);
  for (int trial = 0; trial < 2000; ++trial) {
    const double eta = rng.uniform(0.01, 0.45);
    const double alpha = rng.uniform(0.001, 0.5 - eta);
    BoostParams p;
    try {
      p = compute_params(eta, alpha, 0.1, 0.99, 0.1);
    } catch (const Error&) {
      continue;  // degenerate s or epsilon bound
    }
    const double g = rng.uniform(-p.s, p.s);
    const double eta_x = rng.uniform(0.0, eta);
    auto dist = make_massart<RealPoint>(
        {{pt(g), 1.0, rng.bernoulli(0.5) ? Label::kPositive : Label::kNegative, eta_x}}, eta);
    if (!(std::abs(g) < p.s)) continue;
    const double rate = reweighted_noise_rate(dist, identity_field(p.s), pt(g));
    EXPECT_LE(rate, 0.5 - alpha + 1e-12) << "eta=" << eta << " alpha=" << alpha << " g=" << g;
  }
}

TEST(MeasureProperties, PhiContinuousConvexAndDerivative) {
  EXPECT_NEAR(phi_point(-1e-12), phi_point(1e-12), 1e-11);
  const double h = 1e-6;
  for (double v = -3.0; v <= 3.0; v += 0.137) {
    if (std::abs(v) < 1e-3) continue;
    const double d = (phi_point(v + h) - phi_point(v - h)) / (2 * h);
    EXPECT_NEAR(d, -m_weight(v), 1e-6);
    EXPECT_GE(phi_point(v + 0.1) + phi_point(v - 0.1), 2 * phi_point(v) - 1e-15);
  }
}

TEST(MeasureProperties, AblationKeepsRiskyPoints) {
  const auto m = Measure<RealPoint>([](const RealPoint&) { return 3.0; }, 1.0, false);
  EXPECT_NEAR(m(pt(0), Label::kPositive), std::exp(-3.0), 1e-16);
  EXPECT_EQ(m(pt(0), Label::kNegative), 1.0);
}

TEST(ExactReweightedAdvantage, UniformMeasureMatchesPlainAdvantage) {
  Rng rng(2);
  std::vector<Atom<RealPoint>> atoms;
  for (int i = 0; i < 30; ++i)
    atoms.push_back({pt(i), 1.0 / 30, rng.bernoulli(0.5) ? Label::kPositive : Label::kNegative, rng.uniform(0, 0.3)});
  const auto dist = make_massart(std::move(atoms), 0.3);
  std::vector<double> h(dist.size());
  for (auto& v : h) v = rng.bernoulli(0.5) ? 1.0 : -1.0;
  const auto m = constant_field(0.0, 1.0);
  EXPECT_NEAR(exact_reweighted_advantage(dist, m, std::span<const double>(h)),
              exact_advantage(dist, std::span<const double>(h)), 1e-15);
}
