#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "massart/adversary.hpp"

using namespace massart;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoFailure;
}

struct OracleSource final : ExampleSource<BitPoint> {
  MassartOracle<BitPoint>& o;
  explicit OracleSource(MassartOracle<BitPoint>& o) : o(o) {}
  std::vector<LabeledExample<BitPoint>> draw(std::size_t n, Rng&) override {
    std::vector<LabeledExample<BitPoint>> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(o.draw());
    return out;
  }
};

// One heavy atom (mass 1/2, label +1 with noise 0.1) and many light atoms.
std::shared_ptr<const FiniteMassartDist<BitPoint>> heavy_dist(std::size_t light) {
  std::vector<Atom<BitPoint>> atoms;
  atoms.push_back({BitPoint{7}, 0.5, Label::kPositive, 0.1});
  for (std::size_t i = 0; i < light; ++i) atoms.push_back({BitPoint{1000 + i}, 0.5 / double(light), Label::kPositive, 0.0});
  return std::make_shared<const FiniteMassartDist<BitPoint>>(make_massart(std::move(atoms), 0.1));
}

}  // namespace

TEST(BiasedFunction, DeterministicAndBiased) {
  for (BitPoint x = 0; x < 100; ++x) EXPECT_EQ(biased_function(3, x, 0.3), biased_function(3, x, 0.3));
  std::size_t pos = 0, differ = 0;
  const std::size_t n = 100000;
  for (BitPoint x = 0; x < n; ++x) {
    pos += biased_function(11, x, 0.104) == Label::kPositive;
    differ += biased_function(11, x, 0.5) != biased_function(12, x, 0.5);
  }
  const double sd = std::sqrt(0.104 * 0.896 / double(n));
  EXPECT_NEAR(double(pos) / double(n), 0.104, 4 * sd);
  EXPECT_NEAR(double(differ) / double(n), 0.5, 4 * std::sqrt(0.25 / double(n)));
  for (BitPoint x = 0; x < 1000; ++x) EXPECT_EQ(biased_function(1, x, 0.0), Label::kNegative);
}

TEST(KeyedUniform, RangeAndTagSeparation) {
  std::size_t same = 0;
  for (BitPoint x = 0; x < 1000; ++x) {
    const double u = keyed_uniform(5, 'F', x);
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    same += u == keyed_uniform(5, 'N', x);
  }
  EXPECT_EQ(same, 0u);
}

TEST(HardDistribution, EtaPrime) {
  HardDistSpec spec;
  spec.eta = 0.1;
  spec.alpha = 0.2;
  EXPECT_NEAR(spec.eta_prime(), 0.104, 1e-15);
}

TEST(HardDistribution, NoiseOnlyOnNegatives) {
  HardDistSpec spec;
  spec.seed = 4;
  const auto dist = hard_distribution(spec, 50000);
  std::size_t pos = 0;
  for (const auto& a : dist.atoms()) {
    EXPECT_TRUE(a.eta == 0.0 || a.eta == spec.eta);
    if (a.eta > 0.0) {
      EXPECT_EQ(a.f, Label::kNegative);
    }
    pos += a.f == Label::kPositive;
    EXPECT_EQ(a.f, biased_function(spec.seed, a.x, spec.eta_prime()));
  }
  EXPECT_NEAR(double(pos) / 50000.0, spec.eta_prime(), 4 * std::sqrt(0.104 * 0.896 / 50000.0));
}

TEST(HardDistribution, ZeroRhoIsNoiseless) {
  HardDistSpec spec;
  spec.rho = 0.0;
  const auto dist = hard_distribution(spec, 20000);
  EXPECT_EQ(exact_opt(dist), 0.0);
}

TEST(HardDistribution, OptNearRhoEta) {
  // Noisy atoms are rare, so pool several seeds.
  HardDistSpec spec;
  spec.eta = 0.1;
  spec.alpha = 0.2;
  spec.rho = 1.5e-4;
  const int seeds = 20;
  const std::size_t support = 100000;
  double opt = 0.0;
  for (int s = 0; s < seeds; ++s) {
    spec.seed = 1000 + s;
    opt += exact_opt(hard_distribution(spec, support));
  }
  opt /= seeds;
  // count of noisy atoms is binomial(support, rho) in expectation
  const double count_sd = std::sqrt(double(support) * spec.rho);
  const double sd = spec.eta * count_sd / double(support) / std::sqrt(double(seeds));
  EXPECT_NEAR(opt, spec.rho * spec.eta, 4 * sd);
}

TEST(HardDistribution, Validation) {
  HardDistSpec spec;
  spec.alpha = 0.2;
  spec.rho = 2e-4;
  EXPECT_EQ(code_of([&] { hard_distribution(spec, 10); }), ErrorCode::kRhoOutOfRange);
  spec.rho = -1e-6;
  EXPECT_EQ(code_of([&] { hard_distribution(spec, 10); }), ErrorCode::kRhoOutOfRange);
  spec.rho = 0.0;
  spec.n = 3;
  EXPECT_EQ(code_of([&] { hard_distribution(spec, 9); }), ErrorCode::kInvalidParameter);
  EXPECT_EQ(hard_distribution(spec, 8).size(), 8u);
}

TEST(HardDistribution, SameSeedSameDistribution) {
  HardDistSpec spec;
  spec.seed = 9;
  const auto a = hard_distribution(spec, 1000);
  const auto b = hard_distribution(spec, 1000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].x, b[i].x);
    EXPECT_EQ(a[i].eta, b[i].eta);
  }
}

TEST(Exsim, NegativeProbability) {
  HardDistSpec spec;
  spec.eta = 0.1;
  spec.alpha = 0.2;
  spec.rho = 1e-4;
  EXPECT_NEAR(exsim_negative_probability(spec), 0.89591, 1e-12);
  spec.rho = 0.0;
  EXPECT_NEAR(exsim_negative_probability(spec), 0.896, 1e-12);
}

TEST(Exsim, UniformPointsIndependentLabels) {
  HardDistSpec spec;
  spec.n = 4;
  Rng rng(3);
  const int n = 32000;
  std::vector<std::array<int, 2>> counts(16, {0, 0});
  int neg = 0;
  for (int i = 0; i < n; ++i) {
    const auto e = exsim(spec, rng);
    ASSERT_LT(e.x, 16u);
    const int y = e.y == Label::kNegative;
    ++counts[e.x][y];
    neg += y;
  }
  const double q = exsim_negative_probability(spec);
  EXPECT_NEAR(double(neg) / n, q, 4 * std::sqrt(q * (1 - q) / n));
  // chi-square over the 32 (x, y) cells; 31 dof, 0.999 quantile is 61.1
  double chi2 = 0.0;
  for (int x = 0; x < 16; ++x)
    for (int y = 0; y < 2; ++y) {
      const double expect = n / 16.0 * (y ? q : 1 - q);
      chi2 += (counts[x][y] - expect) * (counts[x][y] - expect) / expect;
    }
  EXPECT_LT(chi2, 61.1);
}

TEST(HardSpecIo, RoundTrip) {
  HardDistSpec spec;
  spec.n = 40;
  spec.eta = 0.15;
  spec.alpha = 0.3;
  spec.rho = 2.5e-5;
  spec.seed = 123456789;
  std::stringstream ss;
  write_hard_spec(ss, spec);
  const auto back = read_hard_spec(ss);
  EXPECT_EQ(back.n, spec.n);
  EXPECT_EQ(back.eta, spec.eta);
  EXPECT_EQ(back.alpha, spec.alpha);
  EXPECT_EQ(back.rho, spec.rho);
  EXPECT_EQ(back.seed, spec.seed);
}

TEST(HardSpecIo, UnknownKey) {
  std::istringstream in("n = 3\nbeta = 2\n");
  EXPECT_EQ(code_of([&] { read_hard_spec(in); }), ErrorCode::kParse);
}

TEST(RudeConfig, Sizes) {
  RudeConfig c;
  c.m = 2;
  c.T = 1000;
  c.gamma = 0.01;
  c.scale = 0.02;
  EXPECT_EQ(c.candidate_size(), 8u);
  EXPECT_EQ(c.mass_size(), 4000u);
  EXPECT_EQ(c.label_size(), 4000u);
}

TEST(WklRude, KeepsHeavyAtomDropsLightOnes) {
  const auto dist = heavy_dist(100000);
  RudeConfig c;
  c.fixed_vh = 0.0004;
  for (int t = 0; t < 10; ++t) {
    MassartOracle<BitPoint> o(dist, 10 + t);
    OracleSource src(o);
    Rng rng(t);
    const auto st = wkl_rude(src, c, rng);
    ASSERT_EQ(st.hh.size(), 1u) << "trial " << t;
    EXPECT_EQ(st.hh[0].first, BitPoint{7});
    EXPECT_EQ(st(BitPoint{7}), Label::kPositive);
    EXPECT_EQ(st(BitPoint{1003}), Label::kNegative);
    EXPECT_EQ(st.v_h, 0.0004);
    EXPECT_GE(st.v_y, 0.5);
    EXPECT_LE(st.v_y, 0.5 + c.gamma / (10.0 * double(c.m)));
  }
}

TEST(WklRude, ThresholdRanges) {
  const auto dist = heavy_dist(10);
  RudeConfig c;
  MassartOracle<BitPoint> o(dist, 1);
  OracleSource src(o);
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto st = wkl_rude(src, c, rng);
    EXPECT_GE(st.v_h, c.gamma / (20.0 * double(c.m)));
    EXPECT_LE(st.v_h, c.gamma / (10.0 * double(c.m)));
  }
}

TEST(WklRude, FixedThresholdsReproduce) {
  const auto dist = heavy_dist(50);
  RudeConfig c;
  c.fixed_vh = 0.0003;
  c.fixed_vy = 0.5;
  auto run = [&](std::uint64_t seed) {
    MassartOracle<BitPoint> o(dist, seed);
    OracleSource src(o);
    Rng rng(seed);
    return wkl_rude(src, c, rng);
  };
  EXPECT_EQ(run(5), run(5));
  const auto st = run(5);
  // every sampled candidate is heavy enough to keep; all labels are +1
  EXPECT_GE(st.hh.size(), 2u);
  EXPECT_LE(st.hh.size(), c.candidate_size());
  for (const auto& [x, y] : st.hh) EXPECT_EQ(y, Label::kPositive);
}

TEST(WklRude, Validation) {
  const auto dist = heavy_dist(10);
  MassartOracle<BitPoint> o(dist, 1);
  OracleSource src(o);
  Rng rng(2);
  RudeConfig c;
  c.m = 0;
  EXPECT_EQ(code_of([&] { wkl_rude(src, c, rng); }), ErrorCode::kInvalidParameter);
}

TEST(WklRude, LearnerOnExsimIsNearConstantNegative) {
  // The simulated oracle has no heavy atoms at n = 64: h is -1 everywhere.
  HardDistSpec spec;
  struct Sim final : ExampleSource<BitPoint> {
    const HardDistSpec& spec;
    explicit Sim(const HardDistSpec& s) : spec(s) {}
    std::vector<LabeledExample<BitPoint>> draw(std::size_t n, Rng& rng) override {
      std::vector<LabeledExample<BitPoint>> out;
      for (std::size_t i = 0; i < n; ++i) out.push_back(exsim(spec, rng));
      return out;
    }
  } sim(spec);
  RudeWeakLearner wkl(RudeConfig{});
  Rng rng(8);
  const auto h = wkl.learn(sim, rng);
  EXPECT_TRUE(wkl.last_state().hh.empty());
  EXPECT_EQ(h(BitPoint{12345}), -1.0);
  EXPECT_EQ(wkl.sample_size(), 8u + 4000u + 4000u);
}
