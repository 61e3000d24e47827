#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "massart/domain.hpp"
#include "massart/learner.hpp"

namespace massart {

struct HardDistSpec {
  int n = 64;
  double eta = 0.1;
  double alpha = 0.2;
  double rho = 1e-4;
  std::uint64_t seed = 0;

  double eta_prime() const { return eta * (1.0 + alpha / 5.0); }
  /// Fraction of negative points that carry noise.
  double noisy_fraction() const { return rho / (1.0 - eta_prime()); }
};

/// Deterministic keyed-hash value in [0, 1) for (seed, tag, x).
double keyed_uniform(std::uint64_t seed, char tag, BitPoint x);

/// +1 with probability p over the key, deterministically per (seed, x).
Label biased_function(std::uint64_t seed, BitPoint x, double p);

/// support_size distinct uniform n-bit points of equal mass, labeled by the
/// eta'-biased function; a keyed pseudorandom noisy_fraction() of the negative
/// points get eta(x) = eta, the rest eta(x) = 0.
FiniteMassartDist<BitPoint> hard_distribution(const HardDistSpec& spec, std::size_t support_size);

/// Uniform x with a label drawn independently of x: -1 with probability 1 - eta' - rho + rho eta.
LabeledExample<BitPoint> exsim(const HardDistSpec& spec, Rng& rng);
double exsim_negative_probability(const HardDistSpec& spec);

/// key = value lines: n, eta, alpha, rho, seed.
void write_hard_spec(std::ostream& out, const HardDistSpec& spec);
HardDistSpec read_hard_spec(std::istream& in);

// ---------------------------------------------------------------------------
// Heavy-hitter weak learner.

struct RudeConfig {
  std::size_t m = 2;     ///< booster example budget the learner targets
  std::size_t T = 1000;  ///< round bound
  double gamma = 0.01;
  double scale = 0.02;   ///< replaces the polynomial sample-size constants
  std::optional<double> fixed_vh;
  std::optional<double> fixed_vy;

  std::size_t candidate_size() const;  ///< ceil(scale m^2 / gamma)
  std::size_t mass_size() const;       ///< ceil(scale m T / gamma)
  std::size_t label_size() const;      ///< ceil(scale m^2 / (20 gamma^3))
};

struct RudeState {
  std::size_t m = 0;
  std::size_t T = 0;
  double gamma = 0.0;
  double v_h = 0.0;
  double v_y = 0.0;
  double scale = 0.0;
  std::vector<std::pair<BitPoint, Label>> hh;  ///< sorted by point

  Label operator()(BitPoint x) const;
  bool operator==(const RudeState& o) const { return hh == o.hh; }
};

RudeState wkl_rude(ExampleSource<BitPoint>& source, const RudeConfig& config, Rng& rng);

class RudeWeakLearner final : public WeakLearner<BitPoint> {
 public:
  explicit RudeWeakLearner(RudeConfig config) : config_(std::move(config)) {}

  std::string name() const override { return "rude"; }
  std::size_t sample_size() const override {
    return config_.candidate_size() + config_.mass_size() + config_.label_size();
  }
  Hypothesis<BitPoint> learn(ExampleSource<BitPoint>& source, Rng& rng) override;

  const RudeState& last_state() const { return last_; }

 private:
  RudeConfig config_;
  RudeState last_;
};

}  // namespace massart
