#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "massart/domain.hpp"
#include "massart/learner.hpp"
#include "massart/measure.hpp"

namespace massart {

enum class OracleMode { kMonteCarlo, kExact };

const char* to_string(OracleMode mode);
OracleMode parse_mode(const std::string& text);

/// Booster configuration with every derived scalar resolved.
struct BoostParams {
  double eta = 0.0;      ///< Massart noise bound
  double alpha = 0.0;    ///< weak learner tolerates noise below 1/2 - alpha
  double gamma = 0.0;    ///< weak learner advantage
  double epsilon = 0.0;  ///< target excess error
  double delta = 0.0;    ///< target failure probability

  double c = 0.0;         ///< 4 eta alpha / (1 - 2 alpha)
  double s = 0.0;         ///< risky threshold log((1 - eta) / (eta + c))
  double lambda = 0.0;    ///< step size gamma / 8
  double kappa = 0.0;     ///< termination density
  double delta_err = 0.0;
  double delta_dens = 0.0;
  double delta_wkl = 0.0;

  std::size_t max_rounds = 0;
  double sample_scale = 1.0;  ///< multiplies every subroutine sample size
  OracleMode mode = OracleMode::kMonteCarlo;
  /// Weak-learner repetitions per round; 0 means ceil(2 ln(2 / delta_wkl)).
  std::size_t wkl_calls = 0;
  /// false disables the X^r exclusion (ablation only).
  bool withhold = true;
};

struct ParamOverrides {
  std::optional<double> s_max;
  std::optional<double> kappa_min;
  std::optional<std::size_t> max_rounds;
};

BoostParams compute_params(double eta, double alpha, double gamma, double epsilon, double delta,
                           double sample_scale = 1.0, OracleMode mode = OracleMode::kMonteCarlo,
                           const ParamOverrides& overrides = {});

/// eta, or kappa when eta = 0 was admitted through overrides.
inline double effective_eta(const BoostParams& p) { return p.eta > 0.0 ? p.eta : p.kappa; }

std::size_t scaled_count(double scale, double raw);
double density_accuracy(const BoostParams& p);  ///< beta = min(eps/2, eta/4)
std::size_t density_sample_size(const BoostParams& p);
std::size_t overconfident_screen_size(const BoostParams& p);
std::size_t overconfident_error_size(const BoostParams& p);
std::size_t wkl_call_count(const BoostParams& p);
std::size_t wkl_test_size(const BoostParams& p);
/// Rejection-sampling draw cap: 10 (log(1/delta)/d^2 + 2m/d).
double rejection_draw_budget(std::size_t m, double density, double delta);

// ---------------------------------------------------------------------------
// Aggregated hypothesis G.

inline double weak_update(double sigma, double h, double lambda, double s, bool withhold = true) {
  return (!withhold || std::abs(sigma) < s) ? sigma + lambda * h : sigma;
}
inline double recalibrate(double sigma, double lambda, double s) {
  return std::abs(sigma) >= s ? sigma - lambda * sign_real(sigma) : sigma;
}

template <class Point>
struct WeakStep {
  Hypothesis<Point> h;
  bool recalibrated = false;  ///< OverConfident fired this round
};

template <class Point>
struct AggregatedHypothesis {
  double lambda = 0.0;
  double s = 0.0;
  bool withhold = true;
  std::vector<WeakStep<Point>> trace;
};

/// Replays the trace. Step i adds lambda h_i(x) when |sigma| < s, then, if
/// b_i = 1 and |sigma| >= s, steps back by lambda sign(sigma).
template <class Point>
double evaluate_g(const AggregatedHypothesis<Point>& agg, const Point& x,
                  std::size_t prefix = static_cast<std::size_t>(-1)) {
  const std::size_t n = std::min(prefix, agg.trace.size());
  double sigma = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& step = agg.trace[i];
    sigma = weak_update(sigma, step.h(x), agg.lambda, agg.s, agg.withhold);
    if (step.recalibrated) sigma = recalibrate(sigma, agg.lambda, agg.s);
  }
  return sigma;
}

template <class Point>
Label predict(const AggregatedHypothesis<Point>& agg, const Point& x) {
  return sign_label(evaluate_g(agg, x));
}

template <class Point>
Hypothesis<Point> as_classifier(AggregatedHypothesis<Point> agg) {
  return [agg = std::move(agg)](const Point& x) { return to_real(predict(agg, x)); };
}

// ---------------------------------------------------------------------------
// Run trace.

struct DrawCounts {
  std::uint64_t samp = 0;           ///< weak-learner samples and selection test samples
  std::uint64_t density = 0;        ///< Est-Density
  std::uint64_t overconfident = 0;  ///< OverConfident, both stages
  std::uint64_t total() const { return samp + density + overconfident; }
};

struct RoundRecord {
  std::size_t round = 0;
  double d_hat = 1.0;
  bool overconfident = false;
  DrawCounts draws;
  std::size_t wkl_calls = 0;
  // Exact-oracle diagnostics; empty in Monte Carlo mode.
  std::optional<double> d_exact;
  std::optional<double> phi;
  std::optional<double> lerr_exact;
  std::optional<double> ferr_exact;
  std::optional<double> max_abs_g;
  std::optional<double> max_noise_rate;  ///< over points D_mu_t can emit
  std::optional<double> risky_mass;
  std::optional<double> wkl_advantage;   ///< h_t against D_mu_{t-1}

  std::uint64_t raw_draws() const { return draws.total(); }
};

struct RunTrace {
  BoostParams params;
  std::vector<RoundRecord> rounds;  ///< rounds[0] is the initial state
  std::uint64_t total_draws = 0;
  bool terminated = false;

  std::size_t rounds_used() const { return rounds.empty() ? 0 : rounds.size() - 1; }
};

/// CSV columns: round,d_hat,d_exact,phi,overconfident,raw_draws,lerr_exact,ferr_exact
void write_trace_csv(std::ostream& out, const RunTrace& trace);

class MaxRoundsExceeded : public Error {
 public:
  explicit MaxRoundsExceeded(RunTrace trace)
      : Error(ErrorCode::kMaxRoundsExceeded,
              "no termination after " + std::to_string(trace.rounds_used()) + " rounds"),
        trace_(std::move(trace)) {}
  const RunTrace& trace() const { return trace_; }

 private:
  RunTrace trace_;
};

// ---------------------------------------------------------------------------
// Exact per-round quantities over a finite support, one pass.

struct ExactRoundStats {
  double density = 0.0;
  double potential = 0.0;
  double lerr = 0.0;
  double ferr = 0.0;
  double max_abs_g = 0.0;
  double max_noise_rate = 0.0;
  double risky_mass = 0.0;
  double risky_error = 0.0;  ///< Pr[sign(G) != y | x in X^r], 0 when X^r is empty
};

template <class Point>
ExactRoundStats exact_round_stats(const FiniteMassartDist<Point>& dist, std::span<const double> g,
                                  double s, bool withhold = true) {
  ExactRoundStats st;
  double risky_wrong = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const auto& a = dist[i];
    const double gx = g[i];
    const double margin = to_real(a.f) * gx;
    const double e = std::exp(-std::abs(gx));
    // weights of the true and flipped label under M
    const double m_true = margin < 0.0 ? 1.0 : e;
    const double m_flip = -margin < 0.0 ? 1.0 : e;
    const double phi_true = margin >= 0.0 ? e : 1.0 - margin;
    const double phi_flip = -margin >= 0.0 ? e : 1.0 + margin;
    const bool risky = std::abs(gx) >= s;
    const double w_true = (withhold && risky) ? 0.0 : m_true;
    const double w_flip = (withhold && risky) ? 0.0 : m_flip;

    st.density += a.p * ((1.0 - a.eta) * w_true + a.eta * w_flip);
    st.potential += a.p * ((1.0 - a.eta) * phi_true + a.eta * phi_flip);
    const bool wrong = sign_label(gx) != a.f;
    const double err = wrong ? 1.0 - a.eta : a.eta;
    st.lerr += a.p * err;
    if (wrong) st.ferr += a.p;
    st.max_abs_g = std::max(st.max_abs_g, std::abs(gx));
    if (a.p > 0.0) {
      const double noisy = a.eta * w_flip;
      const double clean = (1.0 - a.eta) * w_true;
      if (noisy + clean > 0.0) st.max_noise_rate = std::max(st.max_noise_rate, noisy / (noisy + clean));
    }
    if (risky) {
      st.risky_mass += a.p;
      risky_wrong += a.p * err;
    }
  }
  st.risky_error = st.risky_mass > 0.0 ? risky_wrong / st.risky_mass : 0.0;
  return st;
}

// ---------------------------------------------------------------------------
// Subroutines.

template <class Point>
struct Sample {
  std::vector<LabeledExample<Point>> examples;
  std::uint64_t raw_draws = 0;
};

/// Rejection sampling from D_mu: draw from the oracle, keep with probability
/// mu(x, y), until m examples are kept.
template <class Point>
Sample<Point> samp(MassartOracle<Point>& oracle, const Measure<Point>& measure, std::size_t m, Rng& rng,
                   double density_hint = 1.0, double delta = 0.1) {
  if (!(density_hint > 0.0))
    throw Error(ErrorCode::kDrawBudgetExceeded, "measure density is zero");
  const double budget = rejection_draw_budget(m, density_hint, delta);
  Sample<Point> out;
  out.examples.reserve(m);
  while (out.examples.size() < m) {
    if (static_cast<double>(out.raw_draws) >= budget)
      throw Error(ErrorCode::kDrawBudgetExceeded,
                  std::to_string(out.raw_draws) + " draws for " + std::to_string(out.examples.size()) +
                      " of " + std::to_string(m) + " examples");
    auto e = oracle.draw();
    ++out.raw_draws;
    if (rng.bernoulli(measure(e))) out.examples.push_back(std::move(e));
  }
  return out;
}

/// ExampleSource view of D_mu through samp().
template <class Point>
class MeasureSource final : public ExampleSource<Point> {
 public:
  MeasureSource(MassartOracle<Point>& oracle, const Measure<Point>& measure, double density_hint,
                double delta)
      : oracle_(oracle), measure_(measure), density_(density_hint), delta_(delta) {}

  std::vector<LabeledExample<Point>> draw(std::size_t n, Rng& rng) override {
    auto s = samp(oracle_, measure_, n, rng, density_, delta_);
    raw_draws_ += s.raw_draws;
    return std::move(s.examples);
  }
  std::uint64_t raw_draws() const { return raw_draws_; }

 private:
  MassartOracle<Point>& oracle_;
  const Measure<Point>& measure_;
  double density_;
  double delta_;
  std::uint64_t raw_draws_ = 0;
};

/// Est-Density. Exact mode returns d(mu) and draws nothing.
template <class Point>
double est_density(MassartOracle<Point>& oracle, const Measure<Point>& measure, const BoostParams& params,
                   Rng&) {
  if (params.mode == OracleMode::kExact) {
    if (!oracle.finite()) throw Error(ErrorCode::kExactModeNeedsFiniteSupport, "est_density");
    return exact_density(*oracle.finite(), measure);
  }
  const std::size_t n = density_sample_size(params);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += measure(oracle.draw());
  return sum / static_cast<double>(n);
}

struct OverConfidentCheck {
  bool overconfident = false;
  double risky_fraction = 0.0;  ///< estimate of Pr[x in X^r]
  std::optional<double> risky_error;  ///< estimate of Pr[y != sign(G) | X^r], when stage 2 ran
};

/// OverConfident. `measure` carries G_t and s; only |G| >= s is consulted.
template <class Point>
OverConfidentCheck over_confident_check(MassartOracle<Point>& oracle, const Measure<Point>& measure,
                                        const BoostParams& params, Rng&) {
  OverConfidentCheck out;
  const double screen = params.epsilon / 4.0;
  const double threshold = params.eta + 3.0 * params.epsilon / 4.0;

  if (params.mode == OracleMode::kExact) {
    const auto* dist = oracle.finite();
    if (!dist) throw Error(ErrorCode::kExactModeNeedsFiniteSupport, "over_confident");
    double mass = 0.0;
    double wrong = 0.0;
    for (std::size_t i = 0; i < dist->size(); ++i) {
      const auto& a = (*dist)[i];
      const double gx = measure.g(a.x, i);
      if (!measure.risky(gx)) continue;
      mass += a.p;
      wrong += a.p * (sign_label(gx) != a.f ? 1.0 - a.eta : a.eta);
    }
    out.risky_fraction = mass;
    if (mass <= screen) return out;
    out.risky_error = wrong / mass;
    out.overconfident = *out.risky_error >= threshold;
    return out;
  }

  const std::size_t n1 = overconfident_screen_size(params);
  std::size_t risky = 0;
  for (std::size_t i = 0; i < n1; ++i) {
    const auto e = oracle.draw();
    if (measure.risky(measure.g(e.x, e.atom))) ++risky;
  }
  out.risky_fraction = static_cast<double>(risky) / static_cast<double>(n1);
  if (out.risky_fraction <= screen) return out;

  const std::size_t n2 = overconfident_error_size(params);
  const double budget = 10.0 * static_cast<double>(n2) / out.risky_fraction;
  std::size_t kept = 0;
  std::size_t wrong = 0;
  std::uint64_t drawn = 0;
  while (kept < n2) {
    if (static_cast<double>(drawn) >= budget)
      throw Error(ErrorCode::kConditionalDrawBudgetExceeded,
                  std::to_string(drawn) + " draws yielded " + std::to_string(kept) + " risky examples");
    const auto e = oracle.draw();
    ++drawn;
    const double gx = measure.g(e.x, e.atom);
    if (!measure.risky(gx)) continue;
    ++kept;
    if (e.y != sign_label(gx)) ++wrong;
  }
  out.risky_error = static_cast<double>(wrong) / static_cast<double>(n2);
  out.overconfident = *out.risky_error >= threshold;
  return out;
}

template <class Point>
bool over_confident(MassartOracle<Point>& oracle, const Measure<Point>& measure, const BoostParams& params,
                    Rng& rng) {
  return over_confident_check(oracle, measure, params, rng).overconfident;
}

template <class Point>
struct SelectedHypothesis {
  Hypothesis<Point> h;
  std::size_t calls = 0;
  std::size_t chosen = 0;
  double empirical_advantage = 0.0;  ///< on the test sample; 0 if no test ran
};

/// Runs the weak learner on independent samples and keeps the candidate with
/// the best empirical advantage on a fresh test sample (ties: first index).
template <class Point>
SelectedHypothesis<Point> repeat_weak_learner(WeakLearner<Point>& wkl, ExampleSource<Point>& source,
                                              const BoostParams& params, Rng& rng) {
  const std::size_t calls = wkl_call_count(params);
  std::vector<Hypothesis<Point>> candidates;
  candidates.reserve(calls);
  for (std::size_t i = 0; i < calls; ++i) {
    Rng child = rng.split();
    candidates.push_back(wkl.learn(source, child));
  }
  SelectedHypothesis<Point> out;
  out.calls = calls;
  if (calls == 1) {
    out.h = std::move(candidates.front());
    return out;
  }
  const auto test = source.draw(wkl_test_size(params), rng);
  double best = -1.0;
  for (std::size_t i = 0; i < calls; ++i) {
    double corr = 0.0;
    for (const auto& e : test) corr += candidates[i](e.x) * to_real(e.y);
    const double adv = 0.5 * corr / static_cast<double>(test.size());
    if (adv > best) {
      best = adv;
      out.chosen = i;
    }
  }
  out.empirical_advantage = best;
  out.h = std::move(candidates[out.chosen]);
  return out;
}

template <class Point>
struct BoostResult {
  AggregatedHypothesis<Point> hypothesis;
  RunTrace trace;
  std::vector<double> atom_g;  ///< final G per atom (finite support only)
};

/// Massart-noise-tolerant boosting. Throws MaxRoundsExceeded (carrying the
/// trace) when the density estimate stays above kappa for max_rounds rounds.
template <class Point>
BoostResult<Point> boost(MassartOracle<Point>& oracle, WeakLearner<Point>& wkl, const BoostParams& params,
                         Rng& rng) {
  const FiniteMassartDist<Point>* dist = oracle.finite();
  const bool exact = params.mode == OracleMode::kExact;
  if (exact && !dist) throw Error(ErrorCode::kExactModeNeedsFiniteSupport, "boost");

  BoostResult<Point> result;
  auto& agg = result.hypothesis;
  agg.lambda = params.lambda;
  agg.s = params.s;
  agg.withhold = params.withhold;
  RunTrace& trace = result.trace;
  trace.params = params;

  // G_t per atom, maintained with the same arithmetic as evaluate_g.
  std::vector<double> g(dist ? dist->size() : 0, 0.0);
  std::vector<double> h_values(g.size(), 0.0);
  const auto field = [&agg](const Point& x) { return evaluate_g(agg, x); };
  const auto measure_now = [&] {
    return Measure<Point>(field, std::span<const double>(g), params.s, params.withhold);
  };
  const std::uint64_t draws_at_start = oracle.draws();

  const auto fill_exact = [&](RoundRecord& rec) {
    const auto st = exact_round_stats(*dist, std::span<const double>(g), params.s, params.withhold);
    rec.d_exact = st.density;
    rec.phi = st.potential;
    rec.lerr_exact = st.lerr;
    rec.ferr_exact = st.ferr;
    rec.max_abs_g = st.max_abs_g;
    rec.max_noise_rate = st.max_noise_rate;
    rec.risky_mass = st.risky_mass;
  };

  RoundRecord initial;
  if (exact) fill_exact(initial);
  trace.rounds.push_back(initial);

  double d_hat = 1.0;
  std::size_t t = 0;
  while (d_hat > params.kappa) {
    if (t >= params.max_rounds) {
      trace.total_draws = oracle.draws() - draws_at_start;
      throw MaxRoundsExceeded(std::move(trace));
    }
    ++t;
    RoundRecord rec;
    rec.round = t;

    // Weak hypothesis from D_{mu_{t-1}}.
    std::uint64_t mark = oracle.draws();
    const Measure<Point> previous = measure_now();
    MeasureSource<Point> source(oracle, previous, d_hat, params.delta);
    auto selected = repeat_weak_learner(wkl, source, params, rng);
    rec.draws.samp = oracle.draws() - mark;
    rec.wkl_calls = selected.calls;

    if (dist) {
      for (std::size_t i = 0; i < dist->size(); ++i) h_values[i] = selected.h((*dist)[i].x);
      if (exact)
        rec.wkl_advantage = exact_reweighted_advantage(*dist, previous, std::span<const double>(h_values));
      for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = weak_update(g[i], h_values[i], params.lambda, params.s, params.withhold);
    }
    agg.trace.push_back({std::move(selected.h), false});

    // Recalibrate on X^r when sign(G_t) errs there too often.
    mark = oracle.draws();
    const bool oc = over_confident(oracle, measure_now(), params, rng);
    rec.draws.overconfident = oracle.draws() - mark;
    if (oc) {
      agg.trace.back().recalibrated = true;
      for (auto& v : g) v = recalibrate(v, params.lambda, params.s);
    }
    rec.overconfident = oc;

    mark = oracle.draws();
    d_hat = est_density(oracle, measure_now(), params, rng);
    rec.draws.density = oracle.draws() - mark;
    rec.d_hat = d_hat;
    if (exact) fill_exact(rec);
    trace.rounds.push_back(rec);
  }
  trace.terminated = true;
  trace.total_draws = oracle.draws() - draws_at_start;
  result.atom_g = std::move(g);
  return result;
}

}  // namespace massart
