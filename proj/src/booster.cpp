#include "massart/booster.hpp"

#include "massart/dist_io.hpp"

namespace massart {

const char* to_string(OracleMode mode) { return mode == OracleMode::kExact ? "exact" : "mc"; }

OracleMode parse_mode(const std::string& text) {
  if (text == "exact") return OracleMode::kExact;
  if (text == "mc" || text == "monte-carlo") return OracleMode::kMonteCarlo;
  throw Error(ErrorCode::kInvalidParameter, "mode must be 'exact' or 'mc', got '" + text + "'");
}

BoostParams compute_params(double eta, double alpha, double gamma, double epsilon, double delta,
                           double sample_scale, OracleMode mode, const ParamOverrides& overrides) {
  if (!(eta >= 0.0 && eta < 0.5)) throw Error(ErrorCode::kInvalidParameter, "eta must lie in [0, 1/2)");
  if (!(alpha > 0.0 && alpha < 0.5)) throw Error(ErrorCode::kInvalidParameter, "alpha must lie in (0, 1/2)");
  if (!(gamma > 0.0 && gamma < 0.5)) throw Error(ErrorCode::kInvalidParameter, "gamma must lie in (0, 1/2)");
  if (!(delta > 0.0 && delta <= 0.5)) throw Error(ErrorCode::kInvalidParameter, "delta must lie in (0, 1/2]");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::kInvalidParameter, "epsilon must lie in (0, 1)");
  if (!(sample_scale > 0.0)) throw Error(ErrorCode::kInvalidParameter, "sample_scale must be positive");
  if (eta == 0.0 && !(overrides.s_max && overrides.kappa_min))
    throw Error(ErrorCode::kEtaZero, "eta = 0 needs explicit s_max and kappa_min");

  BoostParams p;
  p.eta = eta;
  p.alpha = alpha;
  p.gamma = gamma;
  p.epsilon = epsilon;
  p.delta = delta;
  p.sample_scale = sample_scale;
  p.mode = mode;

  p.c = 4.0 * eta * alpha / (1.0 - 2.0 * alpha);
  p.s = eta + p.c > 0.0 ? std::log((1.0 - eta) / (eta + p.c)) : std::numeric_limits<double>::infinity();
  if (overrides.s_max) p.s = std::min(p.s, *overrides.s_max);
  if (!(p.s > 0.0)) throw Error(ErrorCode::kDegenerateThreshold, "s = " + format_real(p.s) + " <= 0");
  if (epsilon < 8.0 * eta * alpha / (1.0 - 2.0 * alpha))
    throw Error(ErrorCode::kEpsilonTooSmall, "epsilon below 8 eta alpha / (1 - 2 alpha)");

  p.lambda = gamma / 8.0;
  p.kappa = eta;
  if (overrides.kappa_min) p.kappa = std::max(p.kappa, *overrides.kappa_min);
  if (!(p.kappa > 0.0)) throw Error(ErrorCode::kInvalidParameter, "kappa must be positive");

  const double e = effective_eta(p);
  p.delta_err = delta * e * gamma * gamma / 1536.0;
  p.delta_dens = delta * e * gamma * gamma / 1024.0;
  p.delta_wkl = delta * e * gamma * gamma / 1536.0;
  p.max_rounds = overrides.max_rounds ? *overrides.max_rounds
                                      : static_cast<std::size_t>(std::ceil(10.0 * 128.0 / (e * gamma * gamma)));
  return p;
}

std::size_t scaled_count(double scale, double raw) {
  const double n = std::ceil(scale * raw);
  return n < 1.0 ? 1 : static_cast<std::size_t>(n);
}

double density_accuracy(const BoostParams& p) { return std::min(p.epsilon / 2.0, effective_eta(p) / 4.0); }

std::size_t density_sample_size(const BoostParams& p) {
  const double beta = density_accuracy(p);
  return scaled_count(p.sample_scale, std::log(1.0 / p.delta_dens) / (2.0 * beta * beta));
}

std::size_t overconfident_screen_size(const BoostParams& p) {
  return scaled_count(p.sample_scale, 32.0 * std::log(2.0 / p.delta_err) / (p.epsilon * p.epsilon));
}

std::size_t overconfident_error_size(const BoostParams& p) {
  return scaled_count(p.sample_scale, 8.0 * std::log(2.0 / p.delta_err) / (p.epsilon * p.epsilon));
}

std::size_t wkl_call_count(const BoostParams& p) {
  if (p.wkl_calls) return p.wkl_calls;
  return scaled_count(1.0, 2.0 * std::log(2.0 / p.delta_wkl));
}

std::size_t wkl_test_size(const BoostParams& p) {
  return scaled_count(p.sample_scale, 2.0 * std::log(2.0 / p.delta_wkl) / (p.gamma * p.gamma));
}

double rejection_draw_budget(std::size_t m, double density, double delta) {
  return 10.0 * (std::log(1.0 / delta) / (density * density) + 2.0 * static_cast<double>(m) / density);
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  const auto opt = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  out << "round,d_hat,d_exact,phi,overconfident,raw_draws,lerr_exact,ferr_exact\n";
  for (const auto& r : trace.rounds) {
    out << r.round << ',' << format_real(r.d_hat) << ',' << opt(r.d_exact) << ',' << opt(r.phi) << ','
        << (r.overconfident ? 1 : 0) << ',' << r.raw_draws() << ',' << opt(r.lerr_exact) << ','
        << opt(r.ferr_exact) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "failed writing round trace");
}

}  // namespace massart
