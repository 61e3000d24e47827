#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "massart/booster.hpp"

namespace massart {

struct DistributionConfig {
  std::string kind = "rectangles";  ///< rectangles | hard | file
  // rectangles
  int d = 2;
  int k = 1;
  std::size_t atoms = 2000;   ///< 0 selects the continuous generative source (MC mode only)
  double eta = 0.1;           ///< noise bound of the instance
  std::string noise = "uniform";  ///< uniform | constant
  double min_side = 0.3;
  double max_side = 0.6;
  // hard
  int n = 64;
  double alpha = 0.2;
  double rho = 1e-4;
  // file: a distribution over real points
  std::string path;
  std::string union_path;  ///< optional concept file for rectangles
  /// Instance randomness: fixed seed, or derived from each run seed when absent.
  std::optional<std::uint64_t> instance_seed;
};

struct LearnerConfig {
  std::string name = "box";  ///< box | rude | target
  int k = 1;
  double alpha = 0.1;
  double C = 2.0;
  double scale = 1.0;
  std::size_t m = 2;
  std::size_t T = 1000;
  double gamma = 0.01;
  std::optional<double> vh;
  std::optional<double> vy;
};

struct BoostConfig {
  double eta = 0.1;
  double alpha = 0.1;
  double gamma = 0.1;
  double epsilon = 0.15;
  double delta = 0.1;
  double sample_scale = 1.0;
  OracleMode mode = OracleMode::kExact;
  std::optional<std::size_t> max_rounds;
  std::size_t wkl_calls = 0;
  std::optional<double> s_max;
  std::optional<double> kappa_min;
  bool withhold = true;
  std::size_t test_size = 20000;  ///< held-out examples when the support is not finite
};

struct RunConfig {
  DistributionConfig distribution;
  LearnerConfig learner;
  BoostConfig boost;
  std::vector<std::uint64_t> seeds;
  std::string out = "out";
};

/// Parses an INI config with sections [distribution], [learner], [boost], [run].
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// "a..b" inclusive, or a single seed.
std::vector<std::uint64_t> parse_seed_range(const std::string& text);

BoostParams resolve_params(const RunConfig& config);

struct SeedResult {
  std::uint64_t seed = 0;
  std::string status = "ok";  ///< "ok" or an error name
  std::string message;
  bool terminated = false;
  std::size_t rounds = 0;
  std::uint64_t total_draws = 0;
  DrawCounts draws;
  std::optional<double> lerr_exact;
  std::optional<double> ferr_exact;
  std::optional<double> lerr_heldout;
  std::optional<double> opt;
  double max_abs_g = 0.0;
  double max_noise_rate = 0.0;   ///< over all rounds, exact mode only
  std::size_t recalibrations = 0;
  RunTrace trace;
};

struct RunReport {
  BoostParams params;
  std::vector<SeedResult> seeds;

  std::size_t completed() const;
  double success_fraction() const;  ///< lerr <= eta + epsilon, over all seeds
  double mean_lerr() const;         ///< over seeds with an error measurement
  double mean_ferr() const;
  double mean_rounds() const;
  double rounds_percentile(double q) const;
  double round_bound() const;       ///< 128 / (eta gamma^2)
  double log_squared_bound() const; ///< ln^2(1/eta) / gamma^2
};

/// One seed, fully determined by (config, seed).
SeedResult run_seed(const RunConfig& config, std::uint64_t seed);

/// The finite distribution a seed would run on, in the distribution text format.
std::string materialize(const RunConfig& config, std::uint64_t seed);

/// All seeds, in parallel across seeds (MB_THREADS caps the worker count).
RunReport run_experiment(const RunConfig& config);

/// summary.json plus round_trace_<seed>.csv per seed.
void emit_metrics(const RunReport& report, const std::filesystem::path& dir);
std::string summary_json(const RunReport& report);

unsigned worker_count();

}  // namespace massart
