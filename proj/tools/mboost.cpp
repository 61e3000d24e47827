#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "massart/dist_io.hpp"
#include "massart/harness.hpp"

using namespace massart;

int main(int argc, char** argv) {
  CLI::App app{"Massart-noise boosting experiments"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a seeded batch and write metrics");
  std::string config_path;
  std::string seed_range;
  std::string out_dir;
  std::string mode;
  double sample_scale = 0.0;
  bool ablate = false;
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("--seed-range", seed_range, "seeds a..b (inclusive)");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--mode", mode, "exact | mc")->check(CLI::IsMember({"exact", "mc"}));
  run->add_option("--sample-scale", sample_scale, "multiplier on subroutine sample sizes");
  run->add_flag("--ablate-no-withholding", ablate, "disable the |G| >= s exclusion");

  auto* params = app.add_subcommand("params", "print derived booster parameters");
  double eta = 0.1, alpha = 0.1, gamma = 0.05, epsilon = 0.15, delta = 0.1, pscale = 1.0;
  params->add_option("--eta", eta);
  params->add_option("--alpha", alpha);
  params->add_option("--gamma", gamma);
  params->add_option("--epsilon", epsilon);
  params->add_option("--delta", delta);
  params->add_option("--sample-scale", pscale);

  auto* mat = app.add_subcommand("materialize", "write the finite distribution for one seed");
  std::string mat_config;
  std::uint64_t mat_seed = 0;
  std::string mat_out;
  mat->add_option("config", mat_config, "INI config file")->required();
  mat->add_option("--seed", mat_seed, "run seed");
  mat->add_option("--out", mat_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      RunConfig config = load_config(config_path);
      if (!seed_range.empty()) config.seeds = parse_seed_range(seed_range);
      if (!out_dir.empty()) config.out = out_dir;
      if (!mode.empty()) config.boost.mode = parse_mode(mode);
      if (sample_scale > 0.0) config.boost.sample_scale = sample_scale;
      if (ablate) config.boost.withhold = false;
      const RunReport report = run_experiment(config);
      emit_metrics(report, config.out);
      std::printf("%zu seeds, %zu completed, success fraction %.4f, mean lerr %.6f, mean rounds %.1f\n",
                  report.seeds.size(), report.completed(), report.success_fraction(), report.mean_lerr(),
                  report.mean_rounds());
    } else if (*params) {
      const BoostParams p = compute_params(eta, alpha, gamma, epsilon, delta, pscale);
      std::cout << "c " << format_real(p.c) << "\ns " << format_real(p.s) << "\nlambda " << format_real(p.lambda)
                << "\nkappa " << format_real(p.kappa) << "\ndelta_err " << format_real(p.delta_err)
                << "\ndelta_dens " << format_real(p.delta_dens) << "\ndelta_wkl " << format_real(p.delta_wkl)
                << "\nmax_rounds " << p.max_rounds << "\ndensity_sample " << density_sample_size(p)
                << "\noverconfident_screen " << overconfident_screen_size(p) << "\noverconfident_error "
                << overconfident_error_size(p) << "\nwkl_calls " << wkl_call_count(p) << "\nwkl_test "
                << wkl_test_size(p) << '\n';
    } else if (*mat) {
      const RunConfig config = load_config(mat_config);
      const std::string text = materialize(config, mat_seed);
      if (mat_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(mat_out);
        out << text;
        if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + mat_out);
      }
    }
  } catch (const Error& e) {
    std::cerr << "mboost: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
