// kaf: kernel adaptive filtering experiments.
//   kaf run --config c.ini --out dir [--seed N] [--threads N]
//   kaf sweep --config c.ini [--param gamma --values 0.01,0.04] [--out dir]
//   kaf bench --config c.ini
//   kaf properties [--seed N]
//   kaf analyze [--out dir]

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "kaf/analysis.hpp"
#include "kaf/experiments.hpp"
#include "kaf/properties.hpp"
#include "kaf/simd.hpp"

namespace {

void print_series_summary(const kaf::ExperimentResult& res) {
  std::printf("%-24s %14s %14s %10s %12s\n", "filter", "steady_db",
              "wall_per_iter", "h_mean", "singular");
  for (const kaf::MetricSeries& ms : res.series)
    std::printf("%-24s %14.4f %14.3e %10.3f %12lld\n", ms.filter_label.c_str(),
                ms.steady_state_db, ms.wall_per_iter, ms.h_mean,
                static_cast<long long>(ms.singular_events));
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel adaptive filtering experiments (QKRMEE/QKRGMEE)"};
  app.require_subcommand(1);

  std::string config_path, out_dir, param, values;
  long long seed = -1;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run a configured experiment");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed, "override master_seed");
  run->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep");
  sweep->add_option("--config", config_path, "experiment config file")->required();
  sweep->add_option("--param", param, "sweep parameter (L, gamma, alpha, beta)");
  sweep->add_option("--values", values, "comma-separated sweep values");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--seed", seed, "override master_seed");
  sweep->add_option("--threads", threads, "worker threads (0 = hardware)");

  CLI::App* bench = app.add_subcommand("bench", "timing comparison");
  bench->add_option("--config", config_path, "experiment config file")->required();
  bench->add_option("--seed", seed, "override master_seed");

  CLI::App* props = app.add_subcommand("properties", "run the property suites");
  long long prop_seed = 12345;
  props->add_option("--seed", prop_seed, "property suite seed");

  CLI::App* analyze = app.add_subcommand("analyze", "mean-error and complexity reports");
  analyze->add_option("--out", out_dir, "write reports into this directory");
  int an_runs = 200, an_steps = 200, an_dim = 8;
  double an_noise = 0.05, an_reg = 1e-3;
  analyze->add_option("--runs", an_runs, "Monte Carlo runs");
  analyze->add_option("--steps", an_steps, "recursion steps");
  analyze->add_option("--dim", an_dim, "feature dimension (<= 20)");
  analyze->add_option("--noise", an_noise, "observation noise stddev");
  analyze->add_option("--reg", an_reg, "regularization");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run || *sweep || *bench) {
      kaf::ExperimentConfig cfg = kaf::load_config(config_path);
      if (seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(seed);

      if (*run) {
        const kaf::ExperimentResult res = kaf::run_experiment(cfg, threads);
        kaf::emit_results(cfg, res, out_dir);
        std::printf("simd backend: %s\n", kaf::simd::backend_name());
        print_series_summary(res);
        std::printf("wrote %zu curve file(s) + manifest to %s\n",
                    res.series.size(), out_dir.c_str());
      } else if (*sweep) {
        if (!param.empty()) {
          if (!cfg.sweep) cfg.sweep = kaf::SweepSpec{};
          cfg.sweep->param = param;
        }
        if (!values.empty()) {
          cfg.sweep->values.clear();
          std::stringstream ss(values);
          std::string tok;
          while (std::getline(ss, tok, ','))
            cfg.sweep->values.push_back(std::stod(tok));
        }
        cfg.validate();
        const kaf::SweepResult res = kaf::run_sweep(cfg, threads);
        std::printf("%-8s %-10s %-24s %14s %14s %10s\n", "param", "value",
                    "filter", "steady_db", "wall_per_iter", "h_mean");
        for (const kaf::SweepRow& r : res.rows)
          std::printf("%-8s %-10.4g %-24s %14.4f %14.3e %10.3f\n",
                      res.param.c_str(), r.value, r.filter_label.c_str(),
                      r.steady_state_db, r.wall_per_iter, r.h_mean);
        if (!out_dir.empty()) {
          kaf::emit_sweep(cfg, res, out_dir);
          std::printf("wrote sweep table to %s\n", out_dir.c_str());
        }
      } else {
        // bench: single-threaded for stable timing
        const kaf::ExperimentResult res = kaf::run_experiment(cfg, 1);
        std::printf("simd backend: %s\n", kaf::simd::backend_name());
        std::printf("%-24s %14s %16s %10s %12s %12s %12s\n", "filter",
                    "wall_per_iter", "criterion_iter", "h_mean", "mults",
                    "adds", "exps");
        for (const kaf::MetricSeries& ms : res.series)
          std::printf("%-24s %14.3e %16.3e %10.3f %12lld %12lld %12lld\n",
                      ms.filter_label.c_str(), ms.wall_per_iter,
                      ms.criterion_per_iter, ms.h_mean,
                      static_cast<long long>(ms.counters.mults),
                      static_cast<long long>(ms.counters.adds),
                      static_cast<long long>(ms.counters.exps));
      }
      return 0;
    }

    if (*props) {
      const auto results =
          kaf::run_property_suite(static_cast<std::uint64_t>(prop_seed));
      bool all = true;
      for (const kaf::PropertyResult& r : results) {
        std::printf("[%s] property %d: %s (%s)\n", r.pass ? "PASS" : "FAIL",
                    r.id, r.name.c_str(), r.detail.c_str());
        all &= r.pass;
      }
      return all ? 0 : 1;
    }

    if (*analyze) {
      kaf::MeanErrorConfig cfg;
      cfg.feature_dim = an_dim;
      cfg.steps = an_steps;
      cfg.mc_runs = an_runs;
      cfg.noise_std = an_noise;
      cfg.reg = an_reg;
      const kaf::MeanErrorReport rep = kaf::empirical_mean_error_check(cfg);
      rep.write_kv(std::cout);

      // steady-state covariance of the estimated system
      if (rep.spectral_radius < 1.0 && an_noise > 0.0) {
        kaf::Mat xi = rep.alpha_outer;
        for (std::size_t i = 0; i < xi.rows(); ++i)
          for (std::size_t j = 0; j < xi.cols(); ++j)
            xi(i, j) *= an_noise * an_noise;
        const kaf::Mat t =
            kaf::lyapunov_steady_state(kaf::LyapunovSystem(rep.r_estimate, xi));
        double tr = 0.0;
        for (std::size_t i = 0; i < t.rows(); ++i) tr += t(i, i);
        const kaf::Mat resid =
            t - (rep.r_estimate * t * rep.r_estimate.transposed()) - xi;
        std::cout << "lyapunov_trace=" << tr << "\n";
        std::cout << "lyapunov_residual="
                  << resid.frobenius_norm() / xi.frobenius_norm() << "\n";
      }

      // complexity rows for the default window
      for (int h : {1, 5, 10, 20}) {
        std::cout << "complexity_delta_mee_L50_H" << h << "="
                  << kaf::complexity_delta(50, h, kaf::CriterionFamily::mee) << "\n";
        std::cout << "complexity_delta_gmee_L50_H" << h << "="
                  << kaf::complexity_delta(50, h, kaf::CriterionFamily::gmee) << "\n";
      }
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream f(out_dir + "/analysis.txt");
        rep.write_kv(f);
      }
      return rep.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
