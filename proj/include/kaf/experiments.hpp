#pragma once
// Configuration-driven experiment runner: scenario runs, Monte Carlo MSE
// convergence curves, steady-state summaries, parameter sweeps and timing.
// Monte Carlo runs execute concurrently; aggregation is a deterministic
// reduction ordered by run index, so the thread count never changes outputs.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kaf/analysis.hpp"
#include "kaf/filters.hpp"
#include "kaf/signals.hpp"

namespace kaf {

inline constexpr const char* kVersion = "kaf 0.1.0";

// Raw, parseable filter description; build() validates and constructs.
struct FilterSpec {
  std::string variant = "QKRGMEE";
  double sigma = 1.0;      // kernel bandwidth
  double alpha = 2.0;      // GGD shape
  double beta = 1.4142135623730951;  // GGD scale
  double mee_sigma = 1.0;  // criterion bandwidth for the MEE family
  double lambda = 1.0;
  int window_len = 50;     // Parzen window L
  double gamma = 0.04;
  double reg = 1.0;
  // "theta2": reg is vartheta_2 directly; "theta1": reg is vartheta_1 and
  // vartheta_2 = reg * L^2 / alpha (the criterion families scale their
  // regularization with the Parzen window, KRLS is unaffected).
  std::string reg_mode = "theta2";
  std::string codebook_mode = "incremental";
  std::string label;       // defaults to the variant name

  FilterConfig build() const;
  std::string resolved_label() const;
};

struct SweepSpec {
  std::string param;  // one of L, gamma, alpha, beta
  std::vector<double> values;
};

struct ExperimentConfig {
  int scenario = 3;        // 1..4; 0 disables noise; ignored for file data
  bool from_file = false;
  MGConfig data;
  std::string path;        // file data source
  std::string column;
  Embedding embedding;
  std::vector<FilterSpec> filters;
  bool center = true;  // subtract the series mean before embedding; the
                       // error-entropy criteria are shift-invariant, so an
                       // uncentered target leaves its mean unlearned
  bool center_noise = false;  // subtract the analytic mean from Rayleigh
                              // noise components (scenarios 1 and 4)
  double rayleigh_chi = 3.0;  // chi of the Rayleigh components
  double noise_scale = 1.0;   // multiplies every noise draw
  int mc_runs = 50;
  std::uint64_t master_seed = 1;
  int steady_window = 100;
  bool db_average_linear = true;  // average MSE linearly, then convert to dB
  int run_index_offset = 0;       // shifts the per-run RNG stream indices;
                                  // lets tests address individual runs
  std::optional<SweepSpec> sweep;

  void validate() const;
};

ExperimentConfig parse_config(std::istream& is, const std::string& origin);
ExperimentConfig load_config(const std::string& path);

// Fully resolved config as key=value sections (also the manifest body).
void write_resolved_config(const ExperimentConfig& cfg, std::ostream& os);

struct MetricSeries {
  std::string filter_label;
  std::vector<double> mse_linear;  // per-iteration testing MSE, run-averaged
  std::vector<double> mse_db;
  double steady_state_db = 0.0;    // mean of the last steady_window dB entries
  double wall_per_iter = 0.0;      // update() seconds per iteration, run mean
  double criterion_per_iter = 0.0; // theta/window section seconds per iteration
  double h_mean = 0.0;
  OpCounters counters;             // accumulated per run (run mean)
  std::vector<double> per_run_steady_db;
  std::int64_t singular_events = 0;
};

struct ExperimentResult {
  std::vector<MetricSeries> series;
  int n_train = 0;
  int n_test = 0;
};

// threads <= 0 picks the hardware concurrency.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 0);

struct SweepRow {
  double value = 0.0;
  std::string filter_label;
  double steady_state_db = 0.0;
  double wall_per_iter = 0.0;
  double h_mean = 0.0;
};

struct SweepResult {
  std::string param;
  std::vector<SweepRow> rows;
};

SweepResult run_sweep(const ExperimentConfig& cfg, int threads = 0);

// Writes per-filter convergence curves (curve_<label>.csv), the manifest,
// and sweep tables.  Curve files and the manifest contain no wall-clock
// data, so a rerun with the same seed is byte-identical.
void emit_results(const ExperimentConfig& cfg, const ExperimentResult& res,
                  const std::string& out_dir);
void emit_sweep(const ExperimentConfig& cfg, const SweepResult& res,
                const std::string& out_dir);

// Applies one sweep value to every filter spec (param in {L,gamma,alpha,beta}).
void apply_sweep_value(ExperimentConfig& cfg, const std::string& param,
                       double value);

} // namespace kaf
