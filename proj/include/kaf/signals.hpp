#pragma once
// Test-signal generation (Mackey-Glass), the four scenario noise models,
// time-delay embedding and delimited-text ingestion.  Generators are pure
// given (config, seed); Monte Carlo runs derive independent RNG streams from
// (master_seed, run_index).

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace kaf {

// Deterministic RNG: mt19937_64 engine with hand-rolled transforms so the
// draw sequence does not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  static Rng stream(std::uint64_t master_seed, std::uint64_t index);

  double uniform();  // [0, 1)
  double normal();   // standard normal (Box-Muller)
  double normal(double mean, double stddev);

 private:
  std::mt19937_64 gen_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

struct MGConfig {
  double tau = 30.0;
  double dt = 0.1;
  int subsample = 6;
  double s0 = 1.2;
  int n_train = 1000;
  int n_test = 100;
  int transient = 1000;  // discarded leading samples, counted at emitted scale
  int extra = 0;         // extra trailing samples (embedding headroom)
};

// Right-hand side of the delay differential equation,
// 0.2 s(t-tau)/(1 + s(t-tau)^10) - 0.1 s(t).
double mackey_glass_rhs(double s, double s_delayed);

// RK4 with a circular delay buffer (delayed values linearly interpolated at
// half-steps); emits n_train + n_test + extra samples after the transient.
std::vector<double> mackey_glass(const MGConfig& cfg);

// --- noise models ---------------------------------------------------------

struct GaussianNoise {
  double a;   // mean
  double mu;  // variance
};
struct MixedGaussianNoise {
  double varsigma;  // mixture coefficient, [0, 1]
  double a1, a2;    // component means
  double mu1, mu2;  // component variances
};
struct RayleighNoise {
  double chi;
  bool centered = false;  // subtract the analytic mean chi*sqrt(pi/2)
};
struct MixtureNoise {
  double weight_rayleigh;  // the complementary weight goes to `mixed`
  RayleighNoise rayleigh;
  MixedGaussianNoise mixed;
};
using NoiseModel =
    std::variant<GaussianNoise, MixedGaussianNoise, RayleighNoise, MixtureNoise>;

double sample_noise(const NoiseModel& m, Rng& rng);

// The four scenarios: R(3), M(0.95,0,0,0.01,64), N(0,0.01) and
// 0.2 R(3) + 0.8 M(0.8,0,0,0.01,64).
NoiseModel scenario_noise(int k);

// --- embedding and file ingestion ------------------------------------------

struct Embedding {
  int dim = 7;
  int horizon = 1;
};

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> desired;
};

// inputs[i] = (s_i, ..., s_{i+dim-1}); desired[i] = s_{i+dim-1+horizon}.
Dataset embed(std::span<const double> series, const Embedding& emb);

// Reads one numeric column from a comma- or tab-separated text file, with or
// without a header row.  `column` is a header name or a 0-based index.
std::vector<double> load_series(const std::string& path,
                                const std::string& column);

// Dumps a series in the same format (header + one value per line).
void dump_series(const std::string& path, const std::string& name,
                 std::span<const double> series);

} // namespace kaf
