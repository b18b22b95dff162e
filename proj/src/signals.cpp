#include "kaf/signals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kaf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace

Rng Rng::stream(std::uint64_t master_seed, std::uint64_t index) {
  return Rng(splitmix64(master_seed ^ splitmix64(index + 1)));
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 6.283185307179586477 * u2;
  cached_ = r * std::sin(t);
  have_cached_ = true;
  return r * std::cos(t);
}

double Rng::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

double mackey_glass_rhs(double s, double s_delayed) {
  const double p = std::pow(s_delayed, 10.0);
  return 0.2 * s_delayed / (1.0 + p) - 0.1 * s;
}

std::vector<double> mackey_glass(const MGConfig& cfg) {
  if (!(cfg.tau > 0.0) || !(cfg.dt > 0.0) || cfg.subsample < 1)
    throw std::invalid_argument("mackey_glass: invalid config");
  const double steps_f = cfg.tau / cfg.dt;
  const auto delay = static_cast<std::size_t>(std::llround(steps_f));
  if (delay < 1 || std::abs(steps_f - static_cast<double>(delay)) > 1e-9)
    throw std::invalid_argument("mackey_glass: tau/dt must be a positive integer");

  const std::size_t emit =
      static_cast<std::size_t>(cfg.n_train + cfg.n_test + cfg.extra);
  const std::size_t total_steps =
      (static_cast<std::size_t>(cfg.transient) + emit) *
      static_cast<std::size_t>(cfg.subsample);

  // ring of the last delay+1 grid values; ring[i % size] = s at grid step i
  const std::size_t ring_sz = delay + 2;
  std::vector<double> ring(ring_sz, cfg.s0);
  double s = cfg.s0;

  std::vector<double> out;
  out.reserve(emit);
  const std::size_t skip =
      static_cast<std::size_t>(cfg.transient) *
      static_cast<std::size_t>(cfg.subsample);

  for (std::size_t step = 0; step < total_steps; ++step) {
    // delayed values: grid step-delay (t - tau) and step-delay+1 (t - tau + dt);
    // constant s0 history for anything before step 0
    const auto at = [&](std::ptrdiff_t g) {
      return g < 0 ? cfg.s0 : ring[static_cast<std::size_t>(g) % ring_sz];
    };
    const std::ptrdiff_t g0 = static_cast<std::ptrdiff_t>(step) -
                              static_cast<std::ptrdiff_t>(delay);
    const double sd0 = at(g0);
    const double sd1 = at(g0 + 1);
    const double sdh = 0.5 * (sd0 + sd1);

    const double k1 = mackey_glass_rhs(s, sd0);
    const double k2 = mackey_glass_rhs(s + 0.5 * cfg.dt * k1, sdh);
    const double k3 = mackey_glass_rhs(s + 0.5 * cfg.dt * k2, sdh);
    const double k4 = mackey_glass_rhs(s + cfg.dt * k3, sd1);
    s += cfg.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    ring[(step + 1) % ring_sz] = s;

    const std::size_t done = step + 1;
    if (done > skip && done % static_cast<std::size_t>(cfg.subsample) == 0)
      out.push_back(s);
    if (out.size() == emit) break;
  }
  return out;
}

namespace {

double draw_mixed(const MixedGaussianNoise& m, Rng& rng) {
  if (rng.uniform() < m.varsigma)
    return rng.normal(m.a1, std::sqrt(m.mu1));
  return rng.normal(m.a2, std::sqrt(m.mu2));
}

double draw_rayleigh(const RayleighNoise& r, Rng& rng) {
  const double v = r.chi * std::sqrt(-2.0 * std::log(1.0 - rng.uniform()));
  return r.centered ? v - r.chi * std::sqrt(1.5707963267948966192) : v;
}

} // namespace

double sample_noise(const NoiseModel& m, Rng& rng) {
  return std::visit(
      [&rng](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, GaussianNoise>) {
          return rng.normal(model.a, std::sqrt(model.mu));
        } else if constexpr (std::is_same_v<T, MixedGaussianNoise>) {
          return draw_mixed(model, rng);
        } else if constexpr (std::is_same_v<T, RayleighNoise>) {
          return draw_rayleigh(model, rng);
        } else {
          if (rng.uniform() < model.weight_rayleigh)
            return draw_rayleigh(model.rayleigh, rng);
          return draw_mixed(model.mixed, rng);
        }
      },
      m);
}

NoiseModel scenario_noise(int k) {
  switch (k) {
    case 1: return RayleighNoise{3.0};
    case 2: return MixedGaussianNoise{0.95, 0.0, 0.0, 0.01, 64.0};
    case 3: return GaussianNoise{0.0, 0.01};
    case 4:
      return MixtureNoise{0.2, RayleighNoise{3.0},
                          MixedGaussianNoise{0.8, 0.0, 0.0, 0.01, 64.0}};
    default:
      throw std::invalid_argument("scenario_noise: k must be in 1..4");
  }
}

Dataset embed(std::span<const double> series, const Embedding& emb) {
  if (emb.dim < 1 || emb.horizon < 1)
    throw std::invalid_argument("embed: dim and horizon must be >= 1");
  const std::size_t need =
      static_cast<std::size_t>(emb.dim) + static_cast<std::size_t>(emb.horizon);
  if (series.size() <= need)
    throw std::invalid_argument("embed: series too short");
  const std::size_t count = series.size() - need + 1;
  Dataset ds;
  ds.inputs.reserve(count);
  ds.desired.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    ds.inputs.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(i),
                           series.begin() + static_cast<std::ptrdiff_t>(i + emb.dim));
    ds.desired.push_back(series[i + need - 1]);
  }
  return ds;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double* out) {
  try {
    std::size_t pos = 0;
    *out = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
    return pos == s.size() && !s.empty();
  } catch (...) {
    return false;
  }
}

} // namespace

std::vector<double> load_series(const std::string& path,
                                const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_series: cannot open " + path);

  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line))
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
      lines.push_back(line);
  if (lines.empty()) throw std::runtime_error("load_series: empty file " + path);

  const char sep = lines[0].find('\t') != std::string::npos ? '\t' : ',';
  std::vector<std::string> first = split_fields(lines[0], sep);

  bool has_header = false;
  for (const std::string& f : first) {
    double v;
    if (!parse_double(f, &v)) has_header = true;
  }

  std::size_t col = 0;
  bool found = false;
  if (has_header) {
    for (std::size_t i = 0; i < first.size(); ++i)
      if (first[i] == column) {
        col = i;
        found = true;
      }
  }
  if (!found) {
    double idx;
    if (parse_double(column, &idx) && idx >= 0 &&
        idx < static_cast<double>(first.size())) {
      col = static_cast<std::size_t>(idx);
      found = true;
    }
  }
  if (!found) {
    std::string available;
    for (const std::string& f : first) available += " '" + f + "'";
    throw std::runtime_error("load_series: column '" + column +
                             "' not found; available:" + available);
  }

  std::vector<double> out;
  for (std::size_t r = has_header ? 1 : 0; r < lines.size(); ++r) {
    const std::vector<std::string> fields = split_fields(lines[r], sep);
    if (col >= fields.size())
      throw std::runtime_error("load_series: row " + std::to_string(r + 1) +
                               " has no column " + std::to_string(col));
    double v;
    if (!parse_double(fields[col], &v))
      throw std::runtime_error("load_series: non-numeric cell at row " +
                               std::to_string(r + 1) + ": '" + fields[col] + "'");
    out.push_back(v);
  }
  if (out.empty())
    throw std::runtime_error("load_series: no data rows in " + path);
  return out;
}

void dump_series(const std::string& path, const std::string& name,
                 std::span<const double> series) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("dump_series: cannot write " + path);
  out.precision(17);
  out << name << "\n";
  for (double v : series) out << v << "\n";
}

} // namespace kaf
