#include "kaf/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kaf/simd.hpp"

namespace kaf {

FilterConfig FilterSpec::build() const {
  CriterionParams cp(GGDParams(alpha, beta), mee_sigma, lambda, window_len);
  double theta2 = reg;
  const FilterVariant v = variant_from_name(variant);
  if (reg_mode == "theta1") {
    if (v != FilterVariant::krls) {
      const bool mee = v == FilterVariant::krmee || v == FilterVariant::qkrmee;
      const double a = mee ? 2.0 : alpha;
      theta2 = reg * static_cast<double>(window_len) *
               static_cast<double>(window_len) / a;
    }
  } else if (reg_mode != "theta2") {
    throw std::invalid_argument("filter.reg_mode: expected theta2 or theta1, got '" +
                                reg_mode + "'");
  }
  FilterConfig cfg(v, KernelParams(sigma), cp, gamma, theta2);
  if (codebook_mode == "rebuild")
    cfg.codebook_mode = CodebookMode::rebuild;
  else if (codebook_mode != "incremental")
    throw std::invalid_argument("filter.codebook_mode: expected incremental or rebuild, got '" +
                                codebook_mode + "'");
  return cfg;
}

std::string FilterSpec::resolved_label() const {
  return label.empty() ? variant : label;
}

void ExperimentConfig::validate() const {
  if (!from_file && (scenario < 0 || scenario > 4))
    throw std::invalid_argument("scenario: must be 0..4 or file");
  if (mc_runs < 1) throw std::invalid_argument("mc_runs: must be >= 1");
  if (steady_window < 1 || steady_window > data.n_train)
    throw std::invalid_argument("steady_window: must be in [1, n_train]");
  if (data.n_train < 1 || data.n_test < 1)
    throw std::invalid_argument("data.n_train/n_test: must be >= 1");
  if (filters.empty())
    throw std::invalid_argument("filters: at least one [filter] section required");
  if (from_file && path.empty())
    throw std::invalid_argument("data.path: required for file data");
  for (const FilterSpec& f : filters) f.build();  // field-level validation
  if (sweep) {
    const std::string& p = sweep->param;
    if (p != "L" && p != "gamma" && p != "alpha" && p != "beta")
      throw std::invalid_argument("sweep.param: expected one of L, gamma, alpha, beta");
    if (sweep->values.empty())
      throw std::invalid_argument("sweep.values: empty");
  }
}

namespace {

std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw std::invalid_argument(key + ": not a number: '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  const int i = static_cast<int>(std::llround(d));
  if (std::abs(d - i) > 1e-12)
    throw std::invalid_argument(key + ": not an integer: '" + v + "'");
  return i;
}

} // namespace

ExperimentConfig parse_config(std::istream& is, const std::string& origin) {
  ExperimentConfig cfg;
  cfg.filters.clear();
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      if (section == "filter") cfg.filters.emplace_back();
      if (section == "sweep" && !cfg.sweep) cfg.sweep = SweepSpec{};
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string where = section.empty() ? key : section + "." + key;

    if (section.empty()) {
      if (key == "scenario") {
        if (value == "file") {
          cfg.from_file = true;
        } else {
          cfg.scenario = to_int(where, value);
        }
      } else if (key == "mc_runs") {
        cfg.mc_runs = to_int(where, value);
      } else if (key == "master_seed") {
        cfg.master_seed = static_cast<std::uint64_t>(to_double(where, value));
      } else if (key == "steady_window") {
        cfg.steady_window = to_int(where, value);
      } else if (key == "db_average") {
        if (value == "linear") cfg.db_average_linear = true;
        else if (value == "db") cfg.db_average_linear = false;
        else throw std::invalid_argument(where + ": expected linear or db");
      } else {
        throw std::invalid_argument(where + ": unknown key");
      }
    } else if (section == "data") {
      if (key == "tau") cfg.data.tau = to_double(where, value);
      else if (key == "dt") cfg.data.dt = to_double(where, value);
      else if (key == "subsample") cfg.data.subsample = to_int(where, value);
      else if (key == "s0") cfg.data.s0 = to_double(where, value);
      else if (key == "n_train") cfg.data.n_train = to_int(where, value);
      else if (key == "n_test") cfg.data.n_test = to_int(where, value);
      else if (key == "transient") cfg.data.transient = to_int(where, value);
      else if (key == "center") {
        if (value == "true" || value == "1") cfg.center = true;
        else if (value == "false" || value == "0") cfg.center = false;
        else throw std::invalid_argument(where + ": expected true or false");
      }
      else if (key == "center_noise") {
        if (value == "true" || value == "1") cfg.center_noise = true;
        else if (value == "false" || value == "0") cfg.center_noise = false;
        else throw std::invalid_argument(where + ": expected true or false");
      }
      else if (key == "rayleigh_chi") cfg.rayleigh_chi = to_double(where, value);
      else if (key == "noise_scale") cfg.noise_scale = to_double(where, value);
      else if (key == "path") cfg.path = value;
      else if (key == "column") cfg.column = value;
      else throw std::invalid_argument(where + ": unknown key");
    } else if (section == "embedding") {
      if (key == "dim") cfg.embedding.dim = to_int(where, value);
      else if (key == "horizon") cfg.embedding.horizon = to_int(where, value);
      else throw std::invalid_argument(where + ": unknown key");
    } else if (section == "filter") {
      if (cfg.filters.empty())
        throw std::invalid_argument(where + ": key outside a [filter] section");
      FilterSpec& f = cfg.filters.back();
      if (key == "variant") f.variant = value;
      else if (key == "label") f.label = value;
      else if (key == "sigma") f.sigma = to_double(where, value);
      else if (key == "alpha") f.alpha = to_double(where, value);
      else if (key == "beta") f.beta = to_double(where, value);
      else if (key == "mee_sigma") f.mee_sigma = to_double(where, value);
      else if (key == "lambda") f.lambda = to_double(where, value);
      else if (key == "window_len") f.window_len = to_int(where, value);
      else if (key == "gamma") f.gamma = to_double(where, value);
      else if (key == "reg") f.reg = to_double(where, value);
      else if (key == "reg_mode") f.reg_mode = value;
      else if (key == "codebook_mode") f.codebook_mode = value;
      else throw std::invalid_argument(where + ": unknown key");
    } else if (section == "sweep") {
      if (key == "param") cfg.sweep->param = value;
      else if (key == "values") {
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ','))
          cfg.sweep->values.push_back(to_double(where, trim(tok)));
      } else {
        throw std::invalid_argument(where + ": unknown key");
      }
    } else {
      throw std::invalid_argument(origin + ": unknown section [" + section + "]");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  return parse_config(in, path);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace

void write_resolved_config(const ExperimentConfig& cfg, std::ostream& os) {
  os << "version = " << kVersion << "\n";
  if (cfg.from_file) os << "scenario = file\n";
  else os << "scenario = " << cfg.scenario << "\n";
  os << "mc_runs = " << cfg.mc_runs << "\n";
  os << "master_seed = " << cfg.master_seed << "\n";
  os << "steady_window = " << cfg.steady_window << "\n";
  os << "db_average = " << (cfg.db_average_linear ? "linear" : "db") << "\n";
  os << "\n[data]\n";
  if (cfg.from_file) {
    os << "path = " << cfg.path << "\n";
    os << "column = " << cfg.column << "\n";
  } else {
    os << "tau = " << fmt(cfg.data.tau) << "\n";
    os << "dt = " << fmt(cfg.data.dt) << "\n";
    os << "subsample = " << cfg.data.subsample << "\n";
    os << "s0 = " << fmt(cfg.data.s0) << "\n";
    os << "transient = " << cfg.data.transient << "\n";
  }
  os << "center = " << (cfg.center ? "true" : "false") << "\n";
  os << "center_noise = " << (cfg.center_noise ? "true" : "false") << "\n";
  os << "rayleigh_chi = " << fmt(cfg.rayleigh_chi) << "\n";
  os << "noise_scale = " << fmt(cfg.noise_scale) << "\n";
  os << "n_train = " << cfg.data.n_train << "\n";
  os << "n_test = " << cfg.data.n_test << "\n";
  os << "\n[embedding]\n";
  os << "dim = " << cfg.embedding.dim << "\n";
  os << "horizon = " << cfg.embedding.horizon << "\n";
  for (const FilterSpec& f : cfg.filters) {
    os << "\n[filter]\n";
    os << "variant = " << f.variant << "\n";
    os << "label = " << f.resolved_label() << "\n";
    os << "sigma = " << fmt(f.sigma) << "\n";
    os << "alpha = " << fmt(f.alpha) << "\n";
    os << "beta = " << fmt(f.beta) << "\n";
    os << "mee_sigma = " << fmt(f.mee_sigma) << "\n";
    os << "lambda = " << fmt(f.lambda) << "\n";
    os << "window_len = " << f.window_len << "\n";
    os << "gamma = " << fmt(f.gamma) << "\n";
    os << "reg = " << fmt(f.reg) << "\n";
    os << "reg_mode = " << f.reg_mode << "\n";
    os << "codebook_mode = " << f.codebook_mode << "\n";
  }
  if (cfg.sweep) {
    os << "\n[sweep]\n";
    os << "param = " << cfg.sweep->param << "\n";
    os << "values = ";
    for (std::size_t i = 0; i < cfg.sweep->values.size(); ++i)
      os << (i ? "," : "") << fmt(cfg.sweep->values[i]);
    os << "\n";
  }
}

namespace {

// Cached kernel evaluations between the fixed test set and the growing
// dictionary; the dictionary is the training-input stream, identical across
// filters with the same kernel bandwidth.
class TestCache {
 public:
  TestCache(const std::vector<std::vector<double>>& test_inputs, double sigma,
            std::size_t capacity)
      : n_test_(test_inputs.size()),
        dim_(test_inputs.empty() ? 0 : test_inputs[0].size()),
        cap_(capacity),
        coef_(kInvSqrt2Pi / sigma),
        neg_inv_2s2_(-0.5 / (sigma * sigma)),
        cols_(dim_ * n_test_),
        k_(n_test_ * capacity),
        col_scratch_(n_test_) {
    for (std::size_t i = 0; i < n_test_; ++i)
      for (std::size_t k = 0; k < dim_; ++k)
        cols_[k * n_test_ + i] = test_inputs[i][k];
  }

  void append_center(const double* u) {
    simd::sqdist_cols(cols_.data(), n_test_, dim_, n_test_, u,
                      col_scratch_.data());
    simd::exp_scale(col_scratch_.data(), col_scratch_.data(), n_test_,
                    neg_inv_2s2_, coef_);
    for (std::size_t i = 0; i < n_test_; ++i) k_[i * cap_ + n_] = col_scratch_[i];
    ++n_;
  }

  double mse(std::span<const double> a, std::span<const double> d_test) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < n_test_; ++i) {
      const double pred = simd::dot(k_.data() + i * cap_, a.data(), a.size());
      const double e = pred - d_test[i];
      acc += e * e;
    }
    return acc / static_cast<double>(n_test_);
  }

 private:
  std::size_t n_test_, dim_, cap_;
  double coef_, neg_inv_2s2_;
  std::vector<double> cols_;
  std::vector<double> k_;
  std::size_t n_ = 0;
  std::vector<double> col_scratch_;
};

struct RunStats {
  std::vector<double> mse;  // per-iteration test MSE (linear)
  double wall_s = 0.0;
  double crit_s = 0.0;
  double h_mean = 0.0;
  OpCounters counters;
  std::int64_t singular = 0;
};

struct RunResult {
  std::vector<RunStats> per_filter;
};

RunResult run_one(const ExperimentConfig& cfg,
                  const std::vector<std::vector<double>>& train_u,
                  std::span<const double> train_d_clean,
                  const std::vector<std::vector<double>>& test_u,
                  std::span<const double> test_d, int run_index) {
  const std::size_t n_train = train_u.size();
  std::vector<double> train_d(train_d_clean.begin(), train_d_clean.end());
  if (!cfg.from_file && cfg.scenario >= 1) {
    Rng rng = Rng::stream(
        cfg.master_seed,
        static_cast<std::uint64_t>(run_index + cfg.run_index_offset) + 1);
    NoiseModel noise = scenario_noise(cfg.scenario);
    if (auto* r = std::get_if<RayleighNoise>(&noise)) {
      r->centered = cfg.center_noise;
      r->chi = cfg.rayleigh_chi;
    }
    if (auto* mx = std::get_if<MixtureNoise>(&noise)) {
      mx->rayleigh.centered = cfg.center_noise;
      mx->rayleigh.chi = cfg.rayleigh_chi;
    }
    for (double& d : train_d) d += cfg.noise_scale * sample_noise(noise, rng);
  }

  RunResult rr;
  rr.per_filter.resize(cfg.filters.size());

  // test-kernel caches shared between filters with equal bandwidth
  std::map<double, TestCache> caches;
  for (const FilterSpec& f : cfg.filters)
    caches.try_emplace(f.sigma, test_u, f.sigma, n_train);

  for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
    const FilterConfig fc = cfg.filters[fi].build();
    RunStats& st = rr.per_filter[fi];
    st.mse.reserve(n_train);

    // The dictionary is the training-input stream for every filter, so the
    // first filter with a given bandwidth fills the shared cache and later
    // ones reuse it.
    TestCache* tc = &caches.at(cfg.filters[fi].sigma);
    const bool first_user = std::none_of(
        cfg.filters.begin(), cfg.filters.begin() + static_cast<std::ptrdiff_t>(fi),
        [&](const FilterSpec& g) { return g.sigma == cfg.filters[fi].sigma; });

    const auto t0 = std::chrono::steady_clock::now();
    KernelFilter filter(train_u[0], train_d[0], fc);
    if (first_user) tc->append_center(train_u[0].data());
    st.mse.push_back(tc->mse(filter.coeffs(), test_d));
    for (std::size_t i = 1; i < n_train; ++i) {
      filter.update(train_u[i], train_d[i]);
      if (first_user) tc->append_center(train_u[i].data());
      st.mse.push_back(tc->mse(filter.coeffs(), test_d));
    }
    const auto t1 = std::chrono::steady_clock::now();
    st.wall_s = std::chrono::duration<double>(t1 - t0).count();
    st.crit_s = filter.criterion_seconds();
    st.h_mean = filter.h_mean();
    st.counters = filter.counters();
    st.singular = filter.singular_events();
  }
  return rr;
}

double steady_db_of(const std::vector<double>& mse_db, int window) {
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(window),
                                              mse_db.size());
  double s = 0.0;
  for (std::size_t i = mse_db.size() - w; i < mse_db.size(); ++i) s += mse_db[i];
  return s / static_cast<double>(w);
}

std::vector<double> to_db(const std::vector<double>& mse) {
  std::vector<double> db(mse.size());
  for (std::size_t i = 0; i < mse.size(); ++i)
    db[i] = 10.0 * std::log10(std::max(mse[i], 1e-300));
  return db;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();

  // data: deterministic series, embedded once; shared read-only across runs
  std::vector<double> series;
  if (cfg.from_file) {
    series = load_series(cfg.path, cfg.column);
  } else {
    MGConfig mg = cfg.data;
    mg.extra = cfg.embedding.dim + cfg.embedding.horizon - 1;
    series = mackey_glass(mg);
  }
  if (cfg.center) {
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    for (double& v : series) v -= mean;
  }
  const Dataset ds = embed(series, cfg.embedding);
  const std::size_t n_train = static_cast<std::size_t>(cfg.data.n_train);
  const std::size_t n_test = static_cast<std::size_t>(cfg.data.n_test);
  if (ds.inputs.size() < n_train + n_test)
    throw std::invalid_argument(
        "data: series too short for n_train + n_test after embedding (" +
        std::to_string(ds.inputs.size()) + " pairs)");

  const std::vector<std::vector<double>> train_u(ds.inputs.begin(),
                                                 ds.inputs.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<double> train_d(ds.desired.begin(),
                                    ds.desired.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::vector<double>> test_u(
      ds.inputs.begin() + static_cast<std::ptrdiff_t>(n_train),
      ds.inputs.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  const std::vector<double> test_d(
      ds.desired.begin() + static_cast<std::ptrdiff_t>(n_train),
      ds.desired.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));

  if (threads <= 0)
    threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, cfg.mc_runs));

  std::vector<RunResult> results(static_cast<std::size_t>(cfg.mc_runs));
  std::vector<std::future<void>> futures;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    futures.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        const int r = next.fetch_add(1);
        if (r >= cfg.mc_runs) return;
        results[static_cast<std::size_t>(r)] =
            run_one(cfg, train_u, train_d, test_u, test_d, r);
      }
    }));
  }
  for (auto& f : futures) f.get();

  // deterministic reduction in run order
  ExperimentResult out;
  out.n_train = cfg.data.n_train;
  out.n_test = cfg.data.n_test;
  out.series.resize(cfg.filters.size());
  for (std::size_t fi = 0; fi < cfg.filters.size(); ++fi) {
    MetricSeries& ms = out.series[fi];
    ms.filter_label = cfg.filters[fi].resolved_label();
    ms.mse_linear.assign(n_train, 0.0);
    std::vector<double> db_accum(n_train, 0.0);
    for (int r = 0; r < cfg.mc_runs; ++r) {
      const RunStats& st = results[static_cast<std::size_t>(r)].per_filter[fi];
      for (std::size_t i = 0; i < n_train; ++i) ms.mse_linear[i] += st.mse[i];
      if (!cfg.db_average_linear) {
        const std::vector<double> db = to_db(st.mse);
        for (std::size_t i = 0; i < n_train; ++i) db_accum[i] += db[i];
      }
      ms.per_run_steady_db.push_back(steady_db_of(to_db(st.mse), cfg.steady_window));
      ms.wall_per_iter += st.wall_s;
      ms.criterion_per_iter += st.crit_s;
      ms.h_mean += st.h_mean;
      ms.counters.mults += st.counters.mults;
      ms.counters.adds += st.counters.adds;
      ms.counters.exps += st.counters.exps;
      ms.singular_events += st.singular;
    }
    const double runs = static_cast<double>(cfg.mc_runs);
    for (double& v : ms.mse_linear) v /= runs;
    if (cfg.db_average_linear) {
      ms.mse_db = to_db(ms.mse_linear);
    } else {
      ms.mse_db.resize(n_train);
      for (std::size_t i = 0; i < n_train; ++i) ms.mse_db[i] = db_accum[i] / runs;
    }
    ms.steady_state_db = steady_db_of(ms.mse_db, cfg.steady_window);
    ms.wall_per_iter /= runs * static_cast<double>(n_train);
    ms.criterion_per_iter /= runs * static_cast<double>(n_train);
    ms.h_mean /= runs;
    ms.counters.mults = static_cast<std::int64_t>(
        static_cast<double>(ms.counters.mults) / runs);
    ms.counters.adds = static_cast<std::int64_t>(
        static_cast<double>(ms.counters.adds) / runs);
    ms.counters.exps = static_cast<std::int64_t>(
        static_cast<double>(ms.counters.exps) / runs);
  }
  return out;
}

void apply_sweep_value(ExperimentConfig& cfg, const std::string& param,
                       double value) {
  for (FilterSpec& f : cfg.filters) {
    if (param == "L") f.window_len = static_cast<int>(std::llround(value));
    else if (param == "gamma") f.gamma = value;
    else if (param == "alpha") f.alpha = value;
    else if (param == "beta") f.beta = value;
    else throw std::invalid_argument("sweep.param: unknown parameter " + param);
  }
}

SweepResult run_sweep(const ExperimentConfig& cfg, int threads) {
  if (!cfg.sweep) throw std::invalid_argument("run_sweep: no [sweep] section");
  SweepResult out;
  out.param = cfg.sweep->param;
  for (double v : cfg.sweep->values) {
    ExperimentConfig patched = cfg;
    apply_sweep_value(patched, cfg.sweep->param, v);
    const ExperimentResult res = run_experiment(patched, threads);
    for (const MetricSeries& ms : res.series)
      out.rows.push_back({v, ms.filter_label, ms.steady_state_db,
                          ms.wall_per_iter, ms.h_mean});
  }
  return out;
}

void emit_results(const ExperimentConfig& cfg, const ExperimentResult& res,
                  const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const MetricSeries& ms : res.series) {
    const std::string path = out_dir + "/curve_" + ms.filter_label + ".csv";
    std::ofstream f(path);
    if (!f) throw std::runtime_error("emit_results: cannot write " + path);
    f << "iteration,mse_db\n";
    for (std::size_t i = 0; i < ms.mse_db.size(); ++i)
      f << i + 1 << "," << fmt(ms.mse_db[i]) << "\n";
  }
  const std::string mpath = out_dir + "/manifest.txt";
  std::ofstream mf(mpath);
  if (!mf) throw std::runtime_error("emit_results: cannot write " + mpath);
  write_resolved_config(cfg, mf);
  mf << "\n[summary]\n";
  for (const MetricSeries& ms : res.series)
    mf << "steady_state_db_" << ms.filter_label << " = "
       << fmt(ms.steady_state_db) << "\n";
}

void emit_sweep(const ExperimentConfig& cfg, const SweepResult& res,
                const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const std::string path = out_dir + "/sweep_" + res.param + ".csv";
  std::ofstream f(path);
  if (!f) throw std::runtime_error("emit_sweep: cannot write " + path);
  f << "param,value,filter,steady_state_db,wall_per_iter,h_mean\n";
  for (const SweepRow& r : res.rows)
    f << res.param << "," << fmt(r.value) << "," << r.filter_label << ","
      << fmt(r.steady_state_db) << "," << fmt(r.wall_per_iter) << ","
      << fmt(r.h_mean) << "\n";
  const std::string mpath = out_dir + "/manifest.txt";
  std::ofstream mf(mpath);
  write_resolved_config(cfg, mf);
}

} // namespace kaf
