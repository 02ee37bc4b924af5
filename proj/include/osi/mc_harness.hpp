#ifndef OSI_MC_HARNESS_HPP
#define OSI_MC_HARNESS_HPP

// Simulation campaign: for every (distribution, n) cell, draw r_mc samples,
// evaluate the estimator on each and report mean, bias, RMSE and the SE of
// the bias against a population benchmark.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "bias_lab.hpp"
#include "distributions.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "random.hpp"
#include "weights.hpp"

namespace osi {

enum class Benchmark { quadrature, mc };

inline const char* benchmark_name(Benchmark b) { return b == Benchmark::quadrature ? "quadrature" : "mc"; }

struct ExperimentConfig {
  std::vector<Distribution> distributions;
  std::vector<int> n_values;
  WeightScheme scheme = mth_gini(3);
  std::size_t r_mc = 2000;
  std::size_t b_combs = 8000;
  std::size_t r_true = 250000;
  EstimatorMethod estimator_method = EstimatorMethod::fast;
  Benchmark benchmark = Benchmark::quadrature;
  std::uint64_t master_seed = 20240101;
};

struct ExperimentRow {
  Distribution distribution;
  int n = 0;
  double i_true = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double se_bias = 0.0;
  double benchmark_se = 0.0;  ///< 0 for the quadrature benchmark
};

struct ExperimentTable {
  std::vector<ExperimentRow> rows;
  Benchmark benchmark = Benchmark::quadrature;
  std::string scheme_name;
};

inline void validate(const ExperimentConfig& cfg) {
  if (cfg.distributions.empty()) throw validation_error("experiment: no distributions");
  if (cfg.n_values.empty()) throw validation_error("experiment: no sample sizes");
  if (cfg.r_mc < 1 || cfg.b_combs < 1 || cfg.r_true < 1)
    throw validation_error("experiment: r_mc, b_combs and r_true must be >= 1");
  if (cfg.estimator_method == EstimatorMethod::enumerate)
    throw validation_error("experiment: estimator_method must be fast or subsample");
  for (int n : cfg.n_values)
    if (n < cfg.scheme.m()) {
      std::ostringstream msg;
      msg << "experiment: n=" << n << " is below the scheme order m=" << cfg.scheme.m();
      throw validation_error(msg.str());
    }
  for (const auto& d : cfg.distributions)
    if (!d.continuous()) throw validation_error("experiment: degenerate populations are not simulated");
  if (cfg.benchmark == Benchmark::mc && cfg.r_true < static_cast<std::size_t>(10 * cfg.scheme.m()))
    throw validation_error("experiment: r_true too small for the mc benchmark");
}

/// Population benchmark: the estimator on one sample of r_true draws, with
/// an SE from ten equal sub-samples.
inline Estimate mc_benchmark(const Distribution& d, const WeightScheme& w, std::size_t r_true, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0xBE});
  std::vector<double> xs = sample(d, r_true, rng);
  const double value = FastEstimator(r_true, w).from_unsorted(xs);
  constexpr std::size_t parts = 10;
  std::vector<double> est;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t lo = r_true * p / parts, hi = r_true * (p + 1) / parts;
    if (hi - lo < static_cast<std::size_t>(w.m())) continue;
    std::vector<double> part(xs.begin() + static_cast<std::ptrdiff_t>(lo), xs.begin() + static_cast<std::ptrdiff_t>(hi));
    est.push_back(FastEstimator(part.size(), w).from_unsorted(part));
  }
  double m = 0.0, ss = 0.0;
  for (double e : est) m += e;
  m /= static_cast<double>(est.size());
  for (double e : est) ss += (e - m) * (e - m);
  const double k = static_cast<double>(est.size());
  // spread of the sub-sample estimates over sqrt(k)
  return {value, std::sqrt(ss / (k - 1.0)) / std::sqrt(k)};
}

inline ExperimentTable run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentTable table{{}, cfg.benchmark, cfg.scheme.name()};
  const EstimatorOptions opt{cfg.estimator_method, cfg.b_combs};
  for (std::size_t di = 0; di < cfg.distributions.size(); ++di) {
    const auto& d = cfg.distributions[di];
    Estimate truth{0.0, 0.0};
    if (cfg.benchmark == Benchmark::quadrature)
      truth = {reference_index(d, cfg.scheme).value, 0.0};
    else
      truth = mc_benchmark(d, cfg.scheme, cfg.r_true, derive_seed(cfg.master_seed, {0xBE, di}));
    for (std::size_t ni = 0; ni < cfg.n_values.size(); ++ni) {
      const std::uint64_t cell = di * cfg.n_values.size() + ni;
      const auto values = detail::simulate_estimates(d, cfg.scheme, cfg.n_values[ni], cfg.r_mc,
                                                     derive_seed(cfg.master_seed, {cell}), 0xCE, opt);
      const auto s = detail::summarize(values, truth.value);
      table.rows.push_back({d, cfg.n_values[ni], truth.value, s.mean, s.bias, s.rmse, s.se, truth.uncertainty});
    }
  }
  return table;
}

enum class TableFormat { csv, markdown };

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string fixed4(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

} // namespace detail

/// Renders rows in a fixed column order. Numbers carry 4 decimals unless
/// full_precision is set, in which case the shortest round-trip form is used.
inline std::string render_table(const ExperimentTable& t, TableFormat format, bool full_precision = false) {
  if (t.rows.empty()) throw validation_error("render_table: empty table");
  auto num = [&](double x) { return full_precision ? format_shortest(x) : detail::fixed4(x); };
  std::ostringstream out;
  if (format == TableFormat::csv) {
    out << "distribution,n,i_true,mean,bias,rmse,se_bias\n";
    for (const auto& r : t.rows)
      out << detail::csv_field(r.distribution.display_name()) << ',' << r.n << ',' << num(r.i_true) << ','
          << num(r.mean) << ',' << num(r.bias) << ',' << num(r.rmse) << ',' << num(r.se_bias) << '\n';
  } else {
    out << "| Distribution | n | I_true | Mean | Bias | RMSE | SE |\n";
    out << "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : t.rows)
      out << "| " << r.distribution.display_name() << " | " << r.n << " | " << num(r.i_true) << " | " << num(r.mean)
          << " | " << num(r.bias) << " | " << num(r.rmse) << " | " << num(r.se_bias) << " |\n";
  }
  return out.str();
}

} // namespace osi

#endif // OSI_MC_HARNESS_HPP
