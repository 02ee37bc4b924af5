// Command-line front end. Exit codes: 0 success, 1 usage or input error,
// 2 numeric failure (non-convergence, failed self-test).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "osi/osi.hpp"

namespace {

using namespace osi;

bool full_precision = false;

std::string num(double x) {
  if (full_precision) return format_shortest(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string with_bound(double value, double bound) { return num(value) + " ± " + num(bound); }

struct IndexArgs {
  std::string dist, weights, method = "quantile";
  std::size_t reps = 1000000;
  std::uint64_t seed = 1;
};

int run_index(const IndexArgs& a) {
  const auto d = parse_distribution(a.dist);
  const auto w = parse_weights(a.weights);
  const auto os = has_closed_order_stats(d) ? OrderStatMethod::closed : OrderStatMethod::quadrature;
  IndexValue v = [&] {
    if (a.method == "quantile") return index_via_quantile_integral(d, w);
    if (a.method == "orderstat") return index_via_order_stat_means(d, w, os);
    if (a.method == "maxrep") return index_via_max_representation(d, w, os);
    if (a.method == "covariance") return index_via_covariance_mc(d, w, a.reps, a.seed);
    return index_via_lorenz(d, w);
  }();
  std::cout << with_bound(v.value, v.uncertainty) << '\n';
  return 0;
}

struct EstimateArgs {
  std::string data, column, weights, method = "fast";
  std::size_t B = 8000;
  std::uint64_t seed = 1;
};

int run_estimate(const EstimateArgs& a) {
  std::ifstream in(a.data);
  if (!in) throw validation_error("cannot open data file '" + a.data + "'");
  const Sample s(read_csv_column(in, a.column));
  const auto w = parse_weights(a.weights);
  EstimateValue e = [&] {
    switch (parse_estimator_method(a.method)) {
      case EstimatorMethod::enumerate: return estimate_enumerate(s, w);
      case EstimatorMethod::subsample: return estimate_subsample(s, w, a.B, a.seed);
      case EstimatorMethod::fast: break;
    }
    return estimate_fast(s, w);
  }();
  std::cout << num(e.value) << '\n';
  return 0;
}

struct DeltaArgs {
  std::string dist, method = "laplace";
  int n = 0, r = 0;
  std::size_t reps = 1000000;
  std::uint64_t seed = 1;
};

int run_delta(const DeltaArgs& a) {
  const auto d = parse_distribution(a.dist);
  const auto res = a.method == "mc" ? delta_mc(d, a.n, a.r, a.reps, a.seed) : delta_laplace(d, a.n, a.r);
  std::cout << with_bound(res.value, res.uncertainty) << '\n';
  return 0;
}

struct BiasArgs {
  std::string dist, weights, method = "laplace";
  int n = 0;
  std::size_t reps = 1000000;
  std::uint64_t seed = 1;
};

int run_bias(const BiasArgs& a) {
  const auto d = parse_distribution(a.dist);
  const auto w = parse_weights(a.weights);
  if (a.n < w.m()) throw domain_error("bias: n must be at least the scheme order m");
  std::vector<DeltaResult> deltas;
  if (a.method == "mc") {
    deltas = delta_mc_all(d, a.n, w.m(), a.reps, a.seed);
  } else {
    for (int r = 1; r <= w.m(); ++r) deltas.push_back(delta_laplace(d, a.n, r));
  }
  const auto b = bias_from_deltas(w, deltas);
  std::cout << with_bound(b.value, b.uncertainty) << '\n';
  return 0;
}

struct SimulateArgs {
  std::string config, out;
  bool markdown = false;
};

int run_simulate(const SimulateArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw validation_error("cannot open config file '" + a.config + "'");
  const auto cfg = parse_config(in);
  const auto text =
      render_table(run_experiment(cfg), a.markdown ? TableFormat::markdown : TableFormat::csv, full_precision);
  if (a.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw validation_error("cannot write '" + a.out + "'");
    out << text;
  }
  return 0;
}

int run_selftest() {
  int failures = 0;
  auto check = [&](const std::string& label, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    std::cout << (ok ? "PASS " : "FAIL ") << label << ": " << num(got) << " (expected " << num(want) << ")\n";
    if (!ok) ++failures;
  };
  const auto g = gini();
  check("gini exponential(1)", index_via_quantile_integral(Distribution::exponential(1), g).value, 0.5, 1e-6);
  check("gini uniform(0,1)", index_via_quantile_integral(Distribution::uniform(0, 1), g).value, 1.0 / 3.0, 1e-6);
  for (double alpha : {2.0, 5.0}) {
    const double want = std::exp(std::lgamma(alpha + 0.5) - std::lgamma(alpha + 1.0)) / std::sqrt(std::numbers::pi);
    check("gini gamma(" + format_shortest(alpha) + ",1)",
          index_via_quantile_integral(Distribution::gamma(alpha, 1), g).value, want, 1e-6);
  }
  const auto gamma21 = Distribution::gamma(2, 1);
  const std::vector<WeightScheme> schemes = {gini(), mth_gini(3), extended_mth_gini(4, 2, 4), s_gini_orderstat(5, 3),
                                             extended_lower_upper(3, 1, GiniSide::upper)};
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = make_rng(0x5E1F, {static_cast<std::uint64_t>(rep)});
    const std::size_t n = 5 + static_cast<std::size_t>(rep % 8);
    const Sample s(sample(gamma21, n, rng));
    for (const auto& w : schemes)
      worst = std::max(worst, std::abs(estimate_fast(s, w).value - estimate_enumerate(s, w).value));
  }
  check("fast vs enumerate max gap", worst, 0.0, 1e-10);
  return failures == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear order-statistic inequality indices: population values, estimates and bias"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  int threads = 0;
  app.add_flag("--full-precision", full_precision, "Print shortest round-trip numbers instead of 6 digits");
  app.add_option("--threads", threads, "Worker threads (default: OSI_THREADS or hardware concurrency)")
      ->check(CLI::PositiveNumber);

  IndexArgs ia;
  auto* index = app.add_subcommand("index", "Population index of a distribution");
  index->add_option("--dist", ia.dist, "Distribution, e.g. gamma:2,1")->required();
  index->add_option("--weights", ia.weights, "Weight scheme, e.g. gini, mth:3")->required();
  index->add_option("--method", ia.method, "Evaluation route")
      ->check(CLI::IsMember({"quantile", "orderstat", "maxrep", "covariance", "lorenz"}))
      ->capture_default_str();
  index->add_option("--reps", ia.reps, "Draws for the covariance route")->capture_default_str();
  index->add_option("--seed", ia.seed, "Seed for the covariance route")->capture_default_str();

  EstimateArgs ea;
  auto* estimate = app.add_subcommand("estimate", "Sample estimate from a CSV column");
  estimate->add_option("--data", ea.data, "CSV file with a header row")->required();
  estimate->add_option("--column", ea.column, "Column name")->required();
  estimate->add_option("--weights", ea.weights, "Weight scheme")->required();
  estimate->add_option("--method", ea.method, "Estimator route")
      ->check(CLI::IsMember({"fast", "enumerate", "subsample"}))
      ->capture_default_str();
  estimate->add_option("--B", ea.B, "Subsets drawn by the subsample route")->capture_default_str();
  estimate->add_option("--seed", ea.seed, "Seed for the subsample route")->capture_default_str();

  DeltaArgs da;
  auto* delta = app.add_subcommand("delta", "Rank-level bias term Delta_{n,r}");
  delta->add_option("--dist", da.dist, "Distribution")->required();
  delta->add_option("--n", da.n, "Sample size")->required();
  delta->add_option("--r", da.r, "Rank, 1 <= r <= n")->required();
  delta->add_option("--method", da.method, "mc or laplace")
      ->check(CLI::IsMember({"mc", "laplace"}))
      ->capture_default_str();
  delta->add_option("--reps", da.reps, "Replications for mc")->capture_default_str();
  delta->add_option("--seed", da.seed, "Seed for mc")->capture_default_str();

  BiasArgs ba;
  auto* bias = app.add_subcommand("bias", "Estimator bias assembled from Delta terms");
  bias->add_option("--dist", ba.dist, "Distribution")->required();
  bias->add_option("--weights", ba.weights, "Weight scheme")->required();
  bias->add_option("--n", ba.n, "Sample size")->required();
  bias->add_option("--method", ba.method, "laplace or mc")
      ->check(CLI::IsMember({"mc", "laplace"}))
      ->capture_default_str();
  bias->add_option("--reps", ba.reps, "Replications for mc")->capture_default_str();
  bias->add_option("--seed", ba.seed, "Seed for mc")->capture_default_str();

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation campaign from a config file");
  simulate->add_option("--config", sa.config, "Flat key = value config file")->required();
  simulate->add_option("--out", sa.out, "Output file (default: stdout)");
  simulate->add_flag("--markdown", sa.markdown, "Markdown table instead of CSV");

  auto* selftest = app.add_subcommand("selftest", "Closed-form oracles and estimator equivalence checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (threads > 0) set_thread_count(static_cast<unsigned>(threads));

  try {
    if (*index) return run_index(ia);
    if (*estimate) return run_estimate(ea);
    if (*delta) return run_delta(da);
    if (*bias) return run_bias(ba);
    if (*simulate) return run_simulate(sa);
    if (*selftest) return run_selftest();
  } catch (const numeric_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
