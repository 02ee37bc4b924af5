// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "osi/osi.hpp"

using namespace osi;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (pass) detail << " | first failure: " << why;
    pass = false;
  }
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto t0 = Clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double secs = seconds_since(t0);
  if (!out.pass) ++failures;
  std::printf("%s criterion %d: %s [%.1fs]%s\n", out.pass ? "PASS" : "FAIL", id, title.c_str(), secs,
              out.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double gamma_gini(double a) { return std::exp(std::lgamma(a + 0.5) - std::lgamma(a + 1)) / std::sqrt(std::numbers::pi); }

const std::vector<int> table_n = {10, 20, 30, 50};

} // namespace

int main() {
  criterion(1, "fast estimator equals full enumeration", [](Outcome& o) {
    const auto t0 = Clock::now();
    const auto d = Distribution::gamma(2, 1);
    const std::vector<WeightScheme> ws = {gini(), mth_gini(3), extended_mth_gini(5, 2, 4), s_gini_orderstat(5, 3),
                                          s_gini_table1(4, 2.5)};
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      Rng rng = make_rng(0xACC1, {static_cast<std::uint64_t>(i)});
      const std::size_t n = 5 + static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 7)(rng));
      const Sample s(sample(d, n, rng));
      for (const auto& w : ws) worst = std::max(worst, std::abs(estimate_fast(s, w).value - estimate_enumerate(s, w).value));
    }
    const double secs = seconds_since(t0);
    o.detail << " max gap " << fmt(worst) << " in " << fmt(secs) << "s";
    if (worst > 1e-10) o.fail("gap above 1e-10");
    if (secs >= 10) o.fail("runtime over 10 s");
  });

  criterion(2, "closed-form Gini values through the quantile integral", [](Outcome& o) {
    struct Case {
      Distribution d;
      double want;
    };
    const std::vector<Case> cases = {{Distribution::exponential(1), 0.5},
                                     {Distribution::uniform(0, 1), 1.0 / 3},
                                     {Distribution::gamma(2, 1), gamma_gini(2)},
                                     {Distribution::gamma(5, 1), gamma_gini(5)}};
    double worst = 0;
    for (const auto& c : cases) {
      const double q = index_via_quantile_integral(c.d, gini()).value;
      const double os = index_via_order_stat_means(c.d, gini(), has_closed_order_stats(c.d) ? OrderStatMethod::closed
                                                                                            : OrderStatMethod::quadrature)
                            .value;
      const double gap = std::max(std::abs(q - c.want), std::abs(os - c.want));
      worst = std::max(worst, gap);
      if (gap > 1e-6) o.fail(c.d.spec() + " off by " + fmt(gap));
    }
    if (std::abs(gamma_gini(2) - 0.375) > 1e-15) o.fail("gamma(2) oracle");
    o.detail << " max deviation " << fmt(worst);
  });

  criterion(3, "population representations agree", [](Outcome& o) {
    struct Pair {
      Distribution d;
      WeightScheme w;
    };
    const std::vector<Pair> pairs = {
        {Distribution::gamma(2, 1), gini()},
        {Distribution::gamma(5, 1), mth_gini(3)},
        {Distribution::lognormal(0, 1), gini()},
        {Distribution::lognormal(0, 1), s_gini_orderstat(4, 2)},
        {Distribution::weibull(1.6, 1), mth_gini(4)},
        {Distribution::weibull(1.6, 1), extended_mth_gini(5, 2, 4)},
        {Distribution::lomax(3, 1), mth_gini(3)},
        {Distribution::lomax(3, 1), s_gini_table1(3, 2.0)},
        {Distribution::exponential(1), extended_lower_upper(3, 1, GiniSide::upper)},
        {Distribution::exponential(2), s_gini_orderstat(5, 3)},
        {Distribution::uniform(0, 1), extended_lower_upper(4, 2, GiniSide::lower)},
        {Distribution::uniform(1, 3), custom({-0.5, -0.25, 0.25, 0.5}, true)},
    };
    double worst_det = 0, worst_z = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [d, w] = pairs[i];
      const auto os = has_closed_order_stats(d) ? OrderStatMethod::closed : OrderStatMethod::quadrature;
      const std::vector<double> v = {index_via_order_stat_means(d, w, os).value,
                                     index_via_quantile_integral(d, w).value,
                                     index_via_max_representation(d, w, os).value, index_via_lorenz(d, w).value};
      for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = a + 1; b < v.size(); ++b) {
          const double gap = std::abs(v[a] - v[b]);
          worst_det = std::max(worst_det, gap);
          if (gap > 1e-6) o.fail(d.spec() + " " + w.name() + " deterministic gap " + fmt(gap));
        }
      const auto cv = index_via_covariance_mc(d, w, 1000000, derive_seed(0xACC3, {i}));
      const double z = std::abs(cv.value - v[1]) / cv.uncertainty;
      worst_z = std::max(worst_z, z);
      if (!(z <= 3)) o.fail(d.spec() + " " + w.name() + " covariance z=" + fmt(z));
    }
    o.detail << " 12 pairs, max deterministic gap " << fmt(worst_det) << ", max covariance |z| " << fmt(worst_z);
  });

  criterion(4, "gamma populations: estimator unbiased and Delta terms vanish", [](Outcome& o) {
    const auto t0 = Clock::now();
    double worst_z = 0;
    std::uint64_t cell = 0;
    for (double alpha : {2.0, 5.0})
      for (const auto& w : {gini(), mth_gini(3)})
        for (int n : {10, 20}) {
          const auto d = Distribution::gamma(alpha, 1);
          const auto b = empirical_bias(d, w, n, 20000, derive_seed(0xACC4, {cell++}));
          const double z = std::abs(b.bias) / b.se;
          worst_z = std::max(worst_z, z);
          if (!(z <= 3)) o.fail(d.spec() + " " + w.name() + " n=" + std::to_string(n) + " z=" + fmt(z));
        }
    double worst_delta = 0;
    for (double alpha : {2.0, 5.0})
      for (int n = 1; n <= 8; ++n)
        for (int r = 1; r <= n; ++r) {
          const double v = std::abs(delta_laplace(Distribution::gamma(alpha, 1), n, r).value);
          worst_delta = std::max(worst_delta, v);
          if (v > 1e-6) o.fail("delta gamma(" + fmt(alpha) + ") n=" + std::to_string(n) + " r=" + std::to_string(r));
        }
    const double secs = seconds_since(t0);
    o.detail << " max bias |z| " << fmt(worst_z) << ", max |Delta| " << fmt(worst_delta);
    if (secs >= 120) o.fail("runtime over 2 min");
  });

  criterion(5, "non-gamma bias: negative for lognormal and lomax, weibull smaller than lomax", [](Outcome& o) {
    const auto w = mth_gini(3);
    const auto ln = Distribution::lognormal(0, 1), lx = Distribution::lomax(3, 1), wb = Distribution::weibull(1.6, 1);
    for (const auto& d : {ln, lx}) {
      const auto b = empirical_bias(d, w, 10, 20000, derive_seed(0xACC5, {static_cast<std::uint64_t>(d.family())}));
      o.detail << " " << d.spec() << " n=10 bias " << fmt(b.bias) << " (se " << fmt(b.se) << ");";
      if (!(b.bias < -3 * b.se)) o.fail(d.spec() + " bias not below -3 SE");
    }
    for (std::size_t i = 0; i < table_n.size(); ++i) {
      const int n = table_n[i];
      const auto bw = empirical_bias(wb, w, n, 20000, derive_seed(0xACC5, {10, i}));
      const auto bl = empirical_bias(lx, w, n, 20000, derive_seed(0xACC5, {20, i}));
      if (!(std::abs(bw.bias) < std::abs(bl.bias)))
        o.fail("n=" + std::to_string(n) + " |weibull| " + fmt(bw.bias) + " >= |lomax| " + fmt(bl.bias));
    }
    o.detail << " weibull below lomax at n=10,20,30,50";
  });

  criterion(6, "bias shrinks with n for lognormal", [](Outcome& o) {
    const auto rep = consistency_check(Distribution::lognormal(0, 1), mth_gini(3), {10, 200}, 20000, 0xACC6);
    const auto& a = rep.rows.front();
    const auto& b = rep.rows.back();
    o.detail << " n=10 bias " << fmt(a.bias) << " (se " << fmt(a.se) << "), n=200 bias " << fmt(b.bias) << " (se "
             << fmt(b.se) << ")";
    if (!rep.strictly_decreasing) o.fail("|bias(200)| not below |bias(10)| - 3 combined SE");
  });

  criterion(7, "expectation identity via maxima on shared draws", [](Outcome& o) {
    struct Config {
      Distribution d;
      WeightScheme w;
      int n;
    };
    const std::vector<Config> cs = {{Distribution::lognormal(0, 1), mth_gini(3), 10},
                                    {Distribution::lomax(3, 1), s_gini_orderstat(4, 2), 8},
                                    {Distribution::weibull(1.6, 1), extended_mth_gini(5, 2, 4), 15}};
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const auto t = theorem_identity_check(cs[i].d, cs[i].w, cs[i].n, 200000, derive_seed(0xACC7, {i}));
      // paired SE: both sides come from the same replications
      o.detail << " " << cs[i].d.spec() << " diff " << fmt(t.diff) << " (paired se " << fmt(t.diff_se) << ");";
      if (!t.agree) o.fail(cs[i].d.spec() + " sides disagree");
    }
  });

  criterion(8, "Delta by Laplace transform matches simulation", [](Outcome& o) {
    double worst_time = 0, worst_ratio = 0;
    for (const auto& d : {Distribution::lognormal(0, 1), Distribution::weibull(1.6, 1), Distribution::lomax(3, 1)}) {
      const auto mc = delta_mc_all(d, 10, 3, 1000000, derive_seed(0xACC8, {static_cast<std::uint64_t>(d.family())}));
      for (int r = 1; r <= 3; ++r) {
        const auto t0 = Clock::now();
        const auto lp = delta_laplace(d, 10, r);
        const double secs = seconds_since(t0);
        worst_time = std::max(worst_time, secs);
        const double tol = std::max(3 * mc[r - 1].uncertainty, 1e-3);
        const double gap = std::abs(lp.value - mc[r - 1].value);
        worst_ratio = std::max(worst_ratio, gap / tol);
        if (gap > tol) o.fail(d.spec() + " r=" + std::to_string(r) + " gap " + fmt(gap) + " > " + fmt(tol));
        if (secs >= 30) o.fail(d.spec() + " r=" + std::to_string(r) + " took " + fmt(secs) + "s");
      }
    }
    o.detail << " max gap/tolerance " << fmt(worst_ratio) << ", slowest evaluation " << fmt(worst_time) << "s";
  });

  criterion(9, "simulation tables reproducible, RMSE decomposes and declines with n", [](Outcome& o) {
    ExperimentConfig cfg;
    cfg.distributions = {Distribution::gamma(2, 1), Distribution::gamma(5, 1), Distribution::lognormal(0, 1),
                         Distribution::weibull(1.6, 1), Distribution::lomax(3, 1)};
    cfg.n_values = table_n;
    cfg.scheme = mth_gini(3);
    cfg.r_mc = 2000;
    cfg.master_seed = 0xACC9;
    for (auto method : {EstimatorMethod::fast, EstimatorMethod::subsample}) {
      cfg.estimator_method = method;
      cfg.benchmark = method == EstimatorMethod::fast ? Benchmark::quadrature : Benchmark::mc;
      const auto t1 = run_experiment(cfg);
      const auto t2 = run_experiment(cfg);
      const std::string label = estimator_method_name(method);
      if (render_table(t1, TableFormat::csv, true) != render_table(t2, TableFormat::csv, true))
        o.fail(label + ": CSV differs between identical runs");
      for (std::size_t i = 0; i < t1.rows.size(); ++i) {
        const auto& r = t1.rows[i];
        if (r.rmse * r.rmse < r.bias * r.bias - 1e-12) o.fail(label + ": RMSE^2 < bias^2");
        if (i % table_n.size() != 0 && !(r.rmse < t1.rows[i - 1].rmse))
          o.fail(label + ": RMSE not decreasing for " + r.distribution.spec() + " at n=" + std::to_string(r.n));
      }
    }
    o.detail << " fast and subsample protocols, 5 populations x n=10,20,30,50";
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
