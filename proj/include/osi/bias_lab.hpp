#ifndef OSI_BIAS_LAB_HPP
#define OSI_BIAS_LAB_HPP

// Finite-sample bias of the sample estimator.
//
// The bias is a fixed linear combination of the rank-level atoms
//
//   Delta_{n,r} = E[X_{r:r} / Xbar] - E[X_{r:r}] / mu,     1 <= r <= n,
//
// with the same inclusion-exclusion coefficients c_r as the maxima
// representation of the population index: Bias = (1/m) sum_r c_r Delta_{n,r}.
// Delta is computed either by simulation or through the Laplace-transform
// double integral
//
//   Delta_{n,r} = int_0^inf { n int_0^inf L^{n-r}(z) [L^r(z) - G_t(z)^r] dz
//                             - [1 - F^r(t)] / mu } dt,
//
// where G_t(z) = E[1{X <= t} e^{-zX}]. L^r - G^r is expanded as
// T * sum_i L^i G^{r-1-i} with T = E[1{X > t} e^{-zX}] evaluated directly, so
// no difference of nearly equal powers is ever formed.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "index_core.hpp"
#include "quadrature.hpp"
#include "random.hpp"
#include "weights.hpp"

namespace osi {

enum class DeltaMethod { mc, laplace };

struct DeltaResult {
  int n = 0;
  int r = 0;
  double value = 0.0;
  DeltaMethod method = DeltaMethod::mc;
  /// Standard error (mc) or combined quadrature error bound (laplace).
  double uncertainty = 0.0;
};

struct BiasResult {
  WeightScheme scheme;
  int n = 0;
  double value = 0.0;
  std::vector<DeltaResult> deltas;
  double uncertainty = 0.0;
};

namespace detail {

inline void check_rank(int n, int r, const char* who) {
  if (n < 1 || r < 1 || r > n) {
    std::ostringstream msg;
    msg << who << ": need 1 <= r <= n, got r=" << r << " n=" << n;
    throw domain_error(msg.str());
  }
}

/// E[X_{r:r}], closed form when available.
inline Estimate max_mean(const Distribution& d, int r) {
  return order_stat_mean(d, r, r, has_closed_order_stats(d) ? OrderStatMethod::closed : OrderStatMethod::quadrature);
}

/// Runs `body(rep, rng, out)` for every replication, each with its own stream
/// derived from (seed, tag, rep); results land in a rep-indexed table so that
/// reductions are order-fixed.
template <typename Body>
std::vector<double> replicate(std::size_t reps, std::size_t width, std::uint64_t seed, std::uint64_t tag,
                              Body&& body) {
  std::vector<double> table(reps * width);
  constexpr std::size_t chunk = 256;
  const std::size_t chunks = (reps + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(reps, (c + 1) * chunk);
    for (std::size_t i = c * chunk; i < end; ++i) {
      Rng rng = make_rng(seed, {tag, i});
      body(i, rng, std::span<double>(table.data() + i * width, width));
    }
  });
  return table;
}

struct MeanSe {
  double mean = 0.0, se = 0.0;
};

/// Mean of column `col` with SE from `batches` contiguous batch means.
inline MeanSe batch_mean(const std::vector<double>& table, std::size_t width, std::size_t col, std::size_t batches) {
  const std::size_t reps = table.size() / width;
  batches = std::max<std::size_t>(2, std::min(batches, reps));
  std::vector<double> bm(batches);
  CompensatedSum all;
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = reps * b / batches, hi = reps * (b + 1) / batches;
    CompensatedSum s;
    for (std::size_t i = lo; i < hi; ++i) {
      s.add(table[i * width + col]);
      all.add(table[i * width + col]);
    }
    bm[b] = s.value() / static_cast<double>(hi - lo);
  }
  const double mean = all.value() / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : bm) ss += (v - mean) * (v - mean);
  const double B = static_cast<double>(batches);
  return {mean, std::sqrt(ss / (B - 1.0) / B)};
}

/// Mean and i.i.d. standard error of column `col`.
inline MeanSe plain_mean(const std::vector<double>& table, std::size_t width, std::size_t col) {
  const std::size_t reps = table.size() / width;
  CompensatedSum s;
  for (std::size_t i = 0; i < reps; ++i) s.add(table[i * width + col]);
  const double mean = s.value() / static_cast<double>(reps);
  double ss = 0.0;
  for (std::size_t i = 0; i < reps; ++i) {
    const double d = table[i * width + col] - mean;
    ss += d * d;
  }
  const double n = static_cast<double>(reps);
  return {mean, reps > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

} // namespace detail

/// Delta_{n,r} for r = 1..r_max from one set of replications: each draws n
/// values and records max(X_1..X_r)/Xbar for every r (common random numbers).
/// SE from batch means.
inline std::vector<DeltaResult> delta_mc_all(const Distribution& d, int n, int r_max, std::size_t reps,
                                             std::uint64_t seed, std::size_t batches = 100) {
  detail::check_rank(n, r_max, "delta_mc");
  if (reps < 1000) throw domain_error("delta_mc: reps must be >= 1000");
  const std::size_t width = static_cast<std::size_t>(r_max);
  auto table = detail::replicate(reps, width, seed, 0xD0, [&](std::size_t, Rng& rng, std::span<double> out) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    sample_into(d, xs, rng);
    double total = 0.0;
    for (double x : xs) total += x;
    const double xbar = total / n;
    double mx = 0.0;
    for (int r = 1; r <= r_max; ++r) {
      mx = std::max(mx, xs[static_cast<std::size_t>(r - 1)]);
      out[static_cast<std::size_t>(r - 1)] = xbar > 0 ? mx / xbar : 0.0;
    }
  });
  const double mu = mean(d);
  std::vector<DeltaResult> out;
  for (int r = 1; r <= r_max; ++r) {
    if (n == 1) {
      out.push_back({n, r, 0.0, DeltaMethod::mc, 0.0});
      continue;
    }
    const auto ms = detail::batch_mean(table, width, static_cast<std::size_t>(r - 1), batches);
    const double ref = detail::max_mean(d, r).value / mu;
    out.push_back({n, r, ms.mean - ref, DeltaMethod::mc, ms.se});
  }
  return out;
}

inline DeltaResult delta_mc(const Distribution& d, int n, int r, std::size_t reps, std::uint64_t seed) {
  detail::check_rank(n, r, "delta_mc");
  if (n == 1) return {1, 1, 0.0, DeltaMethod::mc, 0.0};
  return delta_mc_all(d, n, r, reps, seed).back();
}

/// Tolerances for the nested Laplace-transform evaluation.
struct DeltaQuadConfig {
  QuadConfig outer{1e-9, 1e-8, 400, Transform::endpoint_singular};
  QuadConfig inner{1e-14, 1e-10, 400, Transform::endpoint_singular};
  QuadConfig laplace = default_laplace_config();
};

/// Delta_{n,r} through the Laplace-transform double integral (inner z, outer
/// t). The t axis is split at the median; both pieces use the
/// double-exponential map, the right one composed with t = a + s/(1-s).
inline DeltaResult delta_laplace(const Distribution& d, int n, int r, const DeltaQuadConfig& cfg = {}) {
  detail::check_rank(n, r, "delta_laplace");
  if (n == 1) return {1, 1, 0.0, DeltaMethod::laplace, 0.0};
  const double mu = mean(d);
  const bool closed = detail::laplace_closed_form(d.family());
  detail::QuantileLaplace ql{d, cfg.laplace};

  // Halves of L(z) over the quantile range, cached by node.
  NodeCache lower_half([&](double z) { return ql.lower(z, 0.0, 0.5); });
  NodeCache upper_half([&](double z) { return ql.upper(z, 0.0, 0.5); });
  auto L = [&](double z) -> double {
    if (closed) return laplace(d, z);
    return lower_half(z) + upper_half(z);
  };
  // E[1{X > t} e^{-zX}] given F(t), S(t).
  auto tail = [&](double t, double F, double S, double z) -> double {
    if (closed) return tail_laplace(d, t, z);
    if (z == 0.0) return S;
    if (S <= 0.5) return ql.upper(z, 0.0, S);
    return upper_half(z) + ql.lower(z, F, 0.5);
  };

  std::unordered_map<std::uint64_t, double> inner_error;
  auto bracket = [&](double t) -> double {
    const double F = cdf(d, t), S = survival(d, t);
    auto integrand = [&](double z) -> double {
      const double Lz = L(z);
      if (Lz <= 0.0) return 0.0;
      const double T = std::min(tail(t, F, S, z), Lz);
      const double G = Lz - T;
      // sum_{i<r} L^i G^{r-1-i}
      double poly = 0.0, lp = 1.0;
      for (int i = 0; i < r; ++i) {
        poly += lp * std::pow(G, r - 1 - i);
        lp *= Lz;
      }
      return n * std::pow(Lz, n - r) * T * poly;
    };
    QuadResult inner;
    try {
      inner = integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), cfg.inner);
    } catch (const numeric_error& e) {
      std::ostringstream msg;
      msg << "delta_laplace inner-z layer failed at t=" << t << ": " << e.what();
      throw numeric_error(msg.str(), e.last_value(), e.last_bound());
    }
    inner_error[std::bit_cast<std::uint64_t>(t)] = inner.error;
    double fp = 0.0, pw = 1.0;
    for (int i = 0; i < r; ++i) {
      fp += pw;
      pw *= F;
    }
    return inner.value - S * fp / mu;
  };

  double split = quantile(d, 0.5);
  if (!(split > 0)) split = mean(d);
  QuadResult left, right;
  try {
    left = integrate(bracket, 0.0, split, cfg.outer);
    right = integrate(bracket, split, std::numeric_limits<double>::infinity(), cfg.outer);
  } catch (const numeric_error& e) {
    const std::string what = e.what();
    if (what.rfind("delta_laplace", 0) == 0) throw;
    throw numeric_error("delta_laplace outer-t layer failed: " + what, e.last_value(), e.last_bound());
  }
  const double value = left.value + right.value;
  // Inner errors integrate over t into the bound; the error integrand reuses
  // the inner results recorded at the outer nodes.
  auto inner_err = [&](double t) -> double {
    auto it = inner_error.find(std::bit_cast<std::uint64_t>(t));
    if (it == inner_error.end()) {
      bracket(t);
      it = inner_error.find(std::bit_cast<std::uint64_t>(t));
    }
    return it->second;
  };
  QuadConfig loose = cfg.outer;
  loose.abs_tol = std::max(cfg.outer.abs_tol, 1e-12);
  loose.rel_tol = 0.1;
  double inner_bound = 0.0;
  try {
    inner_bound = integrate(inner_err, 0.0, split, loose).value +
                  integrate(inner_err, split, std::numeric_limits<double>::infinity(), loose).value;
  } catch (const numeric_error& e) {
    inner_bound = e.last_value() + e.last_bound();
  }
  const double bound = left.error + right.error + inner_bound;
  return {n, r, value, DeltaMethod::laplace, bound};
}

/// Bias = (1/m) sum_r c_r Delta_{n,r}; the uncertainty propagates linearly.
inline BiasResult bias_from_deltas(const WeightScheme& w, std::vector<DeltaResult> deltas) {
  const int m = w.m();
  std::sort(deltas.begin(), deltas.end(), [](const auto& a, const auto& b) { return a.r < b.r; });
  if (deltas.size() < static_cast<std::size_t>(m)) throw domain_error("bias_from_deltas: need deltas for r = 1..m");
  const int n = deltas.front().n;
  for (int r = 1; r <= m; ++r) {
    const auto& dr = deltas[static_cast<std::size_t>(r - 1)];
    if (dr.r != r) {
      std::ostringstream msg;
      msg << "bias_from_deltas: missing rank r=" << r;
      throw domain_error(msg.str());
    }
    if (dr.n != n) throw domain_error("bias_from_deltas: deltas must share one sample size n");
  }
  deltas.resize(static_cast<std::size_t>(m));
  const auto coef = max_rep_coefficients(w);
  double value = 0.0, unc = 0.0;
  for (int r = 1; r <= m; ++r) {
    const double c = coef.c[static_cast<std::size_t>(r - 1)];
    value += c * deltas[static_cast<std::size_t>(r - 1)].value;
    unc += std::abs(c) * deltas[static_cast<std::size_t>(r - 1)].uncertainty;
  }
  return {w, n, value / m, std::move(deltas), unc / m};
}

/// Population index used as the bias reference: closed-form order-statistic
/// means where available, quadrature otherwise.
inline IndexValue reference_index(const Distribution& d, const WeightScheme& w) {
  return index_via_order_stat_means(
      d, w, has_closed_order_stats(d) ? OrderStatMethod::closed : OrderStatMethod::quadrature);
}

struct BiasEstimate {
  double bias = 0.0;
  double se = 0.0;
  double mean = 0.0;    ///< Monte Carlo mean of the estimator
  double i_true = 0.0;  ///< population reference
  double rmse = 0.0;
};

struct EstimatorOptions {
  EstimatorMethod method = EstimatorMethod::fast;
  std::size_t subsets = 8000;  ///< B for the subsample route
};

namespace detail {

/// Estimator values over `reps` simulated samples of size n.
inline std::vector<double> simulate_estimates(const Distribution& d, const WeightScheme& w, int n, std::size_t reps,
                                              std::uint64_t seed, std::uint64_t tag, const EstimatorOptions& opt) {
  detail::check_n(static_cast<std::size_t>(n), w.m());
  if (opt.method == EstimatorMethod::enumerate && binomial_count(static_cast<std::size_t>(n), w.m()) > enumerate_limit)
    throw size_error("simulate_estimates: enumeration too large for this n");
  const FastEstimator fe(static_cast<std::size_t>(n), w);
  return replicate(reps, 1, seed, tag, [&](std::size_t, Rng& rng, std::span<double> out) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    sample_into(d, xs, rng);
    switch (opt.method) {
      case EstimatorMethod::fast: out[0] = fe.from_unsorted(xs); break;
      case EstimatorMethod::subsample: out[0] = estimate_subsample_value(xs, w, opt.subsets, rng); break;
      case EstimatorMethod::enumerate: out[0] = estimate_enumerate(Sample(std::move(xs)), w).value; break;
    }
  });
}

inline BiasEstimate summarize(const std::vector<double>& values, double i_true) {
  const auto ms = plain_mean(values, 1, 0);
  double sq = 0.0;
  for (double v : values) sq += (v - i_true) * (v - i_true);
  return {ms.mean - i_true, ms.se, ms.mean, i_true, std::sqrt(sq / static_cast<double>(values.size()))};
}

} // namespace detail

/// E[I^_m] - I_m by simulation, SE from the replication variance.
inline BiasEstimate empirical_bias(const Distribution& d, const WeightScheme& w, int n, std::size_t reps,
                                   std::uint64_t seed, const EstimatorOptions& opt = {}) {
  if (!d.continuous()) throw domain_error("empirical_bias: the population must be non-degenerate");
  if (reps < 2) throw domain_error("empirical_bias: reps must be >= 2");
  const double i_true = reference_index(d, w).value;
  return detail::summarize(detail::simulate_estimates(d, w, n, reps, seed, 0xB1, opt), i_true);
}

struct ConsistencyRow {
  int n = 0;
  double bias = 0.0;
  double se = 0.0;
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
  /// |bias(n_max)| <= |bias(n_min)| + 3 combined SE
  bool not_increasing = false;
  /// |bias(n_max)| < |bias(n_min)| - 3 combined SE
  bool strictly_decreasing = false;
  /// every grid point within 3 SE of zero
  bool all_near_zero = false;
};

inline ConsistencyReport consistency_check(const Distribution& d, const WeightScheme& w, const std::vector<int>& n_grid,
                                           std::size_t reps, std::uint64_t seed, const EstimatorOptions& opt = {}) {
  if (n_grid.empty()) throw domain_error("consistency_check: empty n grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw domain_error("consistency_check: n grid must be increasing");
  ConsistencyReport rep;
  rep.all_near_zero = true;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const auto b = empirical_bias(d, w, n_grid[i], reps, derive_seed(seed, {i}), opt);
    rep.rows.push_back({n_grid[i], b.bias, b.se});
    if (std::abs(b.bias) > 3.0 * b.se) rep.all_near_zero = false;
  }
  const auto& first = rep.rows.front();
  const auto& last = rep.rows.back();
  const double comb = std::sqrt(first.se * first.se + last.se * last.se);
  rep.not_increasing = std::abs(last.bias) <= std::abs(first.bias) + 3.0 * comb;
  rep.strictly_decreasing = std::abs(last.bias) < std::abs(first.bias) - 3.0 * comb;
  return rep;
}

struct TheoremReport {
  double lhs = 0.0;  ///< MC mean of I^_m
  double rhs = 0.0;  ///< MC mean of (1/m) sum_r c_r max(X_1..X_r)/Xbar
  double lhs_se = 0.0;
  double rhs_se = 0.0;
  double diff = 0.0;
  double diff_se = 0.0;  ///< from paired per-replication differences
  bool agree = false;    ///< |diff| <= 3 diff_se
};

/// Checks E[I^_m] = (1/m) sum_r c_r E[X_{r:r}/Xbar] on shared replications.
inline TheoremReport theorem_identity_check(const Distribution& d, const WeightScheme& w, int n, std::size_t reps,
                                            std::uint64_t seed) {
  const int m = w.m();
  detail::check_n(static_cast<std::size_t>(n), m);
  if (reps < 2) throw domain_error("theorem_identity_check: reps must be >= 2");
  const FastEstimator fe(static_cast<std::size_t>(n), w);
  const auto coef = max_rep_coefficients(w);
  auto table = detail::replicate(reps, 3, seed, 0x7E, [&](std::size_t, Rng& rng, std::span<double> out) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    sample_into(d, xs, rng);
    double total = 0.0;
    for (double x : xs) total += x;
    const double xbar = total / n;
    double rhs = 0.0, mx = 0.0;
    for (int r = 1; r <= m; ++r) {
      mx = std::max(mx, xs[static_cast<std::size_t>(r - 1)]);
      rhs += coef.c[static_cast<std::size_t>(r - 1)] * (xbar > 0 ? mx / xbar : 0.0);
    }
    rhs /= m;
    const double lhs = fe.from_unsorted(xs);
    out[0] = lhs;
    out[1] = rhs;
    out[2] = lhs - rhs;
  });
  const auto l = detail::plain_mean(table, 3, 0);
  const auto r = detail::plain_mean(table, 3, 1);
  const auto df = detail::plain_mean(table, 3, 2);
  return {l.mean, r.mean, l.se, r.se, df.mean, df.se, std::abs(df.mean) <= 3.0 * df.se};
}

} // namespace osi

#endif // OSI_BIAS_LAB_HPP
