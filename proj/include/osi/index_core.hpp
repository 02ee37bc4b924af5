#ifndef OSI_INDEX_CORE_HPP
#define OSI_INDEX_CORE_HPP

// Population value of I_m = (1/(m mu)) sum_k a_k E[X_{k:m}] through several
// mathematically independent routes:
//
//   order_stat_means    the defining sum, E[X_{k:m}] per rank
//   quantile_integral   (1/mu) int_0^1 w_m(u) Q(u) du, w_m a Beta mixture
//   max_representation  inclusion-exclusion over E[X_{r:r}], r = 1..m
//   covariance_mc       (1/mu) Cov(X, sum_k a_k C(m-1,k-1) F^{k-1} (1-F)^{m-k})
//   lorenz              linear combination of Lorenz measures D_1..D_{m-1}
//
// The covariance and Lorenz forms recover I_m - (1/m) sum_k a_k; the constant
// is added back so every route returns I_m for schemes that are not zero-sum.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "distributions.hpp"
#include "weights.hpp"

namespace osi {

enum class IndexMethod { order_stat_means, quantile_integral, max_representation, covariance_mc, lorenz };

inline const char* index_method_name(IndexMethod m) {
  switch (m) {
    case IndexMethod::order_stat_means: return "order_stat_means";
    case IndexMethod::quantile_integral: return "quantile_integral";
    case IndexMethod::max_representation: return "max_representation";
    case IndexMethod::covariance_mc: return "covariance_mc";
    case IndexMethod::lorenz: return "lorenz";
  }
  return "?";
}

struct IndexValue {
  double value = 0.0;
  IndexMethod method = IndexMethod::order_stat_means;
  /// Standard error for MC routes, quadrature error bound otherwise.
  double uncertainty = 0.0;
  WeightScheme scheme;
  Distribution distribution;
};

/// c_r = sum_{k=1}^{r} a_k C(m,r) (-1)^{r-k} C(r-1,k-1), so that
/// I_m = (1/(m mu)) sum_r c_r E[X_{r:r}].
struct MaxRepCoefficients {
  int m = 0;
  std::vector<double> c;
};

inline MaxRepCoefficients max_rep_coefficients(const WeightScheme& w) {
  const int m = w.m();
  MaxRepCoefficients out{m, std::vector<double>(static_cast<std::size_t>(m), 0.0)};
  for (int r = 1; r <= m; ++r) {
    double s = 0.0;
    for (int k = 1; k <= r; ++k) {
      const double sign = ((r - k) % 2 == 0) ? 1.0 : -1.0;
      s += w.a(k) * sign * detail::choose(r - 1, k - 1);
    }
    out.c[static_cast<std::size_t>(r - 1)] = detail::choose(m, r) * s;
  }
  return out;
}

/// Spectral weight w_m(u) = (1/m) sum_k a_k f_{Beta(k, m-k+1)}(u), given u and 1-u.
inline double spectral_weight(const WeightScheme& w, double u, double uc) {
  const int m = w.m();
  double s = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double a = w.a(k);
    if (a == 0.0) continue;
    s += a * m * detail::choose(m - 1, k - 1) * std::pow(u, k - 1) * std::pow(uc, m - k);
  }
  return s / m;
}

inline IndexValue index_via_order_stat_means(const Distribution& d, const WeightScheme& w, OrderStatMethod method,
                                             const McOptions& mc = {},
                                             const QuadConfig& cfg = default_population_config()) {
  const int m = w.m();
  const double mu = mean(d);
  double sum = 0.0, unc = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double a = w.a(k);
    if (a == 0.0) continue;
    McOptions rank_mc = mc;
    rank_mc.seed = derive_seed(mc.seed, {0x0A, static_cast<std::uint64_t>(k)});
    const Estimate e = order_stat_mean(d, k, m, method, rank_mc, cfg);
    sum += a * e.value;
    unc += method == OrderStatMethod::mc ? (a * e.uncertainty) * (a * e.uncertainty) : std::abs(a) * e.uncertainty;
  }
  if (method == OrderStatMethod::mc) unc = std::sqrt(unc);
  return {sum / (m * mu), IndexMethod::order_stat_means, unc / (m * mu), w, d};
}

namespace detail {

template <typename QL, typename QU>
Estimate spectral_index(const WeightScheme& w, QL&& lower_q, QU&& upper_q, double mu, const QuadConfig& cfg) {
  auto r = integrate_quantile_fn(lower_q, upper_q, [&](double u, double uc) { return spectral_weight(w, u, uc); },
                                 cfg);
  return {r.value / mu, r.error / mu};
}

} // namespace detail

inline IndexValue index_via_quantile_integral(const Distribution& d, const WeightScheme& w,
                                              const QuadConfig& cfg = default_population_config()) {
  if (!d.continuous())
    throw unsupported_method("index_via_quantile_integral: degenerate distribution has no continuous quantile");
  const auto e = detail::spectral_index(
      w, [&](double u) { return detail::quantile_unchecked(d, u); },
      [&](double v) { return detail::upper_quantile_unchecked(d, v); }, mean(d), cfg);
  return {e.value, IndexMethod::quantile_integral, e.uncertainty, w, d};
}

inline IndexValue index_via_max_representation(const Distribution& d, const WeightScheme& w, OrderStatMethod method,
                                               const McOptions& mc = {},
                                               const QuadConfig& cfg = default_population_config()) {
  const auto coef = max_rep_coefficients(w);
  const int m = w.m();
  const double mu = mean(d);
  double sum = 0.0, unc = 0.0;
  for (int r = 1; r <= m; ++r) {
    const double c = coef.c[static_cast<std::size_t>(r - 1)];
    if (c == 0.0) continue;
    McOptions rank_mc = mc;
    rank_mc.seed = derive_seed(mc.seed, {0x0B, static_cast<std::uint64_t>(r)});
    const Estimate e = order_stat_mean(d, r, r, method, rank_mc, cfg);
    sum += c * e.value;
    unc += method == OrderStatMethod::mc ? (c * e.uncertainty) * (c * e.uncertainty) : std::abs(c) * e.uncertainty;
  }
  if (method == OrderStatMethod::mc) unc = std::sqrt(unc);
  return {sum / (m * mu), IndexMethod::max_representation, unc / (m * mu), w, d};
}

/// Monte Carlo over the covariance form with F evaluated analytically.
/// Draws are split into batches; the value pools all draws and the SE is the
/// spread of the per-batch estimates.
inline IndexValue index_via_covariance_mc(const Distribution& d, const WeightScheme& w, std::size_t reps,
                                          std::uint64_t seed, std::size_t batches = 100) {
  if (reps < 1000) throw domain_error("index_via_covariance_mc: reps must be >= 1000");
  const int m = w.m();
  const double offset = w.sum() / m;
  if (!d.continuous()) return {offset, IndexMethod::covariance_mc, 0.0, w, d};

  batches = std::max<std::size_t>(2, std::min(batches, reps / 10));
  struct Batch {
    double n = 0, mean_x = 0, mean_h = 0, cross = 0;
  };
  std::vector<Batch> parts(batches);
  std::vector<double> coef(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) coef[static_cast<std::size_t>(k - 1)] = w.a(k) * detail::choose(m - 1, k - 1);

  parallel_for(batches, [&](std::size_t b) {
    const std::size_t lo = reps * b / batches, hi = reps * (b + 1) / batches;
    Rng rng = make_rng(seed, {0x0C, b});
    std::vector<double> xs(hi - lo), hs(hi - lo);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = draw(d, rng);
      const double f = cdf(d, x), fc = survival(d, x);
      double h = 0.0;
      for (int k = 1; k <= m; ++k) {
        const double c = coef[static_cast<std::size_t>(k - 1)];
        if (c != 0.0) h += c * std::pow(f, k - 1) * std::pow(fc, m - k);
      }
      xs[i] = x;
      hs[i] = h;
    }
    Batch out;
    out.n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out.mean_x += xs[i];
      out.mean_h += hs[i];
    }
    out.mean_x /= out.n;
    out.mean_h /= out.n;
    for (std::size_t i = 0; i < xs.size(); ++i) out.cross += (xs[i] - out.mean_x) * (hs[i] - out.mean_h);
    parts[b] = out;
  });

  const double mu = mean(d);
  double n = 0, mx = 0, mh = 0;
  for (const auto& p : parts) {
    n += p.n;
    mx += p.n * p.mean_x;
    mh += p.n * p.mean_h;
  }
  mx /= n;
  mh /= n;
  double cross = 0.0, bs = 0.0, bss = 0.0;
  for (const auto& p : parts) {
    cross += p.cross + p.n * (p.mean_x - mx) * (p.mean_h - mh);
    const double est = p.cross / (p.n - 1.0) / mu;
    bs += est;
    bss += est * est;
  }
  const double value = cross / (n - 1.0) / mu + offset;
  const double B = static_cast<double>(batches);
  const double bmean = bs / B;
  const double bvar = std::max(0.0, (bss - B * bmean * bmean) / (B - 1.0));
  return {value, IndexMethod::covariance_mc, std::sqrt(bvar / B), w, d};
}

// ---------------------------------------------------------------------------
// Lorenz curve and the D_n family
// ---------------------------------------------------------------------------

enum class LorenzMethod { analytic, nested_quadrature };

/// L(p) = (1/mu) int_0^p Q(t) dt, closed form for every continuous family.
inline double lorenz_curve(const Distribution& d, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("lorenz_curve: p outside [0,1]");
  if (!d.continuous()) throw unsupported_method("lorenz_curve: degenerate distribution excluded");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::exponential: return p + (1.0 - p) * std::log1p(-p);
    case Family::uniform: return (p0 * p + 0.5 * (p1 - p0) * p * p) / (0.5 * (p0 + p1));
    case Family::gamma: return boost::math::gamma_p(p0 + 1.0, boost::math::gamma_p_inv(p0, p));
    case Family::lognormal: {
      const double z = -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
      return 0.5 * std::erfc(-(z - p1) / std::numbers::sqrt2);
    }
    case Family::weibull: return boost::math::gamma_p(1.0 + 1.0 / p0, -std::log1p(-p));
    case Family::lomax: return p0 * -std::expm1((1.0 - 1.0 / p0) * std::log1p(-p)) - (p0 - 1.0) * p;
    case Family::degenerate: break;
  }
  return p;
}

/// L(p) by direct quadrature of the quantile function.
inline double lorenz_curve_numeric(const Distribution& d, double p, const QuadConfig& cfg = default_population_config()) {
  if (!(p >= 0.0 && p <= 1.0)) throw domain_error("lorenz_curve_numeric: p outside [0,1]");
  if (!d.continuous()) throw unsupported_method("lorenz_curve_numeric: degenerate distribution excluded");
  if (p == 0.0) return 0.0;
  QuadConfig c = cfg;
  c.transform = Transform::endpoint_singular;
  if (p <= 0.5)
    return integrate([&](double t) { return detail::quantile_unchecked(d, t); }, 0.0, p, c).value / mean(d);
  const double lo = integrate([&](double t) { return detail::quantile_unchecked(d, t); }, 0.0, 0.5, c).value;
  const double hi =
      integrate([&](double v) { return detail::upper_quantile_unchecked(d, v); }, 1.0 - p, 0.5, c).value;
  return (lo + hi) / mean(d);
}

/// D_n = (n+1) E[(U - L(U)) U^{n-1}], U ~ U(0,1).
inline Estimate lorenz_D(const Distribution& d, int n, LorenzMethod method = LorenzMethod::analytic,
                         const QuadConfig& cfg = default_population_config()) {
  if (n < 1) throw domain_error("lorenz_D: n must be >= 1");
  if (!d.continuous()) throw unsupported_method("lorenz_D: degenerate distribution excluded");
  QuadConfig c = cfg;
  c.transform = Transform::endpoint_singular;
  QuadConfig inner = cfg;
  inner.abs_tol = std::min(cfg.abs_tol, 1e-13);
  auto L = [&](double u) {
    return method == LorenzMethod::analytic ? lorenz_curve(d, u) : lorenz_curve_numeric(d, u, inner);
  };
  auto r = integrate([&](double u) { return (u - L(u)) * std::pow(u, n - 1); }, 0.0, 1.0, c);
  return {(n + 1) * r.value, (n + 1) * r.error};
}

/// I_m from D_1..D_{m-1}. Terms weighted by (k-1) vanish at k = 1 and are
/// skipped, so D_0 is never needed. For k = m the integration-by-parts kernel
/// reduces to m(m-1) u^{m-2} and contributes a_m (m-1) D_{m-1} / m.
inline IndexValue index_via_lorenz(const Distribution& d, const WeightScheme& w,
                                   LorenzMethod method = LorenzMethod::analytic,
                                   const QuadConfig& cfg = default_population_config()) {
  const int m = w.m();
  if (!d.continuous()) throw unsupported_method("index_via_lorenz: degenerate distribution excluded");
  std::vector<Estimate> D(static_cast<std::size_t>(m));
  std::vector<bool> have(static_cast<std::size_t>(m), false);
  auto get = [&](int j) -> const Estimate& {
    if (!have[static_cast<std::size_t>(j)]) {
      D[static_cast<std::size_t>(j)] = lorenz_D(d, j, method, cfg);
      have[static_cast<std::size_t>(j)] = true;
    }
    return D[static_cast<std::size_t>(j)];
  };

  double value = 0.0, unc = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double a = w.a(k);
    if (a == 0.0) continue;
    const double outer = a * detail::choose(m - 1, k - 1);
    if (k == m) {
      const auto& e = get(m - 1);
      value += a * (m - 1.0) / m * e.value;
      unc += std::abs(a * (m - 1.0) / m) * e.uncertainty;
      continue;
    }
    for (int r = 0; r <= m - k - 1; ++r) {
      const double sign = ((m - k - 1 - r) % 2 == 0) ? 1.0 : -1.0;
      const double base = outer * detail::choose(m - k - 1, r) * sign;
      if (k > 1) {
        const auto& e = get(m - 2 - r);
        const double c = base * (k - 1.0) / (m - 1.0 - r);
        value += c * e.value;
        unc += std::abs(c) * e.uncertainty;
      }
      const auto& e = get(m - 1 - r);
      const double c = -base * (m - 1.0) / (m - r);
      value += c * e.value;
      unc += std::abs(c) * e.uncertainty;
    }
  }
  value += w.sum() / m;
  return {value, IndexMethod::lorenz, unc, w, d};
}

// ---------------------------------------------------------------------------
// Scale and translation behaviour
// ---------------------------------------------------------------------------

struct TransformReport {
  double base = 0.0;
  double scaled = 0.0;            ///< I_m(cX)
  double shifted = 0.0;           ///< I_m(X + c)
  double expected_shifted = 0.0;  ///< (mu I_m(X) + c sum(a)/m) / (mu + c)
  bool scale_ok = false;
  bool shift_ok = false;
};

/// Recomputes the index from the scaled quantile cQ(u) and the shifted
/// quantile Q(u) + c. For zero-sum weights the expected shifted value is
/// mu/(mu+c) * I_m(X); otherwise it carries the extra c*sum(a)/(m(mu+c)).
inline TransformReport transform_checks(const Distribution& d, const WeightScheme& w, double c, double tol = 1e-8,
                                        const QuadConfig& cfg = default_population_config()) {
  if (!(c > 0)) throw domain_error("transform_checks: c must be positive");
  const double mu = mean(d);
  auto ql = [&](double u) { return detail::quantile_unchecked(d, u); };
  auto qu = [&](double v) { return detail::upper_quantile_unchecked(d, v); };
  TransformReport r;
  r.base = detail::spectral_index(w, ql, qu, mu, cfg).value;
  r.scaled = detail::spectral_index(
                 w, [&](double u) { return c * ql(u); }, [&](double v) { return c * qu(v); }, c * mu, cfg)
                 .value;
  r.shifted = detail::spectral_index(
                  w, [&](double u) { return ql(u) + c; }, [&](double v) { return qu(v) + c; }, mu + c, cfg)
                  .value;
  r.expected_shifted = (mu * r.base + c * w.sum() / w.m()) / (mu + c);
  r.scale_ok = std::abs(r.scaled - r.base) <= tol;
  r.shift_ok = std::abs(r.shifted - r.expected_shifted) <= tol;
  return r;
}

} // namespace osi

#endif // OSI_INDEX_CORE_HPP
