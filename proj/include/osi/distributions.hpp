#ifndef OSI_DISTRIBUTIONS_HPP
#define OSI_DISTRIBUTIONS_HPP

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "errors.hpp"
#include "quadrature.hpp"
#include "random.hpp"

namespace osi {

enum class Family { gamma, lognormal, weibull, lomax, exponential, uniform, degenerate };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::gamma: return "gamma";
    case Family::lognormal: return "lognormal";
    case Family::weibull: return "weibull";
    case Family::lomax: return "lomax";
    case Family::exponential: return "exponential";
    case Family::uniform: return "uniform";
    case Family::degenerate: return "degenerate";
  }
  return "?";
}

/// Shortest round-trip decimal form of a double.
inline std::string format_shortest(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

/// A parametric population on [0, inf) with finite positive mean.
///
/// Parameters by family:
///   gamma        shape alpha, rate lambda
///   lognormal    log-mean, log-sd
///   weibull      shape k, scale lambda
///   lomax        shape alpha (> 1), scale lambda
///   exponential  rate
///   uniform      lower, upper (0 <= lower < upper)
///   degenerate   point c (> 0)
class Distribution {
public:
  static Distribution gamma(double shape, double rate) {
    require(shape > 0 && rate > 0 && std::isfinite(shape) && std::isfinite(rate),
            "gamma: shape and rate must be positive");
    return {Family::gamma, {shape, rate}, 2};
  }
  static Distribution lognormal(double log_mean, double log_sd) {
    require(std::isfinite(log_mean) && log_sd > 0 && std::isfinite(log_sd),
            "lognormal: log-sd must be positive and log-mean finite");
    return {Family::lognormal, {log_mean, log_sd}, 2};
  }
  static Distribution weibull(double shape, double scale) {
    require(shape > 0 && scale > 0 && std::isfinite(shape) && std::isfinite(scale),
            "weibull: shape and scale must be positive");
    return {Family::weibull, {shape, scale}, 2};
  }
  static Distribution lomax(double shape, double scale) {
    require(shape > 1 && std::isfinite(shape), "lomax: shape must exceed 1 for the mean to exist");
    require(scale > 0 && std::isfinite(scale), "lomax: scale must be positive");
    return {Family::lomax, {shape, scale}, 2};
  }
  static Distribution exponential(double rate) {
    require(rate > 0 && std::isfinite(rate), "exponential: rate must be positive");
    return {Family::exponential, {rate, 0.0}, 1};
  }
  static Distribution uniform(double lower, double upper) {
    require(lower >= 0 && upper > lower && std::isfinite(upper),
            "uniform: need 0 <= lower < upper");
    return {Family::uniform, {lower, upper}, 2};
  }
  static Distribution degenerate(double point) {
    require(point > 0 && std::isfinite(point), "degenerate: point must be positive (mean must be > 0)");
    return {Family::degenerate, {point, 0.0}, 1};
  }

  Family family() const noexcept { return family_; }
  double param(std::size_t i) const { return params_.at(i); }
  std::size_t param_count() const noexcept { return count_; }
  bool continuous() const noexcept { return family_ != Family::degenerate; }

  /// CLI form, e.g. "gamma:2,1".
  std::string spec() const {
    std::string s = family_name(family_);
    s += ':';
    for (std::size_t i = 0; i < count_; ++i) {
      if (i) s += ',';
      s += format_shortest(params_[i]);
    }
    return s;
  }

  /// Table form, e.g. "Gamma(2,1)".
  std::string display_name() const {
    std::string s = family_name(family_);
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    s += '(';
    for (std::size_t i = 0; i < count_; ++i) {
      if (i) s += ',';
      s += format_shortest(params_[i]);
    }
    return s + ')';
  }

  bool operator==(const Distribution&) const = default;

private:
  Distribution(Family f, std::array<double, 2> p, std::size_t count) : family_(f), params_(p), count_(count) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw domain_error(msg);
  }

  Family family_;
  std::array<double, 2> params_;
  std::size_t count_;
};

/// Value with an attached uncertainty (standard error or error bound).
struct Estimate {
  double value = 0.0;
  double uncertainty = 0.0;
};

inline double mean(const Distribution& d) {
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return p0 / p1;
    case Family::lognormal: return std::exp(p0 + 0.5 * p1 * p1);
    case Family::weibull: return p1 * std::tgamma(1.0 + 1.0 / p0);
    case Family::lomax: return p1 / (p0 - 1.0);
    case Family::exponential: return 1.0 / p0;
    case Family::uniform: return 0.5 * (p0 + p1);
    case Family::degenerate: return p0;
  }
  return 0.0;
}

inline double cdf(const Distribution& d, double x) {
  if (std::isnan(x)) throw domain_error("cdf: x is NaN");
  if (x < 0) return 0.0;
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return std::isinf(x) ? 1.0 : boost::math::gamma_p(p0, p1 * x);
    case Family::lognormal:
      if (x == 0) return 0.0;
      return 0.5 * std::erfc(-(std::log(x) - p0) / (p1 * std::numbers::sqrt2));
    case Family::weibull: return -std::expm1(-std::pow(x / p1, p0));
    case Family::lomax: return -std::expm1(-p0 * std::log1p(x / p1));
    case Family::exponential: return -std::expm1(-p0 * x);
    case Family::uniform: return x <= p0 ? 0.0 : (x >= p1 ? 1.0 : (x - p0) / (p1 - p0));
    case Family::degenerate: return x >= p0 ? 1.0 : 0.0;
  }
  return 0.0;
}

/// 1 - F(x), evaluated without cancellation in the upper tail.
inline double survival(const Distribution& d, double x) {
  if (std::isnan(x)) throw domain_error("survival: x is NaN");
  if (x < 0) return 1.0;
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return std::isinf(x) ? 0.0 : boost::math::gamma_q(p0, p1 * x);
    case Family::lognormal:
      if (x == 0) return 1.0;
      return 0.5 * std::erfc((std::log(x) - p0) / (p1 * std::numbers::sqrt2));
    case Family::weibull: return std::exp(-std::pow(x / p1, p0));
    case Family::lomax: return std::exp(-p0 * std::log1p(x / p1));
    case Family::exponential: return std::exp(-p0 * x);
    case Family::uniform: return x <= p0 ? 1.0 : (x >= p1 ? 0.0 : (p1 - x) / (p1 - p0));
    case Family::degenerate: return x >= p0 ? 0.0 : 1.0;
  }
  return 0.0;
}

namespace detail {

inline void check_unit(double u, const char* who) {
  if (!(u > 0.0 && u < 1.0)) {
    std::ostringstream msg;
    msg << who << ": argument " << u << " outside (0,1)";
    throw domain_error(msg.str());
  }
}

// Q(u) for u in (0,1), no range check.
inline double quantile_unchecked(const Distribution& d, double u) {
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return boost::math::gamma_p_inv(p0, u) / p1;
    case Family::lognormal:
      return std::exp(p0 - p1 * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u));
    case Family::weibull: return p1 * std::pow(-std::log1p(-u), 1.0 / p0);
    case Family::lomax: return p1 * std::expm1(-std::log1p(-u) / p0);
    case Family::exponential: return -std::log1p(-u) / p0;
    case Family::uniform: return p0 + (p1 - p0) * u;
    case Family::degenerate: return p0;
  }
  return 0.0;
}

// Q(1 - v) for v in (0,1), accurate when v is tiny.
inline double upper_quantile_unchecked(const Distribution& d, double v) {
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return boost::math::gamma_q_inv(p0, v) / p1;
    case Family::lognormal:
      return std::exp(p0 + p1 * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * v));
    case Family::weibull: return p1 * std::pow(-std::log(v), 1.0 / p0);
    case Family::lomax: return p1 * std::expm1(-std::log(v) / p0);
    case Family::exponential: return -std::log(v) / p0;
    case Family::uniform: return p1 - (p1 - p0) * v;
    case Family::degenerate: return p0;
  }
  return 0.0;
}

} // namespace detail

/// Quantile function Q(u) = inf{x : F(x) >= u}.
inline double quantile(const Distribution& d, double u) {
  detail::check_unit(u, "quantile");
  return detail::quantile_unchecked(d, u);
}

/// Q(1 - v), for callers working with upper-tail probabilities.
inline double upper_quantile(const Distribution& d, double v) {
  detail::check_unit(v, "upper_quantile");
  return detail::upper_quantile_unchecked(d, v);
}

/// Integrates q(u) * weight(u, 1-u) over (0,1) for a quantile-like function
/// given as two halves: lower_q(u) for u in (0, 1/2] and upper_q(v) = q(1-v)
/// for v in (0, 1/2]. Parametrizing the upper half by v = 1-u keeps 1-u
/// accurate where heavy upper tails blow up.
template <typename QL, typename QU, typename W>
QuadResult integrate_quantile_fn(QL&& lower_q, QU&& upper_q, W&& weight, const QuadConfig& cfg) {
  QuadConfig half = cfg;
  half.transform = Transform::endpoint_singular;
  auto lower = integrate([&](double u) { return lower_q(u) * weight(u, 1.0 - u); }, 0.0, 0.5, half);
  auto upper = integrate([&](double v) { return upper_q(v) * weight(1.0 - v, v); }, 0.0, 0.5, half);
  return {lower.value + upper.value, lower.error + upper.error, lower.evaluations + upper.evaluations,
          lower.refinements + upper.refinements};
}

/// Integrates Q(u) * weight(u, 1-u) over (0,1), split at the median.
template <typename W>
QuadResult integrate_quantile(const Distribution& d, W&& weight, const QuadConfig& cfg) {
  return integrate_quantile_fn([&](double u) { return detail::quantile_unchecked(d, u); },
                               [&](double v) { return detail::upper_quantile_unchecked(d, v); },
                               std::forward<W>(weight), cfg);
}

inline double draw(const Distribution& d, Rng& rng) {
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return std::gamma_distribution<double>(p0, 1.0 / p1)(rng);
    case Family::lognormal: return std::lognormal_distribution<double>(p0, p1)(rng);
    case Family::weibull: return std::weibull_distribution<double>(p0, p1)(rng);
    case Family::lomax: {
      const double u = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);  // (0,1]
      return p1 * std::expm1(-std::log(u) / p0);
    }
    case Family::exponential: return std::exponential_distribution<double>(p0)(rng);
    case Family::uniform: return std::uniform_real_distribution<double>(p0, p1)(rng);
    case Family::degenerate: return p0;
  }
  return 0.0;
}

inline void sample_into(const Distribution& d, std::span<double> out, Rng& rng) {
  for (auto& x : out) x = draw(d, rng);
}

/// n i.i.d. draws. Deterministic for a given generator state.
inline std::vector<double> sample(const Distribution& d, std::size_t n, Rng& rng) {
  if (n < 1) throw domain_error("sample: n must be >= 1");
  std::vector<double> out(n);
  sample_into(d, out, rng);
  return out;
}

// ---------------------------------------------------------------------------
// Laplace transforms
// ---------------------------------------------------------------------------

/// Tolerances for the numerical Laplace transforms (lognormal, weibull,
/// lomax). The relative target holds whenever the transform exceeds abs_tol
/// by a few orders of magnitude.
inline QuadConfig default_laplace_config() {
  QuadConfig c;
  c.abs_tol = 1e-16;
  c.rel_tol = 1e-11;
  c.max_refinements = 400;
  c.transform = Transform::endpoint_singular;
  return c;
}

namespace detail {

inline bool laplace_closed_form(Family f) {
  return f == Family::gamma || f == Family::exponential || f == Family::uniform || f == Family::degenerate;
}

// e^{-z lo} * (1 - e^{-z w}) / (z * width) without cancellation as z -> 0.
inline double uniform_segment(double z, double lo, double w, double width) {
  if (w <= 0) return 0.0;
  if (z == 0.0) return w / width;
  return std::exp(-z * lo) * (-std::expm1(-z * w)) / (z * width);
}

// Numerical pieces of E[e^{-zX}] over quantile slices, for families without a
// closed form. lower(z, a, b) integrates e^{-z Q(u)} over u in [a, b] and
// upper(z, a, b) integrates e^{-z Q(1-v)} over v in [a, b]; both ranges lie in
// [0, 1/2], the split point being the median.
struct QuantileLaplace {
  const Distribution& d;
  QuadConfig cfg;

  double lower(double z, double a, double b) const {
    if (b <= a) return 0.0;
    if (z == 0.0) return b - a;
    return run([&](double u) { return std::exp(-z * quantile_unchecked(d, u)); }, a, b, z);
  }
  double upper(double z, double a, double b) const {
    if (b <= a) return 0.0;
    if (z == 0.0) return b - a;
    return run([&](double v) { return std::exp(-z * upper_quantile_unchecked(d, v)); }, a, b, z);
  }

private:
  template <typename G>
  double run(G&& g, double a, double b, double z) const {
    try {
      return integrate(g, a, b, cfg).value;
    } catch (const numeric_error& e) {
      std::ostringstream msg;
      msg << "Laplace transform of " << d.spec() << " at z=" << z << " over [" << a << "," << b
          << "]: " << e.what();
      throw numeric_error(msg.str(), e.last_value(), e.last_bound());
    }
  }
};

} // namespace detail

/// L(z) = E[exp(-zX)] for z >= 0.
inline double laplace(const Distribution& d, double z, const QuadConfig& cfg = default_laplace_config()) {
  if (!(z >= 0)) throw domain_error("laplace: z must be >= 0");
  if (z == 0.0) return 1.0;
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma: return std::exp(-p0 * std::log1p(z / p1));
    case Family::exponential: return p0 / (p0 + z);
    case Family::uniform: return detail::uniform_segment(z, p0, p1 - p0, p1 - p0);
    case Family::degenerate: return std::exp(-z * p0);
    default: break;
  }
  detail::QuantileLaplace ql{d, cfg};
  return ql.lower(z, 0.0, 0.5) + ql.upper(z, 0.0, 0.5);
}

/// E[1{X <= t} exp(-zX)].
inline double truncated_laplace(const Distribution& d, double t, double z,
                                const QuadConfig& cfg = default_laplace_config()) {
  if (!(t >= 0) || !(z >= 0)) throw domain_error("truncated_laplace: t and z must be >= 0");
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma:
      if (std::isinf(t)) return laplace(d, z);
      return laplace(d, z) * boost::math::gamma_p(p0, (p1 + z) * t);
    case Family::exponential:
      if (std::isinf(t)) return laplace(d, z);
      return laplace(d, z) * -std::expm1(-(p0 + z) * t);
    case Family::uniform: return detail::uniform_segment(z, p0, std::min(t, p1) - p0, p1 - p0);
    case Family::degenerate: return t >= p0 ? std::exp(-z * p0) : 0.0;
    default: break;
  }
  if (std::isinf(t)) return laplace(d, z, cfg);
  const double f = cdf(d, t);
  detail::QuantileLaplace ql{d, cfg};
  if (f <= 0.5) return ql.lower(z, 0.0, f);
  return ql.lower(z, 0.0, 0.5) + ql.upper(z, survival(d, t), 0.5);
}

/// E[1{X > t} exp(-zX)], computed directly rather than as a difference.
inline double tail_laplace(const Distribution& d, double t, double z,
                           const QuadConfig& cfg = default_laplace_config()) {
  if (!(t >= 0) || !(z >= 0)) throw domain_error("tail_laplace: t and z must be >= 0");
  const double p0 = d.param(0), p1 = d.param(1);
  switch (d.family()) {
    case Family::gamma:
      if (std::isinf(t)) return 0.0;
      return laplace(d, z) * boost::math::gamma_q(p0, (p1 + z) * t);
    case Family::exponential:
      if (std::isinf(t)) return 0.0;
      return laplace(d, z) * std::exp(-(p0 + z) * t);
    case Family::uniform: {
      const double lo = std::max(t, p0);
      return detail::uniform_segment(z, lo, p1 - lo, p1 - p0);
    }
    case Family::degenerate: return t < p0 ? std::exp(-z * p0) : 0.0;
    default: break;
  }
  if (std::isinf(t)) return 0.0;
  const double s = survival(d, t);
  detail::QuantileLaplace ql{d, cfg};
  if (s <= 0.5) return ql.upper(z, 0.0, s);
  return ql.upper(z, 0.0, 0.5) + ql.lower(z, cdf(d, t), 0.5);
}

// ---------------------------------------------------------------------------
// Order statistics
// ---------------------------------------------------------------------------

enum class OrderStatMethod { closed, quadrature, mc };

struct McOptions {
  std::size_t reps = 100000;
  std::uint64_t seed = 0;
};

inline QuadConfig default_population_config() {
  QuadConfig c;
  c.abs_tol = 1e-12;
  c.rel_tol = 1e-12;
  c.max_refinements = 2000;
  c.transform = Transform::endpoint_singular;
  return c;
}

inline bool has_closed_order_stats(const Distribution& d) {
  return d.family() == Family::exponential || d.family() == Family::uniform || d.family() == Family::degenerate;
}

/// E[X_{k:m}], the mean of the k-th smallest of m i.i.d. draws.
///
/// closed      exponential, uniform and degenerate only
/// quadrature  k*C(m,k) * int_0^1 Q(u) u^{k-1} (1-u)^{m-k} du
/// mc          average k-th order statistic of simulated m-samples, with SE
inline Estimate order_stat_mean(const Distribution& d, int k, int m, OrderStatMethod method,
                                const McOptions& mc = {}, const QuadConfig& cfg = default_population_config()) {
  if (m < 1 || k < 1 || k > m) {
    std::ostringstream msg;
    msg << "order_stat_mean: rank k=" << k << " outside 1.." << m;
    throw domain_error(msg.str());
  }
  switch (method) {
    case OrderStatMethod::closed: {
      const double p0 = d.param(0), p1 = d.param(1);
      switch (d.family()) {
        case Family::exponential: {
          double s = 0.0;
          for (int j = m - k + 1; j <= m; ++j) s += 1.0 / j;
          return {s / p0, 0.0};
        }
        case Family::uniform: return {p0 + (p1 - p0) * k / (m + 1.0), 0.0};
        case Family::degenerate: return {p0, 0.0};
        default:
          throw unsupported_method(std::string("order_stat_mean: no closed form for ") + family_name(d.family()));
      }
    }
    case OrderStatMethod::quadrature: {
      // k * C(m,k) = m * C(m-1,k-1); the Beta(k, m-k+1) density.
      const double log_norm = std::log(static_cast<double>(m)) +
                              std::log(boost::math::binomial_coefficient<double>(m - 1, k - 1));
      auto w = [&](double u, double uc) {
        return std::exp(log_norm + (k - 1) * std::log(u) + (m - k) * std::log(uc));
      };
      auto r = integrate_quantile(d, w, cfg);
      return {r.value, r.error};
    }
    case OrderStatMethod::mc: {
      if (mc.reps < 2) throw domain_error("order_stat_mean: mc needs reps >= 2");
      constexpr std::size_t chunk = 4096;
      const std::size_t chunks = (mc.reps + chunk - 1) / chunk;
      std::vector<double> sums(chunks), sqs(chunks);
      parallel_for(chunks, [&](std::size_t c) {
        Rng rng = make_rng(mc.seed, {0x05, c});
        std::vector<double> buf(static_cast<std::size_t>(m));
        const std::size_t end = std::min(mc.reps, (c + 1) * chunk);
        double s = 0.0, q = 0.0;
        for (std::size_t i = c * chunk; i < end; ++i) {
          sample_into(d, buf, rng);
          std::nth_element(buf.begin(), buf.begin() + (k - 1), buf.end());
          const double x = buf[static_cast<std::size_t>(k - 1)];
          s += x;
          q += x * x;
        }
        sums[c] = s;
        sqs[c] = q;
      });
      double s = 0.0, q = 0.0;
      for (std::size_t c = 0; c < chunks; ++c) {
        s += sums[c];
        q += sqs[c];
      }
      const double n = static_cast<double>(mc.reps);
      const double mu = s / n;
      const double var = std::max(0.0, (q - n * mu * mu) / (n - 1.0));
      return {mu, std::sqrt(var / n)};
    }
  }
  return {};
}

} // namespace osi

#endif // OSI_DISTRIBUTIONS_HPP
