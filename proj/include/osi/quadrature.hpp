#ifndef OSI_QUADRATURE_HPP
#define OSI_QUADRATURE_HPP

// Adaptive Gauss-Kronrod (7/15) integration with two changes of variable:
//
//   semi_infinite      x = a + s/(1-s),               s in [0,1)
//   endpoint_singular  s = logistic(pi*sinh(tau)),    tau in [-T, T]
//
// The double-exponential map clusters nodes at both ends of a finite interval
// so integrable endpoint singularities (u^-1/2, Q(u) of heavy tails as u->1)
// are resolved by the same adaptive bisection. An infinite upper limit always
// goes through the rational map; endpoint_singular on [a, inf) composes both.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace osi {

enum class Transform { none, semi_infinite, endpoint_singular };

struct QuadConfig {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  std::size_t max_refinements = 2000;
  Transform transform = Transform::none;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  std::size_t refinements = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Truncation of the tau axis for the double-exponential map. At |tau| = 4.5
// the Jacobian is ~1e-59, far below any tolerance used here.
inline constexpr double de_half_width = 4.5;

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename G>
Panel gauss_kronrod(G& g, double lo, double hi, std::size_t& evals) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = g(center);
  double kronrod = fc * kronrod_weights[7];
  double gauss = fc * gauss_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    kronrod += kronrod_weights[j] * (f1 + f2);
    if (j % 2 == 1) gauss += gauss_weights[j / 2] * (f1 + f2);
  }
  evals += 15;
  const double value = kronrod * half;
  double error = std::abs((kronrod - gauss) * half);
  if (!std::isfinite(value)) error = std::numeric_limits<double>::infinity();
  return {lo, hi, value, error};
}

template <typename G>
QuadResult adaptive(G& g, double lo, double hi, const QuadConfig& cfg) {
  QuadResult out;
  if (lo == hi) return out;
  std::vector<Panel> heap;
  heap.reserve(64);
  heap.push_back(gauss_kronrod(g, lo, hi, out.evaluations));
  double total = heap.front().value;
  double error = heap.front().error;
  // Panels too narrow to bisect without hitting floating-point resolution.
  double frozen_value = 0.0, frozen_error = 0.0;
  const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(lo) + std::abs(hi));

  auto tolerance = [&] { return std::max(cfg.abs_tol, cfg.rel_tol * std::abs(total)); };

  while (error > tolerance()) {
    if (heap.empty()) break;
    if (out.refinements >= cfg.max_refinements) break;
    std::pop_heap(heap.begin(), heap.end());
    Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (worst.hi - worst.lo <= min_width || mid <= worst.lo || mid >= worst.hi) {
      frozen_value += worst.value;
      frozen_error += worst.error;
      continue;
    }
    Panel left = gauss_kronrod(g, worst.lo, mid, out.evaluations);
    Panel right = gauss_kronrod(g, mid, worst.hi, out.evaluations);
    ++out.refinements;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end());
    // Re-sum periodically so the running totals do not drift.
    if (out.refinements % 64 == 0) {
      total = frozen_value;
      error = frozen_error;
      for (const auto& p : heap) {
        total += p.value;
        error += p.error;
      }
    }
  }
  total = frozen_value;
  error = frozen_error;
  for (const auto& p : heap) {
    total += p.value;
    error += p.error;
  }
  out.value = total;
  out.error = error;
  if (!(error <= tolerance())) {
    std::ostringstream msg;
    msg << "quadrature did not converge after " << out.refinements << " refinements ("
        << out.evaluations << " evaluations): estimate " << total << ", error bound " << error
        << ", requested " << tolerance();
    throw numeric_error(msg.str(), total, error);
  }
  return out;
}

// Maps tau to (s, 1-s) with both parts accurate near 0 and 1.
struct DePoint {
  double s, sc, jacobian;
};

inline DePoint de_point(double tau) {
  const double q = std::numbers::pi * std::sinh(tau);
  const double jac_base = std::numbers::pi * std::cosh(tau);
  if (q > 0) {
    const double e = std::exp(-q);
    const double s = 1.0 / (1.0 + e);
    const double sc = e / (1.0 + e);
    return {s, sc, s * sc * jac_base};
  }
  const double e = std::exp(q);
  const double s = e / (1.0 + e);
  const double sc = 1.0 / (1.0 + e);
  return {s, sc, s * sc * jac_base};
}

} // namespace detail

/// Integrates f over [a, b]; b may be +infinity. Throws numeric_error with the
/// last estimate when the refinement budget runs out before the tolerance
/// max(abs_tol, rel_tol*|value|) is met.
template <typename F>
QuadResult integrate(F&& f, double a, double b, const QuadConfig& cfg = {}) {
  if (!(cfg.abs_tol > 0) || !(cfg.rel_tol > 0) || cfg.max_refinements < 1)
    throw domain_error("quadrature: tolerances must be positive and max_refinements >= 1");
  if (std::isnan(a) || std::isnan(b) || std::isinf(a))
    throw domain_error("quadrature: lower limit must be finite");
  if (b < a) {
    QuadResult r = integrate(f, b, a, cfg);
    r.value = -r.value;
    return r;
  }
  const bool infinite = std::isinf(b);

  if (cfg.transform == Transform::endpoint_singular) {
    auto g = [&](double tau) -> double {
      const auto p = detail::de_point(tau);
      if (p.jacobian == 0.0) return 0.0;
      if (infinite) {
        if (p.sc == 0.0) return 0.0;
        const double x = a + p.s / p.sc;
        if (!std::isfinite(x)) return 0.0;
        return f(x) * p.jacobian / (p.sc * p.sc);
      }
      const double width = b - a;
      const double x = p.s <= 0.5 ? a + width * p.s : b - width * p.sc;
      if (x <= a || x >= b) return 0.0;
      return f(x) * p.jacobian * width;
    };
    return detail::adaptive(g, -detail::de_half_width, detail::de_half_width, cfg);
  }

  if (infinite || cfg.transform == Transform::semi_infinite) {
    if (!infinite) throw domain_error("quadrature: semi_infinite transform needs an infinite upper limit");
    auto g = [&](double s) -> double {
      const double sc = 1.0 - s;
      if (sc <= 0.0) return 0.0;
      const double x = a + s / sc;
      if (!std::isfinite(x)) return 0.0;
      return f(x) / (sc * sc);
    };
    return detail::adaptive(g, 0.0, 1.0, cfg);
  }

  auto g = [&](double x) -> double { return f(x); };
  return detail::adaptive(g, a, b, cfg);
}

/// Memoizes a scalar function by the exact bit pattern of its argument.
/// Nested integrals revisit the same inner nodes for every outer node, so
/// the cache turns repeated transform evaluations into lookups.
template <typename F>
class NodeCache {
public:
  explicit NodeCache(F f) : f_(std::move(f)) {}

  double operator()(double x) {
    const auto key = std::bit_cast<std::uint64_t>(x);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const double v = f_(x);
    cache_.emplace(key, v);
    return v;
  }

  std::size_t size() const { return cache_.size(); }

private:
  F f_;
  std::unordered_map<std::uint64_t, double> cache_;
};

} // namespace osi

#endif // OSI_QUADRATURE_HPP
