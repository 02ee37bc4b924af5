#ifndef OSI_ESTIMATOR_HPP
#define OSI_ESTIMATOR_HPP

// Sample estimator
//
//   I^_m = C(n,m)^{-1} sum_{|S|=m} sum_k a_k X_{k:S}  /  (m * Xbar),
//
// with I^_m = 0 when every observation is zero. Three evaluation routes:
//
//   enumerate  walks all C(n,m) subsets (test oracle, guarded)
//   fast       sorted-sample identity: the j-th smallest value is the k-th
//              order statistic of exactly C(j-1,k-1) C(n-j,m-k) subsets
//   subsample  average over B uniformly drawn m-subsets

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <vector>

#include "distributions.hpp"
#include "errors.hpp"
#include "random.hpp"
#include "weights.hpp"

namespace osi {

/// Non-negative finite observations.
class Sample {
public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw validation_error("sample: no observations");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0) {
        std::ostringstream msg;
        msg << "sample: observation " << i << " (" << values_[i] << ") must be finite and >= 0";
        throw validation_error(msg.str());
      }
    }
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t n() const noexcept { return values_.size(); }

private:
  std::vector<double> values_;
};

enum class EstimatorMethod { enumerate, fast, subsample };

inline const char* estimator_method_name(EstimatorMethod m) {
  switch (m) {
    case EstimatorMethod::enumerate: return "enumerate";
    case EstimatorMethod::fast: return "fast";
    case EstimatorMethod::subsample: return "subsample";
  }
  return "?";
}

struct EstimateValue {
  double value = 0.0;
  EstimatorMethod method = EstimatorMethod::fast;
  /// Number of m-subsets averaged (C(n,m) for the exact routes).
  double subsets_used = 0.0;
  WeightScheme scheme;
};

namespace detail {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0, comp_ = 0.0;
};

inline double compensated_total(std::span<const double> xs) {
  CompensatedSum s;
  for (double x : xs) s.add(x);
  return s.value();
}

inline void check_n(std::size_t n, int m) {
  if (n < static_cast<std::size_t>(m)) {
    std::ostringstream msg;
    msg << "estimator needs n >= m (n=" << n << ", m=" << m << ")";
    throw domain_error(msg.str());
  }
}

// sum_k a_k x_(k) for an already sorted m-subset.
inline double contrast(std::span<const double> sorted_subset, const WeightScheme& w) {
  double s = 0.0;
  for (std::size_t k = 0; k < sorted_subset.size(); ++k) s += w.a()[k] * sorted_subset[k];
  return s;
}

} // namespace detail

/// Precomputed sorted-sample weights for a fixed (n, scheme):
///   coef_j = sum_k a_k C(j-1,k-1) C(n-j,m-k) / C(n,m),  j = 1..n,
/// so that I^_m = sum_j coef_j X_(j) / (m Xbar). Reusable across replications.
class FastEstimator {
public:
  FastEstimator(std::size_t n, const WeightScheme& w) : n_(n), m_(w.m()), coef_(n, 0.0) {
    detail::check_n(n, m_);
    const double dn = static_cast<double>(n);
    for (int k = 1; k <= m_; ++k) {
      const double a = w.a(k);
      if (a == 0.0) continue;
      // p_{k,k} = C(n-k, m-k) / C(n,m) = prod_{i<k} (m-i)/(n-i)
      double p = 1.0;
      for (int i = 0; i < k; ++i) p *= (m_ - i) / (dn - i);
      const std::size_t first = static_cast<std::size_t>(k);
      const std::size_t last = n - static_cast<std::size_t>(m_ - k);
      if (p < 1e-280) {
        for (std::size_t j = first; j <= last; ++j) coef_[j - 1] += a * std::exp(log_share(j, k));
        continue;
      }
      for (std::size_t j = first; j <= last; ++j) {
        coef_[j - 1] += a * p;
        // p_{j+1,k} = p_{j,k} * j/(j-k+1) * (n-j-m+k)/(n-j)
        const double jd = static_cast<double>(j);
        p *= jd / (jd - k + 1.0) * (dn - jd - m_ + k) / (dn - jd);
      }
    }
  }

  std::size_t n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  const std::vector<double>& coefficients() const noexcept { return coef_; }

  /// Estimate from values already sorted ascending.
  double from_sorted(std::span<const double> sorted) const {
    if (sorted.size() != n_) throw domain_error("FastEstimator: sample size mismatch");
    detail::CompensatedSum num, tot;
    for (std::size_t j = 0; j < n_; ++j) {
      num.add(coef_[j] * sorted[j]);
      tot.add(sorted[j]);
    }
    const double total = tot.value();
    if (total == 0.0) return 0.0;
    const double xbar = total / static_cast<double>(n_);
    return num.value() / (m_ * xbar);
  }

  /// Sorts `scratch` in place and evaluates.
  double from_unsorted(std::span<double> scratch) const {
    std::sort(scratch.begin(), scratch.end());
    return from_sorted(scratch);
  }

private:
  double log_share(std::size_t j, int k) const {
    auto lc = [](double a, double b) { return std::lgamma(a + 1) - std::lgamma(b + 1) - std::lgamma(a - b + 1); };
    const double jd = static_cast<double>(j), nd = static_cast<double>(n_);
    return lc(jd - 1, k - 1) + lc(nd - jd, m_ - k) - lc(nd, m_);
  }

  std::size_t n_;
  int m_;
  std::vector<double> coef_;
};

inline double binomial_count(std::size_t n, int m) {
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(m + 1.0) - std::lgamma(n - m + 1.0)));
}

inline constexpr double enumerate_limit = 1e7;

/// Direct transcription over all m-subsets in lexicographic order.
inline EstimateValue estimate_enumerate(const Sample& s, const WeightScheme& w) {
  const std::size_t n = s.n();
  const int m = w.m();
  detail::check_n(n, m);
  const double count = binomial_count(n, m);
  if (count > enumerate_limit) {
    std::ostringstream msg;
    msg << "estimate_enumerate: C(" << n << "," << m << ") = " << count << " subsets exceeds the limit of "
        << enumerate_limit;
    throw size_error(msg.str());
  }
  const auto xs = s.values();
  const double total = detail::compensated_total(xs);
  if (total == 0.0) return {0.0, EstimatorMethod::enumerate, count, w};

  std::vector<std::size_t> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::vector<double> subset(static_cast<std::size_t>(m));
  detail::CompensatedSum acc;
  while (true) {
    for (int i = 0; i < m; ++i) subset[static_cast<std::size_t>(i)] = xs[idx[static_cast<std::size_t>(i)]];
    std::sort(subset.begin(), subset.end());
    acc.add(detail::contrast(subset, w));
    // next combination
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - static_cast<std::size_t>(m - i)) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  const double xbar = total / static_cast<double>(n);
  return {acc.value() / count / (m * xbar), EstimatorMethod::enumerate, count, w};
}

/// Exact value through the sorted-sample identity, O(n log n + n m).
inline EstimateValue estimate_fast(const Sample& s, const WeightScheme& w) {
  FastEstimator fe(s.n(), w);
  std::vector<double> sorted(s.values().begin(), s.values().end());
  return {fe.from_unsorted(sorted), EstimatorMethod::fast, binomial_count(s.n(), w.m()), w};
}

namespace detail {

// Sum of contrasts over `draws` uniform m-subsets. Each draw is a partial
// Fisher-Yates shuffle of `perm`, which stays a permutation between draws.
inline double subsample_contrast_sum(std::span<const double> xs, const WeightScheme& w, std::size_t draws,
                                     std::vector<std::size_t>& perm, Rng& rng) {
  const std::size_t n = xs.size();
  const int m = w.m();
  std::vector<double> subset(static_cast<std::size_t>(m));
  CompensatedSum acc;
  for (std::size_t b = 0; b < draws; ++b) {
    for (int i = 0; i < m; ++i) {
      const std::size_t ii = static_cast<std::size_t>(i);
      std::uniform_int_distribution<std::size_t> pick(ii, n - 1);
      std::swap(perm[ii], perm[pick(rng)]);
      subset[ii] = xs[perm[ii]];
    }
    std::sort(subset.begin(), subset.end());
    acc.add(contrast(subset, w));
  }
  return acc.value();
}

} // namespace detail

/// Random-subsample approximation with a caller-owned generator (sequential).
/// Subsets are drawn independently, i.e. with replacement across draws.
inline double estimate_subsample_value(std::span<const double> xs, const WeightScheme& w, std::size_t B, Rng& rng) {
  detail::check_n(xs.size(), w.m());
  if (B < 1) throw domain_error("estimate_subsample: B must be >= 1");
  const double total = detail::compensated_total(xs);
  if (total == 0.0) return 0.0;
  std::vector<std::size_t> perm(xs.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const double sum = detail::subsample_contrast_sum(xs, w, B, perm, rng);
  const double xbar = total / static_cast<double>(xs.size());
  return sum / static_cast<double>(B) / (w.m() * xbar);
}

/// Random-subsample approximation driven by a master seed. Draws are split
/// into fixed chunks with derived streams, so the value does not depend on
/// the worker count.
inline EstimateValue estimate_subsample(const Sample& s, const WeightScheme& w, std::size_t B, std::uint64_t seed) {
  const auto xs = s.values();
  detail::check_n(xs.size(), w.m());
  if (B < 1) throw domain_error("estimate_subsample: B must be >= 1");
  const double total = detail::compensated_total(xs);
  if (total == 0.0) return {0.0, EstimatorMethod::subsample, static_cast<double>(B), w};

  constexpr std::size_t chunk = 1024;
  const std::size_t chunks = (B + chunk - 1) / chunk;
  std::vector<double> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_rng(seed, {0x5B, c});
    std::vector<std::size_t> perm(xs.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    const std::size_t draws = std::min(B, (c + 1) * chunk) - c * chunk;
    partial[c] = detail::subsample_contrast_sum(xs, w, draws, perm, rng);
  });
  const double sum = detail::compensated_total(partial);
  const double xbar = total / static_cast<double>(xs.size());
  return {sum / static_cast<double>(B) / (w.m() * xbar), EstimatorMethod::subsample, static_cast<double>(B), w};
}

/// True iff the fast estimate of c*s matches that of s within 1e-12.
inline bool scale_invariance_check(const Sample& s, const WeightScheme& w, double c) {
  if (!(c > 0)) throw domain_error("scale_invariance_check: c must be positive");
  std::vector<double> scaled(s.values().begin(), s.values().end());
  for (auto& x : scaled) x *= c;
  const double base = estimate_fast(s, w).value;
  const double other = estimate_fast(Sample(std::move(scaled)), w).value;
  return std::abs(base - other) <= 1e-12;
}

} // namespace osi

#endif // OSI_ESTIMATOR_HPP
