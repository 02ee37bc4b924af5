#ifndef OSI_WEIGHTS_HPP
#define OSI_WEIGHTS_HPP

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "distributions.hpp"

namespace osi {

/// Coefficients (a_1, ..., a_m) of a linear order-statistic index
///   I_m = (1/(m mu)) * sum_k a_k E[X_{k:m}].
/// zero_sum records whether sum_k a_k = 0 was asserted at construction.
class WeightScheme {
public:
  WeightScheme(std::vector<double> a, std::string name, bool zero_sum, std::string tag = {})
      : a_(std::move(a)), name_(std::move(name)), tag_(std::move(tag)), zero_sum_(zero_sum) {
    if (a_.size() < 2) throw validation_error("weight scheme needs at least two coefficients");
    for (double v : a_)
      if (!std::isfinite(v)) throw validation_error("weight scheme: non-finite coefficient");
    if (zero_sum_ && std::abs(sum()) > zero_sum_tolerance) {
      std::ostringstream msg;
      msg << "weight scheme '" << name_ << "' asserted zero-sum but coefficients sum to " << sum();
      throw validation_error(msg.str());
    }
  }

  static constexpr double zero_sum_tolerance = 1e-12;

  int m() const noexcept { return static_cast<int>(a_.size()); }
  const std::vector<double>& a() const noexcept { return a_; }
  /// 1-based access, a(1) .. a(m).
  double a(int k) const { return a_.at(static_cast<std::size_t>(k - 1)); }
  const std::string& name() const noexcept { return name_; }
  const std::string& tag() const noexcept { return tag_; }
  bool zero_sum() const noexcept { return zero_sum_; }

  double sum() const { return std::accumulate(a_.begin(), a_.end(), 0.0); }

  bool nondecreasing() const {
    for (std::size_t i = 1; i < a_.size(); ++i)
      if (a_[i] < a_[i - 1]) return false;
    return true;
  }

private:
  std::vector<double> a_;
  std::string name_;
  std::string tag_;
  bool zero_sum_;
};

namespace detail {

inline double choose(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k));
}

// C(x, j) for real x with x - j + 1 > 0 and integer j >= 0, via log-gamma.
inline double choose_real(double x, int j) {
  if (j == 0) return 1.0;
  return std::exp(std::lgamma(x + 1.0) - std::lgamma(j + 1.0) - std::lgamma(x - j + 1.0));
}

inline void check_order(int m, const char* who) {
  if (m < 2) {
    std::ostringstream msg;
    msg << who << ": order m=" << m << " must be >= 2";
    throw domain_error(msg.str());
  }
}

} // namespace detail

/// Classical Gini: m = 2, a = (-1, 1).
inline WeightScheme gini() { return {{-1.0, 1.0}, "gini", true}; }

/// m-th Gini: a_1 = -1, a_m = 1, zeros between.
inline WeightScheme mth_gini(int m) {
  detail::check_order(m, "mth_gini");
  std::vector<double> a(static_cast<std::size_t>(m), 0.0);
  a.front() = -1.0;
  a.back() = 1.0;
  return {std::move(a), "mth:" + std::to_string(m), true};
}

/// Extended m-th Gini: a_j = -1, a_k = 1 for 1 <= j < k <= m.
inline WeightScheme extended_mth_gini(int m, int j, int k) {
  detail::check_order(m, "extended_mth_gini");
  if (!(1 <= j && j < k && k <= m)) {
    std::ostringstream msg;
    msg << "extended_mth_gini: need 1 <= j < k <= m, got j=" << j << " k=" << k << " m=" << m;
    throw domain_error(msg.str());
  }
  std::vector<double> a(static_cast<std::size_t>(m), 0.0);
  a[static_cast<std::size_t>(j - 1)] = -1.0;
  a[static_cast<std::size_t>(k - 1)] = 1.0;
  return {std::move(a), "ext:" + std::to_string(m) + "," + std::to_string(j) + "," + std::to_string(k), true};
}

enum class GiniSide { lower, upper };

/// Extended lower/upper Gini. lower: a_k = 1/m - [k == 1];
/// upper: a_k = [k == m] - 1/m. The index equals (mu - E X_{1:m})/(m mu),
/// resp. (E X_{m:m} - mu)/(m mu); the rank i only labels the scheme since
/// E[X_i] = mu for any single draw. Zero-sum is not asserted.
inline WeightScheme extended_lower_upper(int m, int i, GiniSide side) {
  detail::check_order(m, "extended_lower_upper");
  if (i < 1 || i > m) {
    std::ostringstream msg;
    msg << "extended_lower_upper: rank i=" << i << " outside 1.." << m;
    throw domain_error(msg.str());
  }
  const double inv = 1.0 / m;
  std::vector<double> a(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k) {
    if (side == GiniSide::lower)
      a[static_cast<std::size_t>(k - 1)] = inv - (k == 1 ? 1.0 : 0.0);
    else
      a[static_cast<std::size_t>(k - 1)] = (k == m ? 1.0 : 0.0) - inv;
  }
  const std::string name = std::string(side == GiniSide::lower ? "lower:" : "upper:") + std::to_string(m) + "," +
                           std::to_string(i);
  return {std::move(a), name, false};
}

/// S-Gini weights exactly as tabulated:
///   a_k = nu * [1 - C(m-k+nu-1, m-k) / C(m+nu-1, m)],  nu > 1.
/// These sum to m(nu-1), not zero; the scheme is tagged "table1-verbatim".
inline WeightScheme s_gini_table1(int m, double nu) {
  detail::check_order(m, "s_gini_table1");
  if (!(nu > 1.0) || !std::isfinite(nu)) {
    std::ostringstream msg;
    msg << "s_gini_table1: nu=" << nu << " must exceed 1";
    throw domain_error(msg.str());
  }
  const double denom = detail::choose_real(m + nu - 1.0, m);
  std::vector<double> a(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k)
    a[static_cast<std::size_t>(k - 1)] = nu * (1.0 - detail::choose_real(m - k + nu - 1.0, m - k) / denom);
  return {std::move(a), "sgini:" + std::to_string(m) + "," + format_shortest(nu), false, "table1-verbatim"};
}

/// S-Gini weights chosen so that I_m = 1 - E[X_{1:nu}]/mu:
///   a_k = 1 - m * C(m-k, nu-1) / C(m, nu),  2 <= nu <= m.
/// C(m-k, nu-1)/C(m, nu) is the chance that the k-th smallest of m is the
/// minimum of a random nu-subset.
inline WeightScheme s_gini_orderstat(int m, int nu) {
  detail::check_order(m, "s_gini_orderstat");
  if (nu < 2 || nu > m) {
    std::ostringstream msg;
    msg << "s_gini_orderstat: nu=" << nu << " outside 2.." << m;
    throw domain_error(msg.str());
  }
  const double denom = detail::choose(m, nu);
  std::vector<double> a(static_cast<std::size_t>(m));
  for (int k = 1; k <= m; ++k)
    a[static_cast<std::size_t>(k - 1)] = 1.0 - m * detail::choose(m - k, nu - 1) / denom;
  // Exact zero sum up to rounding; snap the residual onto a_1, which is
  // strictly below a_2, so monotonicity survives.
  double s = std::accumulate(a.begin(), a.end(), 0.0);
  a.front() -= s;
  return {std::move(a), "sginios:" + std::to_string(m) + "," + std::to_string(nu), true};
}

/// Arbitrary weights, wrapped verbatim.
inline WeightScheme custom(std::vector<double> a, bool assert_zero_sum) {
  std::string name = "custom:";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) name += ',';
    name += format_shortest(a[i]);
  }
  return {std::move(a), std::move(name), assert_zero_sum};
}

} // namespace osi

#endif // OSI_WEIGHTS_HPP
