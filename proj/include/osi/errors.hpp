#ifndef OSI_ERRORS_HPP
#define OSI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace osi {

/// Argument outside the mathematical domain of an operation (rank out of
/// range, u outside (0,1), non-positive parameter, ...).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A user-supplied object failed validation (zero-sum assertion, negative
/// sample entries, malformed distribution or weight strings, config keys).
class validation_error : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The requested evaluation route does not apply to the given input.
class unsupported_method : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// Combinatorial guard tripped (e.g. too many subsets to enumerate).
class size_error : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Numerical failure. Carries the last estimate and its error bound so a
/// caller can decide whether the partial result is still usable.
class numeric_error : public std::runtime_error {
public:
  numeric_error(const std::string& what, double last_value, double last_bound)
      : std::runtime_error(what), last_value_(last_value), last_bound_(last_bound) {}

  double last_value() const noexcept { return last_value_; }
  double last_bound() const noexcept { return last_bound_; }

private:
  double last_value_;
  double last_bound_;
};

} // namespace osi

#endif // OSI_ERRORS_HPP
