#pragma once

#include <compare>
#include <string>

#include "dpos/error.hpp"

namespace dpos {

/// A real number that may also be +inf or -inf.
///
/// Extended costs and prices use the infinite states to mark utilization
/// beyond capacity. Infinite values compare normally against finite ones, but
/// any arithmetic touching an infinite value throws Errc::infinite_arithmetic
/// instead of silently producing inf/NaN in welfare sums.
class ExtendedValue {
public:
  enum class Kind { finite, pos_inf, neg_inf };

  constexpr ExtendedValue() = default;
  constexpr ExtendedValue(double v) : value_(v) {}  // NOLINT(implicit)

  static constexpr ExtendedValue pos_infinity() { return ExtendedValue(Kind::pos_inf); }
  static constexpr ExtendedValue neg_infinity() { return ExtendedValue(Kind::neg_inf); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool finite() const { return kind_ == Kind::finite; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::pos_inf; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::neg_inf; }

  /// Finite payload; throws when called on an infinite value.
  double value() const {
    if (!finite()) {
      throw Error(Errc::infinite_arithmetic, "value() called on infinite sentinel");
    }
    return value_;
  }

  std::partial_ordering operator<=>(const ExtendedValue& other) const {
    const int lhs = rank(), rhs = other.rank();
    if (lhs != rhs) return lhs <=> rhs;
    if (!finite()) return std::partial_ordering::equivalent;
    return value_ <=> other.value_;
  }
  bool operator==(const ExtendedValue& other) const {
    return (*this <=> other) == std::partial_ordering::equivalent;
  }

  friend ExtendedValue operator+(const ExtendedValue& a, const ExtendedValue& b) {
    return ExtendedValue(a.value() + b.value());
  }
  friend ExtendedValue operator-(const ExtendedValue& a, const ExtendedValue& b) {
    return ExtendedValue(a.value() - b.value());
  }
  friend ExtendedValue operator*(const ExtendedValue& a, const ExtendedValue& b) {
    return ExtendedValue(a.value() * b.value());
  }

  std::string to_string() const;

private:
  constexpr explicit ExtendedValue(Kind k) : kind_(k) {}
  constexpr int rank() const { return kind_ == Kind::neg_inf ? -1 : (kind_ == Kind::pos_inf ? 1 : 0); }

  double value_ = 0.0;
  Kind kind_ = Kind::finite;
};

}  // namespace dpos
