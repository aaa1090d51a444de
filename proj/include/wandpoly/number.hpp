#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "wandpoly/errors.hpp"

namespace wandpoly {

using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int, boost::multiprecision::et_off>;
using Rational =
    boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

enum class Order { less, equal, greater };

inline const char* to_string(Order o) {
  switch (o) {
    case Order::less: return "LT";
    case Order::equal: return "EQ";
    case Order::greater: return "GT";
  }
  return "?";
}

inline Rational ratio(const Integer& p, const Integer& q) {
  if (q == 0) throw InputError("zero denominator");
  return Rational(p, q);
}

inline Integer floor_of(const Rational& r) {
  const Integer n = boost::multiprecision::numerator(r);
  const Integer q = boost::multiprecision::denominator(r);
  Integer f = n / q;
  if (n < 0 && f * q != n) f -= 1;
  return f;
}

/// r mod 1, in [0, 1).
inline Rational mod_one(const Rational& r) { return r - Rational(floor_of(r)); }

inline Integer power(unsigned base, std::size_t exponent) {
  return boost::multiprecision::pow(Integer(base), static_cast<unsigned>(exponent));
}

/// "p/q", always with an explicit denominator.
inline std::string fraction_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

/// Decimal rendering rounded half-up to `places` digits. Non-authoritative.
inline std::string decimal_string(const Rational& r, unsigned places = 12) {
  const bool negative = r < 0;
  const Rational a = negative ? Rational(-r) : r;
  const Integer scale = power(10, places);
  const Integer n = floor_of(a * Rational(scale) + ratio(1, 2));
  const Integer whole = n / scale;
  std::string frac = Integer(n % scale).str();
  if (frac.size() < places) frac.insert(0, places - frac.size(), '0');
  std::string out = negative ? "-" : "";
  out += whole.str();
  if (places > 0) out += "." + frac;
  return out;
}

/// Maximum number of base-d digits any single angle may be expanded to.
struct PrecisionBudget {
  std::size_t max_digits = 4096;
};

/// Closed interval of rationals; degenerate intervals are exact values.
class Interval {
 public:
  Interval() = default;
  Interval(const Rational& x) : lo_(x), hi_(x) {}  // NOLINT(google-explicit-constructor)
  Interval(int x) : lo_(x), hi_(x) {}              // NOLINT(google-explicit-constructor)
  Interval(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (hi_ < lo_) throw Error("interval with upper < lower");
  }

  const Rational& lower() const { return lo_; }
  const Rational& upper() const { return hi_; }
  bool is_exact() const { return lo_ == hi_; }
  Rational width() const { return hi_ - lo_; }
  bool contains(const Rational& x) const { return lo_ <= x && x <= hi_; }

  /// The exact value; throws Unresolved if this is a proper interval.
  const Rational& value() const {
    if (!is_exact()) throw Unresolved("quantity is only known as an enclosure");
    return lo_;
  }

  friend Interval operator+(const Interval& a, const Interval& b) {
    return {a.lo_ + b.lo_, a.hi_ + b.hi_};
  }
  friend Interval operator-(const Interval& a, const Interval& b) {
    return {a.lo_ - b.hi_, a.hi_ - b.lo_};
  }
  friend Interval operator*(unsigned k, const Interval& a) {
    return {a.lo_ * k, a.hi_ * k};
  }
  friend Interval operator*(const Interval& a, unsigned k) { return k * a; }
  Interval& operator+=(const Interval& b) { return *this = *this + b; }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lo_ == b.lo_ && a.hi_ == b.hi_;
  }

 private:
  Rational lo_{0};
  Rational hi_{0};
};

/// Ordering of two enclosed quantities, or nullopt when the enclosures
/// overlap without both being the same exact value.
inline std::optional<Order> try_compare(const Interval& a, const Interval& b) {
  if (a.upper() < b.lower()) return Order::less;
  if (b.upper() < a.lower()) return Order::greater;
  if (a.is_exact() && b.is_exact() && a.lower() == b.lower()) return Order::equal;
  return std::nullopt;
}

inline Order compare(const Interval& a, const Interval& b) {
  if (auto o = try_compare(a, b)) return *o;
  throw Unresolved("enclosures overlap: [" + decimal_string(a.lower()) + ", " +
                   decimal_string(a.upper()) + "] vs [" + decimal_string(b.lower()) + ", " +
                   decimal_string(b.upper()) + "]");
}

inline bool less(const Interval& a, const Interval& b) { return compare(a, b) == Order::less; }

inline Interval min(const Interval& a, const Interval& b) {
  return {std::min(a.lower(), b.lower()), std::min(a.upper(), b.upper())};
}

inline Interval max(const Interval& a, const Interval& b) {
  return {std::max(a.lower(), b.lower()), std::max(a.upper(), b.upper())};
}

/// Integer part floor(x) when the enclosure decides it.
inline Integer floor_of(const Interval& x) {
  Integer lo = floor_of(x.lower());
  if (floor_of(x.upper()) != lo) {
    throw Unresolved("enclosure straddles an integer at " + decimal_string(x.upper()));
  }
  return lo;
}

/// Runs `attempt(digits)` at increasing expansion depths until it stops
/// throwing Unresolved or the budget is exhausted.
template <class F>
auto with_precision(const PrecisionBudget& budget, F&& attempt) {
  std::size_t digits = std::min<std::size_t>(64, budget.max_digits);
  for (;;) {
    try {
      return attempt(digits);
    } catch (const Unresolved&) {
      if (digits >= budget.max_digits) throw;
    }
    digits = std::min(digits * 4, budget.max_digits);
  }
}

}  // namespace wandpoly
