#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "wandpoly/errors.hpp"
#include "wandpoly/generators.hpp"
#include "wandpoly/number.hpp"

namespace wandpoly {

/// Eventually periodic base-d expansion 0.pre(period)(period)...
struct PeriodicStream {
  unsigned base = 2;
  std::vector<std::uint8_t> pre;
  std::vector<std::uint8_t> period;  // never empty
  Rational value;                    // in [0, 1)
};

/// Digits produced by a registered generator, optionally overridden at finitely
/// many absolute positions and read starting at `offset`.
struct GeneratedStream {
  std::shared_ptr<const GeneratorInfo> info;
  std::map<std::uint64_t, std::uint8_t> overrides;  // absolute positions >= offset
  std::uint64_t offset = 0;

  unsigned base() const { return info->base; }

  /// t-th digit after the radix point of this angle.
  unsigned digit(std::uint64_t t) const {
    const std::uint64_t pos = offset + t;
    if (!overrides.empty()) {
      if (auto it = overrides.find(pos); it != overrides.end()) return it->second;
    }
    return info->source->digit(pos);
  }
};

/// A point of the circle, measured in full turns, in [0, 1).
class Angle {
 public:
  Angle() : rep_(Rational(0)) {}
  explicit Angle(const Rational& value) : rep_(mod_one(value)) {}

  static Angle periodic(unsigned base, std::vector<std::uint8_t> pre,
                        std::vector<std::uint8_t> period) {
    if (base < 2) throw ParseError("stream base must be at least 2");
    if (period.empty()) throw ParseError("empty period");
    for (auto d : pre)
      if (d >= base) throw ParseError("digit exceeds base");
    for (auto d : period)
      if (d >= base) throw ParseError("digit exceeds base");
    PeriodicStream s{base, std::move(pre), std::move(period), Rational(0)};
    Integer p = 0;
    for (auto d : s.pre) p = p * base + d;
    Integer q = 0;
    for (auto d : s.period) q = q * base + d;
    const Integer period_den = power(base, s.period.size()) - 1;
    const Integer pre_den = power(base, s.pre.size());
    s.value = mod_one((Rational(p) + ratio(q, period_den)) / Rational(pre_den));
    Angle a;
    a.rep_ = std::move(s);
    return a;
  }

  static Angle generated(std::shared_ptr<const GeneratorInfo> info,
                         std::map<std::uint64_t, std::uint8_t> overrides, std::uint64_t offset) {
    GeneratedStream s{std::move(info), {}, offset};
    for (auto [pos, digit] : overrides) {
      if (digit >= s.base()) throw ParseError("override digit exceeds base");
      if (pos < offset) continue;
      if (s.info->source->digit(pos) == digit) continue;
      s.overrides.emplace(pos, digit);
    }
    Angle a;
    a.rep_ = std::move(s);
    return a;
  }

  bool is_exact() const { return !std::holds_alternative<GeneratedStream>(rep_); }

  const Rational& exact_value() const {
    if (auto r = std::get_if<Rational>(&rep_)) return *r;
    if (auto p = std::get_if<PeriodicStream>(&rep_)) return p->value;
    throw Unresolved("generated stream has no exact rational value");
  }

  const Rational* rational() const { return std::get_if<Rational>(&rep_); }
  const PeriodicStream* periodic_stream() const { return std::get_if<PeriodicStream>(&rep_); }
  const GeneratedStream* generated_stream() const { return std::get_if<GeneratedStream>(&rep_); }

  /// Base of the digit representation, if any.
  std::optional<unsigned> base() const {
    if (auto p = periodic_stream()) return p->base;
    if (auto g = generated_stream()) return g->base();
    return std::nullopt;
  }

 private:
  std::variant<Rational, PeriodicStream, GeneratedStream> rep_;
};

/// Arc [lower, lower + width) known to contain an angle.
struct AngleEnclosure {
  Rational lower;
  Rational width;
};

namespace detail {

inline int digit_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'z') return c - 'a' + 10;
  return -1;
}

inline char digit_char(unsigned d) {
  return static_cast<char>(d < 10 ? '0' + d : 'a' + (d - 10));
}

inline Integer parse_integer(std::string_view text, const char* what) {
  std::string_view digits = text;
  if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) digits.remove_prefix(1);
  if (digits.empty()) throw ParseError(std::string("empty ") + what);
  for (char c : digits)
    if (c < '0' || c > '9') throw ParseError(std::string("malformed ") + what + ": " + std::string(text));
  return Integer(std::string(text[0] == '+' ? text.substr(1) : text));
}

inline std::uint64_t parse_u64(std::string_view text, const char* what) {
  Integer v = parse_integer(text, what);
  if (v < 0 || v > Integer(std::numeric_limits<std::uint64_t>::max()))
    throw ParseError(std::string(what) + " out of range: " + std::string(text));
  return v.convert_to<std::uint64_t>();
}

inline std::vector<std::uint8_t> parse_digits(std::string_view text, unsigned base) {
  std::vector<std::uint8_t> out;
  out.reserve(text.size());
  for (char c : text) {
    int v = digit_value(c);
    if (v < 0) throw ParseError(std::string("malformed digit '") + c + "'");
    if (static_cast<unsigned>(v) >= base)
      throw ParseError(std::string("digit '") + c + "' is not below base " + std::to_string(base));
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace detail

/// Parses "p/q", "d:digits", "d:pre(period)", a decimal "0.45", or
/// "gen:name?d=..&k=v&at<pos>=<digit>&shift=<n>".
inline Angle parse_angle(std::string_view text,
                         GeneratorRegistry& registry = GeneratorRegistry::global()) {
  if (text.empty()) throw ParseError("empty angle literal");
  if (text.substr(0, 4) == "gen:") {
    std::string_view rest = text.substr(4);
    std::string_view name = rest;
    std::string_view query;
    if (auto q = rest.find('?'); q != std::string_view::npos) {
      name = rest.substr(0, q);
      query = rest.substr(q + 1);
    }
    if (name.empty()) throw ParseError("missing generator name");
    GeneratorParams params;
    std::map<std::uint64_t, std::uint8_t> raw_overrides;
    std::optional<unsigned> base;
    std::uint64_t shift = 0;
    while (!query.empty()) {
      auto amp = query.find('&');
      std::string_view item = query.substr(0, amp);
      query = amp == std::string_view::npos ? std::string_view{} : query.substr(amp + 1);
      auto eq = item.find('=');
      if (eq == std::string_view::npos || eq == 0) throw ParseError("malformed generator parameter: " + std::string(item));
      std::string key(item.substr(0, eq));
      std::string value(item.substr(eq + 1));
      if (key == "d") {
        base = static_cast<unsigned>(detail::parse_u64(value, "base"));
      } else if (key == "shift") {
        shift = detail::parse_u64(value, "shift");
      } else if (key.size() > 2 && key.substr(0, 2) == "at" &&
                 key.find_first_not_of("0123456789", 2) == std::string::npos) {
        auto pos = detail::parse_u64(std::string_view(key).substr(2), "override position");
        raw_overrides[pos] = static_cast<std::uint8_t>(std::min<std::uint64_t>(255, detail::parse_u64(value, "override digit")));
      } else {
        if (params.count(key)) throw ParseError("duplicate generator parameter: " + key);
        params.emplace(std::move(key), std::move(value));
      }
    }
    if (!base) throw ParseError("generator literal requires d=<base>");
    auto info = registry.make(std::string(name), *base, params);
    return Angle::generated(std::move(info), raw_overrides, shift);
  }

  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    auto base_u = detail::parse_u64(text.substr(0, colon), "base");
    if (base_u < 2 || base_u > 36) throw ParseError("stream base must be in [2, 36]");
    const auto base = static_cast<unsigned>(base_u);
    std::string_view body = text.substr(colon + 1);
    if (body.empty()) throw ParseError("empty digit stream");
    auto open = body.find('(');
    if (open == std::string_view::npos) {
      if (body.find(')') != std::string_view::npos) throw ParseError("unbalanced ')' in stream");
      return Angle::periodic(base, detail::parse_digits(body, base), {0});
    }
    if (body.back() != ')' || body.find('(', open + 1) != std::string_view::npos ||
        body.find(')') != body.size() - 1)
      throw ParseError("malformed periodic stream: " + std::string(text));
    auto pre = detail::parse_digits(body.substr(0, open), base);
    auto period = detail::parse_digits(body.substr(open + 1, body.size() - open - 2), base);
    if (period.empty()) throw ParseError("empty period in stream: " + std::string(text));
    return Angle::periodic(base, std::move(pre), std::move(period));
  }

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer p = detail::parse_integer(text.substr(0, slash), "numerator");
    Integer q = detail::parse_integer(text.substr(slash + 1), "denominator");
    if (q == 0) throw ParseError("zero denominator: " + std::string(text));
    if (q < 0) {
      p = -p;
      q = -q;
    }
    return Angle(ratio(p, q));
  }

  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    Integer whole = dot == 0 ? Integer(0) : detail::parse_integer(text.substr(0, dot), "decimal");
    std::string_view frac = text.substr(dot + 1);
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string_view::npos)
      throw ParseError("malformed decimal: " + std::string(text));
    Integer f{std::string(frac)};
    return Angle(Rational(whole) + ratio(f, power(10, frac.size())));
  }

  if (text.find_first_not_of("0123456789") == std::string_view::npos)
    return Angle(Rational(detail::parse_integer(text, "integer")));
  throw ParseError("malformed angle literal: " + std::string(text));
}

/// Canonical text: "p/q", "d:pre(period)" or "gen:...". Reparses to an equal angle.
inline std::string to_string(const Angle& a) {
  if (auto r = a.rational()) return fraction_string(*r);
  if (auto p = a.periodic_stream()) {
    std::string s = std::to_string(p->base) + ":";
    for (auto d : p->pre) s += detail::digit_char(d);
    s += "(";
    for (auto d : p->period) s += detail::digit_char(d);
    return s + ")";
  }
  const auto& g = *a.generated_stream();
  std::string s = "gen:" + g.info->name + "?d=" + std::to_string(g.base());
  for (const auto& [k, v] : g.info->params) s += "&" + k + "=" + v;
  for (const auto& [pos, digit] : g.overrides)
    s += "&at" + std::to_string(pos) + "=" + std::to_string(digit);
  if (g.offset != 0) s += "&shift=" + std::to_string(g.offset);
  return s;
}

inline std::ostream& operator<<(std::ostream& os, const Angle& a) { return os << to_string(a); }

inline void require_base(const Angle& a, unsigned d) {
  if (auto b = a.base(); b && *b != d)
    throw BaseMismatch("stream of base " + std::to_string(*b) + " used with degree " + std::to_string(d));
}

/// f^n(a) for f(θ) = dθ mod 1.
inline Angle iterate_angle(const Angle& a, unsigned d, std::uint64_t n) {
  if (d < 2) throw PreconditionError("degree must be at least 2");
  require_base(a, d);
  if (n == 0) return a;
  if (auto r = a.rational()) {
    const Integer p = boost::multiprecision::numerator(*r);
    const Integer q = boost::multiprecision::denominator(*r);
    const Integer e = boost::multiprecision::powm(Integer(d), Integer(n), q);
    return Angle(ratio((p * e) % q, q));
  }
  if (auto s = a.periodic_stream()) {
    std::vector<std::uint8_t> pre = s->pre;
    std::vector<std::uint8_t> period = s->period;
    if (n <= pre.size()) {
      pre.erase(pre.begin(), pre.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
      const auto k = static_cast<std::size_t>((n - pre.size()) % period.size());
      pre.clear();
      std::rotate(period.begin(), period.begin() + static_cast<std::ptrdiff_t>(k), period.end());
    }
    return Angle::periodic(s->base, std::move(pre), std::move(period));
  }
  const auto& g = *a.generated_stream();
  return Angle::generated(g.info, g.overrides, g.offset + n);
}

/// f(a) = d·a mod 1; streams shift left by one digit.
inline Angle map_angle(const Angle& a, unsigned d) { return iterate_angle(a, d, 1); }

/// a + j/d mod 1. On digit streams this only touches the first digit.
inline Angle rotate(const Angle& a, unsigned j, unsigned d) {
  require_base(a, d);
  j %= d;
  if (j == 0) return a;
  if (auto r = a.rational()) return Angle(*r + ratio(j, d));
  if (auto s = a.periodic_stream()) {
    std::vector<std::uint8_t> pre = s->pre;
    std::vector<std::uint8_t> period = s->period;
    if (pre.empty()) {
      pre.push_back(period.front());
      std::rotate(period.begin(), period.begin() + 1, period.end());
    }
    pre.front() = static_cast<std::uint8_t>((pre.front() + j) % d);
    return Angle::periodic(s->base, std::move(pre), std::move(period));
  }
  const auto& g = *a.generated_stream();
  auto overrides = g.overrides;
  overrides[g.offset] = static_cast<std::uint8_t>((g.digit(0) + j) % d);
  return Angle::generated(g.info, std::move(overrides), g.offset);
}

namespace detail {

/// Sequential reader of the base-d expansion of an angle. Exact values use
/// their canonical (non-terminating-in-(d-1)) expansion.
class DigitCursor {
 public:
  DigitCursor(const Angle& a, unsigned base) : base_(base) {
    if (auto g = a.generated_stream()) {
      stream_ = g;
      next_override_ = g->overrides.lower_bound(g->offset);
    } else {
      const Rational& v = a.exact_value();
      rem_ = boost::multiprecision::numerator(v);
      den_ = boost::multiprecision::denominator(v);
    }
  }

  unsigned next() {
    if (stream_) {
      const std::uint64_t pos = stream_->offset + t_++;
      if (next_override_ != stream_->overrides.end() && next_override_->first == pos) {
        return (next_override_++)->second;
      }
      return stream_->info->source->digit(pos);
    }
    rem_ *= base_;
    Integer digit = rem_ / den_;
    rem_ -= digit * den_;
    return digit.convert_to<unsigned>();
  }

 private:
  unsigned base_;
  const GeneratedStream* stream_ = nullptr;
  std::map<std::uint64_t, std::uint8_t>::const_iterator next_override_;
  std::uint64_t t_ = 0;
  Integer rem_;
  Integer den_{1};
};

/// Sum of the first k digits as the integer numerator over base^k.
inline Integer prefix_numerator(const Angle& a, unsigned base, std::size_t k) {
  DigitCursor cursor(a, base);
  unsigned chunk_len = 0;
  std::uint64_t chunk_cap = 1;
  while (chunk_cap <= std::numeric_limits<std::uint64_t>::max() / base / base) {
    chunk_cap *= base;
    ++chunk_len;
  }
  const Integer chunk_scale(chunk_cap);
  Integer m = 0;
  std::size_t done = 0;
  while (done < k) {
    const std::size_t take = std::min<std::size_t>(chunk_len, k - done);
    std::uint64_t chunk = 0;
    std::uint64_t scale = 1;
    for (std::size_t i = 0; i < take; ++i) {
      chunk = chunk * base + cursor.next();
      scale *= base;
    }
    m *= (take == chunk_len ? chunk_scale : Integer(scale));
    m += chunk;
    done += take;
  }
  return m;
}

inline bool same_generator(const GeneratedStream& a, const GeneratedStream& b) {
  return a.info == b.info || a.info->key == b.info->key;
}

}  // namespace detail

/// Exact a - b (not reduced mod 1) when it is computable without a budget:
/// both values exact, or two streams of one generator that differ at finitely
/// many positions.
inline std::optional<Rational> exact_difference(const Angle& a, const Angle& b) {
  if (a.is_exact() && b.is_exact()) return a.exact_value() - b.exact_value();
  const auto* ga = a.generated_stream();
  const auto* gb = b.generated_stream();
  if (!ga || !gb || !detail::same_generator(*ga, *gb) || ga->offset != gb->offset) return std::nullopt;
  std::uint64_t last = 0;
  bool any = false;
  auto note = [&](std::uint64_t pos) {
    last = any ? std::max(last, pos) : pos;
    any = true;
  };
  for (const auto& [pos, d] : ga->overrides)
    if (ga->digit(pos - ga->offset) != gb->digit(pos - gb->offset)) note(pos);
  for (const auto& [pos, d] : gb->overrides)
    if (ga->digit(pos - ga->offset) != gb->digit(pos - gb->offset)) note(pos);
  if (!any) return Rational(0);
  const std::size_t len = static_cast<std::size_t>(last - ga->offset + 1);
  const unsigned base = ga->base();
  Integer diff = detail::prefix_numerator(a, base, len) - detail::prefix_numerator(b, base, len);
  return ratio(diff, power(base, len));
}

/// Orders two angles in [0, 1). Exact for rational or eventually periodic
/// operands; generated streams are resolved digit by digit within `budget`.
inline Order compare(const Angle& a, const Angle& b, const PrecisionBudget& budget = {}) {
  if (a.is_exact() && b.is_exact()) {
    const Rational& x = a.exact_value();
    const Rational& y = b.exact_value();
    return x < y ? Order::less : (y < x ? Order::greater : Order::equal);
  }
  const unsigned base = a.generated_stream() ? a.generated_stream()->base() : b.generated_stream()->base();
  if (auto bb = a.base(); bb && !a.is_exact() && *bb != base) throw BaseMismatch("streams of different bases");
  if (auto bb = b.base(); bb && !b.is_exact() && *bb != base) throw BaseMismatch("streams of different bases");
  if (auto diff = exact_difference(a, b)) {
    return *diff < 0 ? Order::less : (*diff > 0 ? Order::greater : Order::equal);
  }

  detail::DigitCursor ca(a, base);
  detail::DigitCursor cb(b, base);
  const std::size_t limit = budget.max_digits;
  for (std::size_t k = 0; k < limit; ++k) {
    const unsigned x = ca.next();
    const unsigned y = cb.next();
    if (x == y) continue;
    // First difference at k. A gap of 1 can still close if the larger side
    // continues with zeros forever while the smaller continues with base-1.
    const bool a_larger = x > y;
    const unsigned gap = a_larger ? x - y : y - x;
    const Order larger = a_larger ? Order::greater : Order::less;
    if (gap >= 2) return larger;
    for (std::size_t j = k + 1; j < limit; ++j) {
      const unsigned xa = ca.next();
      const unsigned yb = cb.next();
      const unsigned hi = a_larger ? xa : yb;
      const unsigned lo = a_larger ? yb : xa;
      if (hi > 0 || lo + 1 < base) return larger;
    }
    throw Unresolved("comparison undecided within " + std::to_string(limit) + " digits");
  }
  throw Unresolved("identical " + std::to_string(limit) + "-digit prefixes: " + to_string(a) + " vs " +
                   to_string(b));
}

inline bool equal(const Angle& a, const Angle& b, const PrecisionBudget& budget = {}) {
  return compare(a, b, budget) == Order::equal;
}

/// Closed rational enclosure of the angle using `digits` digits of a generated
/// stream; exact values are returned as degenerate intervals.
inline Interval enclosure(const Angle& a, std::size_t digits) {
  if (a.is_exact()) return Interval(a.exact_value());
  const unsigned base = a.generated_stream()->base();
  const Integer m = detail::prefix_numerator(a, base, digits);
  const Integer den = power(base, digits);
  return {ratio(m, den), ratio(m + 1, den)};
}

/// Prefix enclosure of width base^-k for streams; width 0 for plain rationals.
inline AngleEnclosure refine(const Angle& a, std::size_t k) {
  if (k == 0) throw PreconditionError("refine needs k >= 1");
  if (a.rational()) return {*a.rational(), Rational(0)};
  const unsigned base = *a.base();
  const Integer den = power(base, k);
  return {ratio(detail::prefix_numerator(a, base, k), den), ratio(1, den)};
}

/// Length of the counterclockwise arc [u, w], in [0, 1); enclosure precision
/// `digits` is used only when the difference is not exactly computable.
inline Interval arc_length_at(const Angle& u, const Angle& w, std::size_t digits,
                              const PrecisionBudget& budget) {
  if (auto diff = exact_difference(w, u)) return Interval(mod_one(*diff));
  const Order order = compare(u, w, budget);
  if (order == Order::equal) return Interval(Rational(0));
  const Interval eu = enclosure(u, digits);
  const Interval ew = enclosure(w, digits);
  const Rational zero(0);
  const Rational one(1);
  if (order == Order::less) {
    return {std::max(zero, ew.lower() - eu.upper()), std::min(one, ew.upper() - eu.lower())};
  }
  return {std::max(zero, one - (eu.upper() - ew.lower())), std::min(one, one - (eu.lower() - ew.upper()))};
}

inline Interval arc_length(const Angle& u, const Angle& w, const PrecisionBudget& budget = {}) {
  return with_precision(budget, [&](std::size_t digits) {
    Interval len = arc_length_at(u, w, digits, budget);
    return len;
  });
}

/// Compares the counterclockwise positions of x and y as seen from `base`.
inline Order ccw_compare(const Angle& from, const Angle& x, const Angle& y, const PrecisionBudget& budget) {
  const bool x_wraps = compare(x, from, budget) == Order::less;
  const bool y_wraps = compare(y, from, budget) == Order::less;
  if (x_wraps != y_wraps) return x_wraps ? Order::greater : Order::less;
  return compare(x, y, budget);
}

/// x in the open counterclockwise arc (from, to); from == to means the circle minus a point.
inline bool in_open_arc(const Angle& x, const Angle& from, const Angle& to, const PrecisionBudget& budget) {
  if (equal(x, from, budget)) return false;
  if (equal(from, to, budget)) return true;
  return ccw_compare(from, x, to, budget) == Order::less;
}

/// x in the closed counterclockwise arc [from, to]; from == to is a single point.
inline bool in_closed_arc(const Angle& x, const Angle& from, const Angle& to, const PrecisionBudget& budget) {
  if (equal(x, from, budget) || equal(x, to, budget)) return true;
  if (equal(from, to, budget)) return false;
  return ccw_compare(from, x, to, budget) == Order::less;
}

}  // namespace wandpoly
