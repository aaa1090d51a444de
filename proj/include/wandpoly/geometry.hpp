#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wandpoly/angle.hpp"
#include "wandpoly/errors.hpp"
#include "wandpoly/number.hpp"

namespace wandpoly {

/// Unordered pair of angles; equal endpoints make a degenerate chord (a point).
struct Chord {
  Angle first;
  Angle second;

  bool degenerate(const PrecisionBudget& budget = {}) const { return equal(first, second, budget); }
};

inline bool same_chord(const Chord& a, const Chord& b, const PrecisionBudget& budget = {}) {
  return (equal(a.first, b.first, budget) && equal(a.second, b.second, budget)) ||
         (equal(a.first, b.second, budget) && equal(a.second, b.first, budget));
}

/// Open counterclockwise arc (from, to).
struct Arc {
  Angle from;
  Angle to;
};

/// Distinct angles in increasing order, i.e. counterclockwise from 0.
class Polygon {
 public:
  static Polygon from_angles(std::vector<Angle> angles, const PrecisionBudget& budget = {}) {
    if (angles.size() < 2) throw PreconditionError("a polygon needs at least two vertices");
    std::sort(angles.begin(), angles.end(),
              [&](const Angle& a, const Angle& b) { return compare(a, b, budget) == Order::less; });
    for (std::size_t i = 1; i < angles.size(); ++i) {
      if (equal(angles[i - 1], angles[i], budget))
        throw PreconditionError("duplicate vertex " + to_string(angles[i]));
    }
    Polygon p;
    p.vertices_ = std::move(angles);
    return p;
  }

  static Polygon parse(const std::vector<std::string>& literals, const PrecisionBudget& budget = {}) {
    std::vector<Angle> angles;
    angles.reserve(literals.size());
    for (const auto& s : literals) angles.push_back(parse_angle(s));
    return from_angles(std::move(angles), budget);
  }

  std::size_t size() const { return vertices_.size(); }
  const Angle& operator[](std::size_t i) const { return vertices_[i]; }
  const std::vector<Angle>& vertices() const { return vertices_; }

 private:
  std::vector<Angle> vertices_;
};

/// s - j/d for the largest integer j with j/d <= s.
inline Rational remainder(const Rational& s, unsigned d) {
  if (s < 0 || s > 1) throw PreconditionError("length outside [0, 1]");
  return s - ratio(floor_of(s * d), d);
}

inline Interval remainder(const Interval& s, unsigned d) {
  const Integer j = floor_of(d * s);
  return s - Interval(ratio(j, d));
}

/// A component of the circle minus the vertices, from vertex `position`
/// to the next vertex counterclockwise.
struct Hole {
  std::size_t position = 0;
  Angle from;
  Angle to;
  Interval length;
  Interval remainder;
  unsigned multiple = 0;  // floor(d * length)

  Arc arc() const { return {from, to}; }
  Chord edge() const { return {from, to}; }
};

struct HoleProfile {
  unsigned degree = 2;
  std::size_t digits = 0;            // expansion depth used for enclosures
  std::vector<Hole> holes;           // cyclic order
  std::vector<std::size_t> label_map;  // size rank (0-based) -> cyclic position
  std::vector<std::size_t> rank_of;    // cyclic position -> size rank (1-based)

  std::size_t size() const { return holes.size(); }
  /// Hole H_k, k = 1 being the smallest.
  const Hole& ranked(std::size_t k) const {
    if (k == 0 || k > holes.size()) throw PreconditionError("hole rank out of range");
    return holes[label_map[k - 1]];
  }
  const Interval& size_of_rank(std::size_t k) const { return ranked(k).length; }

  Interval remainder_sum() const {
    Interval sum(Rational(0));
    for (const auto& h : holes) sum += h.remainder;
    return sum;
  }
  Interval length_sum() const {
    Interval sum(Rational(0));
    for (const auto& h : holes) sum += h.length;
    return sum;
  }
};

inline HoleProfile hole_profile_at(const Polygon& P, unsigned d, std::size_t digits,
                                   const PrecisionBudget& budget) {
  if (d < 2) throw PreconditionError("degree must be at least 2");
  for (const auto& v : P.vertices()) require_base(v, d);
  HoleProfile prof;
  prof.degree = d;
  prof.digits = digits;
  const std::size_t M = P.size();
  prof.holes.reserve(M);
  for (std::size_t k = 0; k < M; ++k) {
    Hole h;
    h.position = k;
    h.from = P[k];
    h.to = P[(k + 1) % M];
    h.length = arc_length_at(h.from, h.to, digits, budget);
    if (M == 1) h.length = Interval(Rational(1));
    h.remainder = remainder(h.length, d);
    h.multiple = floor_of(d * h.length).convert_to<unsigned>();
    prof.holes.push_back(std::move(h));
  }
  prof.label_map.resize(M);
  std::iota(prof.label_map.begin(), prof.label_map.end(), std::size_t{0});
  std::stable_sort(prof.label_map.begin(), prof.label_map.end(), [&](std::size_t a, std::size_t b) {
    return compare(prof.holes[a].length, prof.holes[b].length) == Order::less;
  });
  prof.rank_of.assign(M, 0);
  for (std::size_t r = 0; r < M; ++r) prof.rank_of[prof.label_map[r]] = r + 1;
  return prof;
}

/// Holes in cyclic order with sizes ranked ascending; exact ties keep cyclic order.
inline HoleProfile hole_profile(const Polygon& P, unsigned d, const PrecisionBudget& budget = {}) {
  return with_precision(budget, [&](std::size_t digits) { return hole_profile_at(P, d, digits, budget); });
}

/// (f(u), f(w)); its length is d times the remainder of the hole length.
inline Arc image_hole(const Arc& H, unsigned d, const PrecisionBudget& budget = {}) {
  if (equal(H.from, H.to, budget)) throw DegenerateChord("image_hole of a degenerate arc");
  return {map_angle(H.from, d), map_angle(H.to, d)};
}

struct OrientationCertificate {
  bool verdict = false;
  bool cyclic_order = false;   // images keep the cyclic order
  bool disjoint_arcs = false;  // d-1 disjoint open arcs of length 1/d fit in the holes
  bool remainder_sum = false;  // remainders add up to 1/d
  std::vector<Arc> witness_arcs;
  Interval remainder_sum_value;
};

/// Vertex images, or NotInjective if two of them coincide.
inline std::vector<Angle> injective_images(const Polygon& P, unsigned d, const PrecisionBudget& budget) {
  std::vector<Angle> images;
  images.reserve(P.size());
  for (const auto& v : P.vertices()) images.push_back(map_angle(v, d));
  std::vector<std::size_t> idx(images.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return compare(images[a], images[b], budget) == Order::less;
  });
  for (std::size_t i = 1; i < idx.size(); ++i) {
    if (equal(images[idx[i - 1]], images[idx[i]], budget))
      throw NotInjective(to_string(P[idx[i - 1]]) + " and " + to_string(P[idx[i]]) + " share the image " +
                         to_string(images[idx[i]]));
  }
  return images;
}

inline OrientationCertificate orientation_certificate(const Polygon& P, const HoleProfile& prof,
                                                      const PrecisionBudget& budget = {}) {
  const unsigned d = prof.degree;
  const auto images = injective_images(P, d, budget);
  OrientationCertificate cert;

  // Images of cyclically ordered points stay cyclically ordered iff the
  // sequence has exactly one descent, counting the wrap from last to first.
  std::size_t descents = 0;
  const std::size_t M = images.size();
  for (std::size_t k = 0; k < M; ++k) {
    if (compare(images[(k + 1) % M], images[k], budget) == Order::less) ++descents;
  }
  cert.cyclic_order = descents == 1;

  unsigned total = 0;
  for (const auto& h : prof.holes) {
    for (unsigned t = 0; t < h.multiple && total < d - 1; ++t, ++total) {
      cert.witness_arcs.push_back({rotate(h.from, t, d), rotate(h.from, t + 1, d)});
    }
  }
  cert.disjoint_arcs = total >= d - 1;
  if (!cert.disjoint_arcs) cert.witness_arcs.clear();

  cert.remainder_sum_value = prof.remainder_sum();
  const Rational one_over_d = ratio(1, d);
  // The sum is a positive multiple of 1/d, so an enclosure narrower than 1/d decides it.
  if (cert.remainder_sum_value.width() >= one_over_d)
    throw Unresolved("remainder sum enclosure too wide to decide orientation");
  cert.remainder_sum = cert.remainder_sum_value.contains(one_over_d);

  if (cert.cyclic_order != cert.disjoint_arcs || cert.cyclic_order != cert.remainder_sum) {
    throw AssertionBreach("orientation criteria disagree for polygon with " + std::to_string(M) + " vertices");
  }
  cert.verdict = cert.cyclic_order;
  return cert;
}

inline OrientationCertificate is_orientation_preserving(const Polygon& P, unsigned d,
                                                        const PrecisionBudget& budget = {}) {
  return orientation_certificate(P, hole_profile(P, d, budget), budget);
}

/// Re-checks a positive certificate: d-1 open arcs of length exactly 1/d,
/// pairwise disjoint and free of vertices.
inline bool check_orientation_witness(const OrientationCertificate& cert, const Polygon& P, unsigned d,
                                      const PrecisionBudget& budget = {}) {
  if (!cert.verdict) return cert.witness_arcs.empty();
  if (cert.witness_arcs.size() != d - 1) return false;
  const Rational one_over_d = ratio(1, d);
  for (const auto& a : cert.witness_arcs) {
    Interval len = arc_length(a.from, a.to, budget);
    if (!len.is_exact() || len.value() != one_over_d) return false;
    for (const auto& v : P.vertices())
      if (in_open_arc(v, a.from, a.to, budget)) return false;
  }
  for (std::size_t i = 0; i < cert.witness_arcs.size(); ++i) {
    for (std::size_t j = i + 1; j < cert.witness_arcs.size(); ++j) {
      const auto& a = cert.witness_arcs[i];
      const auto& b = cert.witness_arcs[j];
      if (equal(a.from, b.from, budget)) return false;
      if (in_open_arc(a.from, b.from, b.to, budget) || in_open_arc(b.from, a.from, a.to, budget)) return false;
    }
  }
  return true;
}

namespace detail {

/// Index of the hole of sorted `verts` containing x, or nullopt if x is a vertex.
inline std::optional<std::size_t> hole_index(const std::vector<Angle>& verts, const Angle& x,
                                             const PrecisionBudget& budget) {
  std::size_t lo = 0;
  std::size_t hi = verts.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const Order o = compare(verts[mid], x, budget);
    if (o == Order::equal) return std::nullopt;
    if (o == Order::less)
      lo = mid + 1;
    else
      hi = mid;
  }
  // lo vertices lie below x; x sits in the hole that starts at vertex lo-1.
  return lo == 0 ? verts.size() - 1 : lo - 1;
}

inline bool inside_one_hole(const std::vector<Angle>& verts, const std::vector<Angle>& others,
                            const PrecisionBudget& budget) {
  std::optional<std::size_t> first;
  for (const auto& x : others) {
    auto h = hole_index(verts, x, budget);
    if (!h) return false;
    if (first && *first != *h) return false;
    first = h;
  }
  return true;
}

inline std::vector<Angle> sorted_angles(std::vector<Angle> v, const PrecisionBudget& budget) {
  std::sort(v.begin(), v.end(), [&](const Angle& a, const Angle& b) { return compare(a, b, budget) == Order::less; });
  return v;
}

}  // namespace detail

/// True iff the convex hulls are disjoint; a shared point counts as linked.
inline bool unlinked(const std::vector<Angle>& A, const std::vector<Angle>& B, const PrecisionBudget& budget = {}) {
  if (A.empty() || B.empty()) throw PreconditionError("unlinked needs nonempty sets");
  const auto a = detail::sorted_angles(A, budget);
  const auto b = detail::sorted_angles(B, budget);
  return detail::inside_one_hole(a, b, budget) && detail::inside_one_hole(b, a, budget);
}

inline bool unlinked(const Polygon& A, const Polygon& B, const PrecisionBudget& budget = {}) {
  return detail::inside_one_hole(A.vertices(), B.vertices(), budget) &&
         detail::inside_one_hole(B.vertices(), A.vertices(), budget);
}

inline bool is_critical(const Chord& c, unsigned d, const PrecisionBudget& budget = {}) {
  if (c.degenerate(budget)) throw DegenerateChord("is_critical on a degenerate chord");
  return equal(map_angle(c.first, d), map_angle(c.second, d), budget);
}

inline Angle critical_value(const Chord& c, unsigned d, const PrecisionBudget& budget = {}) {
  if (!is_critical(c, d, budget)) throw PreconditionError("chord is not critical");
  return map_angle(c.first, d);
}

/// Total circle arc between two chords that meet at most at the circle.
/// Two distinct points are at distance 1; a point at an endpoint of a chord
/// takes the shorter of the two sides.
inline Interval rho(const Chord& p_in, const Chord& q_in, const PrecisionBudget& budget = {}) {
  Chord p = p_in;
  Chord q = q_in;
  const bool pd = p.degenerate(budget);
  const bool qd = q.degenerate(budget);
  if (pd && qd) return Interval(Rational(equal(p.first, q.first, budget) ? 0 : 1));
  if (pd) std::swap(p, q);

  std::optional<Interval> best;
  auto try_side = [&](const Angle& s0, const Angle& s1) {
    if (!in_closed_arc(q.first, s0, s1, budget) || !in_closed_arc(q.second, s0, s1, budget)) return;
    const bool ordered = ccw_compare(s0, q.first, q.second, budget) != Order::greater;
    const Angle& near = ordered ? q.first : q.second;
    const Angle& far = ordered ? q.second : q.first;
    Interval v = arc_length(s0, near, budget) + arc_length(far, s1, budget);
    if (!best) {
      best = v;
    } else if (auto o = try_compare(v, *best); o == Order::less) {
      best = v;
    } else if (!o) {
      best = min(*best, v);
    }
  };
  try_side(p.first, p.second);
  try_side(p.second, p.first);
  if (!best) throw ChordsCross("chords " + to_string(p.first) + "-" + to_string(p.second) + " and " +
                               to_string(q.first) + "-" + to_string(q.second) + " cross");
  return *best;
}

/// Critical chords {c, c + j/d} spanning a hole (a, b) with j/d < len < (j+1)/d.
struct CriticalStrip {
  Arc hole;
  unsigned j = 1;
  Angle start_from;  // start range [start_from, start_to]
  Angle start_to;
  Interval hole_length;
  Interval rho_value;

  Chord chord_at(const Angle& c, unsigned d) const { return {c, rotate(c, j, d)}; }
  /// Second endpoints range [start_from + j/d, hole end].
  Arc end_range(unsigned d) const { return {rotate(start_from, j, d), hole.to}; }
};

inline CriticalStrip critical_strip(const Arc& H, unsigned d, unsigned j, const PrecisionBudget& budget = {}) {
  const Interval len = arc_length(H.from, H.to, budget);
  if (j < 1 || j >= d) throw PreconditionError("critical strip multiple out of range");
  if (compare(len, Interval(ratio(j, d))) != Order::greater ||
      compare(len, Interval(ratio(j + 1, d))) != Order::less) {
    throw PreconditionError("hole length " + decimal_string(len.lower()) + " is not strictly between " +
                            std::to_string(j) + "/" + std::to_string(d) + " and " + std::to_string(j + 1) + "/" +
                            std::to_string(d));
  }
  CriticalStrip s;
  s.hole = H;
  s.j = j;
  s.start_from = H.from;
  s.start_to = rotate(H.to, d - j, d);
  s.hole_length = len;
  s.rho_value = len - Interval(ratio(j, d));
  return s;
}

/// Hole of B that contains Q, for unlinked Q and B.
inline Hole hole_containing(const Polygon& Q, const Polygon& B, const Rational& tau, unsigned d = 2,
                            const PrecisionBudget& budget = {}) {
  if (Q.size() < 3 || B.size() < 3) throw PreconditionError("hole_containing needs at least three vertices each");
  if (!unlinked(Q, B, budget)) throw PreconditionError("sets are linked");
  auto big_holes = [&](const HoleProfile& prof) {
    std::size_t n = 0;
    for (const auto& h : prof.holes)
      if (compare(h.length, Interval(tau)) != Order::less) ++n;
    return n;
  };
  const auto pb = hole_profile(B, d, budget);
  if (big_holes(pb) < 2) throw PreconditionError("fewer than two holes of B reach tau");
  const auto at = detail::hole_index(B.vertices(), Q[0], budget);
  if (!at) throw AssertionBreach("vertex of Q lies on B");
  const Hole& h = pb.holes[*at];
  if (compare(h.length, Interval(tau)) != Order::greater) {
    if (big_holes(hole_profile(Q, d, budget)) < 2) throw PreconditionError("fewer than two holes of Q reach tau");
    throw AssertionBreach("containing hole is not longer than tau");
  }
  return h;
}

}  // namespace wandpoly
