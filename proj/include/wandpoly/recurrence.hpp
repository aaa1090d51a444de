#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wandpoly/angle.hpp"
#include "wandpoly/errors.hpp"
#include "wandpoly/geometry.hpp"
#include "wandpoly/number.hpp"
#include "wandpoly/orbit.hpp"

namespace wandpoly {

class NotCertifiedWandering : public Error {
 public:
  NotCertifiedWandering(WanderingCertificate cert, std::size_t member = 0)
      : Error(std::string("not certified wandering: ") + to_string(cert.status)),
        cert_(std::move(cert)),
        member_(member) {}
  const WanderingCertificate& certificate() const noexcept { return cert_; }
  std::size_t member() const noexcept { return member_; }

 private:
  WanderingCertificate cert_;
  std::size_t member_;
};

class CrossPairLinked : public Error {
 public:
  CrossPairLinked(std::size_t a, std::size_t n, std::size_t b, std::size_t m)
      : Error("A_" + std::to_string(n) + " (member " + std::to_string(a) + ") and B_" + std::to_string(m) +
              " (member " + std::to_string(b) + ") are linked"),
        a_(a), n_(n), b_(b), m_(m) {}
  std::size_t a() const noexcept { return a_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t b() const noexcept { return b_; }
  std::size_t m() const noexcept { return m_; }

 private:
  std::size_t a_, n_, b_, m_;
};

/// Arc of the circle known to contain a quantity: [from, to] or (from, to).
/// from == to with open == false is a single point.
struct Enclosure {
  Angle from;
  Angle to;
  bool open = false;

  static Enclosure point(const Angle& x) { return {x, x, false}; }
};

/// Closed rational arc [start, start + len] mod 1.
struct RArc {
  Rational start;
  Rational len;
};

namespace detail {

inline RArc to_rarc(const Enclosure& e, std::size_t digits) {
  const Interval a = enclosure(e.from, digits);
  if (!e.open && e.from.is_exact() && e.to.is_exact() && a.lower() == e.to.exact_value()) return {a.lower(), 0};
  const Interval b = enclosure(e.to, digits);
  Rational len = mod_one(b.upper() - a.lower());
  if (len == 0 && !(e.from.is_exact() && e.to.is_exact())) len = b.upper() - a.lower();
  return {mod_one(a.lower()), len};
}

inline bool meets(const RArc& a, const RArc& b) {
  if (a.len >= 1 || b.len >= 1) return true;
  return mod_one(b.start - a.start) <= a.len || mod_one(a.start - b.start) <= b.len;
}

inline Rational gap(const RArc& a, const RArc& b) {
  if (meets(a, b)) return 0;
  return std::min(mod_one(b.start - (a.start + a.len)), mod_one(a.start - (b.start + b.len)));
}

/// Closed-arc intersection test on exact angle arcs of length < 1/2.
inline bool arcs_meet(const Enclosure& a, const Enclosure& b, const PrecisionBudget& budget) {
  return in_closed_arc(b.from, a.from, a.to, budget) || in_closed_arc(a.from, b.from, b.to, budget);
}

inline Enclosure arc_intersection(const Enclosure& a, const Enclosure& b, const PrecisionBudget& budget) {
  const bool b_starts_inside = in_closed_arc(b.from, a.from, a.to, budget);
  const Enclosure& first = b_starts_inside ? a : b;
  const Enclosure& second = b_starts_inside ? b : a;
  const Angle& end = in_closed_arc(first.to, second.from, second.to, budget) ? first.to : second.to;
  return {second.from, end, false};
}

inline Enclosure arc_hull(const Enclosure& a, const Enclosure& b, const PrecisionBudget& budget) {
  if (arcs_meet(a, b, budget)) {
    const bool b_starts_inside = in_closed_arc(b.from, a.from, a.to, budget);
    const Enclosure& first = b_starts_inside ? a : b;
    const Enclosure& second = b_starts_inside ? b : a;
    const Angle& end = in_closed_arc(first.to, second.from, second.to, budget) ? second.to : first.to;
    return {first.from, end, false};
  }
  Enclosure x{a.from, b.to, false};
  Enclosure y{b.from, a.to, false};
  return less(arc_length(x.from, x.to, budget), arc_length(y.from, y.to, budget)) ? x : y;
}

}  // namespace detail

/// Enclosure of a critical leaf recovered from one or more jump strips.
struct CandidateLeaf {
  Enclosure first_span;   // possible positions of one endpoint
  Enclosure second_span;  // the other endpoint, first_span + j/d
  unsigned j = 1;
  std::vector<std::size_t> support;  // jump indices
  Enclosure value;                   // critical value

  static CandidateLeaf from_chord(const Chord& c, unsigned d, const PrecisionBudget& budget = {}) {
    if (!is_critical(c, d, budget)) throw PreconditionError("leaf chord must be critical");
    CandidateLeaf leaf;
    leaf.first_span = Enclosure::point(c.first);
    leaf.second_span = Enclosure::point(c.second);
    const Interval len = arc_length(c.first, c.second, budget);
    leaf.j = floor_of(d * len + Interval(ratio(1, 2 * d))).convert_to<unsigned>() % d;
    leaf.value = Enclosure::point(map_angle(c.first, d));
    return leaf;
  }

  static CandidateLeaf from_strip(const CriticalStrip& s, std::size_t jump, unsigned d) {
    CandidateLeaf leaf;
    leaf.first_span = {s.start_from, s.start_to, false};
    const Arc end = s.end_range(d);
    leaf.second_span = {end.from, end.to, false};
    leaf.j = s.j;
    leaf.support = {jump};
    leaf.value = {map_angle(s.hole.from, d), map_angle(s.hole.to, d), true};
    return leaf;
  }
};

namespace detail {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

/// 0: no match, 1: same orientation, 2: swapped endpoints.
inline int strip_match(const CandidateLeaf& a, const CandidateLeaf& b, const PrecisionBudget& budget) {
  if (arcs_meet(a.first_span, b.first_span, budget) && arcs_meet(a.second_span, b.second_span, budget)) return 1;
  if (arcs_meet(a.first_span, b.second_span, budget) && arcs_meet(a.second_span, b.first_span, budget)) return 2;
  return 0;
}

}  // namespace detail

/// Groups jump strips whose endpoint spans overlap into candidate leaves.
inline std::vector<CandidateLeaf> extract_jumping_leaves(const JumpLog& log, unsigned d,
                                                         const PrecisionBudget& budget = {}) {
  std::vector<const JumpRecord*> recs;
  for (const auto& r : log.records) recs.push_back(&r);
  std::sort(recs.begin(), recs.end(), [](const JumpRecord* a, const JumpRecord* b) { return a->i < b->i; });
  std::vector<CandidateLeaf> singles;
  for (const auto* r : recs) singles.push_back(CandidateLeaf::from_strip(r->strip, r->i, d));

  detail::UnionFind uf(singles.size());
  for (std::size_t a = 0; a < singles.size(); ++a)
    for (std::size_t b = a + 1; b < singles.size(); ++b)
      if (detail::strip_match(singles[a], singles[b], budget) != 0) uf.unite(a, b);

  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t a = 0; a < singles.size(); ++a) clusters[uf.find(a)].push_back(a);

  std::vector<CandidateLeaf> out;
  for (const auto& [root, members] : clusters) {
    CandidateLeaf leaf = singles[members.front()];
    if (members.size() > 1) {
      std::optional<Enclosure> first = leaf.first_span;
      std::optional<Enclosure> second = leaf.second_span;
      Enclosure hull_first = leaf.first_span;
      Enclosure hull_second = leaf.second_span;
      for (std::size_t k = 1; k < members.size(); ++k) {
        const CandidateLeaf& m = singles[members[k]];
        const bool swapped = detail::strip_match(leaf, m, budget) == 2 ||
                             (detail::strip_match(leaf, m, budget) == 0 &&
                              detail::arcs_meet(hull_first, m.second_span, budget));
        const Enclosure& mf = swapped ? m.second_span : m.first_span;
        const Enclosure& ms = swapped ? m.first_span : m.second_span;
        hull_first = detail::arc_hull(hull_first, mf, budget);
        hull_second = detail::arc_hull(hull_second, ms, budget);
        if (first && detail::arcs_meet(*first, mf, budget))
          first = detail::arc_intersection(*first, mf, budget);
        else
          first.reset();
        if (second && detail::arcs_meet(*second, ms, budget))
          second = detail::arc_intersection(*second, ms, budget);
        else
          second.reset();
        leaf.support.push_back(m.support.front());
      }
      leaf.first_span = first ? *first : hull_first;
      leaf.second_span = second ? *second : hull_second;
      leaf.value = {map_angle(leaf.first_span.from, d), map_angle(leaf.first_span.to, d), false};
    }
    out.push_back(std::move(leaf));
  }
  return out;
}

struct DisjointnessEntry {
  enum class Kind { Disjoint, CollisionAt, Inconclusive };
  Kind kind = Kind::Disjoint;
  std::size_t i = 0;  // CollisionAt: f^i(value_a) meets f^j(value_b)
  std::size_t j = 0;
};

inline const char* to_string(DisjointnessEntry::Kind k) {
  switch (k) {
    case DisjointnessEntry::Kind::Disjoint: return "Disjoint";
    case DisjointnessEntry::Kind::CollisionAt: return "CollisionAt";
    case DisjointnessEntry::Kind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

using DisjointnessMatrix = std::vector<std::vector<DisjointnessEntry>>;

/// Enclosures of f^t(value) for t = 0 .. horizon.
inline std::vector<RArc> value_orbit(const Enclosure& value, unsigned d, std::size_t horizon, std::size_t digits = 64) {
  std::vector<RArc> out;
  out.reserve(horizon + 1);
  Enclosure e = value;
  for (std::size_t t = 0; t <= horizon; ++t) {
    out.push_back(detail::to_rarc(e, digits));
    if (t < horizon) e = {map_angle(e.from, d), map_angle(e.to, d), e.open};
  }
  return out;
}

namespace detail {

inline DisjointnessEntry compare_orbits(const Enclosure& va, const std::vector<RArc>& a, const Enclosure& vb,
                                        const std::vector<RArc>& b, unsigned d) {
  const bool a_point = !va.open && va.from.is_exact() && equal(va.from, va.to);
  const bool b_point = !vb.open && vb.from.is_exact() && equal(vb.from, vb.to);
  if (a_point && b_point) {
    std::map<Rational, std::size_t> first_hit;
    for (std::size_t j = 0; j < b.size(); ++j) first_hit.emplace(b[j].start, j);
    for (std::size_t i = 0; i < a.size(); ++i)
      if (auto it = first_hit.find(a[i].start); it != first_hit.end())
        return {DisjointnessEntry::Kind::CollisionAt, i, it->second};
    return {};
  }
  (void)d;
  // Unwrap b into [0, 1) segments, sort by start, and keep prefix maxima of ends.
  std::vector<std::pair<Rational, Rational>> segs;
  for (const auto& r : b) {
    if (r.len >= 1) return {DisjointnessEntry::Kind::Inconclusive, 0, 0};
    const Rational end = r.start + r.len;
    if (end < 1) {
      segs.emplace_back(r.start, end);
    } else {
      segs.emplace_back(r.start, Rational(1));
      segs.emplace_back(Rational(0), end - 1);
    }
  }
  std::sort(segs.begin(), segs.end());
  std::vector<Rational> prefix_max(segs.size());
  for (std::size_t k = 0; k < segs.size(); ++k)
    prefix_max[k] = k == 0 ? segs[k].second : std::max(prefix_max[k - 1], segs[k].second);
  auto overlaps = [&](const Rational& s, const Rational& e) {
    auto it = std::upper_bound(segs.begin(), segs.end(), std::pair{e, Rational(2)});
    if (it == segs.begin()) return false;
    return prefix_max[static_cast<std::size_t>(it - segs.begin()) - 1] >= s;
  };
  for (const auto& r : a) {
    if (r.len >= 1) return {DisjointnessEntry::Kind::Inconclusive, 0, 0};
    const Rational end = r.start + r.len;
    const bool hit = end < 1 ? overlaps(r.start, end) : (overlaps(r.start, Rational(1)) || overlaps(Rational(0), end - 1));
    if (hit) return {DisjointnessEntry::Kind::Inconclusive, 0, 0};
  }
  return {};
}

}  // namespace detail

/// Pairwise comparison of the forward orbits of the leaves' critical values.
inline DisjointnessMatrix orbit_disjointness(const std::vector<CandidateLeaf>& leaves, unsigned d, std::size_t horizon,
                                             std::size_t digits = 64) {
  if (horizon < 1) throw PreconditionError("orbit_disjointness needs horizon >= 1");
  std::vector<std::vector<RArc>> orbits;
  for (const auto& l : leaves) orbits.push_back(value_orbit(l.value, d, horizon, digits));
  DisjointnessMatrix m(leaves.size(), std::vector<DisjointnessEntry>(leaves.size()));
  for (std::size_t a = 0; a < leaves.size(); ++a) {
    m[a][a] = {DisjointnessEntry::Kind::CollisionAt, 0, 0};
    for (std::size_t b = a + 1; b < leaves.size(); ++b) {
      m[a][b] = detail::compare_orbits(leaves[a].value, orbits[a], leaves[b].value, orbits[b], d);
      m[b][a] = m[a][b];
      std::swap(m[b][a].i, m[b][a].j);
      if (m[b][a].kind == DisjointnessEntry::Kind::CollisionAt) {
        // Recompute so the reverse entry is the lexicographically first hit.
        m[b][a] = detail::compare_orbits(leaves[b].value, orbits[b], leaves[a].value, orbits[a], d);
      }
    }
  }
  return m;
}

/// Occupied bins [m/2^r, (m+1)/2^r) of an orbit segment.
struct OmegaApproximation {
  unsigned r = 6;
  std::set<std::uint64_t> bins;
  std::size_t burn_in = 0;
  std::size_t horizon = 0;

  Rational epsilon() const { return ratio(1, power(2, r)); }
};

inline OmegaApproximation omega_from_orbit(const std::vector<RArc>& orbit, std::size_t burn_in, std::size_t horizon,
                                           unsigned r) {
  if (r == 0 || r > 62) throw PreconditionError("resolution exponent must be in [1, 62]");
  OmegaApproximation om;
  om.r = r;
  om.burn_in = burn_in;
  om.horizon = horizon;
  const std::uint64_t count = std::uint64_t{1} << r;
  const Integer scale(count);
  for (std::size_t t = burn_in; t <= horizon && t < orbit.size(); ++t) {
    const RArc& a = orbit[t];
    if (a.len * scale >= Rational(count)) {
      for (std::uint64_t m = 0; m < count; ++m) om.bins.insert(m);
      break;
    }
    const Integer lo = floor_of(a.start * scale);
    const Integer hi = floor_of((a.start + a.len) * scale);
    for (Integer m = lo; m <= hi; ++m) om.bins.insert((m % count).convert_to<std::uint64_t>());
  }
  return om;
}

inline OmegaApproximation omega_approx(const Enclosure& v, unsigned d, std::size_t burn_in, std::size_t horizon,
                                       unsigned r, std::size_t digits = 64) {
  if (horizon <= burn_in) throw PreconditionError("omega_approx needs horizon > burn_in");
  return omega_from_orbit(value_orbit(v, d, horizon, std::max<std::size_t>(digits, r + 2)), burn_in, horizon, r);
}

inline OmegaApproximation omega_approx(const Angle& v, unsigned d, std::size_t burn_in, std::size_t horizon,
                                       unsigned r, std::size_t digits = 64) {
  return omega_approx(Enclosure::point(v), d, burn_in, horizon, r, digits);
}

/// Hausdorff distance between two bin sets on the circle, in turns.
inline Rational hausdorff(const OmegaApproximation& a, const OmegaApproximation& b) {
  if (a.r != b.r) throw PreconditionError("omega approximations at different resolutions");
  if (a.bins.empty() || b.bins.empty()) return a.bins.empty() && b.bins.empty() ? Rational(0) : Rational(1, 2);
  const std::uint64_t count = std::uint64_t{1} << a.r;
  auto nearest = [&](const std::set<std::uint64_t>& s, std::uint64_t x) {
    auto it = s.lower_bound(x);
    const std::uint64_t above = it == s.end() ? *s.begin() : *it;
    const std::uint64_t below = it == s.begin() ? *s.rbegin() : *std::prev(it);
    auto dist = [&](std::uint64_t p, std::uint64_t q) {
      const std::uint64_t diff = p > q ? p - q : q - p;
      return std::min(diff, count - diff);
    };
    return std::min(dist(x, above), dist(x, below));
  };
  std::uint64_t worst = 0;
  for (auto x : a.bins) worst = std::max(worst, nearest(b.bins, x));
  for (auto x : b.bins) worst = std::max(worst, nearest(a.bins, x));
  return ratio(Integer(worst), Integer(count));
}

struct DistanceBound {
  Rational lower;
  Rational upper;
};

struct RecurrenceEvidence {
  std::vector<DistanceBound> distance_series;
  std::vector<Rational> running_min;  // of the upper bounds
  bool witnessed = false;
  std::size_t step = 0;  // RecurrentWitnessed(step)
  Rational min_bound;    // Inconclusive(min_bound)
  std::size_t horizon = 0;
};

namespace detail {

inline DistanceBound leaf_distance(const RArc& x, const RArc& s1, const RArc& s2) {
  const Rational half(1, 2);
  const Rational g1 = gap(x, s1);
  const Rational g2 = gap(x, s2);
  const Rational u1 = std::min(half, g1 + x.len + s1.len);
  const Rational u2 = std::min(half, g2 + x.len + s2.len);
  return {std::min(g1, g2), std::min(u1, u2)};
}

}  // namespace detail

/// Arc distance from f^t(value) to the nearest endpoint span of the leaf,
/// for t = 0 .. horizon. Witnessed once the upper bound is 0 or below epsilon.
inline RecurrenceEvidence recurrence_evidence(const CandidateLeaf& leaf, unsigned d, std::size_t horizon,
                                              const Rational& epsilon, std::size_t digits = 64) {
  RecurrenceEvidence ev;
  ev.horizon = horizon;
  const RArc s1 = detail::to_rarc(leaf.first_span, digits);
  const RArc s2 = detail::to_rarc(leaf.second_span, digits);
  const Rational one_over_d = ratio(1, d);
  Enclosure e = leaf.value;
  for (std::size_t t = 0; t <= horizon; ++t) {
    const RArc x = detail::to_rarc(e, digits);
    if (x.len >= one_over_d)
      throw EnclosureTooWide("critical value enclosure reached length 1/d at step " + std::to_string(t));
    const DistanceBound b = detail::leaf_distance(x, s1, s2);
    ev.distance_series.push_back(b);
    ev.running_min.push_back(ev.running_min.empty() ? b.upper : std::min(ev.running_min.back(), b.upper));
    if (!ev.witnessed && (b.upper == 0 || b.upper < epsilon)) {
      ev.witnessed = true;
      ev.step = t;
    }
    if (t < horizon) e = {map_angle(e.from, d), map_angle(e.to, d), e.open};
  }
  ev.min_bound = ev.running_min.back();
  return ev;
}

/// Largest t <= horizon such that the value arc stays shorter than 1/d up to t.
inline std::size_t evidence_horizon(const CandidateLeaf& leaf, unsigned d, std::size_t horizon, std::size_t digits = 64) {
  const RArc x = detail::to_rarc(leaf.value, digits);
  if (x.len == 0) return horizon;
  const Rational one_over_d = ratio(1, d);
  Rational len = x.len;
  std::size_t t = 0;
  while (t < horizon && len * d < one_over_d) {
    len *= d;
    ++t;
  }
  return t;
}

struct NarrowWitness {
  std::size_t iterate = 0;
  std::size_t rank = 0;
  Interval span;  // 1 - s_N: length of the smallest arc holding the polygon
};

/// Iterates where x lies in one of the N-1 smallest holes of T_i.
inline std::vector<NarrowWitness> narrowness_evidence(const Angle& x, const std::vector<OrbitRecord>& orbit,
                                                      std::size_t N, const PrecisionBudget& budget = {}) {
  std::vector<NarrowWitness> out;
  for (const auto& rec : orbit) {
    auto pos = detail::hole_index(rec.polygon.vertices(), x, budget);
    if (!pos) continue;
    const std::size_t rank = rec.profile.rank_of[*pos];
    if (rank + 1 > N) continue;
    out.push_back({rec.index, rank, Interval(Rational(1)) - rec.profile.size_of_rank(N)});
  }
  return out;
}

enum class TheoremStatus { ConsistentWithTheorem, InconclusiveEvidence, AssertionBreach };

inline const char* to_string(TheoremStatus s) {
  switch (s) {
    case TheoremStatus::ConsistentWithTheorem: return "ConsistentWithTheorem";
    case TheoremStatus::InconclusiveEvidence: return "InconclusiveEvidence";
    case TheoremStatus::AssertionBreach: return "AssertionBreach";
  }
  return "?";
}

struct TheoremParams {
  std::size_t horizon = 200;
  unsigned epsilon_bits = 6;  // epsilon = 2^-epsilon_bits
  PrecisionBudget budget{};
  std::optional<std::size_t> burn_in_override;
  bool kiwi_precheck = true;
  std::size_t digits = 64;

  Rational epsilon() const { return ratio(1, power(2, epsilon_bits)); }
};

struct LimcoinCheck {
  std::size_t iterate = 0;
  Chord approximant;
  Rational distance;  // from the nearer endpoint to the common omega bins
  bool pass = false;
};

struct TheoremReport {
  TheoremStatus status = TheoremStatus::InconclusiveEvidence;
  WanderingCertificate certificate;
  std::size_t records = 0;  // iterates analyzed
  std::optional<std::size_t> burn_in;
  JumpLog jumps;
  std::vector<ValueTrace> traces;
  std::vector<CandidateLeaf> leaves;
  bool enough_leaves = false;  // at least N-1
  DisjointnessMatrix disjointness;
  std::vector<RecurrenceEvidence> evidence;
  std::vector<OmegaApproximation> omegas;
  std::vector<std::vector<Rational>> hausdorff_matrix;
  std::vector<LimcoinCheck> limcoin;
  std::vector<std::string> notes;
};

namespace detail {

/// Orbit records up to `horizon`, dropping the last iterate if only its own
/// image fails injectivity.
inline std::vector<OrbitRecord> certified_orbit(const Polygon& T, unsigned d, std::size_t horizon,
                                                const PrecisionBudget& budget, std::vector<std::string>& notes) {
  try {
    return iterate_orbit(T, d, horizon, budget);
  } catch (const NonInjectiveAtStep& e) {
    if (e.step() != horizon || horizon == 0) throw;
    notes.push_back("last iterate is not injective; analysis stops at " + std::to_string(horizon - 1));
    return iterate_orbit(T, d, horizon - 1, budget);
  }
}

/// Chord joining the midpoints of the two vertex clusters cut out by the two largest holes.
inline Chord approximant_chord(const OrbitRecord& rec, unsigned d, const PrecisionBudget& budget) {
  const auto& prof = rec.profile;
  const std::size_t M = prof.size();
  const Hole& big = prof.ranked(M);
  const Hole& second = prof.ranked(M - 1);
  auto midpoint = [&](const Angle& from, const Angle& to) {
    const Interval len = arc_length(from, to, budget);
    const Interval start = enclosure(from, 64);
    return Angle(mod_one(start.lower() + (len.lower() + len.upper()) / 4));
  };
  (void)d;
  // Cluster one runs from the end of the largest hole to the start of the second largest.
  return {midpoint(big.to, second.from), midpoint(second.to, big.from)};
}

inline Rational distance_to_bins(const Angle& x, const std::set<std::uint64_t>& bins, unsigned r) {
  if (bins.empty()) return 1;
  const std::uint64_t count = std::uint64_t{1} << r;
  const Interval e = enclosure(x, 64);
  const std::uint64_t m = (floor_of(e.lower() * Integer(count)) % Integer(count)).convert_to<std::uint64_t>();
  auto it = bins.lower_bound(m);
  const std::uint64_t above = it == bins.end() ? *bins.begin() : *it;
  const std::uint64_t below = it == bins.begin() ? *bins.rbegin() : *std::prev(it);
  auto dist = [&](std::uint64_t p, std::uint64_t q) {
    const std::uint64_t diff = p > q ? p - q : q - p;
    return std::min(diff, count - diff);
  };
  return ratio(Integer(std::min(dist(m, above), dist(m, below))), Integer(count));
}

}  // namespace detail

/// Finite-horizon evidence for N-1 recurrent critical leaves with disjoint
/// orbits and a common omega-limit set. Never claims a proof.
inline TheoremReport verify_theorem1(const Polygon& T, unsigned d, const TheoremParams& params) {
  TheoremReport rep;
  const std::size_t N = T.size();
  rep.certificate = certify_wandering(T, d, params.horizon, {params.kiwi_precheck}, params.budget);
  if (!rep.certificate.certified()) throw NotCertifiedWandering(rep.certificate);

  const auto orbit = detail::certified_orbit(T, d, params.horizon, params.budget, rep.notes);
  rep.records = orbit.size();
  try {
    rep.burn_in = params.burn_in_override ? *params.burn_in_override : find_burn_in(orbit, d, N, std::nullopt, params.budget);
  } catch (const NoBurnInWithinHorizon& e) {
    rep.notes.push_back(e.what());
    rep.status = TheoremStatus::InconclusiveEvidence;
    return rep;
  }
  if (*rep.burn_in >= orbit.size()) throw PreconditionError("burn-in beyond the horizon");
  const std::vector<OrbitRecord> tail(orbit.begin() + static_cast<std::ptrdiff_t>(*rep.burn_in), orbit.end());

  const Rational eps = params.epsilon();
  bool consistent = true;
  try {
    rep.jumps = detect_jumps(tail, d, N, params.budget);
    try {
      rep.traces = track_critical_value(rep.jumps, tail, d, N, params.budget);
    } catch (const EnclosureTooWide& e) {
      rep.notes.push_back(std::string("critical value tracking stopped: ") + e.what());
      consistent = false;
    }
  } catch (const AssertionBreach& e) {
    rep.notes.push_back(e.what());
    rep.status = TheoremStatus::AssertionBreach;
    return rep;
  }

  rep.leaves = extract_jumping_leaves(rep.jumps, d, params.budget);
  rep.enough_leaves = rep.leaves.size() + 1 >= N;
  if (!rep.enough_leaves) {
    rep.notes.push_back("found " + std::to_string(rep.leaves.size()) + " candidate leaves, fewer than N-1 = " +
                        std::to_string(N - 1));
    consistent = false;
  }

  std::size_t h = params.horizon;
  for (const auto& leaf : rep.leaves) h = std::min(h, evidence_horizon(leaf, d, params.horizon, params.digits));
  if (h < params.horizon)
    rep.notes.push_back("leaf evidence truncated to " + std::to_string(h) + " steps to keep value arcs below 1/d");

  if (h >= 1 && rep.leaves.size() >= 2) {
    rep.disjointness = orbit_disjointness(rep.leaves, d, h, params.digits);
    for (std::size_t a = 0; a < rep.leaves.size(); ++a)
      for (std::size_t b = a + 1; b < rep.leaves.size(); ++b)
        consistent = consistent && rep.disjointness[a][b].kind == DisjointnessEntry::Kind::Disjoint;
  }

  std::set<std::uint64_t> common;
  for (const auto& leaf : rep.leaves) {
    rep.evidence.push_back(recurrence_evidence(leaf, d, h, eps, params.digits));
    consistent = consistent && rep.evidence.back().witnessed;
    if (h >= 2) {
      const auto orb = value_orbit(leaf.value, d, h, std::max<std::size_t>(params.digits, params.epsilon_bits + 2));
      rep.omegas.push_back(omega_from_orbit(orb, h / 2, h, params.epsilon_bits));
      common.insert(rep.omegas.back().bins.begin(), rep.omegas.back().bins.end());
    }
  }
  if (rep.omegas.size() < rep.leaves.size()) {
    rep.notes.push_back("horizon too short for omega-limit approximations");
    consistent = false;
  }
  rep.hausdorff_matrix.assign(rep.omegas.size(), std::vector<Rational>(rep.omegas.size(), Rational(0)));
  for (std::size_t a = 0; a < rep.omegas.size(); ++a)
    for (std::size_t b = a + 1; b < rep.omegas.size(); ++b) {
      const Rational hd = hausdorff(rep.omegas[a], rep.omegas[b]);
      rep.hausdorff_matrix[a][b] = rep.hausdorff_matrix[b][a] = hd;
      consistent = consistent && hd <= 2 * eps;
    }

  if (!common.empty()) {
    const std::size_t from = tail.size() - std::max<std::size_t>(1, tail.size() / 4);
    for (std::size_t t = from; t < tail.size(); ++t) {
      LimcoinCheck c;
      c.iterate = tail[t].index;
      c.approximant = detail::approximant_chord(tail[t], d, params.budget);
      c.distance = std::min(detail::distance_to_bins(c.approximant.first, common, params.epsilon_bits),
                            detail::distance_to_bins(c.approximant.second, common, params.epsilon_bits));
      c.pass = c.distance <= eps;
      consistent = consistent && c.pass;
      rep.limcoin.push_back(std::move(c));
    }
  }

  rep.status = consistent ? TheoremStatus::ConsistentWithTheorem : TheoremStatus::InconclusiveEvidence;
  return rep;
}

struct CollectionReport {
  std::size_t members = 0;
  std::size_t sigma = 0;  // sum of card(T) - 2
  std::size_t r_hat = 0;
  std::size_t omega_hat = 0;
  bool holds = false;
  std::vector<TheoremReport> member_reports;
  std::vector<std::string> notes;
};

/// Finite-horizon check of card(Gamma) <= sum(card - 2) <= R - |Omega| <= d - 1 - |Omega|.
inline CollectionReport verify_collection_bound(const std::vector<Polygon>& gamma, unsigned d,
                                                const TheoremParams& params) {
  CollectionReport rep;
  rep.members = gamma.size();
  if (gamma.empty()) throw PreconditionError("empty collection");
  std::vector<std::vector<Polygon>> iterates;
  for (std::size_t a = 0; a < gamma.size(); ++a) {
    auto cert = certify_wandering(gamma[a], d, params.horizon, {params.kiwi_precheck}, params.budget);
    if (!cert.certified()) throw NotCertifiedWandering(cert, a);
    std::vector<Polygon> its{gamma[a]};
    for (std::size_t n = 0; n < params.horizon; ++n) its.push_back(map_polygon(its.back(), d, params.budget));
    iterates.push_back(std::move(its));
  }
  for (std::size_t a = 0; a < gamma.size(); ++a)
    for (std::size_t b = a + 1; b < gamma.size(); ++b)
      for (std::size_t n = 0; n <= params.horizon; ++n)
        for (std::size_t m = 0; m <= params.horizon; ++m)
          if (!unlinked(iterates[a][n], iterates[b][m], params.budget)) throw CrossPairLinked(a, n, b, m);

  struct Recurrent {
    CandidateLeaf leaf;
    OmegaApproximation omega;
  };
  std::vector<Recurrent> recurrent;
  for (const auto& T : gamma) {
    rep.sigma += T.size() - 2;
    rep.member_reports.push_back(verify_theorem1(T, d, params));
    const auto& mr = rep.member_reports.back();
    for (std::size_t k = 0; k < mr.leaves.size() && k < mr.omegas.size(); ++k)
      if (mr.evidence[k].witnessed) recurrent.push_back({mr.leaves[k], mr.omegas[k]});
  }

  const Rational two_eps = 2 * params.epsilon();
  std::vector<std::size_t> reps;
  for (std::size_t k = 0; k < recurrent.size(); ++k) {
    bool known = false;
    for (auto r : reps) known = known || hausdorff(recurrent[k].omega, recurrent[r].omega) <= two_eps;
    if (!known) reps.push_back(k);
  }
  rep.omega_hat = reps.size();

  const std::size_t L = recurrent.size();
  if (L > 20) {
    rep.notes.push_back("more than 20 recurrent leaves; R-hat counts a greedy disjoint family");
  }
  std::vector<CandidateLeaf> leaves;
  for (const auto& r : recurrent) leaves.push_back(r.leaf);
  DisjointnessMatrix m;
  if (L >= 2) m = orbit_disjointness(leaves, d, std::max<std::size_t>(1, params.horizon), params.digits);
  auto disjoint = [&](std::size_t a, std::size_t b) { return m[a][b].kind == DisjointnessEntry::Kind::Disjoint; };
  if (L <= 20) {
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << L); ++mask) {
      const auto count = static_cast<std::size_t>(__builtin_popcount(mask));
      if (count <= rep.r_hat) continue;
      bool ok = true;
      for (std::size_t a = 0; a < L && ok; ++a)
        for (std::size_t b = a + 1; b < L && ok; ++b)
          if ((mask >> a & 1U) && (mask >> b & 1U)) ok = disjoint(a, b);
      if (ok) rep.r_hat = count;
    }
  } else {
    std::vector<std::size_t> chosen;
    for (std::size_t a = 0; a < L; ++a) {
      bool ok = true;
      for (auto b : chosen) ok = ok && disjoint(a, b);
      if (ok) chosen.push_back(a);
    }
    rep.r_hat = chosen.size();
  }

  const long long card = static_cast<long long>(gamma.size());
  const long long sigma = static_cast<long long>(rep.sigma);
  const long long middle = static_cast<long long>(rep.r_hat) - static_cast<long long>(rep.omega_hat);
  const long long top = static_cast<long long>(d) - 1 - static_cast<long long>(rep.omega_hat);
  rep.holds = card <= sigma && sigma <= middle && middle <= top;
  if (!rep.holds)
    rep.notes.push_back("inequality chain not met at this horizon and precision; this is evidence of insufficient "
                        "horizon or precision, not a counterexample");
  return rep;
}

}  // namespace wandpoly
