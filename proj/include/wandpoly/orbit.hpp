#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wandpoly/angle.hpp"
#include "wandpoly/errors.hpp"
#include "wandpoly/geometry.hpp"
#include "wandpoly/number.hpp"

namespace wandpoly {

struct OrbitRecord {
  std::size_t index = 0;
  Polygon polygon;
  HoleProfile profile;
  OrientationCertificate orientation;
};

/// Vertexwise image; NotInjective if two vertices collide.
inline Polygon map_polygon(const Polygon& P, unsigned d, const PrecisionBudget& budget = {}) {
  return Polygon::from_angles(injective_images(P, d, budget), budget);
}

inline OrbitRecord make_record(std::size_t index, Polygon P, unsigned d, const PrecisionBudget& budget) {
  OrbitRecord r;
  r.index = index;
  r.profile = hole_profile(P, d, budget);
  r.orientation = orientation_certificate(P, r.profile, budget);
  r.polygon = std::move(P);
  return r;
}

/// Records T_0 .. T_n; `first_index` labels T_0 when continuing an orbit.
inline std::vector<OrbitRecord> iterate_orbit(const Polygon& T, unsigned d, std::size_t n,
                                              const PrecisionBudget& budget = {}, std::size_t first_index = 0) {
  std::vector<OrbitRecord> out;
  out.reserve(n + 1);
  Polygon current = T;
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t index = first_index + i;
    try {
      out.push_back(make_record(index, current, d, budget));
      if (i < n) current = map_polygon(current, d, budget);
    } catch (const NotInjective& e) {
      throw NonInjectiveAtStep(index, e.what());
    }
  }
  return out;
}

struct PartialOrbit {
  std::vector<OrbitRecord> records;
  std::optional<std::size_t> non_injective_step;
  std::string message;
};

/// Like iterate_orbit, but keeps the records computed before an injectivity failure.
inline PartialOrbit iterate_orbit_partial(const Polygon& T, unsigned d, std::size_t n,
                                          const PrecisionBudget& budget = {}) {
  PartialOrbit out;
  Polygon current = T;
  for (std::size_t i = 0; i <= n; ++i) {
    HoleProfile prof = hole_profile(current, d, budget);
    try {
      OrientationCertificate cert = orientation_certificate(current, prof, budget);
      Polygon next = i < n ? map_polygon(current, d, budget) : current;
      out.records.push_back({i, std::move(current), std::move(prof), std::move(cert)});
      current = std::move(next);
    } catch (const NotInjective& e) {
      out.non_injective_step = i;
      out.message = e.what();
      break;
    }
  }
  return out;
}

/// Index of `x` among the vertices of P, if it is one.
inline std::optional<std::size_t> vertex_position(const Polygon& P, const Angle& x, const PrecisionBudget& budget) {
  const auto& v = P.vertices();
  std::size_t lo = 0;
  std::size_t hi = v.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const Order o = compare(v[mid], x, budget);
    if (o == Order::equal) return mid;
    if (o == Order::less)
      lo = mid + 1;
    else
      hi = mid;
  }
  return std::nullopt;
}

/// Compares quantities drawn from two records, recomputing both profiles at
/// higher precision when the stored enclosures overlap.
template <class F>
Order compare_across(const OrbitRecord& a, const OrbitRecord& b, unsigned d, const PrecisionBudget& budget,
                     F&& quantities) {
  {
    auto [x, y] = quantities(a.profile, b.profile);
    if (auto o = try_compare(x, y)) return *o;
  }
  return with_precision(budget, [&](std::size_t digits) {
    const auto pa = hole_profile_at(a.polygon, d, digits, budget);
    const auto pb = hole_profile_at(b.polygon, d, digits, budget);
    auto [x, y] = quantities(pa, pb);
    return compare(x, y);
  });
}

enum class WanderingStatus { CertifiedToHorizon, FailedNonPrecritical, FailedLinked, RejectedKiwiBound };

inline const char* to_string(WanderingStatus s) {
  switch (s) {
    case WanderingStatus::CertifiedToHorizon: return "CertifiedToHorizon";
    case WanderingStatus::FailedNonPrecritical: return "FailedNonPrecritical";
    case WanderingStatus::FailedLinked: return "FailedLinked";
    case WanderingStatus::RejectedKiwiBound: return "RejectedKiwiBound";
  }
  return "?";
}

struct WanderingCertificate {
  std::size_t horizon = 0;
  WanderingStatus status = WanderingStatus::CertifiedToHorizon;
  std::size_t step = 0;                        // FailedNonPrecritical
  std::pair<std::size_t, std::size_t> linked;  // FailedLinked (i, j), i < j
  std::string witness;
  std::vector<Interval> s_trajectory;  // s_{N-2}(T_i) for the iterates examined

  bool certified() const { return status == WanderingStatus::CertifiedToHorizon; }
};

struct CertifyOptions {
  bool kiwi_precheck = true;
};

/// Checks that T_0 .. T_horizon keep cardinality N and are pairwise unlinked.
/// Failures are reported in the certificate; the first one found is kept,
/// scanning j = 1, 2, ... and then i = 0 .. j-1.
inline WanderingCertificate certify_wandering(const Polygon& T, unsigned d, std::size_t horizon,
                                              CertifyOptions options = {}, const PrecisionBudget& budget = {}) {
  const std::size_t N = T.size();
  if (N < 3) throw PreconditionError("wandering certification needs at least three vertices");
  WanderingCertificate cert;
  cert.horizon = horizon;
  if (options.kiwi_precheck && N > d) {
    cert.status = WanderingStatus::RejectedKiwiBound;
    cert.witness = "card " + std::to_string(N) + " > d = " + std::to_string(d);
    return cert;
  }
  std::vector<Polygon> iterates;
  iterates.reserve(horizon + 1);
  iterates.push_back(T);
  for (std::size_t j = 0; j <= horizon; ++j) {
    cert.s_trajectory.push_back(hole_profile(iterates[j], d, budget).size_of_rank(N - 2));
    for (std::size_t i = 0; i < j; ++i) {
      if (!unlinked(iterates[i], iterates[j], budget)) {
        cert.status = WanderingStatus::FailedLinked;
        cert.linked = {i, j};
        cert.witness = "hulls of T_" + std::to_string(i) + " and T_" + std::to_string(j) + " meet";
        return cert;
      }
    }
    if (j == horizon) break;
    try {
      iterates.push_back(map_polygon(iterates[j], d, budget));
    } catch (const NotInjective& e) {
      cert.status = WanderingStatus::FailedNonPrecritical;
      cert.step = j;
      cert.witness = e.what();
      return cert;
    }
  }
  return cert;
}

/// Size of the N-2 smallest hole must fall below this after burn-in.
inline Rational default_burn_in_threshold(unsigned d, std::size_t N) { return ratio(1, Integer(3) * d * N); }

/// Smallest i0 such that every recorded iterate from i0 on preserves
/// orientation and has s_{N-2} below the threshold. Returns the record index.
inline std::size_t find_burn_in(const std::vector<OrbitRecord>& orbit, unsigned d, std::size_t N,
                                std::optional<Rational> threshold = std::nullopt,
                                const PrecisionBudget& budget = {}) {
  if (orbit.empty()) throw PreconditionError("empty orbit");
  if (N < 3) throw PreconditionError("burn-in needs N >= 3");
  const Rational bound = threshold.value_or(default_burn_in_threshold(d, N));
  auto good = [&](const OrbitRecord& r) {
    if (!r.orientation.verdict) return false;
    const Interval& s = r.profile.size_of_rank(N - 2);
    if (auto o = try_compare(s, Interval(bound))) return *o == Order::less;
    return with_precision(budget, [&](std::size_t digits) {
      return compare(hole_profile_at(r.polygon, d, digits, budget).size_of_rank(N - 2), Interval(bound)) ==
             Order::less;
    });
  };
  std::size_t k = orbit.size();
  while (k > 0 && good(orbit[k - 1])) --k;
  if (k == orbit.size())
    throw NoBurnInWithinHorizon("no iterate up to " + std::to_string(orbit.back().index) +
                                " satisfies the standing assumption");
  return orbit[k].index;
}

/// Size rank (1-based) of the critical hole: minimal remainder among holes longer than 1/d.
inline std::size_t critical_hole_index(const HoleProfile& prof) {
  const Interval one_over_d(ratio(1, prof.degree));
  std::optional<std::size_t> best;
  for (std::size_t k = 1; k <= prof.size(); ++k) {
    const Hole& h = prof.ranked(k);
    if (compare(h.length, one_over_d) != Order::greater) continue;
    if (!best) {
      best = k;
      continue;
    }
    const Order o = compare(h.remainder, prof.ranked(*best).remainder);
    if (o == Order::equal) throw TieUnresolvable("two candidate critical holes have equal remainders");
    if (o == Order::less) best = k;
  }
  if (!best) throw NoHoleExceedsOneOverD("no hole is longer than 1/" + std::to_string(prof.degree));
  return *best;
}

inline std::size_t critical_hole_index(const HoleProfile& prof, const Polygon& P, const PrecisionBudget& budget) {
  try {
    return critical_hole_index(prof);
  } catch (const Unresolved&) {
    return with_precision(budget, [&](std::size_t digits) {
      return critical_hole_index(hole_profile_at(P, prof.degree, digits, budget));
    });
  }
}

struct JumpRecord {
  std::size_t i = 0;
  std::size_t cr = 0;  // size rank in T_i
  Interval s_tilde_cr;
  Chord edge;
  CriticalStrip strip;
  Arc image_hole;
  std::size_t image_rank = 0;  // size rank of the image-hole in T_{i+1}
};

struct JumpLog {
  std::size_t start = 0;  // first analyzed iterate
  std::size_t end = 0;    // last analyzed iterate (exclusive of the final record)
  std::vector<JumpRecord> records;
  std::vector<std::size_t> gaps;
  std::size_t dichotomy_checks = 0;
  /// Non-jump steps where the critical image-hole still landed among the N-2 smallest.
  std::vector<std::size_t> divergences;
};

namespace detail {

/// Size rank in `next` of the hole starting at f(H.from), after checking it ends at f(H.to).
inline std::size_t image_hole_rank(const Hole& H, const OrbitRecord& next, unsigned d, const PrecisionBudget& budget) {
  const Angle u = map_angle(H.from, d);
  const Angle w = map_angle(H.to, d);
  const auto pos = vertex_position(next.polygon, u, budget);
  if (!pos) throw AssertionBreach("image of a vertex is not a vertex of the next iterate");
  const Hole& target = next.profile.holes[*pos];
  if (!equal(target.to, w, budget))
    throw AssertionBreach("image-hole of a hole in T_" + std::to_string(next.index - 1) + " is not a hole of T_" +
                          std::to_string(next.index));
  return next.profile.rank_of[*pos];
}

}  // namespace detail

/// Jump detection over consecutive records. Checks the small-hole
/// dichotomy at every step and raises AssertionBreach when it fails.
inline JumpLog detect_jumps(const std::vector<OrbitRecord>& orbit, unsigned d, std::size_t N,
                            const PrecisionBudget& budget = {}) {
  if (N < 3) throw PreconditionError("jump detection needs N >= 3");
  JumpLog log;
  if (orbit.empty()) return log;
  log.start = orbit.front().index;
  log.end = orbit.back().index;
  for (std::size_t t = 0; t + 1 < orbit.size(); ++t) {
    const OrbitRecord& cur = orbit[t];
    const OrbitRecord& next = orbit[t + 1];
    if (cur.polygon.size() != N) throw PreconditionError("record cardinality differs from N");
    if (!cur.orientation.verdict)
      throw AssertionBreach("orientation not preserved at iterate " + std::to_string(cur.index));

    std::size_t cr = 0;
    try {
      cr = critical_hole_index(cur.profile, cur.polygon, budget);
    } catch (const NoHoleExceedsOneOverD& e) {
      throw AssertionBreach(std::string("orientation preserved but ") + e.what());
    }
    const Hole& crit = cur.profile.ranked(cr);

    const bool jump = compare_across(cur, next, d, budget, [&](const HoleProfile& a, const HoleProfile& b) {
                        return std::pair{d * a.size_of_rank(N - 2), b.size_of_rank(N - 2)};
                      }) == Order::greater;

    for (std::size_t k = 1; k + 2 <= N; ++k) {
      const Hole& h = cur.profile.ranked(k);
      const Order o = compare_across(cur, cur, d, budget, [&](const HoleProfile& a, const HoleProfile&) {
        return std::pair{a.size_of_rank(k), a.ranked(critical_hole_index(a)).remainder};
      });
      if (o == Order::equal)
        throw AssertionBreach("s_" + std::to_string(k) + " equals the critical remainder at iterate " +
                              std::to_string(cur.index));
      const std::size_t expected = o == Order::greater ? k + 1 : k;
      const std::size_t got = detail::image_hole_rank(h, next, d, budget);
      if (got != expected || (!jump && got != k))
        throw AssertionBreach("image of H_" + std::to_string(k) + "(T_" + std::to_string(cur.index) + ") is H_" +
                              std::to_string(got) + " of the next iterate, expected H_" + std::to_string(expected));
      ++log.dichotomy_checks;
    }

    const std::size_t crit_image_rank = detail::image_hole_rank(crit, next, d, budget);
    if (!jump) {
      if (crit_image_rank <= N - 2) log.divergences.push_back(cur.index);
      continue;
    }
    if (crit_image_rank > N - 2)
      throw AssertionBreach("critical image-hole at jump " + std::to_string(cur.index) + " has rank " +
                            std::to_string(crit_image_rank));
    JumpRecord rec;
    rec.i = cur.index;
    rec.cr = cr;
    rec.s_tilde_cr = crit.remainder;
    rec.edge = crit.edge();
    rec.strip = critical_strip(crit.arc(), d, crit.multiple, budget);
    rec.image_hole = image_hole(crit.arc(), d, budget);
    rec.image_rank = crit_image_rank;
    log.records.push_back(std::move(rec));
  }
  for (std::size_t k = 1; k < log.records.size(); ++k)
    log.gaps.push_back(log.records[k].i - log.records[k - 1].i);
  return log;
}

struct GapStats {
  std::vector<std::size_t> gaps;
  std::vector<std::size_t> tail_min;  // tail_min[k] = min(gaps[k..])
  bool nondecreasing = true;
};

inline GapStats jump_gap_stats(const std::vector<std::size_t>& jump_indices) {
  if (jump_indices.size() < 2) throw TooFewJumps("need at least two jumps, have " + std::to_string(jump_indices.size()));
  GapStats s;
  for (std::size_t k = 1; k < jump_indices.size(); ++k) {
    if (jump_indices[k] <= jump_indices[k - 1]) throw PreconditionError("jump indices must increase");
    s.gaps.push_back(jump_indices[k] - jump_indices[k - 1]);
  }
  s.tail_min.resize(s.gaps.size());
  std::size_t m = s.gaps.back();
  for (std::size_t k = s.gaps.size(); k-- > 0;) {
    m = std::min(m, s.gaps[k]);
    s.tail_min[k] = m;
  }
  for (std::size_t k = 1; k < s.gaps.size(); ++k) s.nondecreasing = s.nondecreasing && s.gaps[k] >= s.gaps[k - 1];
  return s;
}

inline GapStats jump_gap_stats(const JumpLog& log) {
  std::vector<std::size_t> idx;
  for (const auto& r : log.records) idx.push_back(r.i);
  return jump_gap_stats(idx);
}

struct ValueStep {
  std::size_t iterate = 0;
  std::size_t rank = 0;  // size rank of the hole of T_iterate containing the value arc
  Arc value;
};

struct ValueTrace {
  std::size_t jump = 0;
  std::size_t until = 0;  // next jump, or the last record
  std::vector<ValueStep> steps;
};

namespace detail {

/// Rank of the hole of P containing the open arc (x, y), or EnclosureTooWide.
inline std::size_t containing_hole_rank(const OrbitRecord& rec, const Arc& value, const PrecisionBudget& budget) {
  const auto& verts = rec.polygon.vertices();
  std::size_t pos = 0;
  if (auto v = vertex_position(rec.polygon, value.from, budget)) {
    pos = *v;
  } else {
    auto h = hole_index(verts, value.from, budget);
    pos = *h;
  }
  const Hole& hole = rec.profile.holes[pos];
  if (equal(value.to, hole.to, budget) || in_open_arc(value.to, value.from, hole.to, budget))
    return rec.profile.rank_of[pos];
  throw EnclosureTooWide("critical value arc straddles a vertex of T_" + std::to_string(rec.index));
}

}  // namespace detail

/// Follows the value arc of every jump strip through the non-jump steps that
/// follow it and reports which hole holds it.
inline std::vector<ValueTrace> track_critical_value(const JumpLog& log, const std::vector<OrbitRecord>& orbit,
                                                    unsigned d, std::size_t N, const PrecisionBudget& budget = {}) {
  std::vector<ValueTrace> out;
  if (orbit.empty()) return out;
  const std::size_t base = orbit.front().index;
  const Rational one_over_d = ratio(1, d);
  for (std::size_t r = 0; r < log.records.size(); ++r) {
    const JumpRecord& jr = log.records[r];
    ValueTrace trace;
    trace.jump = jr.i;
    trace.until = r + 1 < log.records.size() ? log.records[r + 1].i : orbit.back().index;
    Arc value = jr.image_hole;
    for (std::size_t t = jr.i + 1; t <= trace.until; ++t) {
      if (t > jr.i + 1) {
        const Interval len = arc_length(value.from, value.to, budget);
        if (compare(len, Interval(one_over_d)) != Order::less)
          throw EnclosureTooWide("critical value arc reached length 1/d before T_" + std::to_string(t));
        value = {map_angle(value.from, d), map_angle(value.to, d)};
      }
      const OrbitRecord& rec = orbit.at(t - base);
      const std::size_t rank = detail::containing_hole_rank(rec, value, budget);
      if (rank > N - 2)
        throw AssertionBreach("critical value of jump " + std::to_string(jr.i) + " sits in H_" +
                              std::to_string(rank) + "(T_" + std::to_string(t) + ")");
      trace.steps.push_back({t, rank, value});
    }
    out.push_back(std::move(trace));
  }
  return out;
}

/// Hole-label persistence whenever s_{N-1}(T_i) < 1/(d^{m+1} N).
struct PersistenceReport {
  std::size_t checks = 0;
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // (i, j)
};

inline PersistenceReport label_persistence(const std::vector<OrbitRecord>& orbit, unsigned d, std::size_t N,
                                           std::size_t max_m = 16, const PrecisionBudget& budget = {}) {
  PersistenceReport rep;
  for (std::size_t t = 0; t < orbit.size(); ++t) {
    const auto& rec = orbit[t];
    const Interval& s = rec.profile.size_of_rank(N - 1);
    std::size_t m = 0;
    while (m < max_m && t + m + 1 < orbit.size()) {
      const Rational bound = ratio(1, power(d, m + 2) * N);
      auto o = try_compare(s, Interval(bound));
      if (!o || *o != Order::less) break;
      ++m;
    }
    for (std::size_t k = 1; k + 1 <= N && m > 0; ++k) {
      Arc a = rec.profile.ranked(k).arc();
      for (std::size_t j = 1; j <= m; ++j) {
        a = {map_angle(a.from, d), map_angle(a.to, d)};
        const auto& later = orbit[t + j];
        const auto pos = vertex_position(later.polygon, a.from, budget);
        ++rep.checks;
        if (!pos || later.profile.rank_of[*pos] != k || !equal(later.profile.holes[*pos].to, a.to, budget))
          rep.violations.emplace_back(rec.index, j);
      }
    }
  }
  return rep;
}

/// Iterates where two holes or two remainders coincide exactly.
inline std::vector<std::size_t> size_ties(const std::vector<OrbitRecord>& orbit) {
  std::vector<std::size_t> out;
  for (const auto& rec : orbit) {
    const auto& p = rec.profile;
    bool tie = false;
    for (std::size_t a = 0; a < p.size() && !tie; ++a) {
      for (std::size_t b = a + 1; b < p.size() && !tie; ++b) {
        auto ol = try_compare(p.holes[a].length, p.holes[b].length);
        auto orr = try_compare(p.holes[a].remainder, p.holes[b].remainder);
        tie = (ol && *ol == Order::equal) || (orr && *orr == Order::equal);
      }
    }
    if (tie) out.push_back(rec.index);
  }
  return out;
}

struct DecayReport {
  std::vector<std::vector<Interval>> trajectories;  // [k-1][t] = s_k(T_t), k <= N-2
  bool flagged = false;  // no decrease of the running minimum over the second half
};

inline DecayReport size_decay(const std::vector<OrbitRecord>& orbit, std::size_t N) {
  DecayReport rep;
  if (N < 3) return rep;
  rep.trajectories.assign(N - 2, {});
  for (const auto& rec : orbit)
    for (std::size_t k = 1; k <= N - 2; ++k) rep.trajectories[k - 1].push_back(rec.profile.size_of_rank(k));
  if (orbit.size() >= 8) {
    const auto& tr = rep.trajectories[N - 3];
    const std::size_t half = tr.size() / 2;
    Rational first_min = tr[0].upper();
    for (std::size_t t = 0; t < half; ++t) first_min = std::min(first_min, tr[t].upper());
    Rational second_min = tr[half].lower();
    for (std::size_t t = half; t < tr.size(); ++t) second_min = std::min(second_min, tr[t].lower());
    rep.flagged = !(second_min < first_min);
  }
  return rep;
}

}  // namespace wandpoly
