#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracle.hpp"
#include "wandpoly/recurrence.hpp"

using namespace wandpoly;
using oracle::frac;

namespace {

Polygon poly(std::initializer_list<const char*> xs) {
  std::vector<std::string> v(xs.begin(), xs.end());
  return Polygon::parse(v);
}

Arc arc(const char* a, const char* b) { return {parse_angle(a), parse_angle(b)}; }

Chord chord(const Rational& a, const Rational& b) { return {Angle(a), Angle(b)}; }

JumpRecord jump_at(std::size_t i, const Arc& hole) {
  JumpRecord r;
  r.i = i;
  r.strip = critical_strip(hole, 2, 1);
  r.image_hole = image_hole(hole, 2);
  return r;
}

Rational v(const Angle& a) { return a.exact_value(); }

std::string key(const CandidateLeaf& l) {
  std::string s;
  for (const Angle* a : {&l.first_span.from, &l.first_span.to, &l.second_span.from, &l.second_span.to})
    s += to_string(*a) + " ";
  for (auto i : l.support) s += std::to_string(i) + ",";
  return s;
}

std::set<std::uint64_t> bins_of(const std::vector<Rational>& xs, unsigned r) {
  std::set<std::uint64_t> out;
  for (const auto& x : xs) out.insert(floor_of(x * Rational(power(2, r))).convert_to<std::uint64_t>());
  return out;
}

}  // namespace

TEST_CASE("leaf from the single-jump example") {
  const auto orbit = iterate_orbit(poly({"19/100", "45/100", "96/100"}), 2, 1);
  const auto leaves = extract_jumping_leaves(detect_jumps(orbit, 2, 3), 2);
  REQUIRE(leaves.size() == 1);
  const auto& l = leaves[0];
  CHECK(v(l.first_span.from) == frac(45, 100));
  CHECK(v(l.first_span.to) == frac(46, 100));
  CHECK(v(l.second_span.from) == frac(95, 100));
  CHECK(v(l.second_span.to) == frac(96, 100));
  CHECK(l.j == 1);
  CHECK(l.value.open);
  CHECK(v(l.value.from) == frac(90, 100));
  CHECK(v(l.value.to) == frac(92, 100));
  CHECK(l.support == std::vector<std::size_t>{0});

  CHECK(extract_jumping_leaves(JumpLog{}, 2).empty());
}

TEST_CASE("strips cluster by overlap") {
  JumpLog apart;
  apart.records = {jump_at(0, arc("0.45", "0.96")), jump_at(3, arc("0.10", "0.62"))};
  CHECK(extract_jumping_leaves(apart, 2).size() == 2);

  JumpLog nested;
  nested.records = {jump_at(0, arc("0.45", "0.96")), jump_at(4, arc("0.452", "0.955"))};
  const auto leaves = extract_jumping_leaves(nested, 2);
  REQUIRE(leaves.size() == 1);
  CHECK(v(leaves[0].first_span.from) == frac(452, 1000));
  CHECK(v(leaves[0].first_span.to) == frac(455, 1000));
  CHECK(leaves[0].support == std::vector<std::size_t>{0, 4});
  CHECK_FALSE(leaves[0].value.open);
  CHECK(v(leaves[0].value.from) == frac(904, 1000));
  CHECK(v(leaves[0].value.to) == frac(910, 1000));
}

TEST_CASE("leaf clustering ignores log order") {
  std::vector<JumpRecord> recs = {jump_at(0, arc("0.45", "0.96")), jump_at(2, arc("0.10", "0.62")),
                                  jump_at(5, arc("0.452", "0.955")), jump_at(7, arc("0.105", "0.61")),
                                  jump_at(9, arc("0.3", "0.85"))};
  JumpLog base;
  base.records = recs;
  std::set<std::string> want;
  for (const auto& l : extract_jumping_leaves(base, 2)) want.insert(key(l));
  CHECK(want.size() == 3);
  std::mt19937_64 rng(21);
  for (int n = 0; n < 30; ++n) {
    std::shuffle(recs.begin(), recs.end(), rng);
    JumpLog log;
    log.records = recs;
    std::set<std::string> got;
    for (const auto& l : extract_jumping_leaves(log, 2)) got.insert(key(l));
    REQUIRE(got == want);
  }
}

TEST_CASE("orbit disjointness examples") {
  const auto a = CandidateLeaf::from_chord(chord(0, frac(1, 2)), 2);
  const auto b = CandidateLeaf::from_chord(chord(frac(1, 4), frac(3, 4)), 2);
  auto m = orbit_disjointness({a, b}, 2, 10);
  CHECK(m[0][1].kind == DisjointnessEntry::Kind::CollisionAt);
  CHECK(m[0][1].i == 0);
  CHECK(m[0][1].j == 1);
  CHECK(m[1][0].kind == DisjointnessEntry::Kind::CollisionAt);
  CHECK(m[1][0].i == 1);
  CHECK(m[1][0].j == 0);

  const auto c = CandidateLeaf::from_chord(chord(0, frac(1, 3)), 3);
  const auto e = CandidateLeaf::from_chord(chord(frac(1, 9), frac(4, 9)), 3);
  REQUIRE(v(e.value.from) == frac(1, 3));
  m = orbit_disjointness({c, e}, 3, 10);
  CHECK(m[0][1].kind == DisjointnessEntry::Kind::CollisionAt);
  CHECK(m[0][1].j == 1);

  const auto p = CandidateLeaf::from_chord(chord(frac(1, 14), frac(4, 7)), 2);
  const auto q = CandidateLeaf::from_chord(chord(frac(1, 10), frac(3, 5)), 2);
  m = orbit_disjointness({p, q}, 2, 20);
  CHECK(m[0][1].kind == DisjointnessEntry::Kind::Disjoint);
  CHECK(m[0][0].kind == DisjointnessEntry::Kind::CollisionAt);
  CHECK_THROWS_AS(orbit_disjointness({p, q}, 2, 0), PreconditionError);
}

TEST_CASE("omega approximation examples") {
  CHECK(omega_approx(parse_angle("1/7"), 2, 0, 30, 6).bins == bins_of({frac(1, 7), frac(2, 7), frac(4, 7)}, 6));
  CHECK(omega_approx(parse_angle("0"), 2, 0, 30, 6).bins == std::set<std::uint64_t>{0});
  CHECK(omega_approx(parse_angle("1/2"), 2, 1, 30, 6).bins == std::set<std::uint64_t>{0});
  CHECK(omega_approx(parse_angle("1/2"), 2, 0, 30, 6).bins == std::set<std::uint64_t>{0, 32});
  CHECK_THROWS_AS(omega_approx(parse_angle("1/7"), 2, 5, 5, 6), PreconditionError);

  const auto x = omega_approx(parse_angle("gen:random?d=2&seed=5"), 2, 10, 200, 6);
  const auto y = omega_approx(parse_angle("gen:random?d=2&seed=5"), 2, 10, 200, 6);
  CHECK(x.bins == y.bins);
  CHECK(hausdorff(x, y) == 0);
}

TEST_CASE("omega bins of rational orbits match direct iteration") {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 300; ++n) {
    const unsigned d = 2 + static_cast<unsigned>(rng() % 3);
    const Rational x = oracle::random_fraction(rng, 200);
    const std::size_t burn = rng() % 5;
    std::vector<Rational> pts;
    Rational y = x;
    for (std::size_t t = 0; t <= 40; ++t) {
      if (t >= burn) pts.push_back(y);
      y = oracle::times(y, d);
    }
    REQUIRE(omega_approx(Angle(x), d, burn, 40, 7).bins == bins_of(pts, 7));
  }
}

TEST_CASE("recurrence evidence examples") {
  const Rational eps = frac(1, 64);
  const auto fixed = recurrence_evidence(CandidateLeaf::from_chord(chord(0, frac(1, 2)), 2), 2, 10, eps);
  CHECK(fixed.witnessed);
  CHECK(fixed.step == 0);
  CHECK(fixed.distance_series[0].upper == 0);

  const auto cyc = recurrence_evidence(CandidateLeaf::from_chord(chord(frac(1, 14), frac(4, 7)), 2), 2, 10, eps);
  CHECK(cyc.witnessed);
  CHECK(cyc.step == 2);
  CHECK(cyc.distance_series[2].upper == 0);
  CHECK(cyc.distance_series[0].lower > 0);

  CandidateLeaf away;
  away.first_span = {parse_angle("0.19"), parse_angle("0.21"), false};
  away.second_span = {parse_angle("0.69"), parse_angle("0.71"), false};
  away.value = Enclosure::point(parse_angle("1/7"));
  const auto miss = recurrence_evidence(away, 2, 30, eps);
  CHECK_FALSE(miss.witnessed);
  CHECK(miss.min_bound > 0);
  CHECK(miss.min_bound >= eps);
  for (std::size_t t = 1; t < miss.running_min.size(); ++t) CHECK(miss.running_min[t] <= miss.running_min[t - 1]);
}

TEST_CASE("recurrence is witnessed at the first hitting time") {
  std::mt19937_64 rng(23);
  const Rational eps = frac(1, 1 << 20);
  int witnessed = 0;
  for (int n = 0; n < 400; ++n) {
    const unsigned d = 2 + static_cast<unsigned>(rng() % 3);
    const unsigned j = 1 + static_cast<unsigned>(rng() % (d - 1));
    const Rational x = oracle::random_fraction(rng, 60);
    const Rational y = oracle::wrap(x + frac(j, d));
    const auto leaf = CandidateLeaf::from_chord(chord(x, y), d);
    const auto ev = recurrence_evidence(leaf, d, 40, eps);
    std::optional<std::size_t> hit;
    Rational z = oracle::times(x, d);
    for (std::size_t t = 0; t <= 40 && !hit; ++t) {
      if (z == x || z == y) hit = t;
      z = oracle::times(z, d);
    }
    REQUIRE(ev.witnessed == hit.has_value());
    if (hit) {
      REQUIRE(ev.step == *hit);
      ++witnessed;
    }
    for (std::size_t t = 1; t < ev.running_min.size(); ++t) REQUIRE(ev.running_min[t] <= ev.running_min[t - 1]);
  }
  CHECK(witnessed > 20);
}

TEST_CASE("evidence horizon stops before the value arc reaches 1/d") {
  CandidateLeaf leaf;
  leaf.first_span = {parse_angle("0.45"), parse_angle("0.46"), false};
  leaf.second_span = {parse_angle("0.95"), parse_angle("0.96"), false};
  leaf.value = {parse_angle("0.90"), parse_angle("0.92"), true};
  // 0.02 -> 0.04 -> 0.08 -> 0.16 -> 0.32, the next doubling passes 1/2.
  CHECK(evidence_horizon(leaf, 2, 100) == 4);
  CHECK_NOTHROW(recurrence_evidence(leaf, 2, 4, frac(1, 64)));
  CHECK_THROWS_AS(recurrence_evidence(leaf, 2, 6, frac(1, 64)), EnclosureTooWide);
  CHECK(evidence_horizon(CandidateLeaf::from_chord(chord(0, frac(1, 2)), 2), 2, 100) == 100);
}

TEST_CASE("narrowness evidence") {
  const auto orbit = iterate_orbit(poly({"19/100", "45/100", "96/100"}), 2, 1);
  const auto w = narrowness_evidence(parse_angle("0.91"), orbit, 3);
  REQUIRE(w.size() == 1);
  CHECK(w[0].iterate == 1);
  CHECK(w[0].rank == 1);
  CHECK(narrowness_evidence(parse_angle("0.5"), orbit, 3).empty());
  CHECK(narrowness_evidence(parse_angle("0.45"), orbit, 3).empty());
}

TEST_CASE("theorem verifier rejects uncertified input") {
  TheoremParams params;
  params.horizon = 10;
  params.kiwi_precheck = false;
  try {
    verify_theorem1(poly({"1/7", "2/7", "4/7"}), 2, params);
    FAIL("expected NotCertifiedWandering");
  } catch (const NotCertifiedWandering& e) {
    CHECK(e.certificate().status == WanderingStatus::FailedLinked);
  }
  params.kiwi_precheck = true;
  try {
    verify_theorem1(poly({"0.1", "0.2", "0.3"}), 2, params);
    FAIL("expected NotCertifiedWandering");
  } catch (const NotCertifiedWandering& e) {
    CHECK(e.certificate().status == WanderingStatus::RejectedKiwiBound);
  }
}

TEST_CASE("theorem verifier on a digit-stream triangle") {
  const Polygon T = poly({"gen:champernowne?d=3&at0=0&at1100=0&at1101=0", "gen:champernowne?d=3&at0=0&at1100=1&at1101=0",
                          "gen:champernowne?d=3&at0=1&at1100=1&at1101=1"});
  TheoremParams params;
  params.horizon = 40;
  const auto rep = verify_theorem1(T, 3, params);
  CHECK(rep.certificate.certified());
  CHECK(rep.records == 41);
  CHECK(rep.status != TheoremStatus::AssertionBreach);
  CHECK(rep.enough_leaves == (rep.leaves.size() >= 2));
}

TEST_CASE("collection bound") {
  TheoremParams params;
  params.horizon = 1;
  try {
    verify_collection_bound({poly({"0.1", "0.2", "0.3"})}, 2, params);
    FAIL("expected NotCertifiedWandering");
  } catch (const NotCertifiedWandering& e) {
    CHECK(e.certificate().status == WanderingStatus::RejectedKiwiBound);
    CHECK(e.member() == 0);
  }

  try {
    verify_collection_bound({poly({"0.06", "0.1", "0.14"}), poly({"0.3", "0.35", "0.4"})}, 3, params);
    FAIL("expected CrossPairLinked");
  } catch (const CrossPairLinked& e) {
    CHECK(e.a() == 0);
    CHECK(e.n() == 1);
    CHECK(e.b() == 1);
    CHECK(e.m() == 0);
  }

  CHECK_THROWS_AS(verify_collection_bound({}, 3, params), PreconditionError);

  params.horizon = 40;
  const Polygon T = poly({"gen:champernowne?d=3&at0=0&at1100=0&at1101=0", "gen:champernowne?d=3&at0=0&at1100=1&at1101=0",
                          "gen:champernowne?d=3&at0=1&at1100=1&at1101=1"});
  const auto rep = verify_collection_bound({T}, 3, params);
  CHECK(rep.members == 1);
  CHECK(rep.sigma == 1);
  if (rep.holds) CHECK(rep.r_hat >= rep.omega_hat + 1);
  else CHECK_FALSE(rep.notes.empty());
}
