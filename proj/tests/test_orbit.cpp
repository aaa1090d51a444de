#include <catch_amalgamated.hpp>

#include <random>

#include "oracle.hpp"
#include "wandpoly/orbit.hpp"

using namespace wandpoly;
using oracle::frac;

namespace {

Polygon poly(std::initializer_list<const char*> xs) {
  std::vector<std::string> v(xs.begin(), xs.end());
  return Polygon::parse(v);
}

Polygon poly_of(const std::vector<Rational>& v) {
  std::vector<Angle> a;
  for (const auto& x : v) a.emplace_back(x);
  return Polygon::from_angles(a);
}

std::vector<Rational> values(const Polygon& p) {
  std::vector<Rational> out;
  for (const auto& v : p.vertices()) out.push_back(v.exact_value());
  return out;
}

Rational val(const Interval& x) {
  REQUIRE(x.is_exact());
  return x.value();
}

}  // namespace

TEST_CASE("iterate_orbit examples") {
  const auto cyc = iterate_orbit(poly({"1/7", "2/7", "4/7"}), 2, 3);
  REQUIRE(cyc.size() == 4);
  for (const auto& r : cyc) CHECK(values(r.polygon) == values(cyc[0].polygon));

  const auto o = iterate_orbit(poly({"0.30", "0.31", "0.32"}), 2, 2);
  CHECK(values(o[1].polygon) == std::vector<Rational>{frac(60, 100), frac(62, 100), frac(64, 100)});
  CHECK(values(o[2].polygon) == std::vector<Rational>{frac(20, 100), frac(24, 100), frac(28, 100)});
  CHECK(o[2].index == 2);

  try {
    iterate_orbit(poly({"0.2", "0.4", "0.7"}), 2, 1);
    FAIL("expected NonInjectiveAtStep");
  } catch (const NonInjectiveAtStep& e) {
    CHECK(e.step() == 0);
  }

  const auto partial = iterate_orbit_partial(poly({"0.2", "0.4", "0.7"}), 2, 3);
  CHECK(partial.records.empty());
  REQUIRE(partial.non_injective_step);
  CHECK(*partial.non_injective_step == 0);
}

TEST_CASE("orbit records are vertexwise images") {
  std::mt19937_64 rng(12);
  for (int n = 0; n < 200; ++n) {
    const unsigned d = 2 + static_cast<unsigned>(rng() % 3);
    auto v = oracle::random_points(rng, 2 + rng() % 4, 997);
    std::vector<OrbitRecord> orbit;
    try {
      orbit = iterate_orbit(poly_of(v), d, 6);
    } catch (const NonInjectiveAtStep&) {
      continue;
    }
    for (const auto& rec : orbit) {
      REQUIRE(values(rec.polygon) == v);
      std::vector<Rational> next;
      for (const auto& x : v) next.push_back(oracle::times(x, d));
      v = oracle::sorted(next);
    }
  }
}

TEST_CASE("certify_wandering examples") {
  const Polygon t = poly({"0.30", "0.31", "0.32"});
  const auto c4 = certify_wandering(t, 2, 4, {false});
  CHECK(c4.status == WanderingStatus::CertifiedToHorizon);
  CHECK(c4.s_trajectory.size() == 5);
  CHECK(val(c4.s_trajectory[0]) == frac(1, 100));
  const auto c5 = certify_wandering(t, 2, 5, {false});
  CHECK(c5.status == WanderingStatus::FailedLinked);
  CHECK(c5.linked == std::pair<std::size_t, std::size_t>{1, 5});

  const auto periodic = certify_wandering(poly({"1/7", "2/7", "4/7"}), 2, 1, {false});
  CHECK(periodic.status == WanderingStatus::FailedLinked);
  CHECK(periodic.linked == std::pair<std::size_t, std::size_t>{0, 1});

  const auto collapse = certify_wandering(poly({"0.2", "0.4", "0.7"}), 2, 3, {false});
  CHECK(collapse.status == WanderingStatus::FailedNonPrecritical);
  CHECK(collapse.step == 0);

  CHECK(certify_wandering(t, 2, 4).status == WanderingStatus::RejectedKiwiBound);
  CHECK_THROWS_AS(certify_wandering(poly({"0.1", "0.2"}), 2, 1), PreconditionError);
}

TEST_CASE("certification matches an all-pairs interleaving oracle") {
  std::mt19937_64 rng(13);
  for (int n = 0; n < 150; ++n) {
    const unsigned d = 2 + static_cast<unsigned>(rng() % 3);
    auto v = oracle::random_points(rng, 3, 1000);
    const auto cert = certify_wandering(poly_of(v), d, 6, {false});
    std::vector<std::vector<Rational>> its = {v};
    std::optional<std::pair<std::size_t, std::size_t>> linked;
    std::optional<std::size_t> collapse;
    for (std::size_t j = 0; j <= 6 && !linked && !collapse; ++j) {
      for (std::size_t i = 0; i < j && !linked; ++i)
        if (oracle::linked(its[i], its[j])) linked = std::pair{i, j};
      if (linked || j == 6) break;
      if (!oracle::injective(its[j], d)) {
        collapse = j;
        break;
      }
      std::vector<Rational> next;
      for (const auto& x : its[j]) next.push_back(oracle::times(x, d));
      its.push_back(oracle::sorted(next));
    }
    if (linked) {
      REQUIRE(cert.status == WanderingStatus::FailedLinked);
      REQUIRE(cert.linked == *linked);
    } else if (collapse) {
      REQUIRE(cert.status == WanderingStatus::FailedNonPrecritical);
      REQUIRE(cert.step == *collapse);
    } else {
      REQUIRE(cert.certified());
    }
  }
}

TEST_CASE("more vertices than the degree are rejected without iterating") {
  std::mt19937_64 rng(14);
  for (int n = 0; n < 300; ++n) {
    const std::size_t N = 3 + rng() % 10;
    const unsigned d = 2 + static_cast<unsigned>(rng() % 12);
    const Polygon T = poly_of(oracle::random_points(rng, N, 5000));
    if (N > d) {
      const auto cert = certify_wandering(T, d, std::size_t{1} << 40);
      REQUIRE(cert.status == WanderingStatus::RejectedKiwiBound);
      REQUIRE(cert.s_trajectory.empty());
    } else {
      REQUIRE(certify_wandering(T, d, 1).status != WanderingStatus::RejectedKiwiBound);
    }
  }
}

TEST_CASE("burn-in examples") {
  const auto periodic = iterate_orbit(poly({"0", "1/7", "2/7"}), 2, 12);
  CHECK_THROWS_AS(find_burn_in(periodic, 2, 3), NoBurnInWithinHorizon);

  const auto single = iterate_orbit(poly({"0.19", "0.45", "0.96"}), 2, 0);
  CHECK_THROWS_AS(find_burn_in(single, 2, 3), NoBurnInWithinHorizon);

  // Two vertices 2^-40 apart and a third far away: s_1 stays tiny for 20 steps.
  const Rational eps = Rational(1) / Rational(power(2, 40));
  const auto small = iterate_orbit(poly_of({frac(1, 10), frac(1, 10) + eps, frac(7, 10)}), 2, 20);
  CHECK(find_burn_in(small, 2, 3) == 0);

  CHECK(default_burn_in_threshold(2, 3) == frac(1, 18));
  CHECK_THROWS_AS(find_burn_in({}, 2, 3), PreconditionError);
}

TEST_CASE("critical hole examples") {
  const auto p1 = hole_profile(poly({"0", "1/7", "2/7"}), 2);
  const std::size_t k1 = critical_hole_index(p1);
  CHECK(k1 == 3);
  CHECK(p1.ranked(k1).from.exact_value() == frac(2, 7));
  CHECK(val(p1.ranked(k1).remainder) == frac(3, 14));

  const auto p2 = hole_profile(poly({"0", "0.05", "0.45"}), 3);
  CHECK(val(p2.ranked(critical_hole_index(p2)).length) == frac(40, 100));

  const auto p3 = hole_profile(poly({"0.05", "0.3", "0.6"}), 2);
  CHECK_THROWS_AS(critical_hole_index(p3), NoHoleExceedsOneOverD);

  // Two holes of 0.4 longer than 1/3 with the same remainder.
  const auto p4 = hole_profile(poly({"0", "0.4", "0.8"}), 3);
  CHECK_THROWS_AS(critical_hole_index(p4), TieUnresolvable);
}

TEST_CASE("detect_jumps worked example") {
  const auto orbit = iterate_orbit(poly({"19/100", "45/100", "96/100"}), 2, 1);
  const auto log = detect_jumps(orbit, 2, 3);
  REQUIRE(log.records.size() == 1);
  const auto& r = log.records[0];
  CHECK(r.i == 0);
  CHECK(r.cr == 3);
  CHECK(val(r.s_tilde_cr) == frac(1, 100));
  CHECK(r.edge.first.exact_value() == frac(45, 100));
  CHECK(r.edge.second.exact_value() == frac(96, 100));
  CHECK(r.strip.start_from.exact_value() == frac(45, 100));
  CHECK(r.strip.start_to.exact_value() == frac(46, 100));
  CHECK(r.image_hole.from.exact_value() == frac(90, 100));
  CHECK(r.image_hole.to.exact_value() == frac(92, 100));
  CHECK(r.image_rank == 1);
  CHECK(log.dichotomy_checks == 1);
  CHECK(log.divergences.empty());
}

TEST_CASE("detect_jumps without jumps and on broken orbits") {
  const auto orbit = iterate_orbit(poly({"0.30", "0.31", "0.32"}), 2, 4);
  const auto log = detect_jumps(orbit, 2, 3);
  CHECK(log.records.empty());
  CHECK(log.dichotomy_checks == 4);

  const auto bad = iterate_orbit(poly({"0.05", "0.35", "0.7"}), 2, 1);
  REQUIRE(bad.size() == 2);
  CHECK_THROWS_AS(detect_jumps(bad, 2, 3), AssertionBreach);
  CHECK(detect_jumps({}, 2, 3).records.empty());
}

TEST_CASE("jump gap statistics") {
  const auto s = jump_gap_stats(std::vector<std::size_t>{3, 5, 9, 17});
  CHECK(s.gaps == std::vector<std::size_t>{2, 4, 8});
  CHECK(s.tail_min == std::vector<std::size_t>{2, 4, 8});
  CHECK(s.nondecreasing);
  const auto t = jump_gap_stats(std::vector<std::size_t>{1, 10, 12});
  CHECK(t.tail_min == std::vector<std::size_t>{2, 2});
  CHECK_FALSE(t.nondecreasing);
  CHECK_THROWS_AS(jump_gap_stats(std::vector<std::size_t>{4}), TooFewJumps);
  CHECK_THROWS_AS(jump_gap_stats(JumpLog{}), TooFewJumps);
}

TEST_CASE("critical value tracking") {
  const auto orbit = iterate_orbit(poly({"19/100", "45/100", "96/100"}), 2, 1);
  auto log = detect_jumps(orbit, 2, 3);
  const auto traces = track_critical_value(log, orbit, 2, 3);
  REQUIRE(traces.size() == 1);
  REQUIRE(traces[0].steps.size() == 1);
  CHECK(traces[0].steps[0].iterate == 1);
  CHECK(traces[0].steps[0].rank == 1);

  CHECK(track_critical_value(JumpLog{}, orbit, 2, 3).empty());

  // A value arc reaching past the vertex 0.92 of T_1.
  log.records[0].image_hole = {parse_angle("0.90"), parse_angle("0.93")};
  CHECK_THROWS_AS(track_critical_value(log, orbit, 2, 3), EnclosureTooWide);
}

TEST_CASE("hole labels persist while the N-1 smallest holes are tiny") {
  const Rational eps = Rational(1) / Rational(power(3, 30));
  const Polygon T = poly_of({frac(1, 5), frac(1, 5) + 2 * eps, frac(1, 5) + 7 * eps, frac(1, 5) + 11 * eps});
  const auto orbit = iterate_orbit(T, 3, 10);
  const auto rep = label_persistence(orbit, 3, 4);
  CHECK(rep.checks > 0);
  CHECK(rep.violations.empty());
  CHECK(size_ties(orbit).empty());
  const auto decay = size_decay(orbit, 4);
  REQUIRE(decay.trajectories.size() == 2);
  CHECK(decay.trajectories[0].size() == orbit.size());
  CHECK(decay.flagged);  // sizes grow on this short prefix
}

TEST_CASE("equal hole sizes are reported as ties") {
  const auto orbit = iterate_orbit(poly({"0", "1/7", "2/7"}), 2, 2);
  CHECK(size_ties(orbit) == std::vector<std::size_t>{0, 1, 2});
}
