#pragma once

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wandpoly/angle.hpp"
#include "wandpoly/errors.hpp"
#include "wandpoly/geometry.hpp"
#include "wandpoly/number.hpp"
#include "wandpoly/orbit.hpp"
#include "wandpoly/recurrence.hpp"

namespace wandpoly {

using json = nlohmann::json;

inline constexpr const char* kVersion = "wandpoly 0.1.0";

struct AnalysisConfig {
  unsigned degree = 2;
  std::size_t horizon = 0;
  std::optional<std::size_t> burn_in_override;
  unsigned epsilon_bits = 6;  // epsilon = 2^-epsilon_bits
  std::size_t budget = 4096;
  bool kiwi_precheck = true;
  std::uint64_t seed = 0;

  PrecisionBudget precision() const { return {budget}; }
  TheoremParams theorem_params() const {
    TheoremParams p;
    p.horizon = horizon;
    p.epsilon_bits = epsilon_bits;
    p.budget = precision();
    p.burn_in_override = burn_in_override;
    p.kiwi_precheck = kiwi_precheck;
    return p;
  }
};

namespace report {

inline std::string decimal_of(const Angle& a) {
  return decimal_string(a.is_exact() ? a.exact_value() : enclosure(a, 64).lower());
}

inline json angle(const Angle& a) { return {{"value", to_string(a)}, {"decimal", decimal_of(a)}}; }

inline json quantity(const Interval& x) {
  if (x.is_exact()) return {{"value", fraction_string(x.lower())}, {"decimal", decimal_string(x.lower())}};
  return {{"lower", fraction_string(x.lower())},
          {"upper", fraction_string(x.upper())},
          {"decimal", decimal_string(x.lower())}};
}

inline json quantity(const Rational& x) { return quantity(Interval(x)); }

inline json arc(const Arc& a) { return {{"from", angle(a.from)}, {"to", angle(a.to)}}; }

inline json chord(const Chord& c) { return json::array({angle(c.first), angle(c.second)}); }

inline json enclosure_json(const Enclosure& e) {
  return {{"from", angle(e.from)}, {"to", angle(e.to)}, {"open", e.open}};
}

inline json polygon(const Polygon& P) {
  json v = json::array();
  for (const auto& a : P.vertices()) v.push_back(angle(a));
  return v;
}

inline json config(const AnalysisConfig& c) {
  return {{"degree", c.degree},
          {"horizon", c.horizon},
          {"burn_in_override", c.burn_in_override ? json(*c.burn_in_override) : json(nullptr)},
          {"epsilon", "1/" + power(2, c.epsilon_bits).str()},
          {"budget", c.budget},
          {"kiwi_precheck", c.kiwi_precheck},
          {"seed", c.seed}};
}

inline json orientation(const OrientationCertificate& o) {
  json arcs = json::array();
  for (const auto& a : o.witness_arcs) arcs.push_back(arc(a));
  return {{"verdict", o.verdict},
          {"cyclic_order", o.cyclic_order},
          {"disjoint_arcs", o.disjoint_arcs},
          {"remainder_sum", o.remainder_sum},
          {"remainder_sum_value", quantity(o.remainder_sum_value)},
          {"witness_arcs", arcs}};
}

inline json profile(const HoleProfile& p) {
  json holes = json::array();
  for (const auto& h : p.holes) {
    holes.push_back({{"position", h.position},
                     {"rank", p.rank_of[h.position]},
                     {"from", angle(h.from)},
                     {"to", angle(h.to)},
                     {"length", quantity(h.length)},
                     {"remainder", quantity(h.remainder)},
                     {"multiple", h.multiple}});
  }
  return {{"holes", holes}, {"label_map", p.label_map}, {"length_sum", quantity(p.length_sum())},
          {"remainder_sum", quantity(p.remainder_sum())}};
}

inline json certificate(const WanderingCertificate& c) {
  json j = {{"status", to_string(c.status)}, {"horizon", c.horizon}, {"witness", c.witness}};
  if (c.status == WanderingStatus::FailedNonPrecritical) j["step"] = c.step;
  if (c.status == WanderingStatus::FailedLinked) j["linked"] = {c.linked.first, c.linked.second};
  json traj = json::array();
  for (const auto& s : c.s_trajectory) traj.push_back(decimal_string(s.lower()));
  j["s_trajectory_decimal"] = traj;
  return j;
}

inline json strip(const CriticalStrip& s, unsigned d) {
  const Arc end = s.end_range(d);
  return {{"hole", arc(s.hole)},
          {"j", s.j},
          {"start_range", {{"from", angle(s.start_from)}, {"to", angle(s.start_to)}}},
          {"end_range", {{"from", angle(end.from)}, {"to", angle(end.to)}}},
          {"rho_value", quantity(s.rho_value)}};
}

inline json jump_record(const JumpRecord& r, unsigned d) {
  return {{"i", r.i},
          {"cr", r.cr},
          {"s_tilde_cr", quantity(r.s_tilde_cr)},
          {"edge", chord(r.edge)},
          {"strip", strip(r.strip, d)},
          {"image_hole", arc(r.image_hole)},
          {"image_rank", r.image_rank}};
}

inline json jump_log(const JumpLog& log, unsigned d) {
  json recs = json::array();
  for (const auto& r : log.records) recs.push_back(jump_record(r, d));
  json j = {{"start", log.start},
            {"end", log.end},
            {"jumps", recs},
            {"gaps", log.gaps},
            {"dichotomy_checks", log.dichotomy_checks},
            {"divergences", log.divergences}};
  if (log.records.size() >= 2) {
    const auto s = jump_gap_stats(log);
    j["gap_stats"] = {{"gaps", s.gaps}, {"tail_min", s.tail_min}, {"nondecreasing", s.nondecreasing}};
  } else {
    j["gap_stats"] = nullptr;
  }
  return j;
}

inline json traces(const std::vector<ValueTrace>& ts) {
  json out = json::array();
  for (const auto& t : ts) {
    json steps = json::array();
    for (const auto& s : t.steps) steps.push_back({{"iterate", s.iterate}, {"rank", s.rank}});
    out.push_back({{"jump", t.jump}, {"until", t.until}, {"steps", steps}});
  }
  return out;
}

inline json leaf(const CandidateLeaf& l) {
  return {{"first_span", enclosure_json(l.first_span)},
          {"second_span", enclosure_json(l.second_span)},
          {"j", l.j},
          {"support", l.support},
          {"value", enclosure_json(l.value)}};
}

inline json disjointness(const DisjointnessMatrix& m) {
  json rows = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& e : row) {
      json cell = {{"kind", to_string(e.kind)}};
      if (e.kind == DisjointnessEntry::Kind::CollisionAt) cell["at"] = {e.i, e.j};
      r.push_back(cell);
    }
    rows.push_back(r);
  }
  return rows;
}

inline json evidence(const RecurrenceEvidence& ev) {
  json j = {{"horizon", ev.horizon},
            {"verdict", ev.witnessed ? "RecurrentWitnessed" : "Inconclusive"},
            {"min_bound", quantity(ev.min_bound)},
            {"series_length", ev.distance_series.size()}};
  if (ev.witnessed) j["step"] = ev.step;
  return j;
}

inline json omega(const OmegaApproximation& om) {
  return {{"epsilon", "1/" + power(2, om.r).str()},
          {"burn_in", om.burn_in},
          {"horizon", om.horizon},
          {"bins", std::vector<std::uint64_t>(om.bins.begin(), om.bins.end())}};
}

inline json theorem(const TheoremReport& r) {
  json evs = json::array();
  for (const auto& e : r.evidence) evs.push_back(evidence(e));
  json oms = json::array();
  for (const auto& o : r.omegas) oms.push_back(omega(o));
  json hd = json::array();
  for (const auto& row : r.hausdorff_matrix) {
    json jr = json::array();
    for (const auto& x : row) jr.push_back(fraction_string(x));
    hd.push_back(jr);
  }
  json lims = json::array();
  for (const auto& c : r.limcoin)
    lims.push_back({{"iterate", c.iterate}, {"approximant", chord(c.approximant)},
                    {"distance", fraction_string(c.distance)}, {"pass", c.pass}});
  json leaves = json::array();
  for (const auto& l : r.leaves) leaves.push_back(leaf(l));
  return {{"status", to_string(r.status)},
          {"certificate", certificate(r.certificate)},
          {"records", r.records},
          {"burn_in", r.burn_in ? json(*r.burn_in) : json(nullptr)},
          {"jump_count", r.jumps.records.size()},
          {"jump_indices", [&] {
             std::vector<std::size_t> v;
             for (const auto& x : r.jumps.records) v.push_back(x.i);
             return v;
           }()},
          {"traces", traces(r.traces)},
          {"leaves", leaves},
          {"enough_leaves", r.enough_leaves},
          {"disjointness", disjointness(r.disjointness)},
          {"evidence", evs},
          {"omega", oms},
          {"hausdorff", hd},
          {"limcoin", lims},
          {"notes", r.notes}};
}

inline std::vector<Polygon> parse_polygons(const std::vector<std::vector<std::string>>& inputs,
                                           const PrecisionBudget& budget) {
  if (inputs.empty()) throw InputError("no polygon given");
  std::vector<Polygon> out;
  for (const auto& lits : inputs) out.push_back(Polygon::parse(lits, budget));
  return out;
}

inline json envelope(const char* command, const AnalysisConfig& cfg, const std::vector<Polygon>& polys) {
  json in = json::array();
  for (const auto& p : polys) in.push_back(polygon(p));
  return {{"command", command}, {"version", kVersion}, {"config", config(cfg)}, {"input", in}};
}

inline const Polygon& single(const std::vector<Polygon>& polys, const char* command) {
  if (polys.size() != 1) throw InputError(std::string(command) + " takes exactly one polygon");
  return polys.front();
}

}  // namespace report

inline json cmd_analyze(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  const Polygon& P = report::single(polys, "analyze");
  json out = report::envelope("analyze", cfg, polys);
  const auto prof = hole_profile(P, cfg.degree, budget);
  json payload = {{"polygon", report::polygon(P)}, {"profile", report::profile(prof)}};
  try {
    payload["orientation"] = report::orientation(orientation_certificate(P, prof, budget));
  } catch (const NotInjective& e) {
    payload["orientation"] = {{"error", "NotInjective"}, {"message", e.what()}};
  }
  try {
    const std::size_t cr = critical_hole_index(prof, P, budget);
    const Hole& h = prof.ranked(cr);
    payload["critical_hole"] = {{"rank", cr}, {"position", h.position}, {"hole", report::arc(h.arc())},
                                {"remainder", report::quantity(h.remainder)}};
  } catch (const NoHoleExceedsOneOverD& e) {
    payload["critical_hole"] = {{"error", "NoHoleExceedsOneOverD"}, {"message", e.what()}};
  } catch (const TieUnresolvable& e) {
    payload["critical_hole"] = {{"error", "TieUnresolvable"}, {"message", e.what()}};
  }
  out["payload"] = payload;
  return out;
}

inline json cmd_orbit(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  const Polygon& T = report::single(polys, "orbit");
  json out = report::envelope("orbit", cfg, polys);
  const auto orbit = iterate_orbit_partial(T, cfg.degree, cfg.horizon, budget);
  json recs = json::array();
  for (const auto& r : orbit.records) {
    json sizes = json::array();
    for (std::size_t k = 1; k <= r.profile.size(); ++k) sizes.push_back(report::quantity(r.profile.size_of_rank(k)));
    recs.push_back({{"index", r.index},
                    {"polygon", report::polygon(r.polygon)},
                    {"profile", report::profile(r.profile)},
                    {"sizes", sizes},
                    {"orientation", report::orientation(r.orientation)}});
  }
  json payload = {{"records", recs}};
  payload["non_injective_step"] = orbit.non_injective_step ? json(*orbit.non_injective_step) : json(nullptr);
  if (orbit.non_injective_step) payload["message"] = orbit.message;
  if (T.size() >= 3)
    payload["certificate"] =
        report::certificate(certify_wandering(T, cfg.degree, cfg.horizon, {cfg.kiwi_precheck}, budget));
  out["payload"] = payload;
  return out;
}

namespace report {

struct JumpAnalysis {
  std::vector<OrbitRecord> orbit;
  std::size_t burn_in = 0;
  json burn_in_json;
  JumpLog log;
  std::vector<ValueTrace> traces;
  std::optional<std::string> trace_error;
};

inline JumpAnalysis analyze_jumps(const Polygon& T, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const std::size_t N = T.size();
  if (N < 3) throw PreconditionError("jump analysis needs at least three vertices");
  JumpAnalysis a;
  a.orbit = iterate_orbit(T, cfg.degree, cfg.horizon, budget);
  if (cfg.burn_in_override) {
    if (*cfg.burn_in_override > cfg.horizon) throw PreconditionError("burn-in beyond the horizon");
    a.burn_in = *cfg.burn_in_override;
    a.burn_in_json = {{"status", "override"}, {"used", a.burn_in}};
  } else {
    // Without an override the window starts where orientation holds for good;
    // the full burn-in is only reported.
    std::size_t k = a.orbit.size();
    while (k > 0 && a.orbit[k - 1].orientation.verdict) --k;
    a.burn_in = std::min(k, a.orbit.size() - 1);
    try {
      const std::size_t found = find_burn_in(a.orbit, cfg.degree, N, std::nullopt, budget);
      a.burn_in_json = {{"status", "found"}, {"used", a.burn_in}, {"found", found}};
    } catch (const NoBurnInWithinHorizon& e) {
      a.burn_in_json = {{"status", "NoBurnInWithinHorizon"}, {"used", a.burn_in}, {"message", e.what()}};
    }
  }
  a.orbit.erase(a.orbit.begin(), a.orbit.begin() + static_cast<std::ptrdiff_t>(a.burn_in));
  a.log = detect_jumps(a.orbit, cfg.degree, N, budget);
  try {
    a.traces = track_critical_value(a.log, a.orbit, cfg.degree, N, budget);
  } catch (const EnclosureTooWide& e) {
    a.trace_error = e.what();
  }
  return a;
}

}  // namespace report

inline json cmd_jumps(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  const Polygon& T = report::single(polys, "jumps");
  json out = report::envelope("jumps", cfg, polys);
  const auto a = report::analyze_jumps(T, cfg);
  const std::size_t N = T.size();
  json payload = report::jump_log(a.log, cfg.degree);
  payload["burn_in"] = a.burn_in_json;
  payload["traces"] = report::traces(a.traces);
  payload["trace_error"] = a.trace_error ? json(*a.trace_error) : json(nullptr);
  const auto persistence = label_persistence(a.orbit, cfg.degree, N, 16, budget);
  payload["label_persistence"] = {{"checks", persistence.checks}, {"violations", persistence.violations}};
  payload["size_ties"] = size_ties(a.orbit);
  payload["decay_flagged"] = size_decay(a.orbit, N).flagged;
  json polys_json = json::array();
  for (const auto& r : a.orbit) polys_json.push_back({{"index", r.index}, {"polygon", report::polygon(r.polygon)}});
  payload["records"] = polys_json;
  out["payload"] = payload;
  return out;
}

inline json cmd_leaves(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  const Polygon& T = report::single(polys, "leaves");
  json out = report::envelope("leaves", cfg, polys);
  const auto a = report::analyze_jumps(T, cfg);
  const auto leaves = extract_jumping_leaves(a.log, cfg.degree, budget);
  json ls = json::array();
  for (const auto& l : leaves) ls.push_back(report::leaf(l));
  json payload = {{"burn_in", a.burn_in_json}, {"jump_count", a.log.records.size()}, {"leaves", ls}};
  std::size_t h = cfg.horizon;
  for (const auto& l : leaves) h = std::min(h, evidence_horizon(l, cfg.degree, cfg.horizon));
  payload["evidence_horizon"] = h;
  payload["disjointness"] = h >= 1 ? report::disjointness(orbit_disjointness(leaves, cfg.degree, h)) : json::array();
  json evs = json::array();
  const Rational eps = ratio(1, power(2, cfg.epsilon_bits));
  for (const auto& l : leaves) evs.push_back(report::evidence(recurrence_evidence(l, cfg.degree, h, eps)));
  payload["evidence"] = evs;
  out["payload"] = payload;
  return out;
}

inline json cmd_verify(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  const Polygon& T = report::single(polys, "verify");
  json out = report::envelope("verify", cfg, polys);
  try {
    out["payload"] = report::theorem(verify_theorem1(T, cfg.degree, cfg.theorem_params()));
  } catch (const NotCertifiedWandering& e) {
    out["payload"] = {{"status", "NotCertifiedWandering"}, {"certificate", report::certificate(e.certificate())}};
  }
  return out;
}

inline json cmd_collection(const std::vector<std::vector<std::string>>& inputs, const AnalysisConfig& cfg) {
  const auto budget = cfg.precision();
  const auto polys = report::parse_polygons(inputs, budget);
  json out = report::envelope("collection", cfg, polys);
  try {
    const auto rep = verify_collection_bound(polys, cfg.degree, cfg.theorem_params());
    json members = json::array();
    for (const auto& m : rep.member_reports) members.push_back(report::theorem(m));
    out["payload"] = {{"status", rep.holds ? "BoundConsistent" : "InconclusiveEvidence"},
                      {"members", rep.members},
                      {"sigma", rep.sigma},
                      {"r_hat", rep.r_hat},
                      {"omega_hat", rep.omega_hat},
                      {"holds", rep.holds},
                      {"member_reports", members},
                      {"notes", rep.notes}};
  } catch (const NotCertifiedWandering& e) {
    out["payload"] = {{"status", "NotCertifiedWandering"},
                      {"member", e.member()},
                      {"certificate", report::certificate(e.certificate())}};
  } catch (const CrossPairLinked& e) {
    out["payload"] = {{"status", "CrossPairLinked"}, {"a", e.a()}, {"n", e.n()}, {"b", e.b()}, {"m", e.m()},
                      {"message", e.what()}};
  }
  return out;
}

}  // namespace wandpoly
