#include <catch_amalgamated.hpp>

#include "oracle.hpp"
#include "wandpoly/report.hpp"
#include "wandpoly/svg.hpp"

using namespace wandpoly;

namespace {

using Inputs = std::vector<std::vector<std::string>>;

AnalysisConfig with(unsigned d, std::size_t horizon) {
  AnalysisConfig c;
  c.degree = d;
  c.horizon = horizon;
  return c;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// Object keys in iteration (and so dump) order are strictly increasing.
bool keys_sorted(const json& j) {
  if (j.is_object()) {
    std::string prev;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!prev.empty() && !(prev < it.key())) return false;
      prev = it.key();
      if (!keys_sorted(it.value())) return false;
    }
  } else if (j.is_array()) {
    for (const auto& x : j)
      if (!keys_sorted(x)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("analyze reports sizes, remainder sum and orientation") {
  const json r = cmd_analyze(Inputs{{"0/1", "1/7", "2/7"}}, with(2, 0));
  CHECK(r["command"] == "analyze");
  CHECK(r["version"] == kVersion);
  const auto& p = r["payload"];
  std::vector<std::string> lengths;
  for (const auto& h : p["profile"]["holes"]) lengths.push_back(h["length"]["value"]);
  CHECK(lengths == std::vector<std::string>{"1/7", "1/7", "5/7"});
  CHECK(p["profile"]["remainder_sum"]["value"] == "1/2");
  CHECK(p["profile"]["length_sum"]["value"] == "1/1");
  CHECK(p["orientation"]["verdict"] == true);
  CHECK(p["critical_hole"]["rank"] == 3);
}

TEST_CASE("analyze picks the critical hole of the jump triangle") {
  const json p = cmd_analyze(Inputs{{"0.19", "0.45", "0.96"}}, with(2, 0))["payload"];
  CHECK(p["critical_hole"]["hole"]["from"]["value"] == "9/20");
  CHECK(p["critical_hole"]["hole"]["to"]["value"] == "24/25");
  CHECK(p["critical_hole"]["remainder"]["value"] == "1/100");
}

TEST_CASE("analyze reports missing critical holes and rejects bad input") {
  const json p = cmd_analyze(Inputs{{"0.05", "0.3", "0.6"}}, with(2, 0))["payload"];
  CHECK(p["critical_hole"]["error"] == "NoHoleExceedsOneOverD");
  CHECK_THROWS_AS(cmd_analyze(Inputs{{"0.1", "nope"}}, with(2, 0)), ParseError);
  CHECK_THROWS_AS(cmd_analyze(Inputs{}, with(2, 0)), InputError);
  CHECK_THROWS_AS(cmd_analyze(Inputs{{"0.1", "0.2", "0.3"}, {"0.5", "0.6", "0.7"}}, with(2, 0)), InputError);
}

TEST_CASE("config is echoed into every report") {
  AnalysisConfig c = with(3, 7);
  c.burn_in_override = 2;
  c.epsilon_bits = 8;
  c.budget = 512;
  c.kiwi_precheck = false;
  c.seed = 99;
  const json cfg = cmd_analyze(Inputs{{"0", "1/7", "2/7"}}, c)["config"];
  CHECK(cfg["degree"] == 3);
  CHECK(cfg["horizon"] == 7);
  CHECK(cfg["burn_in_override"] == 2);
  CHECK(cfg["epsilon"] == "1/256");
  CHECK(cfg["budget"] == 512);
  CHECK(cfg["kiwi_precheck"] == false);
  CHECK(cfg["seed"] == 99);
  CHECK(cmd_analyze(Inputs{{"0", "1/7", "2/7"}}, with(2, 0))["config"]["burn_in_override"].is_null());
}

TEST_CASE("orbit reports iterates and the certificate") {
  AnalysisConfig c = with(2, 4);
  c.kiwi_precheck = false;
  const json p = cmd_orbit(Inputs{{"0.30", "0.31", "0.32"}}, c)["payload"];
  CHECK(p["records"].size() == 5);
  CHECK(p["records"][2]["polygon"][0]["value"] == "1/5");
  CHECK(p["certificate"]["status"] == "CertifiedToHorizon");
  CHECK(p["non_injective_step"].is_null());

  const json q = cmd_orbit(Inputs{{"0.2", "0.4", "0.7"}}, with(2, 3))["payload"];
  CHECK(q["non_injective_step"] == 0);
  CHECK(q["certificate"]["status"] == "RejectedKiwiBound");
}

TEST_CASE("jumps reports the worked example") {
  const json p = cmd_jumps(Inputs{{"19/100", "45/100", "96/100"}}, with(2, 1))["payload"];
  REQUIRE(p["jumps"].size() == 1);
  const auto& j = p["jumps"][0];
  CHECK(j["i"] == 0);
  CHECK(j["s_tilde_cr"]["value"] == "1/100");
  CHECK(j["strip"]["start_range"]["from"]["value"] == "9/20");
  CHECK(j["strip"]["start_range"]["to"]["value"] == "23/50");
  CHECK(j["image_hole"]["from"]["value"] == "9/10");
  CHECK(j["image_hole"]["to"]["value"] == "23/25");
  CHECK(j["image_rank"] == 1);
  CHECK(p["burn_in"]["used"] == 0);
  CHECK(p["burn_in"]["found"] == 1);

  AnalysisConfig c = with(2, 1);
  c.burn_in_override = 1;
  CHECK(cmd_jumps(Inputs{{"19/100", "45/100", "96/100"}}, c)["payload"]["jumps"].empty());
  c.burn_in_override = 2;
  CHECK_THROWS_AS(cmd_jumps(Inputs{{"19/100", "45/100", "96/100"}}, c), PreconditionError);
  CHECK_THROWS_AS(cmd_jumps(Inputs{{"19/100", "45/100", "96/100"}}, with(2, 3)), AssertionBreach);
}

TEST_CASE("leaves reports the leaf of the worked example") {
  const json p = cmd_leaves(Inputs{{"19/100", "45/100", "96/100"}}, with(2, 1))["payload"];
  REQUIRE(p["leaves"].size() == 1);
  CHECK(p["leaves"][0]["first_span"]["from"]["value"] == "9/20");
  CHECK(p["leaves"][0]["second_span"]["to"]["value"] == "24/25");
  CHECK(p["leaves"][0]["value"]["open"] == true);
  CHECK(p["evidence"].size() == 1);
}

TEST_CASE("verify and collection put failed preconditions into the payload") {
  AnalysisConfig c = with(2, 5);
  c.kiwi_precheck = false;
  const json v = cmd_verify(Inputs{{"1/7", "2/7", "4/7"}}, c)["payload"];
  CHECK(v["status"] == "NotCertifiedWandering");
  CHECK(v["certificate"]["status"] == "FailedLinked");

  const json k = cmd_verify(Inputs{{"0.1", "0.2", "0.3"}}, with(2, 5))["payload"];
  CHECK(k["certificate"]["status"] == "RejectedKiwiBound");

  const json x = cmd_collection(Inputs{{"0.06", "0.1", "0.14"}, {"0.3", "0.35", "0.4"}}, with(3, 1))["payload"];
  CHECK(x["status"] == "CrossPairLinked");
  CHECK(x["n"] == 1);
  CHECK(x["m"] == 0);
}

TEST_CASE("reports are deterministic and have sorted keys") {
  AnalysisConfig c = with(3, 30);
  const Inputs stream = {{"gen:champernowne?d=3&at0=0&at1100=0&at1101=0",
                          "gen:champernowne?d=3&at0=0&at1100=1&at1101=0",
                          "gen:champernowne?d=3&at0=1&at1100=1&at1101=1"}};
  const json a = cmd_verify(stream, c);
  const json b = cmd_verify(stream, c);
  CHECK(a.dump(2) == b.dump(2));
  CHECK(keys_sorted(a));
  const json o = cmd_orbit(Inputs{{"0.30", "0.31", "0.32"}}, with(2, 6));
  CHECK(keys_sorted(o));
  const std::string text = o.dump(2);
  CHECK(text.find("\"command\"") < text.find("\"config\""));
  CHECK(text.find("\"config\"") < text.find("\"input\""));
  CHECK(text.find("\"input\"") < text.find("\"payload\""));
}

TEST_CASE("render a single triangle") {
  const std::string s = svg::render_report(cmd_analyze(Inputs{{"0/1", "1/7", "2/7"}}, with(2, 0)));
  CHECK(s.rfind("<?xml", 0) == 0);
  CHECK(count(s, "class=\"polygon\"") == 1);
  CHECK(count(s, "class=\"hole-arc\"") == 3);
  CHECK(count(s, "class=\"critical-strip\"") == 0);
  CHECK(count(s, "id=\"unit-circle\"") == 1);
}

TEST_CASE("render the jump example shows its strip") {
  const json r = cmd_jumps(Inputs{{"19/100", "45/100", "96/100"}}, with(2, 1));
  const auto scene = svg::scene_from_report(r);
  REQUIRE(scene.strips.size() == 1);
  CHECK(scene.strips[0][0] == Catch::Approx(0.45));
  CHECK(scene.strips[0][1] == Catch::Approx(0.46));
  CHECK(scene.strips[0][2] == Catch::Approx(0.95));
  CHECK(scene.strips[0][3] == Catch::Approx(0.96));
  const std::string s = svg::render(scene);
  CHECK(count(s, "class=\"critical-strip\"") == 1);
  CHECK(count(s, "class=\"polygon\"") == 2);
  CHECK(s == svg::render(svg::scene_from_report(r)));
}

TEST_CASE("render an empty report draws only the circle") {
  const std::string s = svg::render_report(json::object());
  CHECK(count(s, "<circle") == 1);
  CHECK(count(s, "<path") == 0);
  CHECK(count(s, "<line") == 0);
  CHECK(count(s, "<polygon") == 0);
  CHECK(svg::render_report(json::object(), svg::Style::named("dark")).find("#111318") != std::string::npos);
  CHECK_THROWS_AS(svg::Style::named("neon"), std::invalid_argument);
}

TEST_CASE("render places vertices on the unit circle") {
  const std::string s = svg::render_report(cmd_analyze(Inputs{{"0", "1/4", "1/2"}}, with(2, 0)));
  // x = 250 + 200 cos(2 pi t), y = 250 - 200 sin(2 pi t)
  CHECK(s.find("M450.000,250.000 L250.000,50.000 L50.000,250.000 Z") != std::string::npos);
}
