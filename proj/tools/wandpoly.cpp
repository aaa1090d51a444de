// Command-line front end: wandpoly <command> [options] <angles...>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "wandpoly/report.hpp"
#include "wandpoly/svg.hpp"

namespace {

using wandpoly::json;

enum ExitCode { kOk = 0, kInputError = 2, kUnresolved = 3, kBreach = 4 };

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw wandpoly::ParseError("empty angle in list: " + line);
    out.push_back(item);
  }
  return out;
}

/// Positional arguments form one polygon, unless any of them contains a
/// comma, in which case each argument is its own polygon.
std::vector<std::vector<std::string>> collect_polygons(const std::vector<std::string>& args, const std::string& file) {
  std::vector<std::vector<std::string>> polys;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw wandpoly::InputError("cannot read input file " + file);
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      polys.push_back(split_commas(line));
    }
  }
  bool any_comma = false;
  for (const auto& a : args) any_comma = any_comma || a.find(',') != std::string::npos;
  if (any_comma) {
    for (const auto& a : args) polys.push_back(split_commas(a));
  } else if (!args.empty()) {
    polys.push_back(args);
  }
  return polys;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw wandpoly::InputError("cannot write " + out_path);
  out << text;
}

void fail(const char* kind, const std::exception& e) {
  json err = {{"error", kind}, {"message", e.what()}};
  std::cerr << err.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact analysis of finite point sets on the circle under z -> z^d"};
  app.set_version_flag("--version", wandpoly::kVersion);
  app.require_subcommand(1);

  wandpoly::AnalysisConfig cfg;
  std::uint64_t epsilon_den = 64;
  std::vector<std::string> angles;
  std::string input_file;
  std::string out_path;
  std::string from_report;
  std::string style = "light";
  std::size_t burn_in = 0;
  bool no_kiwi = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("angles", angles, "Angle literals (p/q, d:pre(period), gen:name?d=..)");
    sub->add_option("--degree,-d", cfg.degree, "Degree d of the map")->check(CLI::Range(2u, 64u));
    sub->add_option("--horizon,-n", cfg.horizon, "Number of iterates");
    sub->add_option("--epsilon", epsilon_den, "Resolution denominator (a power of two)");
    sub->add_option("--budget", cfg.budget, "Maximum digits per angle expansion")->check(CLI::PositiveNumber);
    sub->add_flag("--no-kiwi-precheck", no_kiwi, "Do not reject card(T) > d before iterating");
    sub->add_option("--seed", cfg.seed, "Seed recorded in the report");
    sub->add_option("--burn-in", burn_in, "Start of the analyzed window, overriding detection");
    sub->add_option("--input,-i", input_file, "File with one comma-separated polygon per line");
    sub->add_option("--out,-o", out_path, "Write output to this file");
  };

  std::vector<std::pair<CLI::App*, std::string>> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"analyze", "Hole profile, orientation and critical hole of one polygon"},
      {"orbit", "Iterates of one polygon and its wandering certificate"},
      {"jumps", "Jump log and critical value traces along the orbit"},
      {"leaves", "Candidate jumping leaves with recurrence evidence"},
      {"verify", "Full pipeline for one polygon"},
      {"collection", "Leaf count bound for several polygons"},
      {"render", "SVG picture of a report or of the given polygons"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    add_common(sub);
    subs.emplace_back(sub, name);
  }
  CLI::App* render = app.get_subcommand("render");
  render->add_option("--from-report", from_report, "Render an existing JSON report");
  render->add_option("--style", style, "Color style: light or dark");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputError;
  }

  std::string command;
  for (const auto& [sub, name] : subs)
    if (sub->parsed()) command = name;
  CLI::App* parsed = app.get_subcommand(command);
  if (parsed->count("--burn-in") > 0) cfg.burn_in_override = burn_in;
  cfg.kiwi_precheck = !no_kiwi;

  try {
    if (epsilon_den < 2 || (epsilon_den & (epsilon_den - 1)) != 0)
      throw wandpoly::InputError("--epsilon must be a power of two >= 2");
    cfg.epsilon_bits = static_cast<unsigned>(__builtin_ctzll(epsilon_den));

    if (command == "render") {
      const auto st = wandpoly::svg::Style::named(style);
      json report;
      if (!from_report.empty()) {
        std::ifstream in(from_report);
        if (!in) throw wandpoly::InputError("cannot read report " + from_report);
        try {
          report = json::parse(in);
        } catch (const json::parse_error& e) {
          throw wandpoly::ParseError(std::string("malformed report: ") + e.what());
        }
      } else {
        const auto polys = collect_polygons(angles, input_file);
        if (!polys.empty()) {
          report = cfg.horizon > 0 && polys.front().size() >= 3 ? wandpoly::cmd_jumps(polys, cfg)
                                                                 : wandpoly::cmd_analyze(polys, cfg);
        }
      }
      emit(wandpoly::svg::render_report(report, st), out_path);
      return kOk;
    }

    const auto polys = collect_polygons(angles, input_file);
    json report;
    if (command == "analyze") report = wandpoly::cmd_analyze(polys, cfg);
    else if (command == "orbit") report = wandpoly::cmd_orbit(polys, cfg);
    else if (command == "jumps") report = wandpoly::cmd_jumps(polys, cfg);
    else if (command == "leaves") report = wandpoly::cmd_leaves(polys, cfg);
    else if (command == "verify") report = wandpoly::cmd_verify(polys, cfg);
    else report = wandpoly::cmd_collection(polys, cfg);

    emit(report.dump(2) + "\n", out_path);
    const auto& payload = report.at("payload");
    if (payload.contains("status") && payload.at("status") == "AssertionBreach") return kBreach;
    return kOk;
  } catch (const wandpoly::InputError& e) {
    fail("InputError", e);
    return kInputError;
  } catch (const std::invalid_argument& e) {
    fail("InputError", e);
    return kInputError;
  } catch (const wandpoly::Unresolved& e) {
    fail("Unresolved", e);
    return kUnresolved;
  } catch (const wandpoly::AssertionBreach& e) {
    fail("AssertionBreach", e);
    return kBreach;
  } catch (const wandpoly::Error& e) {
    fail("Error", e);
    return 1;
  }
}
