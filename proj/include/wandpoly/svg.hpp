#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wandpoly::svg {

struct Style {
  std::string background = "#ffffff";
  std::string circle = "#222222";
  std::string polygon_fill = "#3b6fb6";
  std::string hole_arc = "#d08a1c";
  std::string strip_fill = "#c0392b";
  std::string leaf = "#1e8449";
  std::string text = "#222222";

  static Style named(const std::string& name) {
    Style s;
    if (name == "dark") {
      s.background = "#111318";
      s.circle = "#d0d0d0";
      s.polygon_fill = "#6fa8ff";
      s.hole_arc = "#f5b041";
      s.strip_fill = "#ff6b5b";
      s.leaf = "#58d68d";
      s.text = "#e0e0e0";
    } else if (name != "light") {
      throw std::invalid_argument("unknown style '" + name + "'");
    }
    return s;
  }
};

inline constexpr double kCenter = 250.0;
inline constexpr double kRadius = 200.0;
inline constexpr std::size_t kMaxPolygons = 64;

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

inline double turns(const nlohmann::json& angle) { return std::stod(angle.at("decimal").get<std::string>()); }

inline std::pair<std::string, std::string> xy(double t, double r = kRadius) {
  const double a = 2 * M_PI * t;
  return {fmt(kCenter + r * std::cos(a)), fmt(kCenter - r * std::sin(a))};
}

inline std::string point(double t, double r = kRadius) {
  const auto [x, y] = xy(t, r);
  return x + "," + y;
}

/// Counterclockwise circle arc from t0 to t1 (turns).
inline std::string arc_path(double t0, double t1) {
  double len = t1 - t0;
  while (len < 0) len += 1;
  if (len == 0) len = 1;
  const int large = len > 0.5 ? 1 : 0;
  // Screen y points down, so counterclockwise in the plane is sweep-flag 0.
  return "M" + point(t0) + " A" + fmt(kRadius) + "," + fmt(kRadius) + " 0 " + std::to_string(large) + ",0 " +
         point(t1);
}

struct Scene {
  std::vector<std::pair<std::size_t, std::vector<double>>> polygons;  // (iterate, vertices)
  std::vector<std::vector<double>> strips;                            // a0, a1, b0, b1
  std::vector<std::pair<double, double>> leaves;
};

inline std::vector<double> vertices(const nlohmann::json& poly) {
  std::vector<double> v;
  for (const auto& a : poly) v.push_back(turns(a));
  return v;
}

inline double middle(const nlohmann::json& span) {
  double a = turns(span.at("from"));
  double b = turns(span.at("to"));
  if (b < a) b += 1;
  double m = (a + b) / 2;
  return m >= 1 ? m - 1 : m;
}

/// Extracts polygons, critical strips and leaves from any command report.
inline Scene scene_from_report(const nlohmann::json& report) {
  Scene s;
  if (!report.is_object() || !report.contains("payload")) return s;
  const auto& p = report.at("payload");
  if (p.contains("polygon")) s.polygons.emplace_back(0, vertices(p.at("polygon")));
  if (p.contains("records")) {
    for (const auto& r : p.at("records")) {
      if (s.polygons.size() >= kMaxPolygons) break;
      s.polygons.emplace_back(r.at("index").get<std::size_t>(), vertices(r.at("polygon")));
    }
  }
  if (p.contains("jumps")) {
    for (const auto& j : p.at("jumps")) {
      const auto& st = j.at("strip");
      s.strips.push_back({turns(st.at("start_range").at("from")), turns(st.at("start_range").at("to")),
                          turns(st.at("end_range").at("from")), turns(st.at("end_range").at("to"))});
    }
  }
  if (p.contains("leaves")) {
    for (const auto& l : p.at("leaves"))
      s.leaves.emplace_back(middle(l.at("first_span")), middle(l.at("second_span")));
  }
  return s;
}

inline std::string render(const Scene& scene, const Style& style = {}) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"500\" height=\"500\" viewBox=\"0 0 500 500\">\n"
      << "  <rect id=\"background\" x=\"0\" y=\"0\" width=\"500\" height=\"500\" fill=\"" << style.background << "\"/>\n"
      << "  <circle id=\"unit-circle\" cx=\"" << fmt(kCenter) << "\" cy=\"" << fmt(kCenter) << "\" r=\"" << fmt(kRadius)
      << "\" fill=\"none\" stroke=\"" << style.circle << "\" stroke-width=\"1.000\"/>\n";

  for (std::size_t k = 0; k < scene.strips.size(); ++k) {
    const auto& st = scene.strips[k];
    out << "  <polygon id=\"strip-" << k << "\" class=\"critical-strip\" points=\"" << point(st[0]) << " "
        << point(st[1]) << " " << point(st[3]) << " " << point(st[2]) << "\" fill=\"" << style.strip_fill
        << "\" fill-opacity=\"0.350\" stroke=\"" << style.strip_fill << "\" stroke-width=\"0.500\"/>\n";
  }

  for (const auto& [index, verts] : scene.polygons) {
    const double opacity = 0.15 + 0.5 / (1.0 + static_cast<double>(index));
    out << "  <g id=\"iterate-" << index << "\">\n";
    out << "    <path class=\"polygon\" d=\"";
    for (std::size_t k = 0; k < verts.size(); ++k) out << (k == 0 ? "M" : " L") << point(verts[k]);
    out << " Z\" fill=\"" << style.polygon_fill << "\" fill-opacity=\"" << fmt(opacity) << "\" stroke=\""
        << style.polygon_fill << "\" stroke-width=\"1.000\"/>\n";
    for (std::size_t k = 0; k < verts.size(); ++k) {
      out << "    <path class=\"hole-arc\" id=\"hole-" << index << "-" << k << "\" d=\""
          << arc_path(verts[k], verts[(k + 1) % verts.size()]) << "\" fill=\"none\" stroke=\"" << style.hole_arc
          << "\" stroke-opacity=\"0.600\" stroke-width=\"2.000\"/>\n";
    }
    if (!verts.empty()) {
      const auto [x, y] = xy(verts.front(), kRadius + 18);
      out << "    <text class=\"label\" x=\"" << x << "\" y=\"" << y << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << style.text
          << "\" text-anchor=\"middle\">" << index << "</text>\n";
    }
    out << "  </g>\n";
  }

  for (std::size_t k = 0; k < scene.leaves.size(); ++k) {
    const auto& [a, b] = scene.leaves[k];
    const auto [x1, y1] = xy(a);
    const auto [x2, y2] = xy(b);
    out << "  <line id=\"leaf-" << k << "\" class=\"leaf\" x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2
        << "\" y2=\"" << y2 << "\" stroke=\"" << style.leaf << "\" stroke-width=\"1.500\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

inline std::string render_report(const nlohmann::json& report, const Style& style = {}) {
  return render(scene_from_report(report), style);
}

}  // namespace wandpoly::svg
