#pragma once

// Field CSV files, jump-segment sidecars, and report serialisation.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entrolab/config.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/fields.hpp"
#include "entrolab/functional.hpp"
#include "entrolab/production.hpp"

namespace entrolab {

using Json = nlohmann::json;

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// "# grid t0 t1 nt x0 x1 nx", "# flux <spec>", then nt rows of nx values.
inline void write_field_csv(std::ostream& out, const SpaceTimeField& field, const std::string& flux_spec) {
  const GridSpec& g = field.grid();
  out << "# grid " << format_real(g.t0) << ' ' << format_real(g.t1) << ' ' << g.nt << ' ' << format_real(g.x0) << ' '
      << format_real(g.x1) << ' ' << g.nx << '\n';
  out << "# flux " << flux_spec << '\n';
  for (int i = 0; i < g.nt; ++i) {
    for (int j = 0; j < g.nx; ++j) out << (j ? "," : "") << format_real(field(i, j));
    out << '\n';
  }
}

struct FieldFile {
  GridSpec grid;
  std::string flux_spec;
  std::vector<double> values;
};

inline FieldFile read_field_csv(std::istream& in, const std::string& origin = "<stream>") {
  FieldFile f;
  std::string line;
  bool have_grid = false;
  while (in.peek() == '#' && std::getline(in, line)) {
    std::istringstream hs(line.substr(1));
    std::string tag;
    hs >> tag;
    if (tag == "grid") {
      if (!(hs >> f.grid.t0 >> f.grid.t1 >> f.grid.nt >> f.grid.x0 >> f.grid.x1 >> f.grid.nx)) {
        throw ConfigError(origin + ": malformed grid header");
      }
      have_grid = true;
    } else if (tag == "flux") {
      hs >> f.flux_spec;
    }
  }
  if (!have_grid) throw ConfigError(origin + ": missing '# grid' header");
  f.grid.validate();
  f.values.reserve(static_cast<std::size_t>(f.grid.nt) * f.grid.nx);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream rs(line);
    std::string cell;
    int cols = 0;
    while (std::getline(rs, cell, ',')) {
      f.values.push_back(detail::parse_double(cell, origin));
      ++cols;
    }
    if (cols != f.grid.nx) throw ConfigError(origin + ": row " + std::to_string(rows + 1) + " has the wrong width");
    ++rows;
  }
  if (rows != f.grid.nt) throw ConfigError(origin + ": expected " + std::to_string(f.grid.nt) + " rows");
  return f;
}

inline Json to_json(const Point& p) { return Json::array({p.t, p.x}); }

inline Json jumps_to_json(const std::vector<JumpSegment>& jumps) {
  Json arr = Json::array();
  for (const auto& s : jumps) {
    arr.push_back({{"p0", to_json(s.p0)}, {"p1", to_json(s.p1)}, {"nu", to_json(s.nu)}, {"u_minus", s.u_minus},
                   {"u_plus", s.u_plus}});
  }
  return arr;
}

inline std::vector<JumpSegment> jumps_from_json(const Json& arr) {
  std::vector<JumpSegment> out;
  try {
    for (const auto& s : arr) {
      auto pt = [](const Json& j) { return Point{j.at(0).get<double>(), j.at(1).get<double>()}; };
      out.push_back({pt(s.at("p0")), pt(s.at("p1")), pt(s.at("nu")), s.at("u_minus").get<double>(),
                     s.at("u_plus").get<double>()});
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed jump sidecar: ") + e.what());
  }
  return out;
}

/// JSON numbers cannot hold NaN or infinities; those become null.
inline Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const Window& w) {
  Json j = {{"ta", w.ta}, {"tb", w.tb}, {"xa", w.xa}, {"xb", w.xb}};
  if (w.chi) j["chi"] = {{"tc", w.chi->tc()}, {"xc", w.chi->xc()}, {"rt", w.chi->rt()}, {"rx", w.chi->rx()}};
  return j;
}

inline Json to_json(const FunctionalReport& r) {
  Json per_h = Json::array(), F = Json::array();
  for (auto& [h, v] : r.per_h) per_h.push_back({h, v});
  for (auto& [e, v] : r.F) F.push_back({e, v});
  return {{"window", to_json(r.window)}, {"epsilons", r.epsilons}, {"per_h", per_h},
          {"F", F},                      {"trend", r.trend},       {"slope", r.slope}};
}

/// Tidy CSV: one observation per row.
inline void write_functional_csv(std::ostream& out, const FunctionalReport& r) {
  out << "kind,x,value\n";
  for (auto& [h, v] : r.per_h) out << "per_h," << format_real(h) << ',' << format_real(v) << '\n';
  for (auto& [e, v] : r.F) out << "F," << format_real(e) << ',' << format_real(v) << '\n';
}

inline Json to_json(const TestFunction& psi) {
  return {{"tc", psi.tc()}, {"xc", psi.xc()}, {"rt", psi.rt()}, {"rx", psi.rx()}};
}

inline Json to_json(const ProductionReport& r) {
  Json j = {{"epsilons", r.epsilons},  {"term1", r.term1}, {"term2", r.term2},
            {"total", r.total},        {"bound", r.bound}, {"jensen_min", r.jensen_min},
            {"total_trend", r.total_trend}, {"term1_order", real_or_null(r.term1_order)}};
  if (r.has_jumps) {
    j["jump_pairing"] = r.jump_reference;
    j["consistency_order"] = real_or_null(r.consistency_order);
  }
  return j;
}

inline void write_production_csv(std::ostream& out, const ProductionReport& r) {
  out << "eps,term1,term2,total,bound\n";
  for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
    out << format_real(r.epsilons[k]) << ',' << format_real(r.term1[k]) << ',' << format_real(r.term2[k]) << ','
        << format_real(r.total[k]) << ',' << format_real(r.bound[k]) << '\n';
  }
}

inline Json to_json(const ChainReport& c) {
  return {{"epsilons", c.epsilons},
          {"F", c.F},
          {"Fhat", c.Fhat},
          {"Khat", c.Khat},
          {"D", c.D},
          {"threshold", c.threshold},
          {"worst_functional_ratio", c.worst_functional_ratio},
          {"min_pointwise_ratio", real_or_null(c.min_pointwise_ratio)},
          {"pointwise_threshold", c.pointwise_threshold},
          {"khat_spread", c.khat_spread},
          {"functional_ok", c.functional_ok},
          {"pointwise_ok", c.pointwise_ok}};
}

/// Writes text to path, or to stdout when path is empty or "-".
inline void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

}  // namespace entrolab
