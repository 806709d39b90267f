#pragma once

// Command-line front end: scenario assembly from a flat config and the
// subcommands. Exit codes: 0 success, 1 usage or config error, 2 invariant
// violation.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entrolab/config.hpp"
#include "entrolab/cost.hpp"
#include "entrolab/entropy.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/fields.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/functional.hpp"
#include "entrolab/io.hpp"
#include "entrolab/production.hpp"
#include "entrolab/rng.hpp"

namespace entrolab::cli {

enum ExitCode { kOk = 0, kUsage = 1, kViolation = 2 };

struct Scenario {
  FluxFunction flux;
  Entropy entropy;
  SpaceTimeField field;
  TestFunction psi;
  std::vector<double> ladder;
  std::optional<Window> window;
  std::uint64_t seed = 42;
};

inline FluxFunction flux_from(Config& cfg) {
  std::optional<Interval> domain;
  if (cfg.has("flux.domain")) {
    const auto d = cfg.list("flux.domain");
    if (d.size() != 2) throw ConfigError("flux.domain needs lo,hi");
    domain = Interval(d[0], d[1]);
  }
  return parse_flux(cfg.str("flux", "burgers"), domain);
}

inline GridSpec grid_from(Config& cfg) {
  GridSpec g{cfg.num("grid.t0", 0.0), cfg.num("grid.t1", 1.0), cfg.integer("grid.nt", 100),
             cfg.num("grid.x0", -1.5), cfg.num("grid.x1", 1.5), cfg.integer("grid.nx", 2000)};
  g.validate();
  return g;
}

inline SpaceTimeField field_from(Config& cfg, const FluxFunction& flux) {
  const std::string gen = cfg.str("field.generator", "shock");
  if (gen == "file") {
    const std::string path = cfg.str("field.path");
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field file '" + path + "'");
    auto file = read_field_csv(in, path);
    SpaceTimeField field(file.grid, std::move(file.values), Provenance::analytic);
    if (cfg.has("field.jumps")) {
      std::ifstream js(cfg.str("field.jumps"));
      if (!js) throw ConfigError("cannot open jump sidecar '" + cfg.str("field.jumps") + "'");
      Json j;
      try {
        js >> j;
      } catch (const Json::exception& e) {
        throw ConfigError(std::string("jump sidecar: ") + e.what());
      }
      field.set_jumps(jumps_from_json(j));
      field.set_weak_solution(cfg.str("field.weak_solution", "true") == "true");
    }
    return field;
  }
  const GridSpec g = grid_from(cfg);
  const Point centre{cfg.num("field.center_t", 0.0), cfg.num("field.center_x", 0.0)};
  if (gen == "shock") return rh_jump_field(flux, cfg.num("field.u_minus", 1.0), cfg.num("field.u_plus", -1.0), g, centre);
  if (gen == "nonentropic") {
    return nonentropic_jump_field(flux, cfg.num("field.u_minus", -1.0), cfg.num("field.u_plus", 1.0), g, centre);
  }
  if (gen == "pure_jump") {
    const Point nu{cfg.num("field.nu_t", 0.0), cfg.num("field.nu_x", 1.0)};
    return pure_jump_field(cfg.num("field.u_minus", 1.0), cfg.num("field.u_plus", -1.0), nu, centre, g);
  }
  if (gen == "riemann") {
    const Point origin{cfg.num("field.origin_t", 0.0), cfg.num("field.origin_x", 0.0)};
    return riemann_field(flux, cfg.num("field.u_left", 1.0), cfg.num("field.u_right", 0.0), g, origin);
  }
  if (gen == "constant") {
    const double c = cfg.num("field.value", 0.0);
    flux.require(c);
    return SpaceTimeField(g, std::vector<double>(static_cast<std::size_t>(g.nt) * g.nx, c), Provenance::analytic);
  }
  if (gen == "godunov") {
    const double ul = cfg.num("field.u_left", 1.0), ur = cfg.num("field.u_right", 0.0);
    const double x_jump = cfg.num("field.origin_x", 0.0);
    return godunov_solve(flux, [=](double x) { return x < x_jump ? ul : ur; }, g, cfg.num("field.cfl", 0.45),
                         cfg.num("field.t_init", g.t0));
  }
  throw ConfigError("unknown field.generator '" + gen +
                    "'; expected shock | nonentropic | pure_jump | riemann | constant | godunov | file");
}

inline Scenario scenario_from(Config& cfg) {
  FluxFunction flux = flux_from(cfg);
  Entropy entropy = parse_entropy(cfg.str("entropy", "quadratic"));
  SpaceTimeField field = field_from(cfg, flux);
  flux.require(field.range());
  const GridSpec& g = field.grid();
  std::vector<double> ladder;
  if (cfg.has("ladder.eps")) {
    ladder = cfg.list("ladder.eps");
  } else {
    cfg.str("ladder.multiples", "4,8,16,32,64");
    for (double m : cfg.list("ladder.multiples")) ladder.push_back(m * g.dx());
  }
  std::optional<Window> window;
  if (cfg.has("window.ta") || cfg.has("window.tb") || cfg.has("window.xa") || cfg.has("window.xb")) {
    window = Window{cfg.num("window.ta"), cfg.num("window.tb"), cfg.num("window.xa"), cfg.num("window.xb"),
                    std::nullopt};
  }
  const double T = g.t1 - g.t0, L = g.x1 - g.x0;
  TestFunction psi(cfg.num("psi.tc", g.t0 + 0.5 * T), cfg.num("psi.xc", g.x0 + 0.5 * L), cfg.num("psi.rt", 0.4 * T),
                   cfg.num("psi.rx", 0.3 * L));
  const double seed = cfg.num("seed", 42);
  if (!(seed >= 0.0) || seed != std::floor(seed)) throw ConfigError("seed must be a nonnegative integer");
  return Scenario{std::move(flux), std::move(entropy), std::move(field), psi, std::move(ladder), window,
                  static_cast<std::uint64_t>(seed)};
}

inline Json config_json(const Config& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

/// Options shared by the scenario subcommands.
struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out, csv;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key=value scenario file");
    app->add_option("--set", overrides, "override a config key (key=value), repeatable");
    app->add_option("--out", out, "JSON report path (default stdout)");
    app->add_option("--csv", csv, "CSV twin path");
  }

  Config load() const {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& o : overrides) cfg.set(o);
    return cfg;
  }
};

/// Copies a named flag into the config when it was given.
template <class T>
void flag_to(Config& cfg, const CLI::App* app, const std::string& flag, const std::string& key, const T& value) {
  if (app->count(flag) == 0) return;
  std::ostringstream os;
  os.precision(17);
  os << value;
  cfg.set(key, os.str());
}

inline int run(int argc, const char* const* argv, std::ostream& err = std::cerr) {
  CLI::App app{"entrolab: entropy production and regularity cost laboratory"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // delta
  auto* delta = app.add_subcommand("delta", "evaluate Delta, Delta-hat, G, G' and H");
  std::string d_flux = "burgers";
  double d_u1 = 0.0, d_u2 = 1.0, d_v = 0.0, d_r = 0.0, d_p = 0.0;
  delta->add_option("--flux", d_flux, kFluxGrammar);
  delta->add_option("--u1", d_u1);
  delta->add_option("--u2", d_u2);
  delta->add_option("--v", d_v, "centre for G, G' and H");
  delta->add_option("--r", d_r, "radius for G and G'");
  delta->add_option("--p", d_p, "slope for H");
  bool d_hat = false;
  delta->add_flag("--hat", d_hat, "also print Delta-hat");

  // lemma
  auto* lemma = app.add_subcommand("lemma", "sampling campaign for |c_eta| <= sup|eta''| Delta / 2");
  std::string l_flux = "burgers", l_entropy = "quadratic", l_out;
  int l_samples = 10000;
  std::uint64_t l_seed = 42;
  double l_lo = -3.0, l_hi = 3.0;
  lemma->add_option("--flux", l_flux, kFluxGrammar);
  lemma->add_option("--entropy", l_entropy, kEntropyGrammar);
  lemma->add_option("--samples", l_samples);
  lemma->add_option("--seed", l_seed);
  lemma->add_option("--lo", l_lo);
  lemma->add_option("--hi", l_hi);
  lemma->add_option("--out", l_out);

  // doubling
  auto* doubling = app.add_subcommand("doubling", "doubling constant estimate of a'' on an interval");
  std::string db_flux = "burgers";
  double db_lo = -1.0, db_hi = 1.0;
  int db_centres = 129, db_radii = 20;
  doubling->add_option("--flux", db_flux, kFluxGrammar);
  doubling->add_option("--lo", db_lo);
  doubling->add_option("--hi", db_hi);
  doubling->add_option("--centres", db_centres);
  doubling->add_option("--radii", db_radii);

  // elementary
  auto* elementary = app.add_subcommand("elementary", "pure-jump elementary estimate on a disk");
  elementary->set_help_flag("--help", "print this help message and exit");  // frees -h for the shift
  std::string e_flux = "burgers";
  double e_um = 1.0, e_up = -1.0, e_nt = 0.0, e_nx = 1.0, e_r = 1.0, e_h = 0.05;
  elementary->add_option("--flux", e_flux, kFluxGrammar);
  elementary->add_option("--u-minus", e_um);
  elementary->add_option("--u-plus", e_up);
  elementary->add_option("--nu-t", e_nt);
  elementary->add_option("--nu-x", e_nx);
  elementary->add_option("--r", e_r);
  elementary->add_option("--h", e_h);

  // scenario subcommands
  auto* solve = app.add_subcommand("solve", "generate a field (Godunov by default) and write it as CSV");
  auto* functional = app.add_subcommand("functional", "regularity functional F(eps) report");
  auto* production = app.add_subcommand("production", "commutator pairing and jump production report");
  auto* verify = app.add_subcommand("verify", "production and regularity checks on a scenario");
  Common c_solve, c_functional, c_production, c_verify;
  c_solve.attach(solve);
  c_functional.attach(functional);
  c_production.attach(production);
  c_verify.attach(verify);
  std::string s_jumps;
  solve->add_option("--jumps", s_jumps, "jump sidecar JSON path");
  std::string sc_flux, sc_entropy;
  int sc_nx = 0;
  for (auto* sub : {solve, functional, production, verify}) {
    sub->add_option("--flux", sc_flux, kFluxGrammar);
    sub->add_option("--entropy", sc_entropy, kEntropyGrammar);
    sub->add_option("--nx", sc_nx);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (delta->parsed()) {
      const CostEvaluator ce(parse_flux(d_flux));
      std::printf("%.17g\n", ce.delta(d_u1, d_u2));
      if (d_hat) std::printf("delta_hat %.17g\n", ce.delta_hat(d_u1, d_u2));
      if (delta->count("--r")) {
        std::printf("G %.17g\n", ce.g_func(d_v, d_r));
        std::printf("G_prime %.17g\n", ce.g_prime(d_v, d_r));
      }
      if (delta->count("--p")) {
        const auto h = ce.legendre_h(d_v, d_p);
        std::printf("H %.17g\nH_argmax %.17g\nH_clipped %d\n", h.value, h.argmax, h.clipped ? 1 : 0);
      }
      return kOk;
    }

    if (lemma->parsed()) {
      if (l_samples < 1) throw ConfigError("--samples must be positive");
      const CostEvaluator ce(parse_flux(l_flux));
      const Entropy eta = parse_entropy(l_entropy);
      SplitMix64 rng(l_seed);
      const auto c = lemma1_campaign(eta, ce, Interval(l_lo, l_hi), l_samples, rng);
      const bool ok = c.max_ratio <= 1.0 + 1e-6;
      Json j = {{"flux", ce.flux().spec()},
                {"entropy", eta.spec()},
                {"samples", c.samples},
                {"seed", l_seed},
                {"interval", {l_lo, l_hi}},
                {"max_ratio", c.max_ratio},
                {"worst", {{"u_plus", c.worst_u_plus}, {"u_minus", c.worst_u_minus}}},
                {"passed", ok}};
      emit(l_out, dump(j));
      return ok ? kOk : kViolation;
    }

    if (doubling->parsed()) {
      const auto flux = parse_flux(db_flux);
      const auto est = doubling_constant(flux, Interval(db_lo, db_hi), db_centres, db_radii);
      Json j = {{"flux", flux.spec()},     {"interval", {db_lo, db_hi}},   {"D", est.constant},
                {"samples", est.samples}, {"max_radius", est.max_radius}, {"centres", db_centres},
                {"radii", db_radii}};
      emit("", dump(j));
      return kOk;
    }

    if (elementary->parsed()) {
      const CostEvaluator ce(parse_flux(e_flux));
      Json j = {{"flux", ce.flux().spec()}, {"u_minus", e_um}, {"u_plus", e_up}, {"nu", {e_nt, e_nx}},
                {"r", e_r},                 {"h", e_h}};
      try {
        const auto r = pure_jump_elementary_check(e_um, e_up, Point{e_nt, e_nx}, e_r, e_h, ce);
        j["lhs"] = r.lhs;
        j["rhs"] = r.rhs;
        j["ratio"] = r.ratio();
        j["passed"] = true;
        emit("", dump(j));
        return kOk;
      } catch (const InvariantViolation& v) {
        j["passed"] = false;
        j["violation"] = v.what();
        emit("", dump(j));
        return kViolation;
      }
    }

    // scenario subcommands
    auto prepare = [&](CLI::App* sub, const Common& common) {
      Config cfg = common.load();
      flag_to(cfg, sub, "--flux", "flux", sc_flux);
      flag_to(cfg, sub, "--entropy", "entropy", sc_entropy);
      flag_to(cfg, sub, "--nx", "grid.nx", sc_nx);
      return cfg;
    };

    if (solve->parsed()) {
      Config cfg = prepare(solve, c_solve);
      if (!cfg.has("field.generator")) cfg.set("field.generator", "godunov");
      const auto flux = flux_from(cfg);
      const auto field = field_from(cfg, flux);
      std::ostringstream os;
      write_field_csv(os, field, flux.spec());
      emit(c_solve.out, os.str());
      if (!s_jumps.empty()) emit(s_jumps, dump(jumps_to_json(field.jumps())));
      return kOk;
    }

    if (functional->parsed()) {
      Config cfg = prepare(functional, c_functional);
      auto sc = scenario_from(cfg);
      const CostEvaluator ce(sc.flux);
      const auto rep = gp_functional(sc.field, ce, sc.ladder, sc.window);
      Json j = to_json(rep);
      j["flux"] = sc.flux.spec();
      j["seed"] = sc.seed;
      j["config"] = config_json(cfg);
      emit(c_functional.out, dump(j));
      if (!c_functional.csv.empty()) {
        std::ostringstream os;
        write_functional_csv(os, rep);
        emit(c_functional.csv, os.str());
      }
      return kOk;
    }

    if (production->parsed()) {
      Config cfg = prepare(production, c_production);
      auto sc = scenario_from(cfg);
      Json j = {{"flux", sc.flux.spec()}, {"entropy", sc.entropy.spec()}, {"psi", to_json(sc.psi)},
                {"seed", sc.seed}};
      const auto rep = production_study(sc.field, sc.flux, sc.entropy, sc.psi, sc.ladder);
      j.update(to_json(rep));
      const auto& g = sc.field.grid();
      const Window w = sc.window ? *sc.window : default_window(g, *std::max_element(sc.ladder.begin(), sc.ladder.end()));
      const auto mu = jump_production(sc.field.jumps(), sc.entropy, sc.flux, Rect{w.ta, w.tb, w.xa, w.xb},
                                      sc.field.weak_solution());
      j["jump_signed"] = mu.signed_value;
      j["jump_abs"] = mu.abs_value;
      j["scenario"] = cfg.str("field.generator", "shock");
      j["config"] = config_json(cfg);
      emit(c_production.out, dump(j));
      if (!c_production.csv.empty()) {
        std::ostringstream os;
        write_production_csv(os, rep);
        emit(c_production.csv, os.str());
      }
      return kOk;
    }

    if (verify->parsed()) {
      Config cfg = prepare(verify, c_verify);
      auto sc = scenario_from(cfg);
      const double cap = cfg.num("c0_cap", 1.0);
      const CostEvaluator ce(sc.flux);
      std::vector<std::string> violations;
      Json j = {{"flux", sc.flux.spec()}, {"entropy", sc.entropy.spec()}, {"psi", to_json(sc.psi)},
                {"seed", sc.seed}, {"scenario", cfg.str("field.generator", "shock")}};

      const auto F = gp_functional(sc.field, ce, sc.ladder, sc.window);
      j["functional"] = to_json(F);
      for (double eps : sc.ladder) {
        const auto cm = commutator(sc.field, sc.flux, eps);
        j["jensen_min"] = j.contains("jensen_min") ? std::min(j["jensen_min"].get<double>(), cm.min) : cm.min;
      }
      const auto prod = production_study(sc.field, sc.flux, sc.entropy, sc.psi, sc.ladder);
      j["production"] = to_json(prod);

      Theorem1Result t1;
      if (!sc.field.jumps().empty()) {
        t1 = theorem1_from_jumps(sc.field, sc.entropy, ce, F);
        const Window& w = F.window;
        const auto mu = jump_production(sc.field.jumps(), sc.entropy, sc.flux, Rect{w.ta, w.tb, w.xa, w.xb},
                                        sc.field.weak_solution());
        j["jump_signed"] = mu.signed_value;
        j["jump_abs"] = mu.abs_value;
        j["theorem1_source"] = "jumps";
      } else {
        // no jump metadata: |<mu, psi>| / |psi|_inf at the finest rung stands in for |mu|
        const double mu = std::abs(prod.total.front()) / sc.psi.sup_norm();
        t1 = theorem1_ratio(mu, lower_half_max(F.values()), sc.entropy.sup_abs_d2(sc.field.range()));
        j["theorem1_source"] = "pairing";
      }
      j["theorem1"] = {{"mu_abs", t1.mu_abs},
                       {"functional_F", t1.functional_F},
                       {"sup_eta2", t1.sup_eta2},
                       {"C0_empirical", real_or_null(t1.C0_empirical)},
                       {"skipped", t1.skipped},
                       {"cap", cap}};
      j["C0_empirical"] = real_or_null(t1.C0_empirical);
      if (!t1.passed(cap)) violations.push_back("C0_empirical exceeds the configured cap");

      const auto chain = theorem2_chain(sc.field, sc.entropy, ce, sc.psi, sc.ladder, sc.window, 1000, sc.seed);
      j["chain"] = to_json(chain);
      if (!chain.functional_ok) violations.push_back("Fhat exceeds 9 D^4 F");
      if (!chain.pointwise_ok) violations.push_back("Delta / Delta-hat below 1 / (9 D^4)");

      if (sc.field.provenance() == Provenance::godunov && sc.entropy.sup_abs_d2(sc.field.range()) > 0.0) {
        bool convex = true;
        for (double v : linspace(sc.field.range().lo(), sc.field.range().hi(), 513)) convex = convex && sc.entropy.d2(v) >= 0.0;
        if (convex) {
          const double tol = godunov_sign_tolerance(sc.field, sc.entropy, sc.psi);
          j["kruzhkov_tolerance"] = tol;
          for (double t : prod.total) {
            if (t > tol) {
              violations.push_back("positive production on a Godunov field beyond tolerance");
              break;
            }
          }
        }
      }
      j["violations"] = violations;
      j["passed"] = violations.empty();
      j["config"] = config_json(cfg);
      emit(c_verify.out, dump(j));
      return violations.empty() ? kOk : kViolation;
    }
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return kViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace entrolab::cli
