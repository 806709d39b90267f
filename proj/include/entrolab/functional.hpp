#pragma once

// Regularity functional (1/|h|) int int Delta(u(t,x), u(t,x+h)) over a window,
// its supremum over small shifts, and the pure-jump elementary estimate.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "entrolab/cost.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/fields.hpp"
#include "entrolab/numerics.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/test_function.hpp"

namespace entrolab {

/// Space-time analysis window. Cells whose centres fall inside contribute. An
/// optional cutoff chi enters as chi^2.
struct Window {
  double ta = 0.0, tb = 1.0, xa = -1.0, xb = 1.0;
  std::optional<TestFunction> chi;

  void validate(const GridSpec& g) const {
    if (!(tb > ta) || !(xb > xa)) throw ConfigError("window must have tb > ta and xb > xa");
    if (ta < g.t0 || tb > g.t1 || xa < g.x0 || xb > g.x1) throw DomainError("window escapes the grid");
  }
};

/// Whole time range, x-range inset by 2 eps_max from both grid edges.
inline Window default_window(const GridSpec& g, double eps_max) {
  Window w{g.t0, g.t1, g.x0 + 2 * eps_max, g.x1 - 2 * eps_max, std::nullopt};
  if (!(w.xb > w.xa)) throw ConfigError("grid too narrow for the requested epsilon ladder");
  return w;
}

namespace detail {

struct CellRange {
  int i0, i1, j0, j1;  // half-open
};

inline CellRange cells_in(const GridSpec& g, const Window& w) {
  CellRange r{g.nt, 0, g.nx, 0};
  for (int i = 0; i < g.nt; ++i) {
    const double t = g.t_centre(i);
    if (t >= w.ta && t <= w.tb) r.i0 = std::min(r.i0, i), r.i1 = i + 1;
  }
  for (int j = 0; j < g.nx; ++j) {
    const double x = g.x_centre(j);
    if (x >= w.xa && x <= w.xb) r.j0 = std::min(r.j0, j), r.j1 = j + 1;
  }
  return r;
}

}  // namespace detail

/// Midpoint-rule value of (1/|h|) int int Delta(u(t,x), u(t,x+h)) chi^2 over
/// the window, h = shift * dx. cost is any callable (u1, u2) -> double.
template <class Cost>
double gp_cost_integral(const SpaceTimeField& field, const Cost& cost, int shift, const Window& window) {
  const GridSpec& g = field.grid();
  window.validate(g);
  if (shift == 0) throw DomainError("shift must be a nonzero multiple of dx");
  const auto c = detail::cells_in(g, window);
  if (c.i0 >= c.i1 || c.j0 >= c.j1) return 0.0;
  if (c.j0 + shift < 0 || c.j1 - 1 + shift >= g.nx) {
    std::ostringstream os;
    os << "shift " << shift << " moves the stencil outside the grid";
    throw DomainError(os.str());
  }
  const double weight = g.dt() / std::abs(shift);  // dx dt / |h|
  double total = 0.0;
  for (int i = c.i0; i < c.i1; ++i) {
    double row = 0.0;
    for (int j = c.j0; j < c.j1; ++j) {
      const double u = field(i, j), v = field(i, j + shift);
      if (u == v) continue;
      double d = cost(u, v);
      if (window.chi) {
        const double chi = (*window.chi)(g.t_centre(i), g.x_centre(j));
        d *= chi * chi;
      }
      row += d;
    }
    total += row;
  }
  return total * weight;
}

/// Direction F(eps) takes as eps shrinks, from the log-log slope over the
/// ladder: slope > 0.1 is "decreasing", slope < -0.1 is "increasing".
inline std::string trend_flag(const std::vector<double>& eps, const std::vector<double>& values, double* slope = nullptr) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const double v = std::abs(values[k]);
    if (v > 0.0) {
      lx.push_back(std::log(eps[k]));
      ly.push_back(std::log(v));
    }
  }
  if (lx.size() < 2) {
    if (slope) *slope = 0.0;
    return "flat";
  }
  const double s = least_squares_slope(lx, ly);
  if (slope) *slope = s;
  if (s > 0.1) return "decreasing";
  if (s < -0.1) return "increasing";
  return "flat";
}

struct FunctionalReport {
  Window window;
  std::vector<double> epsilons;
  std::vector<std::pair<double, double>> per_h;  ///< (h, value), both signs
  std::vector<std::pair<double, double>> F;      ///< (eps, max over |h| <= eps)
  std::string trend;
  double slope = 0.0;

  std::vector<double> values() const {
    std::vector<double> v;
    for (auto& [e, f] : F) v.push_back(f);
    return v;
  }
};

/// Largest admissible integer shift for eps.
inline int max_shift(double eps, double dx) { return static_cast<int>(std::floor(eps / dx * (1.0 + 1e-12))); }

/// F(eps) for each eps of the ladder. Shifts are probed in parallel; the
/// result does not depend on the schedule.
template <class Cost>
  requires std::is_invocable_r_v<double, const Cost&, double, double>
FunctionalReport gp_functional(const SpaceTimeField& field, const Cost& cost, std::vector<double> ladder,
                               std::optional<Window> window = std::nullopt) {
  if (ladder.empty()) throw ConfigError("epsilon ladder is empty");
  std::sort(ladder.begin(), ladder.end());
  const GridSpec& g = field.grid();
  const double dx = g.dx();
  if (ladder.front() < dx * (1.0 - 1e-12)) throw ConfigError("smallest epsilon is below the grid spacing");
  FunctionalReport rep;
  rep.window = window ? *window : default_window(g, ladder.back());
  rep.epsilons = ladder;
  const int kmax = max_shift(ladder.back(), dx);
  std::vector<int> shifts;
  for (int k = 1; k <= kmax; ++k) shifts.push_back(-k), shifts.push_back(k);
  std::vector<double> vals(shifts.size());
  parallel_for(shifts.size(), [&](std::size_t n) { vals[n] = gp_cost_integral(field, cost, shifts[n], rep.window); });
  for (std::size_t n = 0; n < shifts.size(); ++n) rep.per_h.emplace_back(shifts[n] * dx, vals[n]);
  for (double eps : ladder) {
    const int k = max_shift(eps, dx);
    double best = 0.0;
    for (std::size_t n = 0; n < shifts.size(); ++n) {
      if (std::abs(shifts[n]) <= k) best = std::max(best, vals[n]);
    }
    rep.F.emplace_back(eps, best);
  }
  rep.trend = trend_flag(rep.epsilons, rep.values(), &rep.slope);
  return rep;
}

template <class Cost>
  requires std::is_invocable_r_v<double, const Cost&, double, double>
FunctionalReport gp_functional(const SpaceTimeField& field, const Cost& cost, std::vector<double> ladder,
                               const Window& window) {
  return gp_functional(field, cost, std::move(ladder), std::optional<Window>(window));
}

inline FunctionalReport gp_functional(const SpaceTimeField& field, const CostEvaluator& ce, std::vector<double> ladder,
                                      std::optional<Window> window = std::nullopt) {
  return gp_functional(field, [&ce](double a, double b) { return ce.delta(a, b); }, std::move(ladder), window);
}

inline FunctionalReport gp_functional(const SpaceTimeField& field, const CostEvaluator& ce, std::vector<double> ladder,
                                      const Window& window) {
  return gp_functional(field, ce, std::move(ladder), std::optional<Window>(window));
}

struct ElementaryCheck {
  double lhs = 0.0;  ///< int_{J cap B_r} Delta |nu_x| dH1 = 2 r |nu_x| Delta
  double rhs = 0.0;  ///< (2/|h|) int int_{B_r} Delta(psi(t,x+h), psi(t,x))
  double ratio() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
};

/// Pure jump through the origin against the x-shift h on the disk B_r. The
/// shifted and unshifted values differ exactly on a band of width |h nu_x|
/// along the jump line; its area inside the disk comes from quadrature of the
/// chord length.
inline ElementaryCheck pure_jump_elementary_check(double u_minus, double u_plus, Point nu, double r, double h,
                                                  const CostEvaluator& ce, double tol = 1e-12) {
  if (!(r >= std::abs(h) && std::abs(h) > 0.0)) throw DomainError("elementary check needs r >= |h| > 0");
  if (std::abs(std::hypot(nu.t, nu.x) - 1.0) > 1e-12) throw DomainError("jump normal must be a unit vector");
  const double d = ce.delta(u_plus, u_minus);
  ElementaryCheck out;
  out.lhs = 2.0 * r * std::abs(nu.x) * d;
  const double width = std::abs(h * nu.x);
  if (width == 0.0 || d == 0.0) return out;
  const double area = integrate([r](double s) { return 2.0 * std::sqrt(std::max(0.0, r * r - s * s)); },
                                Interval(0.0, width), QuadratureSpec{1e-13, 1e-300, 40});
  out.rhs = 2.0 / std::abs(h) * d * area;
  if (out.lhs > out.rhs * (1.0 + tol)) {
    std::ostringstream os;
    os.precision(17);
    os << "elementary estimate fails at r=" << r << ", h=" << h << ": " << out.lhs << " > " << out.rhs;
    throw InvariantViolation(os.str());
  }
  return out;
}

}  // namespace entrolab
