#pragma once

// Cell-centred space-time fields u(t, x), analytic generators with exact jump
// annotations, and a Godunov solver.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "entrolab/errors.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/numerics.hpp"
#include "entrolab/test_function.hpp"

namespace entrolab {

struct GridSpec {
  double t0 = 0.0, t1 = 1.0;
  int nt = 2;
  double x0 = -1.0, x1 = 1.0;
  int nx = 2;

  void validate() const {
    if (!(t1 > t0) || !(x1 > x0)) throw ConfigError("grid window must have t1 > t0 and x1 > x0");
    if (nt < 2 || nx < 2) throw ConfigError("grid needs nt, nx >= 2");
  }

  double dt() const { return (t1 - t0) / nt; }
  double dx() const { return (x1 - x0) / nx; }
  double t_centre(int i) const { return t0 + (i + 0.5) * dt(); }
  double x_centre(int j) const { return x0 + (j + 0.5) * dx(); }
  double t_edge(int i) const { return t0 + i * dt(); }
  double x_edge(int j) const { return x0 + j * dx(); }

  bool operator==(const GridSpec&) const = default;
};

struct Point {
  double t = 0.0, x = 0.0;
};

/// A straight piece of the jump set. nu points from the u_minus side to the
/// u_plus side.
struct JumpSegment {
  Point p0, p1;
  Point nu;
  double u_minus = 0.0, u_plus = 0.0;

  double length() const { return std::hypot(p1.t - p0.t, p1.x - p0.x); }

  /// (u+ - u-) nu_t + (a(u+) - a(u-)) nu_x.
  double rh_residual(const FluxFunction& flux) const {
    return (u_plus - u_minus) * nu.t + (flux.a(u_plus) - flux.a(u_minus)) * nu.x;
  }
};

enum class Provenance { analytic, godunov };

inline const char* to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "godunov"; }

class SpaceTimeField {
 public:
  SpaceTimeField(GridSpec grid, std::vector<double> values, Provenance provenance)
      : grid_(grid), values_(std::move(values)), provenance_(provenance) {
    grid_.validate();
    if (values_.size() != static_cast<std::size_t>(grid_.nt) * static_cast<std::size_t>(grid_.nx)) {
      throw ConfigError("field value count does not match the grid");
    }
    auto [lo, hi] = std::minmax_element(values_.begin(), values_.end());
    range_ = Interval(*lo, *hi);
  }

  const GridSpec& grid() const { return grid_; }
  double operator()(int i, int j) const { return values_[index(i, j)]; }
  const std::vector<double>& values() const { return values_; }
  Interval range() const { return range_; }
  Provenance provenance() const { return provenance_; }

  const std::vector<JumpSegment>& jumps() const { return jumps_; }
  void set_jumps(std::vector<JumpSegment> jumps) { jumps_ = std::move(jumps); }

  /// True when the generator guarantees a weak solution, so every annotated
  /// segment must satisfy Rankine-Hugoniot.
  bool weak_solution() const { return weak_solution_; }
  void set_weak_solution(bool w) { weak_solution_ = w; }

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.nx) + static_cast<std::size_t>(j);
  }

  GridSpec grid_;
  std::vector<double> values_;
  Interval range_;
  Provenance provenance_;
  std::vector<JumpSegment> jumps_;
  bool weak_solution_ = false;
};

/// Clips the line {p : (p - centre) . nu = 0} to the rectangle (Liang-Barsky).
/// Returns nothing when the line misses the rectangle or only touches it.
inline std::optional<std::pair<Point, Point>> clip_line(Point centre, Point nu, double t0, double t1, double x0,
                                                        double x1) {
  const Point d{-nu.x, nu.t};
  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();
  auto slab = [&](double origin, double dir, double lo, double hi) {
    if (dir == 0.0) return origin >= lo && origin <= hi;
    double a = (lo - origin) / dir, b = (hi - origin) / dir;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
    return true;
  };
  if (!slab(centre.t, d.t, t0, t1) || !slab(centre.x, d.x, x0, x1) || !(s_hi > s_lo)) return std::nullopt;
  return std::pair{Point{centre.t + s_lo * d.t, centre.x + s_lo * d.x},
                   Point{centre.t + s_hi * d.t, centre.x + s_hi * d.x}};
}

/// u_minus where (p - centre) . nu < 0, u_plus elsewhere. Cell centres lying
/// exactly on the line take u_plus.
inline SpaceTimeField pure_jump_field(double u_minus, double u_plus, Point nu, Point centre, const GridSpec& grid) {
  grid.validate();
  if (std::abs(std::hypot(nu.t, nu.x) - 1.0) > 1e-12) throw DomainError("jump normal must be a unit vector");
  std::vector<double> values(static_cast<std::size_t>(grid.nt) * static_cast<std::size_t>(grid.nx));
  for (int i = 0; i < grid.nt; ++i) {
    const double t = grid.t_centre(i);
    for (int j = 0; j < grid.nx; ++j) {
      const double side = (t - centre.t) * nu.t + (grid.x_centre(j) - centre.x) * nu.x;
      values[static_cast<std::size_t>(i) * grid.nx + j] = side < 0.0 ? u_minus : u_plus;
    }
  }
  SpaceTimeField field(grid, std::move(values), Provenance::analytic);
  if (u_minus != u_plus) {
    if (auto seg = clip_line(centre, nu, grid.t0, grid.t1, grid.x0, grid.x1)) {
      field.set_jumps({JumpSegment{seg->first, seg->second, nu, u_minus, u_plus}});
    }
  }
  return field;
}

/// sigma = (a(u+) - a(u-)) / (u+ - u-).
inline double rh_speed(const FluxFunction& flux, double u_plus, double u_minus) {
  flux.require(u_plus);
  flux.require(u_minus);
  if (u_plus == u_minus) throw DomainError("shock speed needs distinct states");
  return (flux.a(u_plus) - flux.a(u_minus)) / (u_plus - u_minus);
}

/// Unit normal (-sigma, 1) / |(-sigma, 1)| of the shock line x = sigma t.
inline Point rh_normal(const FluxFunction& flux, double u_plus, double u_minus) {
  const double sigma = rh_speed(flux, u_plus, u_minus);
  const double n = std::hypot(sigma, 1.0);
  return {-sigma / n, 1.0 / n};
}

/// Entropy solution of the Riemann problem with data u_left | u_right at x = 0,
/// t = 0.
inline double riemann_exact(const FluxFunction& flux, double u_left, double u_right, double t, double x) {
  if (!(t > 0.0)) throw DomainError("riemann_exact needs t > 0");
  flux.require(u_left);
  flux.require(u_right);
  if (u_left == u_right) return u_left;
  const double xi = x / t;
  if (u_left > u_right) return xi < rh_speed(flux, u_right, u_left) ? u_left : u_right;
  if (xi <= flux.a_prime(u_left)) return u_left;
  if (xi >= flux.a_prime(u_right)) return u_right;
  return bisect_monotone([&](double v) { return flux.a_prime(v); }, xi, Interval(u_left, u_right), 0.0);
}

/// A jump from u_minus to u_plus travelling at the Rankine-Hugoniot speed
/// through centre. Entropic when u_minus > u_plus.
inline SpaceTimeField rh_jump_field(const FluxFunction& flux, double u_minus, double u_plus, const GridSpec& grid,
                                    Point centre = {0.0, 0.0}) {
  auto field = pure_jump_field(u_minus, u_plus, rh_normal(flux, u_plus, u_minus), centre, grid);
  field.set_weak_solution(true);
  return field;
}

/// Increasing jump at the Rankine-Hugoniot speed: a weak solution that is not
/// an entropy solution.
inline SpaceTimeField nonentropic_jump_field(const FluxFunction& flux, double u_minus, double u_plus,
                                             const GridSpec& grid, Point centre = {0.0, 0.0}) {
  if (!(u_minus < u_plus)) throw DomainError("non-entropic jump needs u_minus < u_plus");
  return rh_jump_field(flux, u_minus, u_plus, grid, centre);
}

/// riemann_exact sampled at cell centres, with the data placed at (t_origin,
/// x_origin). A shock carries its jump segment; a fan carries none.
inline SpaceTimeField riemann_field(const FluxFunction& flux, double u_left, double u_right, const GridSpec& grid,
                                    Point origin = {0.0, 0.0}) {
  grid.validate();
  if (!(grid.t0 >= origin.t)) throw DomainError("riemann field window must start at or after the data time");
  std::vector<double> values(static_cast<std::size_t>(grid.nt) * static_cast<std::size_t>(grid.nx));
  for (int i = 0; i < grid.nt; ++i) {
    const double t = grid.t_centre(i) - origin.t;
    for (int j = 0; j < grid.nx; ++j) {
      values[static_cast<std::size_t>(i) * grid.nx + j] =
          riemann_exact(flux, u_left, u_right, t, grid.x_centre(j) - origin.x);
    }
  }
  SpaceTimeField field(grid, std::move(values), Provenance::analytic);
  field.set_weak_solution(true);
  if (u_left > u_right) {
    const Point nu = rh_normal(flux, u_right, u_left);
    if (auto seg = clip_line(origin, nu, grid.t0, grid.t1, grid.x0, grid.x1)) {
      field.set_jumps({JumpSegment{seg->first, seg->second, nu, u_left, u_right}});
    }
  }
  return field;
}

/// Godunov interface flux.
inline double godunov_flux(const FluxFunction& flux, double ul, double ur) {
  if (ul <= ur) return flux.a(sonic_point(flux, Interval(ul, ur)));
  return std::max(flux.a(ul), flux.a(ur));
}

struct GodunovStats {
  int steps = 0;
  double dt = 0.0;
  double max_roundoff = 0.0;  ///< largest excursion outside [min u0, max u0] removed
};

/// Advances cell averages from t_from to t_to with outflow boundaries. The
/// step is the largest one with max|a'| dt / dx <= cfl that divides the span.
inline std::vector<double> godunov_evolve(const FluxFunction& flux, std::vector<double> u, double dx, double t_from,
                                          double t_to, double cfl = 0.45, GodunovStats* stats = nullptr) {
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
  if (u.size() < 2) throw ConfigError("godunov needs at least two cells");
  if (!(t_to >= t_from)) throw ConfigError("godunov cannot run backwards in time");
  auto [lo_it, hi_it] = std::minmax_element(u.begin(), u.end());
  const double lo = *lo_it, hi = *hi_it;
  flux.require(Interval(lo, hi));
  const double speed = std::max(std::abs(flux.a_prime(lo)), std::abs(flux.a_prime(hi)));
  const double span = t_to - t_from;
  int steps = span > 0.0 ? 1 : 0;
  if (span > 0.0 && speed > 0.0) steps = static_cast<int>(std::ceil(span * speed / (cfl * dx)));
  const double dt = steps > 0 ? span / steps : 0.0;
  if (speed * dt > cfl * dx * (1.0 + 1e-12)) throw ConfigError("time step violates the CFL bound");

  const std::size_t n = u.size();
  const double lambda = dt / dx;
  std::vector<double> f(n + 1);
  double excursion = 0.0;
  for (int s = 0; s < steps; ++s) {
    f[0] = godunov_flux(flux, u[0], u[0]);
    f[n] = godunov_flux(flux, u[n - 1], u[n - 1]);
    for (std::size_t k = 1; k < n; ++k) f[k] = godunov_flux(flux, u[k - 1], u[k]);
    for (std::size_t k = 0; k < n; ++k) {
      double v = u[k] - lambda * (f[k + 1] - f[k]);
      // the update is a convex combination of neighbours; only roundoff can leave [lo, hi]
      if (v < lo || v > hi) {
        excursion = std::max(excursion, v < lo ? lo - v : v - hi);
        v = std::clamp(v, lo, hi);
      }
      u[k] = v;
    }
  }
  if (excursion > 64 * std::numeric_limits<double>::epsilon() * (1.0 + std::max(std::abs(lo), std::abs(hi)))) {
    std::ostringstream os;
    os << "godunov update left [" << lo << ", " << hi << "] by " << excursion;
    throw InvariantViolation(os.str());
  }
  if (stats) {
    stats->steps += steps;
    stats->dt = dt;
    stats->max_roundoff = std::max(stats->max_roundoff, excursion);
  }
  return u;
}

/// Godunov solution from u0 at time t_init <= grid.t0, recorded at the
/// cell-centre times of the grid.
inline SpaceTimeField godunov_solve(const FluxFunction& flux, const std::function<double(double)>& u0,
                                    const GridSpec& grid, double cfl = 0.45, double t_init = 0.0,
                                    GodunovStats* stats = nullptr) {
  grid.validate();
  if (!(t_init <= grid.t0)) throw ConfigError("initial time must not exceed the grid start");
  std::vector<double> u(static_cast<std::size_t>(grid.nx));
  for (int j = 0; j < grid.nx; ++j) u[j] = u0(grid.x_centre(j));
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.nt) * grid.nx);
  double t = t_init;
  for (int i = 0; i < grid.nt; ++i) {
    const double next = grid.t_centre(i);
    u = godunov_evolve(flux, std::move(u), grid.dx(), t, next, cfl, stats);
    t = next;
    values.insert(values.end(), u.begin(), u.end());
  }
  SpaceTimeField field(grid, std::move(values), Provenance::godunov);
  field.set_weak_solution(true);
  return field;
}

/// int int (u psi_t + a(u) psi_x) dx dt with exact cell integrals of psi_t and
/// psi_x (the field is constant per cell).
inline double weak_residual(const SpaceTimeField& field, const FluxFunction& flux, const TestFunction& psi) {
  const GridSpec& g = field.grid();
  if (!Interval(g.t0, g.t1).contains(psi.t_support()) || !Interval(g.x0, g.x1).contains(psi.x_support())) {
    throw DomainError("test function support escapes the grid window");
  }
  std::vector<double> ti(g.nt), tj(g.nt), xi(g.nx), xj(g.nx);
  for (int i = 0; i < g.nt; ++i) {
    ti[i] = psi.t_factor_integral(g.t_edge(i), g.t_edge(i + 1));
    tj[i] = psi.t_factor_jump(g.t_edge(i), g.t_edge(i + 1));
  }
  for (int j = 0; j < g.nx; ++j) {
    xi[j] = psi.x_factor_integral(g.x_edge(j), g.x_edge(j + 1));
    xj[j] = psi.x_factor_jump(g.x_edge(j), g.x_edge(j + 1));
  }
  double total = 0.0;
  for (int i = 0; i < g.nt; ++i) {
    if (ti[i] == 0.0 && tj[i] == 0.0) continue;
    for (int j = 0; j < g.nx; ++j) {
      if (xi[j] == 0.0 && xj[j] == 0.0) continue;
      const double u = field(i, j);
      total += u * tj[i] * xi[j] + flux.a(u) * ti[i] * xj[j];
    }
  }
  return total;
}

}  // namespace entrolab
