#pragma once

// Entropy production: the mollified commutator pairing, the exact jump-set
// integral, and the comparisons against the regularity functional.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "entrolab/cost.hpp"
#include "entrolab/entropy.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/fields.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/functional.hpp"
#include "entrolab/numerics.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/test_function.hpp"

namespace entrolab {

/// rho(y) = (315/256)(1 - y^2)^4 scaled to eps and sampled at multiples of dx.
/// Both stencils are renormalised: sum w dx = 1, and the derivative stencil
/// reproduces the slope of a linear profile exactly.
class Mollifier {
 public:
  static constexpr double kNorm = 315.0 / 256.0;

  static double rho(double y) { return kNorm * bump::phi(y); }
  static double rho_prime(double y) { return kNorm * bump::dphi(y); }

  Mollifier(double eps, double dx) : eps_(eps), dx_(dx) {
    if (!(dx > 0.0)) throw ConfigError("mollifier needs dx > 0");
    if (!(eps >= 4.0 * dx * (1.0 - 1e-12))) throw ConfigError("mollifier scale must satisfy eps >= 4 dx");
    m_ = static_cast<int>(std::floor(eps / dx * (1.0 + 1e-12)));
    w_.resize(2 * m_ + 1);
    d_.resize(2 * m_ + 1);
    double mass = 0.0, moment = 0.0;
    for (int k = -m_; k <= m_; ++k) {
      const double y = k * dx / eps;
      w_[k + m_] = rho(y) / eps;
      d_[k + m_] = rho_prime(y) / (eps * eps);
      mass += w_[k + m_] * dx;
      moment -= d_[k + m_] * k * dx * dx;
    }
    for (double& v : w_) v /= mass;
    for (double& v : d_) v /= moment;
  }

  double eps() const { return eps_; }
  double dx() const { return dx_; }
  int half_width() const { return m_; }
  /// Weight of u(x - k dx) in u_eps(x), k in [-m, m].
  double weight(int k) const { return w_[k + m_]; }
  /// Weight of u(x - k dx) in u_{eps,x}(x).
  double slope_weight(int k) const { return d_[k + m_]; }

 private:
  double eps_, dx_;
  int m_ = 0;
  std::vector<double> w_, d_;
};

/// Mollified quantities at one cell.
struct MollifiedCell {
  double u = 0.0;    ///< u_eps
  double au = 0.0;   ///< [a(u)]_eps
  double ux = 0.0;   ///< u_{eps,x}
  double raw = 0.0;  ///< u at the cell itself
};

namespace detail {

/// Calls body(i, j, cell) for rows [i0, i1) and columns [j0, j1).
/// Columns must keep the stencil in the grid.
template <class Body>
void for_each_mollified(const SpaceTimeField& field, const FluxFunction& flux, const Mollifier& mol, int i0, int i1,
                        int j0, int j1, const Body& body) {
  const GridSpec& g = field.grid();
  const int m = mol.half_width();
  if (j0 - m < 0 || j1 - 1 + m >= g.nx) throw DomainError("mollifier stencil leaves the grid");
  const double dx = g.dx();
  std::vector<double> a_row(g.nx);
  for (int i = i0; i < i1; ++i) {
    for (int j = std::max(0, j0 - m); j < std::min(g.nx, j1 + m); ++j) a_row[j] = flux.a(field(i, j));
    for (int j = j0; j < j1; ++j) {
      MollifiedCell c;
      c.raw = field(i, j);
      for (int k = -m; k <= m; ++k) {
        const double v = field(i, j - k);
        c.u += mol.weight(k) * v;
        c.au += mol.weight(k) * a_row[j - k];
        c.ux += mol.slope_weight(k) * v;
      }
      c.u *= dx;
      c.au *= dx;
      c.ux *= dx;
      body(i, j, c);
    }
  }
}

}  // namespace detail

struct CommutatorReport {
  double min = 0.0;                ///< min of [a(u)]_eps - a(u_eps)
  double max = 0.0;
  double floor = 0.0;              ///< tolerated negative value
  double max_majorant_excess = 0.0;  ///< largest commutator minus convexity majorant on sampled cells
  long cells = 0;
  long majorant_samples = 0;
};

/// [a(u)]_eps - a(u_eps) over every cell at distance >= eps from the x-edges.
/// Throws when the Jensen lower bound fails beyond roundoff or the convexity
/// majorant int (a(u(z)) - a(u(x)) - a'(u(x))(u(z) - u(x))) rho_eps dz is
/// exceeded on a sampled cell.
inline CommutatorReport commutator(const SpaceTimeField& field, const FluxFunction& flux, double eps) {
  const GridSpec& g = field.grid();
  const Mollifier mol(eps, g.dx());
  const int m = mol.half_width();
  if (2 * m >= g.nx) throw ConfigError("grid too narrow for the mollifier");
  flux.require(field.range());
  const double amax = std::max(std::abs(flux.a(field.range().lo())), std::abs(flux.a(field.range().hi())));
  CommutatorReport rep;
  rep.floor = -1e-10 * (1.0 + amax);
  rep.min = std::numeric_limits<double>::infinity();
  rep.max = -std::numeric_limits<double>::infinity();
  const int row_stride = std::max(1, g.nt / 16), col_stride = std::max(1, g.nx / 256);
  std::vector<CommutatorReport> rows(g.nt);
  parallel_for(static_cast<std::size_t>(g.nt), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    CommutatorReport& r = rows[ii];
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
    detail::for_each_mollified(field, flux, mol, i, i + 1, m, g.nx - m, [&](int, int j, const MollifiedCell& c) {
      const double comm = c.au - flux.a(c.u);
      r.min = std::min(r.min, comm);
      r.max = std::max(r.max, comm);
      ++r.cells;
      if (i % row_stride == 0 && j % col_stride == 0) {
        const double ux = c.raw, ax = flux.a(ux), sx = flux.a_prime(ux);
        double maj = 0.0;
        for (int k = -m; k <= m; ++k) {
          const double uz = field(i, j - k);
          maj += mol.weight(k) * (flux.a(uz) - ax - sx * (uz - ux));
        }
        maj *= g.dx();
        const double slack = 1e-12 * (1.0 + amax);
        r.max_majorant_excess = std::max(r.max_majorant_excess, comm - maj - slack);
        ++r.majorant_samples;
      }
    });
  });
  for (const auto& r : rows) {
    rep.min = std::min(rep.min, r.min);
    rep.max = std::max(rep.max, r.max);
    rep.max_majorant_excess = std::max(rep.max_majorant_excess, r.max_majorant_excess);
    rep.cells += r.cells;
    rep.majorant_samples += r.majorant_samples;
  }
  if (rep.min < rep.floor) {
    std::ostringstream os;
    os.precision(17);
    os << "commutator " << rep.min << " below the Jensen floor " << rep.floor << " at eps=" << eps;
    throw InvariantViolation(os.str());
  }
  if (rep.max_majorant_excess > 0.0) {
    std::ostringstream os;
    os.precision(17);
    os << "commutator exceeds its convexity majorant by " << rep.max_majorant_excess << " at eps=" << eps;
    throw InvariantViolation(os.str());
  }
  return rep;
}

struct PairingResult {
  double term1 = 0.0;  ///< -int int eta'(u_eps)(a(u_eps) - [a(u)]_eps) psi_x
  double term2 = 0.0;  ///< int int eta''(u_eps) u_{eps,x} ([a(u)]_eps - a(u_eps)) psi
  double total = 0.0;
  double bound = 0.0;  ///< int int_{supp psi} |u_{eps,x}| ([a(u)]_eps - a(u_eps))
  double jensen_min = 0.0;
};

/// Midpoint-rule pairing of the mollified entropy production with psi, and the
/// production bound over the support of psi, in one pass.
inline PairingResult pairing(const SpaceTimeField& field, const FluxFunction& flux, const Entropy& entropy,
                             const TestFunction& psi, double eps) {
  const GridSpec& g = field.grid();
  const Mollifier mol(eps, g.dx());
  const Interval ts = psi.t_support(), xs = psi.x_support();
  if (ts.lo() < g.t0 || ts.hi() > g.t1) throw DomainError("test function support escapes the time window");
  if (xs.lo() < g.x0 + eps || xs.hi() > g.x1 - eps) {
    throw DomainError("test function support must stay eps away from the x-edges");
  }
  flux.require(field.range());
  int i0 = g.nt, i1 = 0, j0 = g.nx, j1 = 0;
  for (int i = 0; i < g.nt; ++i) {
    if (ts.contains(g.t_centre(i))) i0 = std::min(i0, i), i1 = i + 1;
  }
  for (int j = 0; j < g.nx; ++j) {
    if (xs.contains(g.x_centre(j))) j0 = std::min(j0, j), j1 = j + 1;
  }
  PairingResult out;
  if (i0 >= i1 || j0 >= j1) return out;
  j0 = std::max(j0, mol.half_width());
  j1 = std::min(j1, g.nx - mol.half_width());

  struct Row {
    double t1 = 0.0, t2 = 0.0, b = 0.0, jmin = std::numeric_limits<double>::infinity();
  };
  std::vector<Row> rows(static_cast<std::size_t>(i1 - i0));
  parallel_for(rows.size(), [&](std::size_t n) {
    const int i = i0 + static_cast<int>(n);
    const double t = g.t_centre(i);
    Row& r = rows[n];
    detail::for_each_mollified(field, flux, mol, i, i + 1, j0, j1, [&](int, int j, const MollifiedCell& c) {
      const double x = g.x_centre(j);
      const double comm = c.au - flux.a(c.u);
      r.jmin = std::min(r.jmin, comm);
      r.t1 += entropy.d1(c.u) * comm * psi.dx(t, x);
      r.t2 += entropy.d2(c.u) * c.ux * comm * psi(t, x);
      r.b += std::abs(c.ux) * comm;
    });
  });
  const double cell = g.dx() * g.dt();
  out.jensen_min = std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    out.term1 += r.t1;
    out.term2 += r.t2;
    out.bound += r.b;
    out.jensen_min = std::min(out.jensen_min, r.jmin);
  }
  out.term1 *= cell;
  out.term2 *= cell;
  out.bound *= cell;
  out.total = out.term1 + out.term2;
  return out;
}

/// int int_{supp psi} |u_{eps,x}| ([a(u)]_eps - a(u_eps)) dx dt.
inline double production_bound(const SpaceTimeField& field, const FluxFunction& flux, const Entropy& entropy,
                               const TestFunction& psi, double eps) {
  return pairing(field, flux, entropy, psi, eps).bound;
}

/// Space-time rectangle U = [ta, tb] x [xa, xb].
struct Rect {
  double ta = 0.0, tb = 1.0, xa = -1.0, xb = 1.0;
};

/// Portion of a segment inside a rectangle (Liang-Barsky on the parameter).
inline std::optional<std::pair<Point, Point>> clip_segment(const JumpSegment& s, const Rect& u) {
  double lo = 0.0, hi = 1.0;
  const double dt = s.p1.t - s.p0.t, dx = s.p1.x - s.p0.x;
  auto edge = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) lo = std::max(lo, r);
    else hi = std::min(hi, r);
    return true;
  };
  if (!edge(-dt, s.p0.t - u.ta) || !edge(dt, u.tb - s.p0.t) || !edge(-dx, s.p0.x - u.xa) ||
      !edge(dx, u.xb - s.p0.x) || !(hi > lo)) {
    return std::nullopt;
  }
  return std::pair{Point{s.p0.t + lo * dt, s.p0.x + lo * dx}, Point{s.p0.t + hi * dt, s.p0.x + hi * dx}};
}

struct JumpProduction {
  double signed_value = 0.0;  ///< mu_eta(U)
  double abs_value = 0.0;     ///< |mu_eta|(U)
};

inline void require_rh(const JumpSegment& s, const FluxFunction& flux) {
  if (std::abs(s.rh_residual(flux)) > 1e-10) {
    std::ostringstream os;
    os.precision(17);
    os << "jump segment (" << s.u_minus << " -> " << s.u_plus << ") violates Rankine-Hugoniot by "
       << s.rh_residual(flux);
    throw InvariantViolation(os.str());
  }
}

/// sum c_eta(u+, u-) nu_x length(segment cap U). With weak_solution set, every
/// segment must satisfy Rankine-Hugoniot.
inline JumpProduction jump_production(const std::vector<JumpSegment>& jumps, const Entropy& entropy,
                                      const FluxFunction& flux, const Rect& U, bool weak_solution = true) {
  JumpProduction out;
  for (const auto& s : jumps) {
    if (weak_solution) require_rh(s, flux);
    const auto piece = clip_segment(s, U);
    if (!piece) continue;
    const double len = std::hypot(piece->second.t - piece->first.t, piece->second.x - piece->first.x);
    const double v = jump_cost(entropy, flux, s.u_plus, s.u_minus) * s.nu.x * len;
    out.signed_value += v;
    out.abs_value += std::abs(v);
  }
  return out;
}

/// <mu_eta, psi> = sum c_eta nu_x int_segment psi dH1 for a pure jump set.
inline double jump_pairing(const std::vector<JumpSegment>& jumps, const Entropy& entropy, const FluxFunction& flux,
                           const TestFunction& psi, bool weak_solution = true) {
  const Rect support{psi.t_support().lo(), psi.t_support().hi(), psi.x_support().lo(), psi.x_support().hi()};
  double total = 0.0;
  for (const auto& s : jumps) {
    if (weak_solution) require_rh(s, flux);
    const auto piece = clip_segment(s, support);
    if (!piece) continue;
    const auto [a, b] = *piece;
    const double len = std::hypot(b.t - a.t, b.x - a.x);
    const double line = integrate(
        [&](double s) {
          const double f = s / len;
          return psi(a.t + f * (b.t - a.t), a.x + f * (b.x - a.x));
        },
        Interval(0.0, len), QuadratureSpec{1e-12, 1e-300, 40});
    total += jump_cost(entropy, flux, s.u_plus, s.u_minus) * s.nu.x * line;
  }
  return total;
}

/// -int int (eta(u) psi_t + q(u) psi_x) with exact cell integrals of psi.
inline double distributional_production(const SpaceTimeField& field, const Entropy& entropy,
                                        const EntropyFluxTable& q, const TestFunction& psi) {
  const GridSpec& g = field.grid();
  if (!Interval(g.t0, g.t1).contains(psi.t_support()) || !Interval(g.x0, g.x1).contains(psi.x_support())) {
    throw DomainError("test function support escapes the grid window");
  }
  double total = 0.0;
  for (int i = 0; i < g.nt; ++i) {
    const double ti = psi.t_factor_integral(g.t_edge(i), g.t_edge(i + 1));
    const double tj = psi.t_factor_jump(g.t_edge(i), g.t_edge(i + 1));
    if (ti == 0.0 && tj == 0.0) continue;
    for (int j = 0; j < g.nx; ++j) {
      const double xi = psi.x_factor_integral(g.x_edge(j), g.x_edge(j + 1));
      const double xj = psi.x_factor_jump(g.x_edge(j), g.x_edge(j + 1));
      if (xi == 0.0 && xj == 0.0) continue;
      const double u = field(i, j);
      total -= entropy.value(u) * tj * xi + q(u) * ti * xj;
    }
  }
  return total;
}

/// Dyadic ladder {4, 8, ..., 4 * 2^(n-1)} dx.
inline std::vector<double> default_ladder(double dx, int n = 5) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(4.0 * dx * std::ldexp(1.0, k));
  return out;
}

/// Number of rungs in the lower half of a ladder (rounded up).
inline std::size_t lower_half(std::size_t n) { return (n + 1) / 2; }

/// Log-log slope of |values| against eps over the first n rungs; NaN when
/// fewer than two positive values remain.
inline double empirical_order(const std::vector<double>& eps, const std::vector<double>& values, std::size_t n) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < std::min(n, eps.size()); ++k) {
    if (std::abs(values[k]) > 0.0) lx.push_back(std::log(eps[k])), ly.push_back(std::log(std::abs(values[k])));
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return least_squares_slope(lx, ly);
}

struct ProductionReport {
  std::vector<double> epsilons;
  std::vector<double> term1, term2, total, bound;
  double jensen_min = 0.0;
  bool has_jumps = false;
  double jump_reference = 0.0;  ///< <mu_eta, psi> from the jump set
  double consistency_order = std::numeric_limits<double>::quiet_NaN();
  double term1_order = std::numeric_limits<double>::quiet_NaN();
  std::string total_trend;
};

/// Pairing over an eps ladder plus the jump-set reference when the field
/// carries jumps.
inline ProductionReport production_study(const SpaceTimeField& field, const FluxFunction& flux,
                                         const Entropy& entropy, const TestFunction& psi,
                                         std::vector<double> ladder) {
  std::sort(ladder.begin(), ladder.end());
  ProductionReport rep;
  rep.epsilons = ladder;
  rep.jensen_min = std::numeric_limits<double>::infinity();
  for (double eps : ladder) {
    const auto p = pairing(field, flux, entropy, psi, eps);
    rep.term1.push_back(p.term1);
    rep.term2.push_back(p.term2);
    rep.total.push_back(p.total);
    rep.bound.push_back(p.bound);
    rep.jensen_min = std::min(rep.jensen_min, p.jensen_min);
  }
  const std::size_t half = lower_half(ladder.size());
  rep.term1_order = empirical_order(ladder, rep.term1, half);
  rep.total_trend = trend_flag(ladder, rep.total);
  rep.has_jumps = !field.jumps().empty();
  if (rep.has_jumps) {
    rep.jump_reference = jump_pairing(field.jumps(), entropy, flux, psi, field.weak_solution());
    std::vector<double> err;
    for (double t : rep.total) err.push_back(t - rep.jump_reference);
    rep.consistency_order = empirical_order(ladder, err, half);
  }
  return rep;
}

struct Theorem1Result {
  double mu_abs = 0.0;
  double functional_F = 0.0;
  double sup_eta2 = 0.0;
  double C0_empirical = std::numeric_limits<double>::quiet_NaN();
  bool skipped = false;  ///< both sides vanish
  bool passed(double cap = 1.0) const { return skipped || C0_empirical <= cap; }
};

/// |mu_eta|(U) / (sup_I |eta''| F) with a 0/0 guard.
inline Theorem1Result theorem1_ratio(double mu_abs, double functional_F, double sup_eta2) {
  Theorem1Result r{mu_abs, functional_F, sup_eta2};
  const double denom = sup_eta2 * functional_F;
  const double scale = 1e-14 * (1.0 + std::abs(functional_F));
  if (std::abs(mu_abs) <= scale && std::abs(denom) <= scale) {
    r.skipped = true;
    return r;
  }
  r.C0_empirical = denom > 0.0 ? mu_abs / denom : std::numeric_limits<double>::infinity();
  return r;
}

/// The limsup surrogate: the largest F over the lower half of the ladder.
inline double lower_half_max(const std::vector<double>& values) {
  double best = 0.0;
  for (std::size_t k = 0; k < lower_half(values.size()); ++k) best = std::max(best, values[k]);
  return best;
}

/// C0 ratio on a field with exact jump metadata over the window rectangle.
inline Theorem1Result theorem1_from_jumps(const SpaceTimeField& field, const Entropy& entropy, const CostEvaluator& ce,
                                          const FunctionalReport& functional) {
  const Window& w = functional.window;
  const auto mu = jump_production(field.jumps(), entropy, ce.flux(), Rect{w.ta, w.tb, w.xa, w.xb},
                                  field.weak_solution());
  return theorem1_ratio(mu.abs_value, lower_half_max(functional.values()), entropy.sup_abs_d2(field.range()));
}

struct ChainReport {
  std::vector<double> epsilons;
  std::vector<double> F, Fhat, Khat;
  double D = 1.0;
  double threshold = 9.0;           ///< 9 D^4
  double worst_functional_ratio = 0.0;  ///< max over eps of Fhat / F
  double min_pointwise_ratio = 0.0;     ///< min sampled Delta / Delta-hat
  double pointwise_threshold = 0.0;     ///< 1 / (9 D^4)
  double khat_spread = 0.0;             ///< (max - min) / mean of Khat over the lower half
  bool functional_ok = true;
  bool pointwise_ok = true;
};

/// Delta-hat functional against the Delta functional and the pairing:
/// Fhat <= 9 D^4 F per rung, sampled Delta / Delta-hat >= 1 / (9 D^4), and
/// Khat = |pairing| / (|psi|_inf sup|eta''| Fhat) per rung.
inline ChainReport theorem2_chain(const SpaceTimeField& field, const Entropy& entropy, const CostEvaluator& ce,
                                  const TestFunction& psi, std::vector<double> ladder,
                                  std::optional<Window> window = std::nullopt, int samples = 1000,
                                  std::uint64_t seed = 42) {
  std::sort(ladder.begin(), ladder.end());
  ChainReport rep;
  rep.epsilons = ladder;
  const Interval I = field.range();
  if (I.degenerate()) {
    rep.F.assign(ladder.size(), 0.0);
    rep.Fhat.assign(ladder.size(), 0.0);
    rep.Khat.assign(ladder.size(), 0.0);
    rep.threshold = 9.0;
    rep.pointwise_threshold = 1.0 / 9.0;
    return rep;
  }
  rep.D = doubling_constant(ce.flux(), I).constant;
  rep.threshold = 9.0 * std::pow(rep.D, 4);
  rep.pointwise_threshold = 1.0 / rep.threshold;
  const auto F = gp_functional(field, ce, ladder, window);
  const auto Fhat = gp_functional(field, [&ce](double a, double b) { return ce.delta_hat(a, b); }, ladder, window);
  rep.F = F.values();
  rep.Fhat = Fhat.values();
  const double sup2 = entropy.sup_abs_d2(I);
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    if (rep.F[k] > 0.0) rep.worst_functional_ratio = std::max(rep.worst_functional_ratio, rep.Fhat[k] / rep.F[k]);
    if (rep.Fhat[k] > rep.threshold * rep.F[k] * (1.0 + 1e-12)) rep.functional_ok = false;
    const double p = std::abs(pairing(field, ce.flux(), entropy, psi, ladder[k]).total);
    const double denom = psi.sup_norm() * sup2 * rep.Fhat[k];
    rep.Khat.push_back(denom > 0.0 ? p / denom : 0.0);
  }
  const auto low = lower_bound_check(ce, I, rep.D, samples, seed);
  rep.min_pointwise_ratio = low.min_ratio;
  rep.pointwise_ok = low.passed();
  const std::size_t half = lower_half(ladder.size());
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < half; ++k) lo = std::min(lo, rep.Khat[k]), hi = std::max(hi, rep.Khat[k]), sum += rep.Khat[k];
  rep.khat_spread = sum > 0.0 ? (hi - lo) / (sum / half) : 0.0;
  return rep;
}

/// Kruzhkov sign tolerance for numerical fields: dx |psi|_inf sup|eta''|.
inline double godunov_sign_tolerance(const SpaceTimeField& field, const Entropy& entropy, const TestFunction& psi) {
  return field.grid().dx() * psi.sup_norm() * entropy.sup_abs_d2(field.range());
}

}  // namespace entrolab
