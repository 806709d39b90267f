#pragma once

// The regularity cost Delta(u1, u2) = int_[u1,u2] (u2 - s)(s - u1) a''(ds),
// its enlarged variant Delta-hat, the convex functions G_v with derivative and
// Legendre transform, and the inequalities relating them to a''.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <vector>

#include "entrolab/errors.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/numerics.hpp"
#include "entrolab/rng.hpp"

namespace entrolab {

/// Precomputed Delta on an n x n grid over I x I with bilinear lookup.
/// Lookup error is bounded by lipschitz * step.
class DeltaTable {
 public:
  template <class DeltaFn>
  DeltaTable(Interval I, std::size_t n, const DeltaFn& delta) : range_(I), n_(n), values_(n * n) {
    if (n < 2 || I.degenerate()) throw ConfigError("delta table needs n >= 2 over a nondegenerate interval");
    step_ = I.length() / static_cast<double>(n - 1);
    const auto nodes = linspace(I.lo(), I.hi(), n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double d = delta(nodes[i], nodes[j]);
        values_[i * n + j] = d;
        values_[j * n + i] = d;
      }
    }
  }

  const Interval& range() const { return range_; }
  double step() const { return step_; }

  double operator()(double u1, double u2) const {
    const auto locate = [&](double u, std::size_t& k, double& w) {
      double pos = (u - range_.lo()) / step_;
      pos = std::clamp(pos, 0.0, static_cast<double>(n_ - 1));
      k = std::min(static_cast<std::size_t>(pos), n_ - 2);
      w = pos - static_cast<double>(k);
    };
    std::size_t i, j;
    double wi, wj;
    locate(u1, i, wi);
    locate(u2, j, wj);
    const double v00 = values_[i * n_ + j], v01 = values_[i * n_ + j + 1];
    const double v10 = values_[(i + 1) * n_ + j], v11 = values_[(i + 1) * n_ + j + 1];
    return (1 - wi) * ((1 - wj) * v00 + wj * v01) + wi * ((1 - wj) * v10 + wj * v11);
  }

 private:
  Interval range_;
  std::size_t n_;
  double step_ = 0.0;
  std::vector<double> values_;
};

struct LegendreValue {
  double value = 0.0;
  double argmax = 0.0;   ///< r* with G_v'(r*) = p
  bool clipped = false;  ///< p exceeded G_v' on admissible radii; r* pinned to the boundary
};

struct GHBounds {
  double h_of_gprime = 0.0;  ///< H_v(G_v'(r))
  double r_gprime = 0.0;     ///< r G_v'(r)
  double bound8 = 0.0;       ///< 8 r^2 a''([v-r, v+r])
  double g = 0.0;            ///< G_v(r)
  double bound4 = 0.0;       ///< 4 r^2 a''([v-r, v+r])
};

struct LowerBoundResult {
  double min_ratio = std::numeric_limits<double>::infinity();  ///< min Delta / Delta-hat
  double threshold = 0.0;                                      ///< 1 / (9 D^4)
  double argmin_u1 = 0.0, argmin_u2 = 0.0;
  int samples = 0;
  bool passed() const { return min_ratio >= threshold; }
};

struct BesovFit {
  double slope = 0.0;
  double min_constant = 0.0;  ///< min over samples of Delta(0, d) / d^(beta+2)
};

class CostEvaluator {
 public:
  explicit CostEvaluator(FluxFunction flux, QuadratureSpec quadrature = {})
      : flux_(std::move(flux)), quad_(quadrature) {
    quad_.validate();
  }

  const FluxFunction& flux() const { return flux_; }
  const QuadratureSpec& quadrature() const { return quad_; }

  /// Delta via the one-dimensional reduction int a'(s)(2s - u1 - u2) ds.
  /// Subtracting a' at the midpoint leaves the integral unchanged and makes
  /// the integrand nonnegative.
  double delta(double u1, double u2) const {
    flux_.require(u1);
    flux_.require(u2);
    if (u1 == u2) return 0.0;
    const Interval iv = Interval::hull(u1, u2);
    const double centre_slope = flux_.a_prime(iv.mid());
    const double sum = u1 + u2;
    auto integrand = [&](double s) { return (flux_.a_prime(s) - centre_slope) * (2.0 * s - sum); };
    return integrate(integrand, iv, scaled(iv), flux_.kinks());
  }

  /// Brute-force 1/2 double integral of |a'(v) - a'(w)| over [u1,u2]^2.
  double delta_oracle_double(double u1, double u2) const {
    flux_.require(u1);
    flux_.require(u2);
    if (u1 == u2) return 0.0;
    const Interval iv = Interval::hull(u1, u2);
    const QuadratureSpec inner_spec = tighter(scaled(iv));
    auto inner = [&](double v) {
      const double av = flux_.a_prime(v);
      std::vector<double> cuts = flux_.kinks();
      cuts.push_back(v);
      return integrate([&](double w) { return std::abs(av - flux_.a_prime(w)); }, iv, inner_spec, cuts);
    };
    return 0.5 * integrate(inner, iv, scaled(iv), flux_.kinks());
  }

  /// Kinetic form: double integral of 1_{v>w}(a'(v)-a'(w)) m(v) m(w) with
  /// m = M_{u1} - M_{u2} and M_u(v) = 1_{0<=v<=u} - 1_{u<=v<0}.
  double delta_oracle_kinetic(double u1, double u2) const {
    flux_.require(u1);
    flux_.require(u2);
    auto kinetic = [](double u, double v) {
      return (0.0 <= v && v <= u ? 1.0 : 0.0) - (u <= v && v < 0.0 ? 1.0 : 0.0);
    };
    auto m = [&](double v) { return kinetic(u1, v) - kinetic(u2, v); };
    const Interval box(std::min({u1, u2, 0.0}), std::max({u1, u2, 0.0}));
    std::vector<double> cuts = flux_.kinks();
    cuts.insert(cuts.end(), {u1, u2, 0.0});
    const Interval span = Interval::hull(u1, u2);
    const QuadratureSpec outer_spec = scaled(span.degenerate() ? box : span);
    const QuadratureSpec inner_spec = tighter(outer_spec);
    auto outer = [&](double v) {
      const double mv = m(v);
      if (mv == 0.0 || v <= box.lo()) return 0.0;
      const double av = flux_.a_prime(v);
      return mv * integrate([&](double w) { return (w < v ? 1.0 : 0.0) * (av - flux_.a_prime(w)) * m(w); },
                            Interval(box.lo(), v), inner_spec, cuts);
    };
    return integrate(outer, box, outer_spec, cuts);
  }

  /// |u1-u2|^2 a''([min - |u1-u2|, max + |u1-u2|]).
  double delta_hat(double u1, double u2) const {
    const double d = std::abs(u1 - u2);
    const Interval enlarged(std::min(u1, u2) - d, std::max(u1, u2) + d);
    flux_.require(enlarged);
    if (d == 0.0) return 0.0;
    return d * d * (flux_.a_prime(enlarged.hi()) - flux_.a_prime(enlarged.lo()));
  }

  /// G_v(r) = double integral of |a'(s) - a'(t)| over [v-r, v+r]^2, reduced by
  /// Fubini to 2 int (a(v+r) - a(t) - a'(t)(v+r-t)) dt.
  double g_func(double v, double r) const {
    const Interval iv = ball(v, r);
    if (r == 0.0) return 0.0;
    const double top = iv.hi();
    const double a_top = flux_.a(top);
    auto integrand = [&](double t) { return a_top - flux_.a(t) - flux_.a_prime(t) * (top - t); };
    return 2.0 * integrate(integrand, iv, scaled(iv), flux_.kinks());
  }

  /// G_v'(r) = 2 int_{v-r}^{v+r} (|a'(v+r) - a'(t)| + |a'(v-r) - a'(t)|) dt.
  double g_prime(double v, double r) const {
    const Interval iv = ball(v, r);
    if (r == 0.0) return 0.0;
    const double hi = flux_.a_prime(iv.hi());
    const double lo = flux_.a_prime(iv.lo());
    auto integrand = [&](double t) {
      const double at = flux_.a_prime(t);
      return std::abs(hi - at) + std::abs(lo - at);
    };
    return 2.0 * integrate(integrand, iv, scaled(iv), flux_.kinks());
  }

  /// Legendre transform H_v(p) = sup_r {p r - G_v(r)} evaluated at the r*
  /// solving G_v'(r*) = p. Beyond the admissible radii r* is pinned to the
  /// largest one and the result is flagged.
  LegendreValue legendre_h(double v, double p) const {
    if (p < 0.0) throw DomainError("Legendre transform is evaluated only for p >= 0");
    flux_.require(v);
    const Interval dom = flux_.domain();
    const double r_max = std::min(v - dom.lo(), dom.hi() - v);
    LegendreValue out;
    if (p == 0.0 || r_max == 0.0) return out;
    if (p > g_prime(v, r_max)) {
      out.clipped = true;
      out.argmax = r_max;
    } else {
      out.argmax = bisect_monotone([&](double r) { return g_prime(v, r); }, p, Interval(0.0, r_max),
                                   1e-14 * (1.0 + r_max));
    }
    out.value = p * out.argmax - g_func(v, out.argmax);
    return out;
  }

  /// H_v(G_v'(r)) <= r G_v'(r) <= 8 r^2 a''([v-r,v+r]) and
  /// G_v(r) <= 4 r^2 a''([v-r,v+r]); throws InvariantViolation otherwise.
  GHBounds gh_bounds_check(double v, double r, double rel_slack = 1e-8) const {
    const Interval iv = ball(v, r);
    GHBounds b;
    if (r == 0.0) return b;
    const double gp = g_prime(v, r);
    const double mass = second_derivative_mass(flux_, iv);
    b.h_of_gprime = legendre_h(v, gp).value;
    b.r_gprime = r * gp;
    b.bound8 = 8.0 * r * r * mass;
    b.g = g_func(v, r);
    b.bound4 = 4.0 * r * r * mass;
    const auto exceeds = [&](double lhs, double rhs) { return lhs > rhs + rel_slack * std::abs(rhs); };
    if (exceeds(b.h_of_gprime, b.r_gprime) || exceeds(b.r_gprime, b.bound8) || exceeds(b.g, b.bound4)) {
      std::ostringstream os;
      os.precision(17);
      os << "convexity bound violated at (v, r) = (" << v << ", " << r << "): H(G') = " << b.h_of_gprime
         << ", rG' = " << b.r_gprime << ", 8r^2a'' = " << b.bound8 << ", G = " << b.g
         << ", 4r^2a'' = " << b.bound4;
      throw InvariantViolation(os.str());
    }
    return b;
  }

  /// Lipschitz constant |I| a''(I) of Delta on I x I (l1 metric).
  double lipschitz_constant(Interval I) const { return I.length() * second_derivative_mass(flux_, I); }

  /// Copy of this evaluator carrying an n x n lookup table over I.
  CostEvaluator with_table(Interval I, std::size_t n = 512) const {
    CostEvaluator copy = *this;
    copy.table_ = std::make_shared<const DeltaTable>(I, n, [this](double a, double b) { return delta(a, b); });
    return copy;
  }

  const DeltaTable* table() const { return table_.get(); }

  /// Delta through the table when one covers the pair, exact path otherwise.
  double delta_fast(double u1, double u2) const {
    if (u1 == u2) return 0.0;
    if (table_ && table_->range().contains(u1) && table_->range().contains(u2)) return (*table_)(u1, u2);
    return delta(u1, u2);
  }

 private:
  Interval ball(double v, double r) const {
    if (r < 0.0) throw DomainError("radius must be nonnegative");
    const Interval iv(v - r, v + r);
    flux_.require(iv);
    return iv;
  }

  // Delta scales like a'' |u1-u2|^3, so the absolute floor shrinks with the
  // cube of the relative interval length.
  QuadratureSpec scaled(const Interval& iv) const {
    QuadratureSpec s = quad_;
    const double rel = iv.length() / flux_.domain().length();
    s.abs_tol = std::max(quad_.abs_tol * std::min(1.0, rel * rel * rel), 1e-300);
    // Integrands difference a' against a reference slope, so their roundoff is
    // about eps |a'| |iv|; tolerances below the resulting integral error are
    // unattainable and only exhaust the subdivision budget.
    const double slope = std::max({std::abs(flux_.a_prime(iv.lo())), std::abs(flux_.a_prime(iv.mid())),
                                   std::abs(flux_.a_prime(iv.hi()))});
    const double len = iv.length();
    s.abs_tol = std::max(s.abs_tol, 16.0 * std::numeric_limits<double>::epsilon() * slope * len * len);
    return s;
  }

  static QuadratureSpec tighter(QuadratureSpec s) {
    s.rel_tol *= 0.1;
    s.abs_tol *= 0.1;
    return s;
  }

  FluxFunction flux_;
  QuadratureSpec quad_;
  std::shared_ptr<const DeltaTable> table_;
};

/// Samples n pairs in I (enlargements staying in the flux domain) and compares
/// min Delta / Delta-hat with C = 1 / (9 D^4).
inline LowerBoundResult lower_bound_check(const CostEvaluator& ce, Interval I, double doubling, int n,
                                          std::uint64_t seed = 42) {
  LowerBoundResult out;
  out.threshold = 1.0 / (9.0 * std::pow(doubling, 4));
  SplitMix64 rng(seed);
  const Interval dom = ce.flux().domain();
  int attempts = 0;
  while (out.samples < n && attempts < 100 * n) {
    ++attempts;
    const double u1 = rng.uniform(I.lo(), I.hi());
    const double u2 = rng.uniform(I.lo(), I.hi());
    if (u1 == u2) continue;
    const double d = std::abs(u1 - u2);
    if (std::min(u1, u2) - d < dom.lo() || std::max(u1, u2) + d > dom.hi()) continue;
    const double ratio = ce.delta(u1, u2) / ce.delta_hat(u1, u2);
    if (ratio < out.min_ratio) {
      out.min_ratio = ratio;
      out.argmin_u1 = u1;
      out.argmin_u2 = u2;
    }
    ++out.samples;
  }
  return out;
}

/// Least-squares slope of log Delta(0, d) against log d for a power flux.
inline BesovFit besov_exponent_fit(const CostEvaluator& ce, std::span<const double> d_values) {
  if (ce.flux().family() != FluxFamily::power && ce.flux().family() != FluxFamily::quadratic) {
    throw DomainError("Besov exponent fit is defined for power fluxes");
  }
  const double p = ce.flux().family() == FluxFamily::power ? ce.flux().beta() + 2.0 : 3.0;
  std::vector<double> lx, ly;
  BesovFit fit;
  fit.min_constant = std::numeric_limits<double>::infinity();
  for (double d : d_values) {
    if (!(d > 0.0 && d <= 1.0)) throw DomainError("Besov fit needs d in (0, 1]");
    const double value = ce.delta(0.0, d);
    lx.push_back(std::log(d));
    ly.push_back(std::log(value));
    fit.min_constant = std::min(fit.min_constant, value / std::pow(d, p));
  }
  fit.slope = least_squares_slope(lx, ly);
  return fit;
}

}  // namespace entrolab
