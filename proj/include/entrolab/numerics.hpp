#pragma once

// Adaptive Gauss-Kronrod quadrature, monotone bisection and least-squares
// helpers shared by every other module.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "entrolab/errors.hpp"

namespace entrolab {

/// Closed interval [lo, hi] with lo <= hi.
class Interval {
 public:
  constexpr Interval() = default;
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {
      std::ostringstream os;
      os << "interval requires lo <= hi, got [" << lo << ", " << hi << "]";
      throw DomainError(os.str());
    }
  }

  /// The segment between two points regardless of their order.
  static Interval hull(double a, double b) { return {std::min(a, b), std::max(a, b)}; }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  bool degenerate() const { return lo_ == hi_; }
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains(const Interval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

struct QuadratureSpec {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  int max_depth = 40;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("quadrature tolerances must be positive");
    if (max_depth < 1) throw ConfigError("quadrature depth must be >= 1");
  }
};

/// Raised when adaptive refinement runs out of depth before meeting tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(double partial, double error, Interval worst)
      : Error(message(partial, error, worst)), partial_(partial), error_(error), worst_(worst) {}

  double partial_estimate() const { return partial_; }
  double error_estimate() const { return error_; }
  Interval worst_subinterval() const { return worst_; }

 private:
  static std::string message(double partial, double error, Interval worst) {
    std::ostringstream os;
    os.precision(17);
    os << "quadrature depth exhausted: partial estimate " << partial << " (error " << error
       << "), worst subinterval [" << worst.lo() << ", " << worst.hi() << "]";
    return os.str();
  }
  double partial_;
  double error_;
  Interval worst_;
};

/// Raised by bisect_monotone when the target is not bracketed.
class BracketError : public DomainError {
 public:
  BracketError(double g_lo, double g_hi, double target)
      : DomainError(message(g_lo, g_hi, target)), g_lo_(g_lo), g_hi_(g_hi), target_(target) {}

  double g_lo() const { return g_lo_; }
  double g_hi() const { return g_hi_; }
  double target() const { return target_; }

 private:
  static std::string message(double g_lo, double g_hi, double target) {
    std::ostringstream os;
    os.precision(17);
    os << "target " << target << " not bracketed: g(lo) = " << g_lo << ", g(hi) = " << g_hi;
    return os.str();
  }
  double g_lo_, g_hi_, target_;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo, hi, value, error;
  int depth;
  friend bool operator<(const Panel& a, const Panel& b) { return a.error < b.error; }
};

template <class F>
Panel gauss_kronrod_15(const F& f, double lo, double hi, int depth) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half), depth};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7,15) quadrature of f over iv.
///
/// Interior breakpoints split the domain before refinement starts, which is how
/// callers hand over known kink locations. A kink lying between a panel edge
/// and its outermost node is invisible to the error estimate, so kinks must be
/// declared. Throws QuadratureError when the worst panel would have to be
/// refined beyond spec.max_depth.
template <class F>
double integrate(const F& f, Interval iv, const QuadratureSpec& spec = {},
                 std::span<const double> breakpoints = {}) {
  if (iv.degenerate()) return 0.0;

  std::vector<double> cuts{iv.lo()};
  for (double b : breakpoints) {
    if (b > iv.lo() && b < iv.hi()) cuts.push_back(b);
  }
  cuts.push_back(iv.hi());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Panel> panels;
  double total = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto p = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1], 0);
    total += p.value;
    error += p.error;
    panels.push(p);
  }

  while (error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    const detail::Panel worst = panels.top();
    if (worst.depth >= spec.max_depth) {
      throw QuadratureError(total, error, Interval(worst.lo, worst.hi));
    }
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    auto left = detail::gauss_kronrod_15(f, worst.lo, mid, worst.depth + 1);
    auto right = detail::gauss_kronrod_15(f, mid, worst.hi, worst.depth + 1);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    // Recompute from scratch now and then; incremental updates drift.
    if (panels.size() % 64 == 0) {
      auto copy = panels;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return total;
}

/// Bisection for g(r) = target with g nondecreasing on iv.
///
/// Returns the midpoint of a final bracket of width <= tol (or of two adjacent
/// doubles when tol is below the local spacing).
template <class G>
double bisect_monotone(const G& g, double target, Interval iv, double tol) {
  double lo = iv.lo();
  double hi = iv.hi();
  const double g_lo = g(lo);
  const double g_hi = g(hi);
  if (!(g_lo <= target && target <= g_hi)) throw BracketError(g_lo, g_hi, target);
  if (g_lo == target) return lo;
  if (g_hi == target) return hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// n equispaced points from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

/// Ordinary least-squares slope of y against x.
inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw DomainError("slope fit needs distinct abscissae");
  return sxy / sxx;
}

}  // namespace entrolab
