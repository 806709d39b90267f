#pragma once

// Tensor bump psi(t,x) = phi((t-tc)/rt) phi((x-xc)/rx), phi(s) = (1-s^2)^4.

#include <algorithm>
#include <cmath>

#include "entrolab/errors.hpp"
#include "entrolab/numerics.hpp"

namespace entrolab {

namespace bump {

inline double phi(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  const double w2 = w * w;
  return w2 * w2;
}

inline double dphi(double s) {
  if (s <= -1.0 || s >= 1.0) return 0.0;
  const double w = 1.0 - s * s;
  return -8.0 * s * w * w * w;
}

/// Antiderivative of phi, clamped so that it is constant outside [-1, 1].
inline double Phi(double s) {
  s = std::clamp(s, -1.0, 1.0);
  const double s2 = s * s;
  return s * (1.0 + s2 * (-4.0 / 3.0 + s2 * (6.0 / 5.0 + s2 * (-4.0 / 7.0 + s2 / 9.0))));
}

/// int_{-1}^{1} phi = 256/315.
inline constexpr double kMass = 256.0 / 315.0;

}  // namespace bump

class TestFunction {
 public:
  TestFunction(double tc, double xc, double rt, double rx) : tc_(tc), xc_(xc), rt_(rt), rx_(rx) {
    if (!(rt > 0.0) || !(rx > 0.0)) throw DomainError("test function radii must be positive");
  }

  double tc() const { return tc_; }
  double xc() const { return xc_; }
  double rt() const { return rt_; }
  double rx() const { return rx_; }

  double operator()(double t, double x) const { return bump::phi(st(t)) * bump::phi(sx(x)); }
  double dt(double t, double x) const { return bump::dphi(st(t)) / rt_ * bump::phi(sx(x)); }
  double dx(double t, double x) const { return bump::phi(st(t)) * bump::dphi(sx(x)) / rx_; }

  /// Support rectangle [tc - rt, tc + rt] x [xc - rx, xc + rx].
  Interval t_support() const { return {tc_ - rt_, tc_ + rt_}; }
  Interval x_support() const { return {xc_ - rx_, xc_ + rx_}; }

  double sup_norm() const { return 1.0; }

  /// Exact integrals of the time factor, its derivative, and likewise in x.
  double t_factor_integral(double a, double b) const { return rt_ * (bump::Phi(st(b)) - bump::Phi(st(a))); }
  double t_factor_jump(double a, double b) const { return bump::phi(st(b)) - bump::phi(st(a)); }
  double x_factor_integral(double a, double b) const { return rx_ * (bump::Phi(sx(b)) - bump::Phi(sx(a))); }
  double x_factor_jump(double a, double b) const { return bump::phi(sx(b)) - bump::phi(sx(a)); }

  /// int psi(t, x) dt for fixed x.
  double time_integral_at(double x) const { return rt_ * bump::kMass * bump::phi(sx(x)); }

 private:
  double st(double t) const { return (t - tc_) / rt_; }
  double sx(double x) const { return (x - xc_) / rx_; }

  double tc_, xc_, rt_, rx_;
};

}  // namespace entrolab
