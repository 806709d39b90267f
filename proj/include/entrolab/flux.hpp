#pragma once

// Strictly convex C^1 fluxes. The second derivative a'' is only ever used as
// the Stieltjes measure of a', so interval masses are a'-differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "entrolab/errors.hpp"
#include "entrolab/numerics.hpp"

namespace entrolab {

enum class FluxFamily { quadratic, power, polynomial, exponential, table };

class FluxFunction {
 public:
  /// a(v) = v^2 / 2.
  static FluxFunction burgers(Interval domain = {-10.0, 10.0}) {
    FluxFunction f(FluxFamily::quadratic, domain);
    f.spec_ = "burgers";
    f.finish();
    return f;
  }

  /// a(v) = |v|^(beta+1), beta >= 1.
  static FluxFunction power(double beta, Interval domain = {-10.0, 10.0}) {
    if (!(beta >= 1.0)) throw DomainError("power flux needs beta >= 1");
    FluxFunction f(FluxFamily::power, domain);
    f.beta_ = beta;
    std::ostringstream os;
    os << "power:beta=" << beta;
    f.spec_ = os.str();
    f.kinks_ = {0.0};
    f.finish();
    return f;
  }

  /// a(v) = sum_k coeffs[k] v^k.
  static FluxFunction polynomial(std::vector<double> coeffs, Interval domain = {-10.0, 10.0}) {
    if (coeffs.size() < 3) throw DomainError("polynomial flux needs degree >= 2");
    FluxFunction f(FluxFamily::polynomial, domain);
    std::ostringstream os;
    os.precision(17);
    os << "poly:";
    for (std::size_t k = 0; k < coeffs.size(); ++k) os << (k ? "," : "") << coeffs[k];
    f.spec_ = os.str();
    f.coeffs_ = std::move(coeffs);
    f.finish();
    return f;
  }

  /// a(v) = exp(v).
  static FluxFunction exponential(Interval domain = {-5.0, 5.0}) {
    FluxFunction f(FluxFamily::exponential, domain);
    f.spec_ = "exp";
    f.finish();
    return f;
  }

  /// Tabulated a' at strictly increasing nodes, interpolated by a monotone
  /// (Fritsch-Butland) cubic; a is the running integral of that interpolant
  /// with a(nodes.front()) = 0.
  static FluxFunction table(std::vector<double> nodes, std::vector<double> slopes) {
    if (nodes.size() < 3 || nodes.size() != slopes.size()) {
      throw DomainError("tabulated flux needs >= 3 nodes with one a' value each");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!(nodes[i] > nodes[i - 1])) throw DomainError("tabulated flux nodes must increase");
      if (!(slopes[i] > slopes[i - 1])) throw DomainError("tabulated a' must be strictly increasing");
    }
    FluxFunction f(FluxFamily::table, Interval(nodes.front(), nodes.back()));
    f.table_ = std::make_shared<const Table>(std::move(nodes), std::move(slopes));
    f.spec_ = "table";
    f.kinks_ = f.table_->nodes;
    f.finish();
    return f;
  }

  /// a(v), unchecked.
  double a(double v) const {
    switch (family_) {
      case FluxFamily::quadratic:
        return 0.5 * v * v;
      case FluxFamily::power:
        return std::pow(std::abs(v), beta_ + 1.0);
      case FluxFamily::polynomial: {
        double acc = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 0;) acc = acc * v + coeffs_[k];
        return acc;
      }
      case FluxFamily::exponential:
        return std::exp(v);
      case FluxFamily::table:
        return table_->integral(v);
    }
    return 0.0;
  }

  /// a'(v), unchecked.
  double a_prime(double v) const {
    switch (family_) {
      case FluxFamily::quadratic:
        return v;
      case FluxFamily::power:
        return (beta_ + 1.0) * std::pow(std::abs(v), beta_) * (v < 0.0 ? -1.0 : 1.0);
      case FluxFamily::polynomial: {
        double acc = 0.0;
        for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * v + static_cast<double>(k) * coeffs_[k];
        return acc;
      }
      case FluxFamily::exponential:
        return std::exp(v);
      case FluxFamily::table:
        return table_->value(v);
    }
    return 0.0;
  }

  /// (a(v), a'(v)) with a domain check.
  std::pair<double, double> evaluate(double v) const {
    require(v);
    return {a(v), a_prime(v)};
  }

  void require(double v) const {
    if (!domain_.contains(v)) {
      std::ostringstream os;
      os << "value " << v << " outside flux domain [" << domain_.lo() << ", " << domain_.hi() << "]";
      throw DomainError(os.str());
    }
  }

  void require(const Interval& iv) const {
    if (!domain_.contains(iv)) {
      std::ostringstream os;
      os << "interval [" << iv.lo() << ", " << iv.hi() << "] escapes flux domain [" << domain_.lo() << ", "
         << domain_.hi() << "]";
      throw DomainError(os.str());
    }
  }

  Interval domain() const { return domain_; }
  FluxFamily family() const { return family_; }
  double beta() const { return beta_; }
  const std::string& spec() const { return spec_; }

  /// Points where a'' may be discontinuous or singular (quadrature breakpoints).
  const std::vector<double>& kinks() const { return kinks_; }

 private:
  struct Table {
    std::vector<double> nodes, values, derivs, cumulative;

    Table(std::vector<double> x, std::vector<double> y) : nodes(std::move(x)), values(std::move(y)) {
      const std::size_t n = nodes.size();
      std::vector<double> h(n - 1), delta(n - 1);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = nodes[i + 1] - nodes[i];
        delta[i] = (values[i + 1] - values[i]) / h[i];
      }
      derivs.assign(n, 0.0);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        derivs[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
      derivs[0] = end_slope(h[0], h[1], delta[0], delta[1]);
      derivs[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
      cumulative.assign(n, 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        cumulative[i + 1] =
            cumulative[i] + entrolab::integrate([this](double v) { return value(v); }, Interval(nodes[i], nodes[i + 1]));
      }
    }

    static double end_slope(double h0, double h1, double d0, double d1) {
      double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (d < 0.0) return 0.0;
      if (d > 3.0 * d0) return 3.0 * d0;
      return d;
    }

    std::size_t segment(double v) const {
      auto it = std::upper_bound(nodes.begin(), nodes.end(), v);
      std::size_t i = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
      return std::min(i, nodes.size() - 2);
    }

    double value(double v) const {
      const std::size_t i = segment(v);
      const double h = nodes[i + 1] - nodes[i];
      const double s = (v - nodes[i]) / h;
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * values[i] + (s3 - 2 * s2 + s) * h * derivs[i] + (-2 * s3 + 3 * s2) * values[i + 1] +
             (s3 - s2) * h * derivs[i + 1];
    }

    // Exact integral of the cubic Hermite piece from nodes[i] to v.
    double integral(double v) const {
      const std::size_t i = segment(v);
      const double h = nodes[i + 1] - nodes[i];
      const double s = (v - nodes[i]) / h;
      const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
      const double partial = (s4 / 2 - s3 + s) * values[i] + (s4 / 4 - 2 * s3 / 3 + s2 / 2) * h * derivs[i] +
                             (-s4 / 2 + s3) * values[i + 1] + (s4 / 4 - s3 / 3) * h * derivs[i + 1];
      return cumulative[i] + h * partial;
    }
  };

  FluxFunction(FluxFamily family, Interval domain) : family_(family), domain_(domain) {}

  void finish() {
    if (domain_.degenerate()) throw DomainError("flux domain must be a nondegenerate interval");
    const auto grid = linspace(domain_.lo(), domain_.hi(), 1024);
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (!(a_prime(grid[i]) > a_prime(grid[i - 1]))) {
        std::ostringstream os;
        os << "flux " << spec_ << " is not strictly convex: a' fails to increase near " << grid[i];
        throw DomainError(os.str());
      }
    }
  }

  FluxFamily family_;
  Interval domain_;
  double beta_ = 1.0;
  std::vector<double> coeffs_;
  std::shared_ptr<const Table> table_;
  std::vector<double> kinks_;
  std::string spec_;
};

/// a''(iv) = a'(hi) - a'(lo), exact.
inline double second_derivative_mass(const FluxFunction& flux, Interval iv) {
  flux.require(iv);
  return flux.a_prime(iv.hi()) - flux.a_prime(iv.lo());
}

/// Minimiser of a on iv: the zero of a' clipped to the endpoints.
inline double sonic_point(const FluxFunction& flux, Interval iv) {
  flux.require(iv);
  if (flux.a_prime(iv.lo()) >= 0.0) return iv.lo();
  if (flux.a_prime(iv.hi()) <= 0.0) return iv.hi();
  switch (flux.family()) {
    case FluxFamily::quadratic:
    case FluxFamily::power:
      return 0.0;
    default:
      return bisect_monotone([&](double v) { return flux.a_prime(v); }, 0.0, iv, 1e-15 * (1.0 + iv.length()));
  }
}

struct DoublingEstimate {
  double constant = 1.0;  ///< D-hat, a lower bound for the local doubling constant
  int samples = 0;
  Interval interval;
  double max_radius = 0.0;  ///< largest sampled radius, |I| / 2
};

/// Lower-bound estimate of the doubling constant of a'' on I.
///
/// Samples the ratio a''([x-2r, x+2r]) / a''([x-r, x+r]) at n_centers equispaced
/// centres x in I and the dyadic radii r = (|I|/2) 2^-k, k < n_radii. Samples
/// whose enlarged interval leaves the flux domain are skipped. With n_centers of
/// the form 2^m + 1 and dyadic endpoints every sampled abscissa is exact.
inline DoublingEstimate doubling_constant(const FluxFunction& flux, Interval I, int n_centers = 129,
                                          int n_radii = 20) {
  flux.require(I);
  if (n_centers < 1 || n_radii < 1) throw ConfigError("doubling estimate needs centres and radii");
  if (I.degenerate()) throw DomainError("doubling estimate needs a nondegenerate interval");
  DoublingEstimate est;
  est.interval = I;
  est.max_radius = 0.5 * I.length();
  const auto centres = linspace(I.lo(), I.hi(), static_cast<std::size_t>(n_centers));
  const Interval dom = flux.domain();
  for (double x : centres) {
    double r = est.max_radius;
    for (int k = 0; k < n_radii; ++k, r *= 0.5) {
      if (x - 2 * r < dom.lo() || x + 2 * r > dom.hi()) continue;
      const double inner = flux.a_prime(x + r) - flux.a_prime(x - r);
      const double outer = flux.a_prime(x + 2 * r) - flux.a_prime(x - 2 * r);
      if (!(inner > 0.0)) throw InvariantViolation("zero a'' mass on a nondegenerate interval");
      est.constant = std::max(est.constant, outer / inner);
      ++est.samples;
    }
  }
  return est;
}

}  // namespace entrolab
