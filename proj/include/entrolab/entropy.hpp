#pragma once

// Entropy / entropy-flux pairs and the jump entropy cost c_eta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "entrolab/cost.hpp"
#include "entrolab/errors.hpp"
#include "entrolab/flux.hpp"
#include "entrolab/numerics.hpp"
#include "entrolab/rng.hpp"

namespace entrolab {

enum class EntropyFamily { quadratic_half, polynomial, custom };

/// A C^2 entropy eta with its first two derivatives.
class Entropy {
 public:
  using Fn = std::function<double(double)>;

  /// eta(v) = v^2 / 2.
  static Entropy quadratic() {
    Entropy e(EntropyFamily::quadratic_half);
    e.coeffs_ = {0.0, 0.0, 0.5};
    e.spec_ = "quadratic";
    return e;
  }

  /// eta(v) = sum_k coeffs[k] v^k.
  static Entropy polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw DomainError("polynomial entropy needs at least one coefficient");
    Entropy e(EntropyFamily::polynomial);
    std::ostringstream os;
    os.precision(17);
    os << "poly:";
    for (std::size_t k = 0; k < coeffs.size(); ++k) os << (k ? "," : "") << coeffs[k];
    e.spec_ = os.str();
    e.coeffs_ = std::move(coeffs);
    return e;
  }

  static Entropy custom(Fn eta, Fn d1, Fn d2, std::string name = "custom") {
    Entropy e(EntropyFamily::custom);
    e.eta_ = std::move(eta);
    e.d1_ = std::move(d1);
    e.d2_ = std::move(d2);
    e.spec_ = std::move(name);
    return e;
  }

  double value(double v) const { return custom() ? eta_(v) : horner(v, 0); }
  double d1(double v) const { return custom() ? d1_(v) : horner(v, 1); }
  double d2(double v) const { return custom() ? d2_(v) : horner(v, 2); }

  EntropyFamily family() const { return family_; }
  const std::string& spec() const { return spec_; }

  /// sup |eta''| over iv from 513 equispaced samples (endpoints included).
  double sup_abs_d2(Interval iv) const {
    double s = std::max(std::abs(d2(iv.lo())), std::abs(d2(iv.hi())));
    for (double v : linspace(iv.lo(), iv.hi(), 513)) s = std::max(s, std::abs(d2(v)));
    return s;
  }

 private:
  explicit Entropy(EntropyFamily family) : family_(family) {}

  bool custom() const { return family_ == EntropyFamily::custom; }

  // order-th derivative of the coefficient polynomial
  double horner(double v, int order) const {
    double acc = 0.0;
    for (std::size_t k = coeffs_.size(); k-- > static_cast<std::size_t>(order);) {
      double factor = 1.0;
      for (int j = 0; j < order; ++j) factor *= static_cast<double>(k - j);
      acc = acc * v + factor * coeffs_[k];
    }
    return acc;
  }

  EntropyFamily family_;
  std::vector<double> coeffs_;
  Fn eta_, d1_, d2_;
  std::string spec_;
};

/// q(u) = int_{u_ref}^u eta'(t) a'(t) dt by direct quadrature.
inline double entropy_flux(const Entropy& entropy, const FluxFunction& flux, double u, double u_ref = 0.0) {
  flux.require(u);
  flux.require(u_ref);
  const double sign = u >= u_ref ? 1.0 : -1.0;
  return sign * integrate([&](double t) { return entropy.d1(t) * flux.a_prime(t); }, Interval::hull(u_ref, u),
                          QuadratureSpec{}, flux.kinks());
}

/// Cached q on a dense grid over the flux domain. Each cell is a cubic Hermite
/// piece through exact nodal values and slopes q' = eta' a'.
class EntropyFluxTable {
 public:
  EntropyFluxTable(const Entropy& entropy, const FluxFunction& flux, double u_ref = 0.0, std::size_t n = 4096)
      : u_ref_(u_ref), nodes_(linspace(flux.domain().lo(), flux.domain().hi(), n)) {
    flux.require(u_ref);
    if (n < 2) throw ConfigError("entropy flux table needs >= 2 nodes");
    slopes_.resize(n);
    values_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) slopes_[i] = entropy.d1(nodes_[i]) * flux.a_prime(nodes_[i]);
    auto qprime = [&](double t) { return entropy.d1(t) * flux.a_prime(t); };
    auto piece = [&](double lo, double hi) { return integrate(qprime, Interval(lo, hi), {}, flux.kinks()); };
    // march outward from u_ref so values near the reference carry no offset error
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u_ref);
    std::size_t right = std::min(static_cast<std::size_t>(it - nodes_.begin()), n - 1);
    std::size_t left = right - 1;
    values_[left] = -piece(nodes_[left], u_ref);
    values_[right] = piece(u_ref, nodes_[right]);
    for (std::size_t i = right; i + 1 < n; ++i) values_[i + 1] = values_[i] + piece(nodes_[i], nodes_[i + 1]);
    for (std::size_t i = left; i-- > 0;) values_[i] = values_[i + 1] - piece(nodes_[i], nodes_[i + 1]);
  }

  double u_ref() const { return u_ref_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

  double operator()(double u) const {
    if (u < nodes_.front() || u > nodes_.back()) throw DomainError("entropy flux table queried outside its grid");
    return interpolate(u);
  }

 private:
  double interpolate(double u) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
    std::size_t i = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    i = std::min(i, nodes_.size() - 2);
    const double h = nodes_[i + 1] - nodes_[i];
    const double s = (u - nodes_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * values_[i] + (s3 - 2 * s2 + s) * h * slopes_[i] +
           (-2 * s3 + 3 * s2) * values_[i + 1] + (s3 - s2) * h * slopes_[i + 1];
  }

  double u_ref_;
  std::vector<double> nodes_, values_, slopes_;
};

/// c_eta(u+, u-) = q(u+) - q(u-) - [(a(u+) - a(u-)) / (u+ - u-)] (eta(u+) - eta(u-)).
///
/// c_eta is unchanged when affine functions are added to eta or to a, so the
/// evaluation subtracts the tangents at the midpoint before differencing; this
/// removes the cancellation for nearby states. Zero on the diagonal.
inline double jump_cost(const Entropy& entropy, const FluxFunction& flux, double u_plus, double u_minus) {
  flux.require(u_plus);
  flux.require(u_minus);
  if (u_plus == u_minus) return 0.0;
  const double m = 0.5 * (u_plus + u_minus);
  const double e1m = entropy.d1(m);
  const double a1m = flux.a_prime(m);
  const Interval iv = Interval::hull(u_minus, u_plus);
  const double orient = u_plus > u_minus ? 1.0 : -1.0;
  // q(u+) - q(u-) for the shifted pair
  const double dq = orient * integrate([&](double t) { return (entropy.d1(t) - e1m) * (flux.a_prime(t) - a1m); },
                                       iv, QuadratureSpec{1e-12, 1e-300, 40}, flux.kinks());
  const double du = u_plus - u_minus;
  const double slope = (flux.a(u_plus) - flux.a(u_minus)) / du - a1m;
  const double deta = entropy.value(u_plus) - entropy.value(u_minus) - e1m * du;
  return dq - slope * deta;
}

/// c_eta = (1 / (u+ - u-)) int_[u-, u+] w_eta(tau) a''(d tau), with
/// w_eta(tau) = int eta'(t) (1_{t>tau}(tau - u-) - 1_{t<tau}(u+ - tau)) dt.
///
/// The Stieltjes integral is taken in the variable sigma = a'(tau), where a''
/// becomes Lebesgue measure; tau(sigma) comes from bisection on a'.
inline double jump_cost_oracle(const Entropy& entropy, const FluxFunction& flux, double u_plus, double u_minus) {
  flux.require(u_plus);
  flux.require(u_minus);
  if (u_plus == u_minus) throw DomainError("jump cost oracle needs distinct states");
  if (u_plus < u_minus) return -jump_cost_oracle(entropy, flux, u_minus, u_plus);

  const Interval states(u_minus, u_plus);
  const QuadratureSpec inner{1e-13, 1e-300, 40};
  auto w = [&](double tau) {
    const double cut[] = {tau};
    return integrate(
        [&](double t) { return entropy.d1(t) * (t > tau ? (tau - u_minus) : (t < tau ? -(u_plus - tau) : 0.0)); },
        states, inner, cut);
  };
  auto inverse_slope = [&](double sigma) {
    return bisect_monotone([&](double v) { return flux.a_prime(v); }, sigma, states, 0.0);
  };
  const Interval sigmas(flux.a_prime(u_minus), flux.a_prime(u_plus));
  std::vector<double> cuts;
  for (double k : flux.kinks()) {
    if (states.contains(k)) cuts.push_back(flux.a_prime(k));
  }
  const double stieltjes = integrate([&](double s) { return w(inverse_slope(s)); }, sigmas,
                                     QuadratureSpec{1e-11, 1e-300, 40}, cuts);
  return stieltjes / (u_plus - u_minus);
}

struct Lemma1Result {
  double cost = 0.0;   ///< c_eta(u+, u-)
  double bound = 0.0;  ///< (1/2) sup |eta''| Delta(u+, u-)
  double ratio = 0.0;  ///< |cost| / bound, 0 when both vanish
};

/// |c_eta(u+,u-)| <= (1/2) sup_[u-,u+] |eta''| Delta(u+,u-).
inline Lemma1Result lemma1_check(const Entropy& entropy, const CostEvaluator& ce, double u_plus, double u_minus) {
  Lemma1Result r;
  r.cost = jump_cost(entropy, ce.flux(), u_plus, u_minus);
  r.bound = 0.5 * entropy.sup_abs_d2(Interval::hull(u_plus, u_minus)) * ce.delta(u_plus, u_minus);
  // a cost at roundoff level counts as zero
  const double noise = 1e-14 * (std::abs(entropy.value(u_plus)) + std::abs(entropy.value(u_minus)) + 1.0);
  if (r.bound == 0.0) {
    if (std::abs(r.cost) > noise) {
      std::ostringstream os;
      os.precision(17);
      os << "jump cost " << r.cost << " with zero bound at (u+, u-) = (" << u_plus << ", " << u_minus << ")";
      throw InvariantViolation(os.str());
    }
    r.ratio = 0.0;
    return r;
  }
  r.ratio = std::abs(r.cost) / r.bound;
  return r;
}

struct Lemma1Campaign {
  double max_ratio = 0.0;
  double worst_u_plus = 0.0, worst_u_minus = 0.0;
  int samples = 0;
};

/// Random pairs in I, reporting the largest observed jump-cost ratio.
inline Lemma1Campaign lemma1_campaign(const Entropy& entropy, const CostEvaluator& ce, Interval I, int n,
                                      SplitMix64& rng) {
  Lemma1Campaign out;
  for (int k = 0; k < n; ++k) {
    const double up = rng.uniform(I.lo(), I.hi());
    const double um = rng.uniform(I.lo(), I.hi());
    const auto r = lemma1_check(entropy, ce, up, um);
    if (r.ratio > out.max_ratio) {
      out.max_ratio = r.ratio;
      out.worst_u_plus = up;
      out.worst_u_minus = um;
    }
    ++out.samples;
  }
  return out;
}

}  // namespace entrolab
