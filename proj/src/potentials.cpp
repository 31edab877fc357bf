#include "formtrack/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "formtrack/types.hpp"

namespace formtrack {

void PotentialParams::validate() const {
  if (!(d > 0.0) || !std::isfinite(d)) {
    throw ConfigError("potential: desired distance must be positive, got " +
                      std::to_string(d));
  }
  if (k_r < 0.0 || k_a < 0.0) {
    throw ConfigError("potential: k_r and k_a must be nonnegative");
  }
  if (!(beta >= 2.0)) {
    throw ConfigError("potential: beta must be >= 2, got " +
                      std::to_string(beta));
  }
  if (!(alpha > 0.0)) {
    throw ConfigError("potential: alpha must be positive, got " +
                      std::to_string(alpha));
  }
  if (beta == 2.0) {
    const double target = alpha * alpha * k_a;
    const double scale = std::max({std::abs(k_r), std::abs(target), 1e-300});
    if (std::abs(k_r - target) > 1e-12 * scale) {
      throw ConfigError(
          "potential: beta == 2 requires k_r == alpha^2 * k_a for C^2 "
          "continuity");
    }
  }
}

SigmaEval sigma_all(const PotentialParams& p, double s) {
  if (!(s >= 0.0)) {
    throw std::domain_error("potential: squared distance must be >= 0, got " +
                            std::to_string(s));
  }
  const double d2 = p.d * p.d;
  const double r = s / d2;
  const double b = p.beta;

  if (r < 1.0) {
    const double w = 1.0 - r;
    return {p.k_r * std::pow(w, b),
            -b * p.k_r / d2 * std::pow(w, b - 1.0),
            b * (b - 1.0) * p.k_r / (d2 * d2) * std::pow(w, b - 2.0)};
  }

  // Attractive branch, also taken at s == d^2 exactly.
  const double a = p.alpha;
  const double ra = std::pow(r, a);
  const double w = ra - 1.0;
  const double dw = a * std::pow(r, a - 1.0);         // d w / d r
  const double ddw = a * (a - 1.0) * std::pow(r, a - 2.0);
  const double wb1 = std::pow(w, b - 1.0);
  const double wb2 = std::pow(w, b - 2.0);
  return {p.k_a * std::pow(w, b),
          p.k_a * b * wb1 * dw / d2,
          p.k_a * b * ((b - 1.0) * wb2 * dw * dw + wb1 * ddw) / (d2 * d2)};
}

double sigma(const PotentialParams& p, double s) { return sigma_all(p, s).value; }
double sigma_d1(const PotentialParams& p, double s) { return sigma_all(p, s).d1; }
double sigma_d2(const PotentialParams& p, double s) { return sigma_all(p, s).d2; }

}  // namespace formtrack
