#pragma once

namespace formtrack {

/// Parameters of the repulsive/attractive distance potential of one edge.
///
/// The potential is a function of the squared distance s:
///   k_r (1 - s/d^2)^beta              for 0 <= s < d^2
///   k_a ((s/d^2)^alpha - 1)^beta       for s >= d^2
/// It is C^2 for beta > 2; beta == 2 additionally needs k_r == alpha^2 k_a.
struct PotentialParams {
  double d = 1.0;
  double k_r = 250.0;
  double k_a = 100.0;
  double beta = 3.0;
  double alpha = 0.5;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

double sigma(const PotentialParams& p, double s);
double sigma_d1(const PotentialParams& p, double s);
double sigma_d2(const PotentialParams& p, double s);

/// Value and both derivatives in one pass.
struct SigmaEval {
  double value;
  double d1;
  double d2;
};
SigmaEval sigma_all(const PotentialParams& p, double s);

}  // namespace formtrack
