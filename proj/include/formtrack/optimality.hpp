#pragma once

#include <vector>

#include "formtrack/cost.hpp"

namespace formtrack {

/// Co-state on the trajectory grid, one 2N-vector per sample.
struct CostateCurve {
  double dt = 0.0;
  std::vector<Vec> lambda;
  std::vector<Vec> lambda_dot;  // -(A^T lambda + grad l^st) at each sample
};

double hamiltonian(const SystemState& x, const Vec& lambda, const Vec& u,
                   const RefPoint& ref, const FormationSpec& spec,
                   const CostWeights& w);

/// RK4 integration of -lambda_dot = A^T lambda + grad_x l^st backwards from
/// lambda(T) = grad_x m(x(T)), the forcing linearly interpolated between
/// grid samples.
CostateCurve costate_backward(const Trajectory& traj, const ReferencePath& ref,
                              const FormationSpec& spec, const CostWeights& w);

/// Same integration with explicit forcing samples and terminal value; the
/// map (terminal, forcing) -> curve is linear.
CostateCurve costate_backward(const std::vector<Vec>& forcing,
                              const Vec& terminal, int n, int M, double dt);

struct StationarityReport {
  std::vector<double> residual;  // one per input interval [t_k, t_k+1)
  double sup = 0.0;
};

/// |R u_k + B^T lambda_bar_k|_inf where lambda_bar_k is the interval average
/// of the co-state (exact for the cubic Hermite interpolant through the
/// samples), which is what a piecewise-constant input can match.
StationarityReport stationarity_residual(const Trajectory& traj,
                                         const CostateCurve& costate,
                                         const CostWeights& w);

struct SufficiencyReport {
  std::vector<double> min_eig;  // of the exact H_xx l^st, per sample
  std::vector<bool> sufficient;
  double worst = 0.0;
  bool R_psd = true;
};

SufficiencyReport sufficiency_check(const Trajectory& traj,
                                    const FormationSpec& spec,
                                    const CostWeights& w,
                                    double tol = 1e-9);

}  // namespace formtrack
