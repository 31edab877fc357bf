#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "formtrack/cost.hpp"
#include "formtrack/dynamics.hpp"

namespace formtrack {

struct ProntoConfig {
  double k_p = 9.0;           // omega_n^2 with omega_n = 3 rad/s
  double k_d = 4.2;           // 2 xi omega_n with xi = 0.7
  int max_iter = 80;
  double descent_tol = 1e-6;  // on the L2 norm of the (z, v) direction
  double armijo_alpha = 0.4;
  double armijo_beta = 0.7;
  int max_backtracks = 40;

  void validate() const;
};

/// Maps a (possibly infeasible) curve (alpha, mu) onto the trajectory
/// manifold by simulating u_k = mu_k + K (alpha_k - x_k) from alpha_0.
Trajectory project(const Trajectory& curve, const ProntoConfig& cfg);

/// Search direction: state/input perturbations on the grid plus the
/// predicted first-order change of the cost along them.
struct Direction {
  std::vector<Vec> z;   // K+1 state perturbations, z_0 = 0
  std::vector<Vec> v;   // K+1 input perturbations, last one held
  double dtheta = 0.0;  // Dh(xi) . (z, v), <= 0
  double norm = 0.0;    // sqrt(dt * sum_k (|z_k|^2 + |v_k|^2))
};

/// Solves the discrete-time LQ subproblem (backward Riccati sweep, forward
/// rollout) around a feasible trajectory. Throws NumericalError naming the
/// grid index where the Riccati recursion loses positive definiteness.
Direction search_direction(const Trajectory& traj, const ReferencePath& ref,
                           const FormationSpec& spec, const CostWeights& w);

struct LineSearchResult {
  double gamma = 0.0;
  Trajectory candidate;
  double cost = 0.0;
  int backtracks = 0;
};

/// Backtracking on h(project(xi + gamma * dir)) with the Armijo condition.
/// `cost_fn` evaluates h on a projected trajectory.
template <class CostFn>
LineSearchResult armijo_search(const Trajectory& traj, double cost_now,
                               const Direction& dir, const ProntoConfig& cfg,
                               CostFn&& cost_fn);

/// Adds gamma * direction to a trajectory (not projected).
Trajectory perturb(const Trajectory& traj, const Direction& dir, double gamma);

enum class Termination { kFlat, kMaxIter, kRoundoff };
std::string to_string(Termination t);

struct ProntoReport {
  int iterations = 0;
  std::vector<double> cost;        // cost of the iterate entering iteration k
  std::vector<double> dtheta;
  std::vector<double> direction_norm;
  std::vector<double> gamma;       // accepted step, 0 on the terminating one
  Trajectory trajectory;
  Termination reason = Termination::kMaxIter;
};

/// Initial guess used by optimize: hold x0 with zero input, then project.
Trajectory initial_guess(const SystemState& x0, int steps, double dt,
                         const ProntoConfig& cfg);

ProntoReport optimize(const SystemState& x0, const ReferencePath& ref,
                      const FormationSpec& spec, const CostWeights& w,
                      const ProntoConfig& cfg, double dt);

// ---------------------------------------------------------------------------

template <class CostFn>
LineSearchResult armijo_search(const Trajectory& traj, double cost_now,
                               const Direction& dir, const ProntoConfig& cfg,
                               CostFn&& cost_fn) {
  if (!(dir.dtheta < 0.0)) {
    throw NumericalError("armijo_search: direction is not a descent direction");
  }
  double gamma = 1.0;
  for (int k = 0; k <= cfg.max_backtracks; ++k) {
    Trajectory cand = project(perturb(traj, dir, gamma), cfg);
    const double c = cost_fn(cand);
    if (std::isfinite(c) &&
        c <= cost_now + cfg.armijo_alpha * gamma * dir.dtheta) {
      return {gamma, std::move(cand), c, k};
    }
    gamma *= cfg.armijo_beta;
  }
  throw NumericalError("armijo_search: no sufficient decrease after " +
                       std::to_string(cfg.max_backtracks) + " backtracks");
}

}  // namespace formtrack
