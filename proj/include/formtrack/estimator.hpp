#pragma once

#include <vector>

#include "formtrack/dynamics.hpp"
#include "formtrack/topology.hpp"

namespace formtrack {

struct EstimatorGains {
  double k_py = 180.0;
  double k_dy = 170.0;

  void validate() const;
};

/// Agent i's estimate of every agent's position and velocity.
struct EstimatorBlock {
  Vec p_hat;  // N
  Vec v_hat;  // N
};

struct EstimatorState {
  std::vector<EstimatorBlock> blocks;  // one per agent

  /// Agent i's centroid estimates (block means).
  Centroid centroid_estimate(int i, int n, int M) const;
  bool finite() const;
};

enum class InitRule {
  kDegreeWeighted,  // weights 1 + |N_k| over the closed neighborhood
  kUniform,         // plain average over the closed neighborhood
};

EstimatorState init_estimators(const SystemState& x0, const Graph& g, int M,
                               InitRule rule = InitRule::kDegreeWeighted);

/// Everything agent i may read when evaluating its estimator right-hand side:
/// its own estimator block, its neighbors' blocks, its own true state and the
/// inputs of its closed neighborhood.
struct EstimatorLocalView {
  int i = 0;
  int M = 0;
  const EstimatorBlock* own = nullptr;
  std::vector<const EstimatorBlock*> neighbor_blocks;
  Vec p_i;
  Vec v_i;
  std::vector<std::pair<int, Vec>> inputs;  // (j, u_j), j in closed nbhd
};

EstimatorLocalView estimator_view(int i, const EstimatorState& est,
                                  const SystemState& x, const Vec& u,
                                  const Graph& g, int M);

/// d/dt of agent i's block, from local data only.
EstimatorBlock agent_estimator_derivative(const EstimatorLocalView& view,
                                          const EstimatorGains& gains);

EstimatorState estimator_derivative(const EstimatorState& est,
                                    const SystemState& x, const Vec& u,
                                    const Graph& g, int M,
                                    const EstimatorGains& gains,
                                    bool parallel = false);

/// One RK4 step. Inputs are held; the true state is taken on its exact
/// zero-order-hold flow at the stage times. Writes a warning to stderr once
/// per process when dt * k_py > 0.05.
EstimatorState step_estimators(const EstimatorState& est, const SystemState& x,
                               const Vec& u, const Graph& g, int M,
                               const EstimatorGains& gains, double dt,
                               bool parallel = false);

/// Steady-state bound on sum_i |e_pc^i|^2 + |e_vc^i|^2 under inputs u.
double centroid_error_bound(const Graph& g, int M, const EstimatorGains& gains,
                            const Vec& u);

/// sum_i |e_pc^i|^2 + |e_vc^i|^2 against the true state.
double centroid_error_sq(const EstimatorState& est, const SystemState& x,
                         int M);

}  // namespace formtrack
