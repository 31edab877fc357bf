#pragma once

#include <vector>

#include "formtrack/types.hpp"

namespace formtrack {

/// Stacked positions and velocities of all agents at one instant.
/// Layout is agent-major, coordinate-minor: p = (p_1x, p_1y, ..., p_nz).
struct SystemState {
  Vec p;
  Vec v;
  double t = 0.0;

  Vec stacked() const;
  static SystemState from_stacked(const Vec& x, double t = 0.0);
  bool finite() const { return p.allFinite() && v.allFinite(); }
};

/// Time-sampled state/input curve on a uniform grid t_k = k * dt, k = 0..K.
/// inputs[k] acts on [t_k, t_k+1); the final input is held.
struct Trajectory {
  double dt = 0.0;
  std::vector<SystemState> states;
  std::vector<Vec> inputs;

  std::size_t size() const { return states.size(); }
  int steps() const { return static_cast<int>(states.size()) - 1; }
  double horizon() const { return dt * steps(); }
};

struct SystemMatrices {
  Mat A;  // 2N x 2N
  Mat B;  // 2N x N
  Mat C;  // 2M x 2N
};

SystemMatrices system_matrices(int n, int M);

/// Exact zero-order-hold matrices of the double integrator for step dt.
struct DiscreteSystem {
  Mat Ad;
  Mat Bd;
};
DiscreteSystem discretize(int n, int M, double dt);

/// Exact ZOH step under constant input u.
SystemState step_exact(const SystemState& x, const Vec& u, double dt);

struct Centroid {
  Vec p;
  Vec v;
};
Centroid centroid(const SystemState& x, int n, int M);

/// Mean of the per-agent M-blocks of a stacked N-vector.
Vec block_mean(const Vec& stacked, int n, int M);

}  // namespace formtrack
