#pragma once

#include <optional>
#include <vector>

#include "formtrack/cost.hpp"

namespace formtrack {

struct ControllerGains {
  double kp_tr1 = 2.4;
  double kd_tr1 = 1.2;
  double kp_fo1 = 1.3;
  double kd_fo1 = 1.0;
  double kp_tr2 = 12.0;
  double kp_fo2 = 0.3;
  std::optional<double> U = 50.0;  // componentwise input bound

  /// Gains must be >= 0 (zero switches a term off); U > 0 when set.
  void validate() const;
};

/// Data agent i is allowed to use: its own and its neighbors' states, its
/// own centroid estimate, and the reference sample.
struct NeighborState {
  int j = 0;
  Vec p;
  Vec v;
};

struct ControlLocalView {
  int i = 0;
  Vec p_i;
  Vec v_i;
  std::vector<NeighborState> neighbors;
  Vec pc_hat;  // agent i's centroid position estimate
  Vec vc_hat;  // agent i's centroid velocity estimate
  RefPoint ref;
};

ControlLocalView control_view(int i, const SystemState& x, const Centroid& est,
                              const RefPoint& ref, const Graph& g, int M);

/// The six gradient quantities entering agent i's law.
struct AgentTerms {
  Vec g_tr1;       // grad_{p_i} l^tr1
  Vec gdot_tr1;    // its time derivative
  Vec g_fo1;       // grad_{p_i} l^fo1
  Vec gdot_fo1;    // safe time derivative
  Vec g_tr2;       // grad_{v_i} l^tr2
  Vec g_fo2;       // grad_{v_i} l^fo2
};

AgentTerms agent_terms(const ControlLocalView& view, const FormationSpec& spec,
                       const CostWeights& w);

/// (lambda_hat_i, lambda_hat_{i+n}) for one agent.
struct CostatePair {
  Vec pos;
  Vec vel;
};
CostatePair costate_terms(const AgentTerms& t, const ControllerGains& gains);

/// -R_i^{-1} lambda_hat_{i+n}, from precomputed terms.
Vec control_from_terms(int i, const AgentTerms& t, const CostWeights& w,
                       const ControllerGains& gains);

/// Unsaturated input of agent i.
Vec control_agent(const ControlLocalView& view, const FormationSpec& spec,
                  const CostWeights& w, const ControllerGains& gains);

/// Componentwise clamp to [-U, U].
Vec saturate(const Vec& u, double U);

/// Stacks per-agent terms into the 2N co-state estimate.
Vec costate_reconstruct(const std::vector<AgentTerms>& terms,
                        const ControllerGains& gains);

/// -R^{-1} B^T lambda_hat.
Vec input_from_costate(const Vec& lambda_hat, const CostWeights& w);

struct CostateApproxResidual {
  std::vector<double> tr1, fo1, tr2, fo2;  // sup-norm over agents per sample
};

/// How well -grad ~ k_d grad'' + k_p grad' holds along a logged run, time
/// derivatives by finite differences of the logged terms.
CostateApproxResidual costate_approx_residual(
    const std::vector<std::vector<AgentTerms>>& log, double dt,
    const ControllerGains& gains);

}  // namespace formtrack
