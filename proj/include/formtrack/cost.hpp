#pragma once

#include <map>
#include <vector>

#include "formtrack/dynamics.hpp"
#include "formtrack/topology.hpp"

namespace formtrack {

/// Weights of the formation-tracking cost. Per-agent blocks are M x M.
struct CostWeights {
  std::vector<Mat> Q_c;      // centroid position weight per agent
  std::vector<Mat> Q_cdot;   // centroid velocity weight per agent
  std::vector<Mat> R;        // input weight per agent, positive definite
  double k_F = 2.0;
  double k_A = 0.25;
  std::map<Edge, Mat> Theta;  // velocity-mismatch weight per edge

  /// Q_i = Diag(q_p I, q_d I), R_i = r I, Theta_ij = theta I on every edge.
  static CostWeights uniform(const Graph& g, int M, double q_p, double q_d,
                             double r, double k_F, double k_A,
                             double theta = 1.0);

  /// Checks dimensions, R_i > 0, Q and Theta PSD, k_F, k_A >= 0.
  void validate(const Graph& g, int M) const;

  Mat Q_c_total() const;     // sum_i Q_c,i
  Mat Q_cdot_total() const;  // sum_i Q_cdot,i
  Mat Q_total() const;       // Diag(Q_c_total, Q_cdot_total), 2M x 2M
  Mat R_block() const;       // Diag(R_1..R_n), N x N
  const Mat& theta(int i, int j) const { return Theta.at(Edge(i, j)); }
};

/// Desired centroid position/velocity sampled on the simulation grid.
struct ReferencePath {
  std::vector<Vec> p;
  std::vector<Vec> v;

  std::size_t size() const { return p.size(); }
};

/// One reference sample.
struct RefPoint {
  Vec p;
  Vec v;
};

inline RefPoint ref_at(const ReferencePath& r, std::size_t k) {
  return {r.p[k], r.v[k]};
}

double cost_tracking(const SystemState& x, const RefPoint& ref,
                     const CostWeights& w);
double cost_input(const Vec& u, const CostWeights& w);
double cost_fo1(const Vec& positions, const FormationSpec& spec,
                const CostWeights& w);
double cost_fo2(const Vec& velocities, const FormationSpec& spec,
                const CostWeights& w);

/// l^st = tracking + fo1 + fo2 (also the terminal cost m).
double cost_state(const SystemState& x, const RefPoint& ref,
                  const FormationSpec& spec, const CostWeights& w);

/// Trapezoidal quadrature of the state cost over the grid, exact
/// (left-Riemann) integral of the piecewise-constant input cost, plus the
/// terminal cost at T.
double cost_total(const Trajectory& traj, const ReferencePath& ref,
                  const FormationSpec& spec, const CostWeights& w);

/// Gradient of the formation potential w.r.t. stacked positions (N-vector).
Vec grad_fo1(const Vec& positions, const FormationSpec& spec,
             const CostWeights& w);
/// Gradient of the velocity-formation term w.r.t. stacked velocities.
Vec grad_fo2(const Vec& velocities, const FormationSpec& spec,
             const CostWeights& w);

/// a = dl^st/dx, 2N-vector.
Vec grad_state(const SystemState& x, const RefPoint& ref,
               const FormationSpec& spec, const CostWeights& w);
/// b = R u.
Vec grad_input(const Vec& u, const CostWeights& w);

/// Off-diagonal M x M block for edge (i,j) of the fo1 Hessian. With safe set,
/// the sigma' I term is dropped whenever sigma' < 0.
Mat hess_fo1_block(const Vec& e_ij, const PotentialParams& p, double k_F,
                   bool safe);

Mat hess_fo1(const Vec& positions, const FormationSpec& spec,
             const CostWeights& w, bool safe);
Mat hess_fo2(const FormationSpec& spec, const CostWeights& w);

/// Exact (safe == false) or safe Hessian of l^st w.r.t. x, 2N x 2N.
Mat hess_state(const SystemState& x, const FormationSpec& spec,
               const CostWeights& w, bool safe);

/// Local quadratic model used for the search direction at one sample.
struct LQTerms {
  Vec a;      // l_x
  Vec b;      // l_u
  Mat Qo;     // safe l_xx
  Mat So;     // l_xu, identically zero
  Mat Ro;     // l_uu = R
};

LQTerms lq_quantities(const SystemState& x, const Vec& u, const RefPoint& ref,
                      const FormationSpec& spec, const CostWeights& w);

/// Terminal terms r1 = m_x and P1 = safe m_xx.
struct TerminalTerms {
  Vec r1;
  Mat P1;
};
TerminalTerms terminal_quantities(const SystemState& x, const RefPoint& ref,
                                  const FormationSpec& spec,
                                  const CostWeights& w);

}  // namespace formtrack
