#include "formtrack/optimality.hpp"

#include <algorithm>
#include <limits>

namespace formtrack {

namespace {

// A^T lambda for the double integrator: the position co-state feeds the
// velocity block.
Vec adjoint_apply(const Vec& lambda) {
  const Eigen::Index N = lambda.size() / 2;
  Vec out = Vec::Zero(lambda.size());
  out.tail(N) = lambda.head(N);
  return out;
}

}  // namespace

double hamiltonian(const SystemState& x, const Vec& lambda, const Vec& u,
                   const RefPoint& ref, const FormationSpec& spec,
                   const CostWeights& w) {
  const Eigen::Index N = x.p.size();
  const double flow = lambda.head(N).dot(x.v) + lambda.tail(N).dot(u);
  return flow + cost_state(x, ref, spec, w) + cost_input(u, w);
}

CostateCurve costate_backward(const std::vector<Vec>& forcing,
                              const Vec& terminal, int /*n*/, int /*M*/,
                              double dt) {
  const int K = static_cast<int>(forcing.size()) - 1;
  if (K < 1) throw ConfigError("costate_backward: need at least 2 samples");
  CostateCurve c;
  c.dt = dt;
  c.lambda.resize(K + 1);
  c.lambda_dot.resize(K + 1);
  c.lambda[K] = terminal;
  // In reversed time tau = T - t: dlambda/dtau = A^T lambda + f.
  auto rhs = [](const Vec& lam, const Vec& f) { return Vec(adjoint_apply(lam) + f); };
  for (int k = K; k > 0; --k) {
    const Vec& f0 = forcing[k];
    const Vec& f1 = forcing[k - 1];
    const Vec fm = 0.5 * (f0 + f1);
    const Vec& l = c.lambda[k];
    const Vec k1 = rhs(l, f0);
    const Vec k2 = rhs(l + 0.5 * dt * k1, fm);
    const Vec k3 = rhs(l + 0.5 * dt * k2, fm);
    const Vec k4 = rhs(l + dt * k3, f1);
    c.lambda[k - 1] = l + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  for (int k = 0; k <= K; ++k) {
    c.lambda_dot[k] = -(adjoint_apply(c.lambda[k]) + forcing[k]);
  }
  return c;
}

CostateCurve costate_backward(const Trajectory& traj, const ReferencePath& ref,
                              const FormationSpec& spec, const CostWeights& w) {
  const int K = traj.steps();
  if (ref.size() != traj.size()) {
    throw ConfigError("costate_backward: reference grid does not match");
  }
  std::vector<Vec> forcing(K + 1);
  for (int k = 0; k <= K; ++k) {
    forcing[k] = grad_state(traj.states[k], ref_at(ref, k), spec, w);
  }
  // m = l^st, so the terminal gradient is the last forcing sample.
  return costate_backward(forcing, forcing[K], spec.graph.n(), spec.M,
                          traj.dt);
}

StationarityReport stationarity_residual(const Trajectory& traj,
                                         const CostateCurve& costate,
                                         const CostWeights& w) {
  const int K = traj.steps();
  if (static_cast<int>(costate.lambda.size()) != K + 1) {
    throw ConfigError("stationarity_residual: co-state grid does not match");
  }
  const double dt = traj.dt;
  const Eigen::Index N = traj.states[0].p.size();
  StationarityReport rep;
  rep.residual.resize(K);
  for (int k = 0; k < K; ++k) {
    const Vec lam_bar =
        0.5 * (costate.lambda[k] + costate.lambda[k + 1]) +
        (dt / 12.0) * (costate.lambda_dot[k] - costate.lambda_dot[k + 1]);
    const Vec res = grad_input(traj.inputs[k], w) + lam_bar.tail(N);
    rep.residual[k] = res.lpNorm<Eigen::Infinity>();
    rep.sup = std::max(rep.sup, rep.residual[k]);
  }
  return rep;
}

SufficiencyReport sufficiency_check(const Trajectory& traj,
                                    const FormationSpec& spec,
                                    const CostWeights& w, double tol) {
  SufficiencyReport rep;
  rep.worst = std::numeric_limits<double>::infinity();
  for (const Mat& R : w.R) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(R, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -tol) rep.R_psd = false;
  }
  rep.min_eig.reserve(traj.size());
  rep.sufficient.reserve(traj.size());
  for (const SystemState& x : traj.states) {
    const Mat h = hess_state(x, spec, w, /*safe=*/false);
    Eigen::SelfAdjointEigenSolver<Mat> eig(h, Eigen::EigenvaluesOnly);
    const double m = eig.eigenvalues().minCoeff();
    rep.min_eig.push_back(m);
    rep.sufficient.push_back(m >= -tol * std::max(1.0, h.norm()) && rep.R_psd);
    rep.worst = std::min(rep.worst, m);
  }
  return rep;
}

}  // namespace formtrack
