#include "formtrack/pronto.hpp"

#include <cmath>
#include <string>

namespace formtrack {

void ProntoConfig::validate() const {
  if (!(k_p > 0.0) || !(k_d > 0.0)) {
    throw ConfigError("pronto: k_p and k_d must be positive");
  }
  if (max_iter < 1) throw ConfigError("pronto: max_iter must be >= 1");
  if (!(descent_tol > 0.0)) {
    throw ConfigError("pronto: descent_tol must be positive");
  }
  if (!(armijo_alpha > 0.0 && armijo_alpha < 0.5)) {
    throw ConfigError("pronto: armijo alpha must lie in (0, 0.5)");
  }
  if (!(armijo_beta > 0.0 && armijo_beta < 1.0)) {
    throw ConfigError("pronto: armijo beta must lie in (0, 1)");
  }
  if (max_backtracks < 0) {
    throw ConfigError("pronto: max_backtracks must be >= 0");
  }
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::kFlat: return "flat";
    case Termination::kMaxIter: return "max_iter";
    case Termination::kRoundoff: return "roundoff";
  }
  return "unknown";
}

Trajectory project(const Trajectory& curve, const ProntoConfig& cfg) {
  const int K = curve.steps();
  if (K < 1 || curve.inputs.size() != curve.states.size()) {
    throw ConfigError("project: curve needs K+1 states and K+1 inputs");
  }
  Trajectory out;
  out.dt = curve.dt;
  out.states.reserve(K + 1);
  out.inputs.reserve(K + 1);
  out.states.push_back(curve.states[0]);
  for (int k = 0; k <= K; ++k) {
    const SystemState& x = out.states.back();
    const SystemState& a = curve.states[k];
    Vec u = curve.inputs[k] + cfg.k_p * (a.p - x.p) + cfg.k_d * (a.v - x.v);
    if (k < K) out.states.push_back(step_exact(x, u, curve.dt));
    out.inputs.push_back(std::move(u));
  }
  return out;
}

Trajectory perturb(const Trajectory& traj, const Direction& dir, double gamma) {
  Trajectory out = traj;
  const Eigen::Index N = traj.states[0].p.size();
  for (std::size_t k = 0; k < out.size(); ++k) {
    out.states[k].p += gamma * dir.z[k].head(N);
    out.states[k].v += gamma * dir.z[k].tail(N);
    out.inputs[k] += gamma * dir.v[k];
  }
  return out;
}

Direction search_direction(const Trajectory& traj, const ReferencePath& ref,
                           const FormationSpec& spec, const CostWeights& w) {
  const int K = traj.steps();
  const double dt = traj.dt;
  if (ref.size() != traj.size()) {
    throw ConfigError("search_direction: reference grid does not match");
  }
  const int n = spec.graph.n();
  const int M = spec.M;
  const int N = n * M;
  const DiscreteSystem sys = discretize(n, M, dt);
  const Mat& A = sys.Ad;
  const Mat& B = sys.Bd;
  const Mat Rk = dt * w.R_block();

  // Backward sweep; stage linear terms are kept for the descent estimate.
  std::vector<Mat> gains(K);
  std::vector<Vec> ff(K);
  std::vector<Vec> q(K + 1);
  std::vector<Vec> r(K);

  const TerminalTerms term =
      terminal_quantities(traj.states[K], ref_at(ref, K), spec, w);
  {
    const LQTerms lq =
        lq_quantities(traj.states[K], traj.inputs[K], ref_at(ref, K), spec, w);
    q[K] = 0.5 * dt * lq.a + term.r1;
  }
  Mat P = 0.5 * dt * hess_state(traj.states[K], spec, w, true) + term.P1;
  Vec p = q[K];

  for (int k = K - 1; k >= 0; --k) {
    const double c = (k == 0) ? 0.5 : 1.0;
    const LQTerms lq =
        lq_quantities(traj.states[k], traj.inputs[k], ref_at(ref, k), spec, w);
    q[k] = dt * c * lq.a;
    r[k] = dt * lq.b;

    const Mat PB = P * B;
    const Mat H = Rk + B.transpose() * PB;
    const Mat G = PB.transpose() * A;
    const Vec g = r[k] + B.transpose() * p;
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success) {
      throw NumericalError("search_direction: Riccati recursion lost "
                           "positive definiteness at step " +
                           std::to_string(k) + " (t = " +
                           std::to_string(k * dt) + ")");
    }
    gains[k] = -llt.solve(G);
    ff[k] = -llt.solve(g);
    const Mat AtP = A.transpose() * P;
    p = q[k] + A.transpose() * p + G.transpose() * ff[k];
    P = dt * c * lq.Qo + AtP * A + G.transpose() * gains[k];
    P = 0.5 * (P + P.transpose()).eval();
    if (!P.allFinite()) {
      throw NumericalError("search_direction: non-finite Riccati solution at "
                           "step " + std::to_string(k));
    }
  }

  Direction dir;
  dir.z.resize(K + 1);
  dir.v.resize(K + 1);
  dir.z[0] = Vec::Zero(2 * N);
  double sq = 0.0;
  for (int k = 0; k < K; ++k) {
    dir.v[k] = gains[k] * dir.z[k] + ff[k];
    dir.z[k + 1] = A * dir.z[k] + B * dir.v[k];
    dir.dtheta += q[k].dot(dir.z[k]) + r[k].dot(dir.v[k]);
    sq += dir.z[k].squaredNorm() + dir.v[k].squaredNorm();
  }
  dir.v[K] = dir.v[K - 1];
  dir.dtheta += q[K].dot(dir.z[K]);
  sq += dir.z[K].squaredNorm() + dir.v[K].squaredNorm();
  dir.norm = std::sqrt(dt * sq);
  return dir;
}

Trajectory initial_guess(const SystemState& x0, int steps, double dt,
                         const ProntoConfig& cfg) {
  Trajectory hold;
  hold.dt = dt;
  hold.states.assign(steps + 1, x0);
  for (int k = 0; k <= steps; ++k) hold.states[k].t = k * dt;
  hold.inputs.assign(steps + 1, Vec::Zero(x0.p.size()));
  return project(hold, cfg);
}

ProntoReport optimize(const SystemState& x0, const ReferencePath& ref,
                      const FormationSpec& spec, const CostWeights& w,
                      const ProntoConfig& cfg, double dt) {
  cfg.validate();
  const int K = static_cast<int>(ref.size()) - 1;
  if (K < 1) throw ConfigError("optimize: reference needs at least 2 samples");
  if (!x0.finite()) throw NumericalError("optimize: non-finite initial state");

  ProntoReport rep;
  rep.trajectory = initial_guess(x0, K, dt, cfg);
  auto h = [&](const Trajectory& t) { return cost_total(t, ref, spec, w); };
  double cost = h(rep.trajectory);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    rep.iterations = it;
    const Direction dir = search_direction(rep.trajectory, ref, spec, w);
    rep.cost.push_back(cost);
    rep.dtheta.push_back(dir.dtheta);
    rep.direction_norm.push_back(dir.norm);
    if (dir.norm <= cfg.descent_tol || !(dir.dtheta < 0.0)) {
      rep.gamma.push_back(0.0);
      rep.reason = Termination::kFlat;
      return rep;
    }
    try {
      LineSearchResult ls = armijo_search(rep.trajectory, cost, dir, cfg, h);
      rep.gamma.push_back(ls.gamma);
      rep.trajectory = std::move(ls.candidate);
      cost = ls.cost;
    } catch (const NumericalError&) {
      // predicted decrease below what the cost can resolve in double precision
      if (-dir.dtheta <= 1e-12 * (1.0 + std::abs(cost))) {
        rep.gamma.push_back(0.0);
        rep.reason = Termination::kRoundoff;
        return rep;
      }
      throw;
    }
  }
  rep.cost.push_back(cost);
  rep.reason = Termination::kMaxIter;
  return rep;
}

}  // namespace formtrack
