#include "formtrack/controller.hpp"

#include <algorithm>
#include <cmath>

namespace formtrack {

void ControllerGains::validate() const {
  for (double k : {kp_tr1, kd_tr1, kp_fo1, kd_fo1, kp_tr2, kp_fo2}) {
    if (!(k >= 0.0) || !std::isfinite(k)) {
      throw ConfigError("controller: gains must be finite and nonnegative");
    }
  }
  if (U && !(*U > 0.0)) {
    throw ConfigError("controller: saturation bound U must be positive");
  }
}

ControlLocalView control_view(int i, const SystemState& x, const Centroid& est,
                              const RefPoint& ref, const Graph& g, int M) {
  ControlLocalView view;
  view.i = i;
  view.p_i = x.p.segment(i * M, M);
  view.v_i = x.v.segment(i * M, M);
  for (int j : g.neighbors(i)) {
    view.neighbors.push_back({j, x.p.segment(j * M, M), x.v.segment(j * M, M)});
  }
  view.pc_hat = est.p;
  view.vc_hat = est.v;
  view.ref = ref;
  return view;
}

AgentTerms agent_terms(const ControlLocalView& view, const FormationSpec& spec,
                       const CostWeights& w) {
  const int n = spec.graph.n();
  const int M = spec.M;
  AgentTerms t;
  const Mat Qp = w.Q_c_total();
  const Mat Qv = w.Q_cdot_total();
  t.g_tr1 = Qp * (view.pc_hat - view.ref.p) / n;
  t.gdot_tr1 = Qp * (view.vc_hat - view.ref.v) / n;
  t.g_tr2 = Qv * (view.vc_hat - view.ref.v) / n;

  t.g_fo1 = Vec::Zero(M);
  t.gdot_fo1 = Vec::Zero(M);
  t.g_fo2 = Vec::Zero(M);
  for (const NeighborState& nb : view.neighbors) {
    const PotentialParams& pp = spec.params(view.i, nb.j);
    const Vec e = view.p_i - nb.p;
    const Vec edot = view.v_i - nb.v;
    t.g_fo1 += w.k_F * sigma_d1(pp, e.squaredNorm()) * e;
    t.gdot_fo1 -= hess_fo1_block(e, pp, w.k_F, /*safe=*/true) * edot;
    t.g_fo2 += w.k_A * (w.theta(view.i, nb.j) * edot);
  }
  return t;
}

CostatePair costate_terms(const AgentTerms& t, const ControllerGains& k) {
  CostatePair c;
  c.pos = k.kp_tr1 * t.g_tr1 + k.kd_tr1 * t.gdot_tr1 + k.kp_fo1 * t.g_fo1 +
          k.kd_fo1 * t.gdot_fo1;
  c.vel = c.pos + k.kp_tr2 * t.g_tr2 + k.kp_fo2 * t.g_fo2;
  return c;
}

Vec control_from_terms(int i, const AgentTerms& t, const CostWeights& w,
                       const ControllerGains& gains) {
  const CostatePair c = costate_terms(t, gains);
  return -w.R[i].llt().solve(c.vel);
}

Vec control_agent(const ControlLocalView& view, const FormationSpec& spec,
                  const CostWeights& w, const ControllerGains& gains) {
  return control_from_terms(view.i, agent_terms(view, spec, w), w, gains);
}

Vec saturate(const Vec& u, double U) {
  // sign(0) U = 0 never arises here: a zero component is already inside.
  return u.cwiseMax(-U).cwiseMin(U);
}

Vec costate_reconstruct(const std::vector<AgentTerms>& terms,
                        const ControllerGains& gains) {
  const int n = static_cast<int>(terms.size());
  const int M = static_cast<int>(terms.front().g_tr1.size());
  const int N = n * M;
  Vec lam(2 * N);
  for (int i = 0; i < n; ++i) {
    const CostatePair c = costate_terms(terms[i], gains);
    lam.segment(i * M, M) = c.pos;
    lam.segment(N + i * M, M) = c.vel;
  }
  return lam;
}

Vec input_from_costate(const Vec& lambda_hat, const CostWeights& w) {
  const int n = static_cast<int>(w.R.size());
  const Eigen::Index N = lambda_hat.size() / 2;
  const int M = static_cast<int>(N / n);
  Vec u(N);
  for (int i = 0; i < n; ++i) {
    u.segment(i * M, M) =
        -w.R[i].llt().solve(Vec(lambda_hat.segment(N + i * M, M)));
  }
  return u;
}

namespace {

// d/dt of a logged per-sample series of vectors; central inside, one-sided
// at both ends.
std::vector<Vec> ddt(const std::vector<Vec>& s, double dt) {
  const std::size_t K = s.size();
  std::vector<Vec> d(K);
  if (K < 2) {
    if (K == 1) d[0] = Vec::Zero(s[0].size());
    return d;
  }
  d[0] = (s[1] - s[0]) / dt;
  d[K - 1] = (s[K - 1] - s[K - 2]) / dt;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    d[k] = (s[k + 1] - s[k - 1]) / (2.0 * dt);
  }
  return d;
}

}  // namespace

CostateApproxResidual costate_approx_residual(
    const std::vector<std::vector<AgentTerms>>& log, double dt,
    const ControllerGains& k) {
  CostateApproxResidual r;
  const std::size_t K = log.size();
  if (K == 0) return r;
  const std::size_t n = log.front().size();
  r.tr1.assign(K, 0.0);
  r.fo1.assign(K, 0.0);
  r.tr2.assign(K, 0.0);
  r.fo2.assign(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Vec> g1(K), gd1(K), f1(K), fd1(K), g2(K), f2(K);
    for (std::size_t t = 0; t < K; ++t) {
      const AgentTerms& a = log[t][i];
      g1[t] = a.g_tr1;
      gd1[t] = a.gdot_tr1;
      f1[t] = a.g_fo1;
      fd1[t] = a.gdot_fo1;
      g2[t] = a.g_tr2;
      f2[t] = a.g_fo2;
    }
    const auto gdd1 = ddt(gd1, dt);
    const auto fdd1 = ddt(fd1, dt);
    const auto gd2 = ddt(g2, dt);
    const auto fd2 = ddt(f2, dt);
    for (std::size_t t = 0; t < K; ++t) {
      auto sup = [](const Vec& v) { return v.lpNorm<Eigen::Infinity>(); };
      r.tr1[t] = std::max(
          r.tr1[t], sup(g1[t] + k.kd_tr1 * gdd1[t] + k.kp_tr1 * gd1[t]));
      r.fo1[t] = std::max(
          r.fo1[t], sup(f1[t] + k.kd_fo1 * fdd1[t] + k.kp_fo1 * fd1[t]));
      r.tr2[t] = std::max(r.tr2[t], sup(g2[t] + k.kp_tr2 * gd2[t]));
      r.fo2[t] = std::max(r.fo2[t], sup(f2[t] + k.kp_fo2 * fd2[t]));
    }
  }
  return r;
}

}  // namespace formtrack
