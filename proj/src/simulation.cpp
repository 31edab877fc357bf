#include "formtrack/simulation.hpp"

#include <algorithm>
#include <execution>
#include <numeric>

#include "formtrack/optimality.hpp"

namespace formtrack {

SimRecord run_distributed(const Scenario& scn, const SimOptions& opt) {
  scn.validate();
  const double dt = opt.dt.value_or(scn.dt);
  const int K = scn.steps(dt);
  const int n = scn.n();
  const int M = scn.M();
  const Graph& g = scn.spec.graph;

  SimRecord rec;
  rec.mode = "distributed";
  rec.ref = sample_reference(scn.reference, scn.T, dt, M);
  rec.traj.dt = dt;
  rec.traj.states.reserve(K + 1);
  rec.traj.inputs.reserve(K + 1);
  rec.estimator_errors.reserve(static_cast<std::size_t>(K + 1) * n);

  std::vector<std::vector<AgentTerms>> term_log;
  if (opt.log_costate) term_log.reserve(K + 1);

  SystemState x = scn.x0;
  x.t = 0.0;
  EstimatorState est = init_estimators(x, g, M, scn.estimator_init);

  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<AgentTerms> terms(n);
  Vec u(n * M);

  for (int k = 0; k <= K; ++k) {
    const RefPoint ref = ref_at(rec.ref, k);
    auto agent = [&](int i) {
      const ControlLocalView view =
          control_view(i, x, est.centroid_estimate(i, n, M), ref, g, M);
      terms[i] = agent_terms(view, scn.spec, scn.weights);
      u.segment(i * M, M) =
          control_from_terms(i, terms[i], scn.weights, scn.controller);
    };
    if (opt.parallel) {
      std::for_each(std::execution::par, ids.begin(), ids.end(), agent);
    } else {
      std::for_each(ids.begin(), ids.end(), agent);
    }
    if (scn.controller.U) u = saturate(u, *scn.controller.U);
    if (!u.allFinite()) {
      throw NumericalError("run_distributed: non-finite input at step " +
                           std::to_string(k));
    }

    const Centroid truth = centroid(x, n, M);
    for (int i = 0; i < n; ++i) {
      const Centroid c = est.centroid_estimate(i, n, M);
      rec.estimator_errors.push_back(
          {x.t, i, (c.p - truth.p).norm(), (c.v - truth.v).norm()});
    }
    if (opt.log_costate) {
      term_log.push_back(terms);
      rec.costate.push_back(costate_reconstruct(terms, scn.controller));
    }
    rec.traj.states.push_back(x);
    rec.traj.inputs.push_back(u);
    if (k == K) break;

    SystemState next = step_exact(x, u, dt);
    next.t = (k + 1) * dt;
    est = step_estimators(est, x, u, g, M, scn.estimator, dt, opt.parallel);
    x = std::move(next);
    if (!x.finite() || !est.finite()) {
      throw NumericalError("run_distributed: non-finite state at step " +
                           std::to_string(k + 1));
    }
  }
  if (opt.log_costate) {
    rec.costate_residual = costate_approx_residual(term_log, dt, scn.controller);
  }
  return rec;
}

SimRecord run_pronto(const Scenario& scn, const SimOptions& opt) {
  scn.validate();
  const double dt = opt.dt.value_or(scn.pronto_dt);
  scn.steps(dt);
  const int M = scn.M();

  SimRecord rec;
  rec.mode = "pronto";
  rec.ref = sample_reference(scn.reference, scn.T, dt, M);
  ProntoReport rep =
      optimize(scn.x0, rec.ref, scn.spec, scn.weights, scn.pronto, dt);
  rec.traj = std::move(rep.trajectory);
  rep.trajectory = Trajectory{};
  for (std::size_t k = 0; k < rec.traj.size(); ++k) {
    rec.traj.states[k].t = static_cast<double>(k) * dt;
  }
  if (opt.log_costate) {
    const CostateCurve c =
        costate_backward(rec.traj, rec.ref, scn.spec, scn.weights);
    rec.costate = c.lambda;
  }
  rec.pronto = std::move(rep);
  return rec;
}

}  // namespace formtrack
