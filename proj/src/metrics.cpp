#include "formtrack/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace formtrack {

double tradeoff(double l_fo, double l_tr) {
  const double den = l_fo + l_tr;
  if (den == 0.0) return 0.0;
  return std::clamp((l_fo - l_tr) / den, -1.0, 1.0);
}

std::optional<double> settling_time(const std::vector<double>& t,
                                    const std::vector<double>& l_tf,
                                    double delta) {
  if (t.size() != l_tf.size()) {
    throw ConfigError("settling_time: series and grid lengths differ");
  }
  if (t.empty()) throw ConfigError("settling_time: empty series");
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw ConfigError("settling_time: delta must lie in (0, 1]");
  }
  std::size_t k = l_tf.size();
  while (k > 0 && std::abs(l_tf[k - 1]) <= delta) --k;
  if (k == l_tf.size()) return std::nullopt;
  return t[k];
}

double avg_input_energy(double l_in, const Mat& R) { return l_in / R.norm(); }

std::vector<EdgeError> formation_errors(const SystemState& x,
                                        const FormationSpec& spec) {
  const int M = spec.M;
  std::vector<EdgeError> out;
  out.reserve(spec.graph.edges().size());
  for (const Edge& e : spec.graph.edges()) {
    const PotentialParams& pp = spec.params(e.i, e.j);
    const double s =
        (x.p.segment(e.i * M, M) - x.p.segment(e.j * M, M)).squaredNorm();
    const SigmaEval se = sigma_all(pp, s);
    const double vm =
        (x.v.segment(e.i * M, M) - x.v.segment(e.j * M, M)).norm();
    out.push_back({e, pp.d * pp.d, s - pp.d * pp.d, se.value, se.d1, vm});
  }
  return out;
}

MetricSeries compute_metrics(const Trajectory& traj, const ReferencePath& ref,
                             const FormationSpec& spec, const CostWeights& w) {
  if (traj.size() == 0) throw ConfigError("metrics: empty trajectory");
  if (ref.size() != traj.size()) {
    throw ConfigError("metrics: reference grid does not match trajectory");
  }
  MetricSeries m;
  const std::size_t K = traj.size();
  for (auto* v : {&m.t, &m.l_tr, &m.l_fo1, &m.l_fo2, &m.l_in, &m.l_tf,
                  &m.cumulative_energy}) {
    v->resize(K);
  }
  m.edges.resize(K);
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const SystemState& x = traj.states[k];
    m.t[k] = x.t;
    m.l_tr[k] = cost_tracking(x, ref_at(ref, k), w);
    m.l_fo1[k] = cost_fo1(x.p, spec, w);
    m.l_fo2[k] = cost_fo2(x.v, spec, w);
    m.l_in[k] = cost_input(traj.inputs[k], w);
    m.l_tf[k] = tradeoff(m.l_fo1[k] + m.l_fo2[k], m.l_tr[k]);
    // inputs are piecewise constant, so the running integral is exact
    if (k > 0) acc += traj.dt * m.l_in[k - 1];
    m.cumulative_energy[k] = acc;
    m.edges[k] = formation_errors(x, spec);
  }
  return m;
}

MetricSummary summarize(const MetricSeries& m, const CostWeights& w) {
  if (m.size() == 0) throw ConfigError("metrics: empty series");
  MetricSummary s;
  for (double delta : kSettlingPresets) {
    s.settling.emplace_back(delta, settling_time(m.t, m.l_tf, delta));
  }
  s.total_energy = m.cumulative_energy.back();
  const double T = m.t.back() - m.t.front();
  s.mean_input_cost = T > 0.0 ? s.total_energy / T : 0.0;
  s.average_energy = avg_input_energy(s.mean_input_cost, w.R_block());
  for (const EdgeError& e : m.edges.back()) {
    s.terminal_edge_rel =
        std::max(s.terminal_edge_rel, std::abs(e.s_err) / e.d2);
    s.terminal_vel_mismatch = std::max(s.terminal_vel_mismatch, e.vel_mismatch);
  }
  return s;
}

}  // namespace formtrack
