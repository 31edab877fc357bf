#include "formtrack/estimator.hpp"

#include <algorithm>
#include <atomic>
#include <execution>
#include <iostream>
#include <numeric>

namespace formtrack {

void EstimatorGains::validate() const {
  if (!(k_py > 0.0) || !(k_dy > 0.0)) {
    throw ConfigError("estimator: k_py and k_dy must be positive");
  }
}

Centroid EstimatorState::centroid_estimate(int i, int n, int M) const {
  return {block_mean(blocks[i].p_hat, n, M), block_mean(blocks[i].v_hat, n, M)};
}

bool EstimatorState::finite() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const EstimatorBlock& b) {
    return b.p_hat.allFinite() && b.v_hat.allFinite();
  });
}

EstimatorState init_estimators(const SystemState& x0, const Graph& g, int M,
                               InitRule rule) {
  const int n = g.n();
  EstimatorState est;
  est.blocks.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> closed(g.neighbors(i).begin(), g.neighbors(i).end());
    closed.push_back(i);
    std::sort(closed.begin(), closed.end());

    Vec fill_p = Vec::Zero(M);
    Vec fill_v = Vec::Zero(M);
    double wsum = 0.0;
    for (int k : closed) {
      const double wk =
          rule == InitRule::kDegreeWeighted ? 1.0 + g.degree(k) : 1.0;
      fill_p += wk * x0.p.segment(k * M, M);
      fill_v += wk * x0.v.segment(k * M, M);
      wsum += wk;
    }
    fill_p /= wsum;
    fill_v /= wsum;

    EstimatorBlock& b = est.blocks[i];
    b.p_hat.resize(n * M);
    b.v_hat.resize(n * M);
    for (int j = 0; j < n; ++j) {
      const bool known = g.in_closed_neighborhood(i, j);
      b.p_hat.segment(j * M, M) = known ? Vec(x0.p.segment(j * M, M)) : fill_p;
      b.v_hat.segment(j * M, M) = known ? Vec(x0.v.segment(j * M, M)) : fill_v;
    }
  }
  return est;
}

EstimatorLocalView estimator_view(int i, const EstimatorState& est,
                                  const SystemState& x, const Vec& u,
                                  const Graph& g, int M) {
  EstimatorLocalView view;
  view.i = i;
  view.M = M;
  view.own = &est.blocks[i];
  for (int j : g.neighbors(i)) view.neighbor_blocks.push_back(&est.blocks[j]);
  view.p_i = x.p.segment(i * M, M);
  view.v_i = x.v.segment(i * M, M);
  view.inputs.emplace_back(i, u.segment(i * M, M));
  for (int j : g.neighbors(i)) view.inputs.emplace_back(j, u.segment(j * M, M));
  return view;
}

EstimatorBlock agent_estimator_derivative(const EstimatorLocalView& view,
                                          const EstimatorGains& gains) {
  const EstimatorBlock& own = *view.own;
  const int M = view.M;
  const int i = view.i;
  Vec cons_p = Vec::Zero(own.p_hat.size());
  Vec cons_v = Vec::Zero(own.v_hat.size());
  for (const EstimatorBlock* nb : view.neighbor_blocks) {
    cons_p += own.p_hat - nb->p_hat;
    cons_v += own.v_hat - nb->v_hat;
  }
  // innovation only on agent i's own block
  cons_p.segment(i * M, M) += own.p_hat.segment(i * M, M) - view.p_i;
  cons_v.segment(i * M, M) += own.v_hat.segment(i * M, M) - view.v_i;

  EstimatorBlock d;
  d.p_hat = -gains.k_py * cons_p + own.v_hat;
  d.v_hat = -gains.k_dy * cons_v;
  for (const auto& [j, uj] : view.inputs) d.v_hat.segment(j * M, M) += uj;
  return d;
}

EstimatorState estimator_derivative(const EstimatorState& est,
                                    const SystemState& x, const Vec& u,
                                    const Graph& g, int M,
                                    const EstimatorGains& gains,
                                    bool parallel) {
  const int n = g.n();
  EstimatorState d;
  d.blocks.resize(n);
  auto one = [&](int i) {
    d.blocks[i] =
        agent_estimator_derivative(estimator_view(i, est, x, u, g, M), gains);
  };
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  if (parallel) {
    std::for_each(std::execution::par, ids.begin(), ids.end(), one);
  } else {
    std::for_each(ids.begin(), ids.end(), one);
  }
  return d;
}

namespace {

EstimatorState axpy(const EstimatorState& x, double a, const EstimatorState& y) {
  EstimatorState out = x;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    out.blocks[i].p_hat += a * y.blocks[i].p_hat;
    out.blocks[i].v_hat += a * y.blocks[i].v_hat;
  }
  return out;
}

std::atomic<bool> warned{false};

}  // namespace

EstimatorState step_estimators(const EstimatorState& est, const SystemState& x,
                               const Vec& u, const Graph& g, int M,
                               const EstimatorGains& gains, double dt,
                               bool parallel) {
  if (dt * gains.k_py > 0.05 && !warned.exchange(true)) {
    std::cerr << "warning: estimator step dt*k_py = " << dt * gains.k_py
              << " exceeds 0.05; RK4 accuracy degrades\n";
  }
  // u is held over the step; the plant itself follows its exact flow so the
  // innovation does not lag the moving agents by half a step.
  const SystemState x_mid = step_exact(x, u, 0.5 * dt);
  const SystemState x_end = step_exact(x, u, dt);
  auto f = [&](const EstimatorState& s, const SystemState& xs) {
    return estimator_derivative(s, xs, u, g, M, gains, parallel);
  };
  const EstimatorState k1 = f(est, x);
  const EstimatorState k2 = f(axpy(est, 0.5 * dt, k1), x_mid);
  const EstimatorState k3 = f(axpy(est, 0.5 * dt, k2), x_mid);
  const EstimatorState k4 = f(axpy(est, dt, k3), x_end);
  EstimatorState out = est;
  for (std::size_t i = 0; i < out.blocks.size(); ++i) {
    out.blocks[i].p_hat +=
        (dt / 6.0) * (k1.blocks[i].p_hat + 2.0 * k2.blocks[i].p_hat +
                      2.0 * k3.blocks[i].p_hat + k4.blocks[i].p_hat);
    out.blocks[i].v_hat +=
        (dt / 6.0) * (k1.blocks[i].v_hat + 2.0 * k2.blocks[i].v_hat +
                      2.0 * k3.blocks[i].v_hat + k4.blocks[i].v_hat);
  }
  return out;
}

double centroid_error_bound(const Graph& g, int M, const EstimatorGains& gains,
                            const Vec& u) {
  const int n = g.n();
  double unseen = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!g.in_closed_neighborhood(i, j)) {
        unseen += u.segment(j * M, M).squaredNorm();
      }
    }
  }
  if (unseen == 0.0) return 0.0;
  const double c = topological_constant(g, M);
  const double kmin = std::min(gains.k_py, gains.k_dy);
  return c * c / (double(n) * n * kmin * kmin) * unseen;
}

double centroid_error_sq(const EstimatorState& est, const SystemState& x,
                         int M) {
  const int n = static_cast<int>(est.blocks.size());
  const Centroid truth = centroid(x, n, M);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Centroid c = est.centroid_estimate(i, n, M);
    total += (c.p - truth.p).squaredNorm() + (c.v - truth.v).squaredNorm();
  }
  return total;
}

}  // namespace formtrack
