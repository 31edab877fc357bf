#include "formtrack/cost.hpp"

#include <algorithm>
#include <string>

namespace formtrack {

namespace {

bool is_psd(const Mat& m, double tol = 1e-12) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()),
                                         Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol * std::max(1.0, m.norm());
}

bool is_pd(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (m + m.transpose()),
                                         Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > 0.0;
}

Mat block_diag(const std::vector<Mat>& blocks) {
  Eigen::Index size = 0;
  for (const auto& b : blocks) size += b.rows();
  Mat out = Mat::Zero(size, size);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.rows(), b.cols()) = b;
    off += b.rows();
  }
  return out;
}

}  // namespace

CostWeights CostWeights::uniform(const Graph& g, int M, double q_p, double q_d,
                                 double r, double k_F, double k_A,
                                 double theta) {
  CostWeights w;
  const Mat I = Mat::Identity(M, M);
  w.Q_c.assign(g.n(), q_p * I);
  w.Q_cdot.assign(g.n(), q_d * I);
  w.R.assign(g.n(), r * I);
  w.k_F = k_F;
  w.k_A = k_A;
  for (const Edge& e : g.edges()) w.Theta[e] = theta * I;
  return w;
}

void CostWeights::validate(const Graph& g, int M) const {
  const auto n = static_cast<std::size_t>(g.n());
  if (Q_c.size() != n || Q_cdot.size() != n || R.size() != n) {
    throw ConfigError("weights: expected one Q_c, Q_cdot and R per agent");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string who = " of agent " + std::to_string(i + 1);
    for (const Mat* m : {&Q_c[i], &Q_cdot[i], &R[i]}) {
      if (m->rows() != M || m->cols() != M) {
        throw ConfigError("weights: wrong block size" + who);
      }
    }
    if (!is_psd(Q_c[i]) || !is_psd(Q_cdot[i])) {
      throw ConfigError("weights: Q not positive semidefinite" + who);
    }
    if (!is_pd(R[i])) {
      throw ConfigError("weights: R not positive definite" + who);
    }
  }
  if (!(k_F >= 0.0) || !(k_A >= 0.0)) {
    throw ConfigError("weights: k_F and k_A must be nonnegative");
  }
  for (const Edge& e : g.edges()) {
    auto it = Theta.find(e);
    if (it == Theta.end()) {
      throw ConfigError("weights: missing Theta for edge (" +
                        std::to_string(e.i + 1) + "," +
                        std::to_string(e.j + 1) + ")");
    }
    if (it->second.rows() != M || it->second.cols() != M ||
        !is_psd(it->second)) {
      throw ConfigError("weights: Theta must be an M x M PSD matrix");
    }
  }
}

Mat CostWeights::Q_c_total() const {
  Mat q = Mat::Zero(Q_c.front().rows(), Q_c.front().cols());
  for (const auto& m : Q_c) q += m;
  return q;
}

Mat CostWeights::Q_cdot_total() const {
  Mat q = Mat::Zero(Q_cdot.front().rows(), Q_cdot.front().cols());
  for (const auto& m : Q_cdot) q += m;
  return q;
}

Mat CostWeights::Q_total() const {
  return block_diag({Q_c_total(), Q_cdot_total()});
}

Mat CostWeights::R_block() const { return block_diag(R); }

double cost_tracking(const SystemState& x, const RefPoint& ref,
                     const CostWeights& w) {
  const int n = static_cast<int>(w.Q_c.size());
  const int M = static_cast<int>(ref.p.size());
  const Centroid c = centroid(x, n, M);
  const Vec ep = c.p - ref.p;
  const Vec ev = c.v - ref.v;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += ep.dot(w.Q_c[i] * ep) + ev.dot(w.Q_cdot[i] * ev);
  }
  return 0.5 * total;
}

double cost_input(const Vec& u, const CostWeights& w) {
  const int n = static_cast<int>(w.R.size());
  const int M = static_cast<int>(u.size()) / n;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto ui = u.segment(i * M, M);
    total += ui.dot(w.R[i] * ui);
  }
  return 0.5 * total;
}

double cost_fo1(const Vec& positions, const FormationSpec& spec,
                const CostWeights& w) {
  const int M = spec.M;
  double total = 0.0;
  // Double sum over ordered neighbor pairs, as in the cost definition.
  for (int i = 0; i < spec.graph.n(); ++i) {
    for (int j : spec.graph.neighbors(i)) {
      const double s =
          (positions.segment(i * M, M) - positions.segment(j * M, M))
              .squaredNorm();
      total += sigma(spec.params(i, j), s);
    }
  }
  return 0.25 * w.k_F * total;
}

double cost_fo2(const Vec& velocities, const FormationSpec& spec,
                const CostWeights& w) {
  const int M = spec.M;
  double total = 0.0;
  for (int i = 0; i < spec.graph.n(); ++i) {
    for (int j : spec.graph.neighbors(i)) {
      const Vec edot =
          velocities.segment(i * M, M) - velocities.segment(j * M, M);
      total += edot.dot(w.theta(i, j) * edot);
    }
  }
  return 0.25 * w.k_A * total;
}

double cost_state(const SystemState& x, const RefPoint& ref,
                  const FormationSpec& spec, const CostWeights& w) {
  return cost_tracking(x, ref, w) + cost_fo1(x.p, spec, w) +
         cost_fo2(x.v, spec, w);
}

double cost_total(const Trajectory& traj, const ReferencePath& ref,
                  const FormationSpec& spec, const CostWeights& w) {
  const int K = traj.steps();
  if (K < 1 || ref.size() != traj.size()) {
    throw ConfigError("cost_total: trajectory and reference grids differ");
  }
  double running = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double weight = (k == 0 || k == K) ? 0.5 : 1.0;
    running += weight * cost_state(traj.states[k], ref_at(ref, k), spec, w);
    if (k < K) running += cost_input(traj.inputs[k], w);
  }
  return traj.dt * running +
         cost_state(traj.states[K], ref_at(ref, K), spec, w);
}

Vec grad_fo1(const Vec& positions, const FormationSpec& spec,
             const CostWeights& w) {
  const int M = spec.M;
  Vec g = Vec::Zero(positions.size());
  for (int i = 0; i < spec.graph.n(); ++i) {
    for (int j : spec.graph.neighbors(i)) {
      const Vec e = positions.segment(i * M, M) - positions.segment(j * M, M);
      g.segment(i * M, M) +=
          w.k_F * sigma_d1(spec.params(i, j), e.squaredNorm()) * e;
    }
  }
  return g;
}

Vec grad_fo2(const Vec& velocities, const FormationSpec& spec,
             const CostWeights& w) {
  const int M = spec.M;
  Vec g = Vec::Zero(velocities.size());
  for (int i = 0; i < spec.graph.n(); ++i) {
    for (int j : spec.graph.neighbors(i)) {
      const Vec edot =
          velocities.segment(i * M, M) - velocities.segment(j * M, M);
      g.segment(i * M, M) += w.k_A * (w.theta(i, j) * edot);
    }
  }
  return g;
}

Vec grad_state(const SystemState& x, const RefPoint& ref,
               const FormationSpec& spec, const CostWeights& w) {
  const int n = spec.graph.n();
  const int M = spec.M;
  const int N = n * M;
  const Centroid c = centroid(x, n, M);
  const Vec track_p = w.Q_c_total() * (c.p - ref.p) / n;
  const Vec track_v = w.Q_cdot_total() * (c.v - ref.v) / n;

  Vec a(2 * N);
  a.head(N) = grad_fo1(x.p, spec, w);
  a.tail(N) = grad_fo2(x.v, spec, w);
  for (int i = 0; i < n; ++i) {
    a.segment(i * M, M) += track_p;
    a.segment(N + i * M, M) += track_v;
  }
  return a;
}

Vec grad_input(const Vec& u, const CostWeights& w) {
  const int n = static_cast<int>(w.R.size());
  const int M = static_cast<int>(u.size()) / n;
  Vec b(u.size());
  for (int i = 0; i < n; ++i) {
    b.segment(i * M, M) = w.R[i] * u.segment(i * M, M);
  }
  return b;
}

Mat hess_fo1_block(const Vec& e_ij, const PotentialParams& p, double k_F,
                   bool safe) {
  const SigmaEval s = sigma_all(p, e_ij.squaredNorm());
  Mat block = -k_F * 2.0 * s.d2 * (e_ij * e_ij.transpose());
  // chi_0(sigma') is 1 for sigma' >= 0.
  if (!safe || s.d1 >= 0.0) {
    block.diagonal().array() -= k_F * s.d1;
  }
  return block;
}

Mat hess_fo1(const Vec& positions, const FormationSpec& spec,
             const CostWeights& w, bool safe) {
  const int M = spec.M;
  const Eigen::Index N = positions.size();
  Mat h = Mat::Zero(N, N);
  for (const Edge& e : spec.graph.edges()) {
    const Vec eij =
        positions.segment(e.i * M, M) - positions.segment(e.j * M, M);
    const Mat b = hess_fo1_block(eij, spec.params(e.i, e.j), w.k_F, safe);
    h.block(e.i * M, e.j * M, M, M) += b;
    h.block(e.j * M, e.i * M, M, M) += b;
    h.block(e.i * M, e.i * M, M, M) -= b;
    h.block(e.j * M, e.j * M, M, M) -= b;
  }
  return h;
}

Mat hess_fo2(const FormationSpec& spec, const CostWeights& w) {
  const int M = spec.M;
  const int N = spec.graph.n() * M;
  Mat h = Mat::Zero(N, N);
  for (const Edge& e : spec.graph.edges()) {
    const Mat b = -w.k_A * w.theta(e.i, e.j);
    h.block(e.i * M, e.j * M, M, M) += b;
    h.block(e.j * M, e.i * M, M, M) += b;
    h.block(e.i * M, e.i * M, M, M) -= b;
    h.block(e.j * M, e.j * M, M, M) -= b;
  }
  return h;
}

Mat hess_state(const SystemState& x, const FormationSpec& spec,
               const CostWeights& w, bool safe) {
  const int n = spec.graph.n();
  const int M = spec.M;
  const int N = n * M;
  Mat h = Mat::Zero(2 * N, 2 * N);
  // C^T Q C: every M x M block of the position (velocity) quadrant equals
  // Q_c_total / n^2 (Q_cdot_total / n^2).
  const Mat qc = w.Q_c_total() / (double(n) * n);
  const Mat qv = w.Q_cdot_total() / (double(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      h.block(i * M, j * M, M, M) = qc;
      h.block(N + i * M, N + j * M, M, M) = qv;
    }
  }
  h.topLeftCorner(N, N) += hess_fo1(x.p, spec, w, safe);
  h.bottomRightCorner(N, N) += hess_fo2(spec, w);
  return h;
}

LQTerms lq_quantities(const SystemState& x, const Vec& u, const RefPoint& ref,
                      const FormationSpec& spec, const CostWeights& w) {
  const int N = spec.graph.n() * spec.M;
  LQTerms t;
  t.a = grad_state(x, ref, spec, w);
  t.b = grad_input(u, w);
  t.Qo = hess_state(x, spec, w, /*safe=*/true);
  t.So = Mat::Zero(2 * N, N);
  t.Ro = w.R_block();
  return t;
}

TerminalTerms terminal_quantities(const SystemState& x, const RefPoint& ref,
                                  const FormationSpec& spec,
                                  const CostWeights& w) {
  return {grad_state(x, ref, spec, w), hess_state(x, spec, w, /*safe=*/true)};
}

}  // namespace formtrack
