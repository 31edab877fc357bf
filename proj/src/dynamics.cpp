#include "formtrack/dynamics.hpp"

namespace formtrack {

Vec SystemState::stacked() const {
  Vec x(p.size() + v.size());
  x << p, v;
  return x;
}

SystemState SystemState::from_stacked(const Vec& x, double t) {
  const Eigen::Index N = x.size() / 2;
  return {x.head(N), x.tail(N), t};
}

SystemMatrices system_matrices(int n, int M) {
  if (n < 2 || M < 1 || M > 3) {
    throw ConfigError("system_matrices: need n >= 2 and M in {1,2,3}");
  }
  const int N = n * M;
  SystemMatrices s;
  s.A = Mat::Zero(2 * N, 2 * N);
  s.A.topRightCorner(N, N).setIdentity();
  s.B = Mat::Zero(2 * N, N);
  s.B.bottomRows(N).setIdentity();
  s.C = Mat::Zero(2 * M, 2 * N);
  for (int i = 0; i < n; ++i) {
    s.C.block(0, i * M, M, M).diagonal().setConstant(1.0 / n);
    s.C.block(M, N + i * M, M, M).diagonal().setConstant(1.0 / n);
  }
  return s;
}

DiscreteSystem discretize(int n, int M, double dt) {
  const int N = n * M;
  DiscreteSystem d;
  d.Ad = Mat::Identity(2 * N, 2 * N);
  d.Ad.topRightCorner(N, N).diagonal().setConstant(dt);
  d.Bd = Mat::Zero(2 * N, N);
  d.Bd.topRows(N).diagonal().setConstant(0.5 * dt * dt);
  d.Bd.bottomRows(N).diagonal().setConstant(dt);
  return d;
}

SystemState step_exact(const SystemState& x, const Vec& u, double dt) {
  SystemState y;
  y.p = x.p + dt * x.v + (0.5 * dt * dt) * u;
  y.v = x.v + dt * u;
  y.t = x.t + dt;
  return y;
}

Vec block_mean(const Vec& stacked, int n, int M) {
  Vec m = Vec::Zero(M);
  for (int i = 0; i < n; ++i) m += stacked.segment(i * M, M);
  return m / n;
}

Centroid centroid(const SystemState& x, int n, int M) {
  return {block_mean(x.p, n, M), block_mean(x.v, n, M)};
}

}  // namespace formtrack
