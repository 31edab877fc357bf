#pragma once
// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "formtrack/cost.hpp"
#include "formtrack/dynamics.hpp"
#include "formtrack/scenario.hpp"

namespace fttest {

using formtrack::Mat;
using formtrack::Vec;

class Rng {
 public:
  explicit Rng(unsigned long long seed) : gen_(seed) {}
  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen_);
  }
  double normal(double sd = 1.0) {
    return std::normal_distribution<double>(0.0, sd)(gen_);
  }
  Vec uniform_vec(int size, double a, double b) {
    Vec v(size);
    for (int k = 0; k < size; ++k) v(k) = uniform(a, b);
    return v;
  }
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }

 private:
  std::mt19937_64 gen_;
};

// Unit-cube corners scaled by d, labelled so that the 20 constraints of the
// cube scenario hold exactly. Centred on the origin.
inline Vec cube_vertices(double d = 5.0) {
  const double c[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                          {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  Vec p(24);
  for (int i = 0; i < 8; ++i) {
    for (int k = 0; k < 3; ++k) p(3 * i + k) = d * (c[i][k] - 0.5);
  }
  return p;
}

// Perturbed cube, optionally squeezed so some edges are strongly compressed.
inline formtrack::SystemState random_cube_state(Rng& rng, double squeeze = 1.0) {
  formtrack::SystemState x;
  x.p = squeeze * cube_vertices() + rng.uniform_vec(24, -2.0, 2.0);
  x.p += Vec::Constant(24, rng.uniform(-10.0, 10.0));
  x.v = rng.uniform_vec(24, -4.0, 4.0);
  return x;
}

inline formtrack::RefPoint random_ref(Rng& rng, int M = 3) {
  return {rng.uniform_vec(M, -5.0, 5.0), rng.uniform_vec(M, -2.0, 2.0)};
}

inline double rel_err(const Vec& a, const Vec& b) {
  return (a - b).lpNorm<Eigen::Infinity>() /
         std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

inline double rel_err(const Mat& a, const Mat& b) {
  return (a - b).lpNorm<Eigen::Infinity>() /
         std::max(1.0, b.lpNorm<Eigen::Infinity>());
}

// Central differences, step scaled by coordinate magnitude.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x,
                       double h_rel = 1e-6) {
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = h_rel * std::max(1.0, std::abs(x(k)));
    xp(k) = x(k) + h;
    const double fp = f(xp);
    xp(k) = x(k) - h;
    const double fm = f(xp);
    xp(k) = x(k);
    g(k) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x,
                       double h_rel = 1e-5) {
  const Vec g0 = g(x);
  Mat J(g0.size(), x.size());
  Vec xp = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = h_rel * std::max(1.0, std::abs(x(k)));
    xp(k) = x(k) + h;
    const Vec gp = g(xp);
    xp(k) = x(k) - h;
    const Vec gm = g(xp);
    xp(k) = x(k);
    J.col(k) = (gp - gm) / (2.0 * h);
  }
  return J;
}

// Two agents on a line joined by one edge, pure centroid tracking.
inline formtrack::FormationSpec pair_spec(int M = 1) {
  formtrack::Graph g(2, {{0, 1}});
  formtrack::PotentialParams pp;
  pp.d = 1.0;
  return formtrack::FormationSpec(g, M, {{formtrack::Edge(0, 1), pp}});
}

inline formtrack::ReferencePath sine_reference(int steps, double dt, int M = 1) {
  formtrack::ReferencePath r;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    r.p.push_back(Vec::Constant(M, std::sin(t)));
    r.v.push_back(Vec::Constant(M, std::cos(t)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Discretised pure-tracking problem
//
//   min  sum_k w_k l(x_k) + sum_{k<K} dt/2 u_k'R u_k
//   s.t. x_{k+1} = Ad x_k + Bd u_k
//
// with l(x) = 1/2 |C x - r_k|^2_Q, trapezoid weights w_k and the terminal
// cost added to w_K. Only valid when k_F = k_A = 0.

struct LqProblem {
  Mat Ad, Bd, C, Q, R;
  std::vector<Vec> r;  // centroid reference (p, v) per sample
  Vec x0;
  double dt = 0.0;
  int K = 0;
  double weight(int k) const {
    if (k == 0) return 0.5 * dt;
    if (k == K) return 0.5 * dt + 1.0;
    return dt;
  }
};

inline LqProblem make_lq_problem(const formtrack::SystemState& x0,
                                 const formtrack::ReferencePath& ref,
                                 const formtrack::CostWeights& w, int n, int M,
                                 double dt) {
  LqProblem pb;
  const auto d = formtrack::discretize(n, M, dt);
  pb.Ad = d.Ad;
  pb.Bd = d.Bd;
  pb.C = formtrack::system_matrices(n, M).C;
  pb.Q = w.Q_total();
  pb.R = w.R_block();
  pb.dt = dt;
  pb.K = static_cast<int>(ref.size()) - 1;
  pb.x0 = x0.stacked();
  for (std::size_t k = 0; k < ref.size(); ++k) {
    Vec rk(2 * M);
    rk << ref.p[k], ref.v[k];
    pb.r.push_back(rk);
  }
  return pb;
}

struct LqSolution {
  std::vector<Vec> x;  // K+1
  std::vector<Vec> u;  // K
  std::vector<Vec> costate;  // dV_k/dx_k, K+1
};

// Dynamic programming on V_k(x) = 1/2 x'S x + s'x.
inline LqSolution solve_lq_riccati(const LqProblem& pb) {
  const Mat CQC = pb.C.transpose() * pb.Q * pb.C;
  std::vector<Mat> S(pb.K + 1), L(pb.K);
  std::vector<Vec> s(pb.K + 1), l(pb.K);
  S[pb.K] = pb.weight(pb.K) * CQC;
  s[pb.K] = -pb.weight(pb.K) * pb.C.transpose() * pb.Q * pb.r[pb.K];
  for (int k = pb.K - 1; k >= 0; --k) {
    const Mat H = pb.dt * pb.R + pb.Bd.transpose() * S[k + 1] * pb.Bd;
    const Mat G = pb.Bd.transpose() * S[k + 1] * pb.Ad;
    const Vec h = pb.Bd.transpose() * s[k + 1];
    const Eigen::LDLT<Mat> f(H);
    L[k] = -f.solve(G);
    l[k] = -f.solve(h);
    S[k] = pb.weight(k) * CQC + pb.Ad.transpose() * S[k + 1] * pb.Ad +
           G.transpose() * L[k];
    S[k] = 0.5 * (S[k] + S[k].transpose());
    s[k] = -pb.weight(k) * pb.C.transpose() * pb.Q * pb.r[k] +
           pb.Ad.transpose() * s[k + 1] + G.transpose() * l[k];
  }
  LqSolution sol;
  sol.x.push_back(pb.x0);
  for (int k = 0; k < pb.K; ++k) {
    sol.u.push_back(L[k] * sol.x[k] + l[k]);
    sol.x.push_back(pb.Ad * sol.x[k] + pb.Bd * sol.u[k]);
  }
  for (int k = 0; k <= pb.K; ++k) sol.costate.push_back(S[k] * sol.x[k] + s[k]);
  return sol;
}

// The same problem as one sparse KKT system in (x_0..x_K, u_0..u_{K-1}, nu).
inline LqSolution solve_lq_kkt(const LqProblem& pb) {
  const int nx = static_cast<int>(pb.Ad.rows());
  const int nu = static_cast<int>(pb.Bd.cols());
  const int K = pb.K;
  const int X = nx * (K + 1);
  const int U = nu * K;
  const int E = nx * (K + 1);
  const int dim = X + U + E;
  const Mat CQC = pb.C.transpose() * pb.Q * pb.C;

  std::vector<Eigen::Triplet<double>> trip;
  Vec rhs = Vec::Zero(dim);
  auto add = [&](int r, int c, double v) {
    if (v != 0.0) {
      trip.emplace_back(r, c, v);
      if (r != c) trip.emplace_back(c, r, v);
    }
  };
  auto add_block = [&](int r0, int c0, const Mat& m, bool sym_diag) {
    for (int a = 0; a < m.rows(); ++a) {
      for (int b = 0; b < m.cols(); ++b) {
        if (sym_diag && b < a) continue;  // upper triangle of a diagonal block
        add(r0 + a, c0 + b, m(a, b));
      }
    }
  };
  for (int k = 0; k <= K; ++k) {
    add_block(nx * k, nx * k, pb.weight(k) * CQC, true);
    rhs.segment(nx * k, nx) = pb.weight(k) * pb.C.transpose() * pb.Q * pb.r[k];
  }
  for (int k = 0; k < K; ++k) {
    add_block(X + nu * k, X + nu * k, pb.dt * pb.R, true);
  }
  // constraint rows: x_0 = x0; x_{k+1} - Ad x_k - Bd u_k = 0
  const Mat I = Mat::Identity(nx, nx);
  add_block(X + U, 0, I, false);
  rhs.segment(X + U, nx) = pb.x0;
  for (int k = 0; k < K; ++k) {
    const int row = X + U + nx * (k + 1);
    add_block(row, nx * (k + 1), I, false);
    add_block(row, nx * k, -pb.Ad, false);
    add_block(row, X + nu * k, -pb.Bd, false);
  }
  Eigen::SparseMatrix<double> A(dim, dim);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  const Vec z = lu.solve(rhs);

  LqSolution sol;
  for (int k = 0; k <= K; ++k) sol.x.push_back(z.segment(nx * k, nx));
  for (int k = 0; k < K; ++k) sol.u.push_back(z.segment(X + nu * k, nu));
  for (int k = 0; k <= K; ++k) sol.costate.push_back(-z.segment(X + U + nx * k, nx));
  return sol;
}

}  // namespace fttest
