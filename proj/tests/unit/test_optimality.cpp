#include <doctest.h>

#include "formtrack/optimality.hpp"
#include "formtrack/pronto.hpp"
#include "support.hpp"

using namespace formtrack;

namespace {

struct PairLq {
  FormationSpec spec = fttest::pair_spec();
  CostWeights w;
  SystemState x0;
  ReferencePath ref;
  double dt;
  int K;
  PairLq(double T, double step) : dt(step), K(static_cast<int>(std::lround(T / step))) {
    w = CostWeights::uniform(spec.graph, 1, 1.25, 0.125, 1.0, 0.0, 0.0);
    x0.p = Vec(2);
    x0.p << 1.0, -0.4;
    x0.v = Vec(2);
    x0.v << 0.0, 0.5;
    ref = fttest::sine_reference(K, step);
  }
};

Trajectory oracle_trajectory(const fttest::LqSolution& sol, double dt) {
  Trajectory t;
  t.dt = dt;
  const int K = static_cast<int>(sol.u.size());
  for (int k = 0; k <= K; ++k) {
    t.states.push_back(SystemState::from_stacked(sol.x[k], k * dt));
    t.inputs.push_back(sol.u[std::min(k, K - 1)]);
  }
  return t;
}

}  // namespace

TEST_CASE("Hamiltonian: zero point and term-by-term evaluation") {
  const Scenario scn = build_cube_scenario();
  SystemState x;
  x.p = fttest::cube_vertices();
  x.v = Vec::Zero(24);
  const RefPoint zero{Vec::Zero(3), Vec::Zero(3)};
  CHECK(std::abs(hamiltonian(x, Vec::Zero(48), Vec::Zero(24), zero, scn.spec,
                             scn.weights)) <= 1e-12);

  fttest::Rng rng(41);
  const SystemState y = fttest::random_cube_state(rng);
  const Vec lam = rng.uniform_vec(48, -3, 3);
  const Vec u = rng.uniform_vec(24, -3, 3);
  const RefPoint ref = fttest::random_ref(rng);
  const SystemMatrices sm = system_matrices(8, 3);
  const double expect = lam.dot(sm.A * y.stacked() + sm.B * u) +
                        cost_tracking(y, ref, scn.weights) +
                        cost_fo1(y.p, scn.spec, scn.weights) +
                        cost_fo2(y.v, scn.spec, scn.weights) +
                        0.5 * u.squaredNorm();
  CHECK(hamiltonian(y, lam, u, ref, scn.spec, scn.weights) ==
        doctest::Approx(expect).epsilon(1e-12));

  // u-gradient is R u + B' lambda
  const auto H = [&](const Vec& uu) {
    return hamiltonian(y, lam, uu, ref, scn.spec, scn.weights);
  };
  const Vec g = fttest::fd_gradient(H, u);
  CHECK(fttest::rel_err(Vec(u + lam.tail(24)), g) <= 1e-6);
}

TEST_CASE("co-state of a zero-cost trajectory vanishes") {
  const Scenario scn = build_cube_scenario();
  Trajectory traj;
  traj.dt = 0.01;
  ReferencePath ref;
  SystemState x;
  x.p = fttest::cube_vertices();
  x.v = Vec::Zero(24);
  for (int k = 0; k <= 50; ++k) {
    traj.states.push_back(x);
    traj.inputs.push_back(Vec::Zero(24));
    ref.p.push_back(Vec::Zero(3));
    ref.v.push_back(Vec::Zero(3));
  }
  const CostateCurve c = costate_backward(traj, ref, scn.spec, scn.weights);
  for (const Vec& l : c.lambda) CHECK(l.lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("velocity co-state integrates the position co-state") {
  // constant forcing f on positions, zero terminal:
  // lambda_p = f (T - t), lambda_v = f (T - t)^2 / 2
  const int K = 100;
  const double dt = 0.01;
  Vec f = Vec::Zero(4);
  f(0) = 2.0;
  f(1) = -1.0;
  const std::vector<Vec> forcing(K + 1, f);
  const CostateCurve c = costate_backward(forcing, Vec::Zero(4), 2, 1, dt);
  for (int k = 0; k <= K; ++k) {
    const double tau = (K - k) * dt;
    CHECK(c.lambda[k](0) == doctest::Approx(2.0 * tau).epsilon(1e-12));
    CHECK(c.lambda[k](2) == doctest::Approx(tau * tau).epsilon(1e-12));
    CHECK(c.lambda[k](3) == doctest::Approx(-0.5 * tau * tau).epsilon(1e-12));
  }
}

TEST_CASE("co-state is linear in forcing and terminal value") {
  fttest::Rng rng(42);
  const int K = 60;
  std::vector<Vec> f1, f2, f12;
  for (int k = 0; k <= K; ++k) {
    f1.push_back(rng.uniform_vec(12, -1, 1));
    f2.push_back(rng.uniform_vec(12, -1, 1));
    f12.push_back(2.0 * f1.back() - 3.0 * f2.back());
  }
  const Vec t1 = rng.uniform_vec(12, -1, 1);
  const Vec t2 = rng.uniform_vec(12, -1, 1);
  const auto c1 = costate_backward(f1, t1, 2, 3, 0.02);
  const auto c2 = costate_backward(f2, t2, 2, 3, 0.02);
  const auto c12 = costate_backward(f12, Vec(2.0 * t1 - 3.0 * t2), 2, 3, 0.02);
  for (int k = 0; k <= K; ++k) {
    CHECK(fttest::rel_err(c12.lambda[k], Vec(2.0 * c1.lambda[k] - 3.0 * c2.lambda[k])) <= 1e-13);
  }
}

TEST_CASE("terminal co-state equals the terminal-cost gradient") {
  const Scenario scn = build_cube_scenario();
  fttest::Rng rng(43);
  Trajectory traj;
  traj.dt = 0.01;
  ReferencePath ref;
  for (int k = 0; k <= 10; ++k) {
    traj.states.push_back(fttest::random_cube_state(rng));
    traj.inputs.push_back(Vec::Zero(24));
    const RefPoint r = fttest::random_ref(rng);
    ref.p.push_back(r.p);
    ref.v.push_back(r.v);
  }
  const CostateCurve c = costate_backward(traj, ref, scn.spec, scn.weights);
  CHECK(c.lambda.back() == grad_state(traj.states.back(), ref_at(ref, 10), scn.spec, scn.weights));
}

TEST_CASE("pure tracking: co-state matches the discrete value gradient") {
  PairLq pb(1.0, 1e-3);
  const auto prob = fttest::make_lq_problem(pb.x0, pb.ref, pb.w, 2, 1, pb.dt);
  const auto sol = fttest::solve_lq_riccati(prob);
  const Trajectory traj = oracle_trajectory(sol, pb.dt);
  const CostateCurve c = costate_backward(traj, pb.ref, pb.spec, pb.w);
  double scale = 0.0;
  for (const Vec& l : sol.costate) scale = std::max(scale, l.lpNorm<Eigen::Infinity>());
  double err = 0.0;
  for (int k = 0; k <= pb.K; ++k) {
    // drop the share of the stage cost that sits at t_k itself
    const Vec grad = grad_state(traj.states[k], ref_at(pb.ref, k), pb.spec, pb.w);
    const Vec lam_disc = sol.costate[k] - (k == 0 ? 0.0 : 0.5 * pb.dt) * grad;
    err = std::max(err, (c.lambda[k] - lam_disc).lpNorm<Eigen::Infinity>());
  }
  CHECK(err <= 1e-5 * scale);

  const StationarityReport st = stationarity_residual(traj, c, pb.w);
  double umax = 0.0;
  for (const Vec& u : sol.u) umax = std::max(umax, u.lpNorm<Eigen::Infinity>());
  CHECK(st.sup <= 1e-5 * (1.0 + umax));
  CHECK(st.residual.size() == static_cast<std::size_t>(pb.K));
}

TEST_CASE("stationarity residual: exact PMP input and zero input") {
  PairLq pb(1.0, 0.01);
  Trajectory traj = initial_guess(pb.x0, pb.K, pb.dt, ProntoConfig{});
  const CostateCurve c = costate_backward(traj, pb.ref, pb.spec, pb.w);
  const StationarityReport before = stationarity_residual(traj, c, pb.w);
  CHECK(before.sup > 0.0);
  for (int k = 0; k < pb.K; ++k) {
    const Vec lam_bar = 0.5 * (c.lambda[k] + c.lambda[k + 1]) +
                        (pb.dt / 12.0) * (c.lambda_dot[k] - c.lambda_dot[k + 1]);
    traj.inputs[k] = -lam_bar.tail(2);
  }
  CHECK(stationarity_residual(traj, c, pb.w).sup <= 1e-15);

  Trajectory still = traj;
  for (Vec& u : still.inputs) u.setZero();
  CHECK(stationarity_residual(still, c, pb.w).sup > 0.0);
}

TEST_CASE("sufficiency flags compressed edges only") {
  const Scenario scn = build_cube_scenario();
  Trajectory traj;
  traj.dt = 0.1;
  SystemState x;
  x.p = 1.2 * fttest::cube_vertices();
  x.v = Vec::Zero(24);
  traj.states = {x, x};
  traj.inputs = {Vec::Zero(24), Vec::Zero(24)};
  SufficiencyReport rep = sufficiency_check(traj, scn.spec, scn.weights);
  CHECK(rep.R_psd);
  CHECK(rep.sufficient[0]);
  CHECK(rep.min_eig[0] >= -1e-9);

  x.p = 0.3 * fttest::cube_vertices();
  traj.states = {x, x};
  rep = sufficiency_check(traj, scn.spec, scn.weights);
  CHECK_FALSE(rep.sufficient[0]);
  CHECK(rep.worst < 0.0);
  CHECK(rep.R_psd);
}
