#include <doctest.h>

#include "formtrack/estimator.hpp"
#include "support.hpp"

using namespace formtrack;

namespace {

double max_block_error(const EstimatorState& est, const SystemState& x) {
  double m = 0.0;
  for (const EstimatorBlock& b : est.blocks) {
    m = std::max(m, (b.p_hat - x.p).lpNorm<Eigen::Infinity>());
    m = std::max(m, (b.v_hat - x.v).lpNorm<Eigen::Infinity>());
  }
  return m;
}

bool same(const EstimatorBlock& a, const EstimatorBlock& b) {
  return a.p_hat == b.p_hat && a.v_hat == b.v_hat;
}

}  // namespace

TEST_CASE("initial estimates on a path graph") {
  const Graph g = Graph::path(3);
  SystemState x;
  x.p = Vec(3);
  x.p << 1.0, 4.0, 10.0;
  x.v = Vec(3);
  x.v << -1.0, 2.0, 7.0;
  const EstimatorState w = init_estimators(x, g, 1, InitRule::kDegreeWeighted);
  // agent 1 knows agents 1, 2 with weights 1+1 and 1+2
  CHECK(w.blocks[0].p_hat(2) == doctest::Approx((2 * 1.0 + 3 * 4.0) / 5.0));
  CHECK(w.blocks[0].v_hat(2) == doctest::Approx((2 * -1.0 + 3 * 2.0) / 5.0));
  CHECK(w.blocks[0].p_hat(0) == 1.0);
  CHECK(w.blocks[0].p_hat(1) == 4.0);
  CHECK(w.blocks[1].p_hat == x.p);  // middle agent sees everyone
  const EstimatorState u = init_estimators(x, g, 1, InitRule::kUniform);
  CHECK(u.blocks[0].p_hat(2) == doctest::Approx(2.5));
  CHECK(u.blocks[2].p_hat(0) == doctest::Approx(7.0));
}

TEST_CASE("complete graph starts from the exact state") {
  fttest::Rng rng(51);
  const SystemState x = fttest::random_cube_state(rng);
  const EstimatorState e = init_estimators(x, Graph::complete(8), 3);
  for (const EstimatorBlock& b : e.blocks) {
    CHECK(b.p_hat == x.p);
    CHECK(b.v_hat == x.v);
  }
}

TEST_CASE("exact estimates with zero input drift with the velocity estimate") {
  fttest::Rng rng(52);
  const Graph g = build_cube_scenario().spec.graph;
  const SystemState x = fttest::random_cube_state(rng);
  EstimatorState e;
  e.blocks.assign(8, EstimatorBlock{x.p, x.v});
  const EstimatorState d =
      estimator_derivative(e, x, Vec::Zero(24), g, 3, EstimatorGains{});
  for (const EstimatorBlock& b : d.blocks) {
    CHECK(b.p_hat == x.v);
    CHECK(b.v_hat.norm() == 0.0);
  }
}

TEST_CASE("one agent's derivative ignores non-neighbours") {
  fttest::Rng rng(53);
  const Graph g = build_cube_scenario().spec.graph;
  const SystemState x = fttest::random_cube_state(rng);
  const Vec u = rng.uniform_vec(24, -5, 5);
  EstimatorState e = init_estimators(x, g, 3);
  for (EstimatorBlock& b : e.blocks) {
    b.p_hat += rng.uniform_vec(24, -1, 1);
    b.v_hat += rng.uniform_vec(24, -1, 1);
  }
  const EstimatorGains gains;
  const EstimatorState base = estimator_derivative(e, x, u, g, 3, gains);
  int checked = 0;
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      if (g.in_closed_neighborhood(i, j)) continue;
      SystemState x2 = x;
      Vec u2 = u;
      EstimatorState e2 = e;
      x2.p.segment(3 * j, 3) += rng.uniform_vec(3, -50, 50);
      x2.v.segment(3 * j, 3) += rng.uniform_vec(3, -50, 50);
      u2.segment(3 * j, 3) += rng.uniform_vec(3, -50, 50);
      e2.blocks[j].p_hat += rng.uniform_vec(24, -50, 50);
      e2.blocks[j].v_hat += rng.uniform_vec(24, -50, 50);
      const EstimatorState pert = estimator_derivative(e2, x2, u2, g, 3, gains);
      CHECK(same(pert.blocks[i], base.blocks[i]));
      ++checked;
    }
  }
  CHECK(checked == 8 * 2);  // each cube vertex has two non-neighbours
}

TEST_CASE("RK4 step: fourth-order halving behaviour") {
  fttest::Rng rng(54);
  const Graph g = build_cube_scenario().spec.graph;
  const SystemState x = fttest::random_cube_state(rng);
  const Vec u = rng.uniform_vec(24, -1, 1);
  EstimatorState e = init_estimators(x, g, 3);
  const EstimatorGains gains{20.0, 15.0};
  auto gap = [&](double dt) {
    const EstimatorState one = step_estimators(e, x, u, g, 3, gains, dt);
    const SystemState xh = step_exact(x, u, 0.5 * dt);
    const EstimatorState two = step_estimators(
        step_estimators(e, x, u, g, 3, gains, 0.5 * dt), xh, u, g, 3, gains, 0.5 * dt);
    double m = 0.0;
    for (int i = 0; i < 8; ++i) {
      m = std::max(m, (one.blocks[i].p_hat - two.blocks[i].p_hat).lpNorm<Eigen::Infinity>());
      m = std::max(m, (one.blocks[i].v_hat - two.blocks[i].v_hat).lpNorm<Eigen::Infinity>());
    }
    return m;
  };
  const double g1 = gap(0.01);
  const double g2 = gap(0.005);
  CHECK(g1 > 0.0);
  CHECK(g1 / g2 > 20.0);  // local error O(dt^5): ratio near 32
}

TEST_CASE("fixed point is preserved by a step") {
  const Graph g = Graph::complete(4);
  SystemState x;
  x.p = Vec::LinSpaced(8, -1.0, 1.0);
  x.v = Vec::Zero(8);
  EstimatorState e;
  e.blocks.assign(4, EstimatorBlock{x.p, x.v});
  const EstimatorState s = step_estimators(e, x, Vec::Zero(8), g, 2, EstimatorGains{}, 1e-3);
  for (const EstimatorBlock& b : s.blocks) CHECK(same(b, e.blocks[0]));
}

TEST_CASE("complete graph: perturbed estimates converge to the moving truth") {
  fttest::Rng rng(55);
  const Graph g = Graph::complete(8);
  SystemState x = fttest::random_cube_state(rng);
  EstimatorState e = init_estimators(x, g, 3);
  for (EstimatorBlock& b : e.blocks) {
    b.p_hat += rng.uniform_vec(24, -3, 3);
    b.v_hat += rng.uniform_vec(24, -3, 3);
  }
  const Vec u = Vec::Zero(24);
  const double dt = 1e-3;
  for (int k = 0; k < 2000; ++k) {
    e = step_estimators(e, x, u, g, 3, EstimatorGains{}, dt);
    x = step_exact(x, u, dt);
  }
  CHECK(max_block_error(e, x) <= 1e-6);
}

TEST_CASE("parallel evaluation is bit-identical") {
  fttest::Rng rng(56);
  const Graph g = build_cube_scenario().spec.graph;
  const SystemState x = fttest::random_cube_state(rng);
  const Vec u = rng.uniform_vec(24, -5, 5);
  const EstimatorState e = init_estimators(x, g, 3);
  const EstimatorState a = step_estimators(e, x, u, g, 3, EstimatorGains{}, 1e-3, false);
  const EstimatorState b = step_estimators(e, x, u, g, 3, EstimatorGains{}, 1e-3, true);
  for (int i = 0; i < 8; ++i) CHECK(same(a.blocks[i], b.blocks[i]));
}

TEST_CASE("error bound: degenerate cases and the cube") {
  const Graph cube = build_cube_scenario().spec.graph;
  const EstimatorGains gains;
  CHECK(centroid_error_bound(cube, 3, gains, Vec::Zero(24)) == 0.0);
  CHECK(centroid_error_bound(Graph::complete(8), 3, gains, Vec::Ones(24)) == 0.0);
  const double b = centroid_error_bound(cube, 3, gains, Vec::Ones(24));
  CHECK(b > 0.0);
  CHECK(std::isfinite(b));
  // each vertex misses two others, each |u_j|^2 = 3
  const double c = topological_constant(cube, 3);
  CHECK(b == doctest::Approx(c * c / (64.0 * 170.0 * 170.0) * 8 * 2 * 3).epsilon(1e-12));
}

TEST_CASE("centroid error of exact estimates is zero") {
  fttest::Rng rng(57);
  const SystemState x = fttest::random_cube_state(rng);
  const EstimatorState e = init_estimators(x, Graph::complete(8), 3);
  CHECK(centroid_error_sq(e, x, 3) <= 1e-24);
  CHECK_THROWS_AS(EstimatorGains({0.0, 1.0}).validate(), ConfigError);
}
