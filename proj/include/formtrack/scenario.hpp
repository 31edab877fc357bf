#pragma once

#include <string>
#include <utility>
#include <vector>

#include "formtrack/controller.hpp"
#include "formtrack/estimator.hpp"
#include "formtrack/pronto.hpp"

namespace formtrack {

/// Desired centroid path. The chicane is
///   Rz(rot_z) Ry(rot_y) (speed t, amplitude tanh(sharpness (t - T/2)), 0)
/// with right-handed elementary rotations, Ry applied first.
struct ReferenceParams {
  enum class Kind { kChicane, kSampled };
  Kind kind = Kind::kChicane;
  double speed = 2.0;
  double amplitude = 10.0;
  double sharpness = 10.0;
  double rot_z = 0.7853981633974483;   // pi/4
  double rot_y = -0.7853981633974483;  // -pi/4

  // kSampled: piecewise-linear through (t, p, v) samples
  std::vector<double> t;
  std::vector<Vec> p;
  std::vector<Vec> v;
};

Mat rot_z(double a);
Mat rot_y(double a);

/// Reference sample at time t in [0, T]. Throws std::out_of_range otherwise.
RefPoint reference_path(const ReferenceParams& params, double T, double t,
                        int M = 3);

/// Samples on t_k = k dt, k = 0..K.
ReferencePath sample_reference(const ReferenceParams& params, double T,
                               double dt, int M);

struct Scenario {
  explicit Scenario(FormationSpec s) : spec(std::move(s)) {}

  FormationSpec spec;
  SystemState x0;
  CostWeights weights;
  ControllerGains controller;
  EstimatorGains estimator;
  InitRule estimator_init = InitRule::kDegreeWeighted;
  ProntoConfig pronto;
  double pronto_dt = 0.01;  // grid of the offline solver
  double T = 20.0;
  double dt = 1e-3;
  ReferenceParams reference;

  int n() const { return spec.graph.n(); }
  int M() const { return spec.M; }
  /// Number of steps K with K dt = T; throws unless dt divides T to 1e-9.
  int steps(double step) const;
  void validate() const;
};

Scenario build_cube_scenario();

Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text);
std::string dump_scenario(const Scenario& scn);
void save_scenario(const Scenario& scn, const std::string& path);

}  // namespace formtrack
