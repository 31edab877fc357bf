#pragma once

#include <optional>
#include <string>
#include <vector>

#include "formtrack/scenario.hpp"

namespace formtrack {

struct SimOptions {
  std::optional<double> dt;  // overrides the scenario grid
  bool log_costate = false;
  bool parallel = false;     // per-agent fan-out; output is identical
};

struct EstimatorErrorRow {
  double t;
  int agent;  // 0-based
  double e_pc;
  double e_vc;
};

struct SimRecord {
  std::string mode;
  Trajectory traj;
  ReferencePath ref;
  std::vector<EstimatorErrorRow> estimator_errors;
  std::vector<Vec> costate;               // lambda_hat per sample
  std::optional<CostateApproxResidual> costate_residual;
  std::optional<ProntoReport> pronto;     // without its trajectory copy
};

SimRecord run_distributed(const Scenario& scn, const SimOptions& opt = {});
SimRecord run_pronto(const Scenario& scn, const SimOptions& opt = {});

}  // namespace formtrack
