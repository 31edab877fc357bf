#pragma once

#include <string>

#include "formtrack/metrics.hpp"
#include "formtrack/optimality.hpp"
#include "formtrack/simulation.hpp"

namespace formtrack {

/// Columns: t, p_1x..p_nz, v_1x..v_nz, u_1x..u_nz. Numbers use %.17g so a
/// read-back reproduces every double exactly.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          int n, int M);

/// Inverse of write_trajectory_csv; the grid must be uniform.
Trajectory read_trajectory_csv(const std::string& path, int n, int M);

/// t, l_tr, l_fo1, l_fo2, l_in, l_tf
void write_metrics_csv(const std::string& path, const MetricSeries& m);

/// t, edge_i, edge_j (1-based), s_err, sigma, sigma_d1, vel_mismatch, every
/// stride-th sample plus the last one.
void write_edges_csv(const std::string& path, const MetricSeries& m,
                     std::size_t stride = 1);

/// t, i (1-based), e_pc, e_vc
void write_estimator_csv(const std::string& path,
                         const std::vector<EstimatorErrorRow>& rows);

/// iter, cost, dtheta, direction_norm, gamma
void write_pronto_csv(const std::string& path, const ProntoReport& rep);

/// t, lambda_1..lambda_2N[, res_tr1, res_fo1, res_tr2, res_fo2]
void write_costate_csv(const std::string& path, const Trajectory& traj,
                       const std::vector<Vec>& costate,
                       const CostateApproxResidual* residual);

/// t, residual, min_eig_Hxx, sufficient_flag
void write_verify_csv(const std::string& path, const Trajectory& traj,
                      const std::vector<double>& residual,
                      const SufficiencyReport& suff);

/// Settling times, energies and terminal formation errors.
std::string summary_json(const MetricSummary& s, const SimRecord* rec,
                         const Scenario& scn);

/// trajectory.csv, metrics.csv, edges.csv, summary.json and, when present,
/// estimator.csv, costate.csv, pronto_iterations.csv under dir.
void save_record(const SimRecord& rec, const Scenario& scn,
                 const std::string& dir);

}  // namespace formtrack
