#pragma once

#include <optional>
#include <vector>

#include "formtrack/cost.hpp"

namespace formtrack {

inline constexpr double kSettlingPresets[] = {0.1, 0.01, 0.001};

/// (l_fo - l_tr) / (l_fo + l_tr), 0 when both vanish.
double tradeoff(double l_fo, double l_tr);

/// Smallest grid time after which |l_tf| <= delta through the end.
std::optional<double> settling_time(const std::vector<double>& t,
                                    const std::vector<double>& l_tf,
                                    double delta);

/// l_in / |R|_F.
double avg_input_energy(double l_in, const Mat& R);

struct EdgeError {
  Edge edge;
  double d2;       // desired squared distance
  double s_err;    // s_ij - d_ij^2
  double sigma;
  double sigma_d1;
  double vel_mismatch;  // |e_dot_ij|
};

std::vector<EdgeError> formation_errors(const SystemState& x,
                                        const FormationSpec& spec);

struct MetricSeries {
  std::vector<double> t;
  std::vector<double> l_tr, l_fo1, l_fo2, l_in, l_tf;
  std::vector<double> cumulative_energy;  // int_0^t l_in
  std::vector<std::vector<EdgeError>> edges;

  std::size_t size() const { return t.size(); }
};

MetricSeries compute_metrics(const Trajectory& traj, const ReferencePath& ref,
                             const FormationSpec& spec, const CostWeights& w);

struct MetricSummary {
  std::vector<std::pair<double, std::optional<double>>> settling;
  double total_energy = 0.0;       // int l_in dt
  double average_energy = 0.0;     // total / (T |R|_F)
  double mean_input_cost = 0.0;    // time average of l_in
  double terminal_edge_rel = 0.0;  // max |s - d^2| / d^2 at T
  double terminal_vel_mismatch = 0.0;
};

MetricSummary summarize(const MetricSeries& m, const CostWeights& w);

}  // namespace formtrack
