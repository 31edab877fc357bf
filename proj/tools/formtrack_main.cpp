// formtrack: simulate, verify and post-process formation-tracking runs.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "formtrack/record_io.hpp"

namespace fs = std::filesystem;
using namespace formtrack;

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kNumerical = 3;

std::string default_out(const std::string& traj_path,
                        const std::string& out_dir) {
  if (!out_dir.empty()) return out_dir;
  const fs::path parent = fs::path(traj_path).parent_path();
  return parent.empty() ? "." : parent.string();
}

// The reference is resampled on the trajectory's own grid.
ReferencePath reference_for(const Scenario& scn, const Trajectory& traj) {
  if (std::abs(traj.horizon() - scn.T) > 1e-6 * scn.T) {
    throw ConfigError("trajectory horizon " + std::to_string(traj.horizon()) +
                      " s does not match scenario T = " + std::to_string(scn.T));
  }
  return sample_reference(scn.reference, scn.T, traj.dt, scn.M());
}

int cmd_simulate(const std::string& config, const std::string& mode,
                 const std::string& out, std::optional<double> dt,
                 bool log_costate, bool parallel) {
  const Scenario scn = load_scenario(config);
  SimOptions opt;
  opt.dt = dt;
  opt.log_costate = log_costate;
  opt.parallel = parallel;
  const SimRecord rec =
      mode == "pronto" ? run_pronto(scn, opt) : run_distributed(scn, opt);
  save_record(rec, scn, out);
  if (rec.pronto) {
    std::cout << "pronto: " << rec.pronto->iterations << " iterations ("
              << to_string(rec.pronto->reason) << "), cost "
              << rec.pronto->cost.front() << " -> " << rec.pronto->cost.back()
              << "\n";
  }
  std::cout << "wrote " << out << "\n";
  return kOk;
}

int cmd_verify(const std::string& traj_path, const std::string& config,
               const std::string& out_dir) {
  const Scenario scn = load_scenario(config);
  const Trajectory traj = read_trajectory_csv(traj_path, scn.n(), scn.M());
  const ReferencePath ref = reference_for(scn, traj);
  const CostateCurve lam = costate_backward(traj, ref, scn.spec, scn.weights);
  const StationarityReport st = stationarity_residual(traj, lam, scn.weights);
  const SufficiencyReport suff = sufficiency_check(traj, scn.spec, scn.weights);

  // interval residuals, plus the pointwise one at the final sample
  std::vector<double> res = st.residual;
  const Eigen::Index N = traj.states.back().p.size();
  res.push_back((grad_input(traj.inputs.back(), scn.weights) +
                 lam.lambda.back().tail(N))
                    .lpNorm<Eigen::Infinity>());

  const std::string dir = default_out(traj_path, out_dir);
  fs::create_directories(dir);
  write_verify_csv((fs::path(dir) / "verify.csv").string(), traj, res, suff);
  std::cout << "stationarity residual sup " << st.sup << ", worst H_xx eig "
            << suff.worst << "\n";
  return kOk;
}

int cmd_metrics(const std::string& traj_path, const std::string& config,
                const std::string& out_dir) {
  const Scenario scn = load_scenario(config);
  const Trajectory traj = read_trajectory_csv(traj_path, scn.n(), scn.M());
  const ReferencePath ref = reference_for(scn, traj);
  const MetricSeries m = compute_metrics(traj, ref, scn.spec, scn.weights);
  const std::string dir = default_out(traj_path, out_dir);
  fs::create_directories(dir);
  write_metrics_csv((fs::path(dir) / "metrics.csv").string(), m);
  std::ofstream js(fs::path(dir) / "summary.json");
  js << summary_json(summarize(m, scn.weights), nullptr, scn);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Formation tracking for second-order multi-agent systems"};
  app.require_subcommand(1);

  std::string config, mode = "distributed", out, traj, out_dir;
  std::optional<double> dt;
  bool log_costate = false, parallel = false;

  auto* sim = app.add_subcommand("simulate", "run a scenario");
  sim->add_option("--config", config, "scenario JSON")->required();
  sim->add_option("--mode", mode, "distributed or pronto")
      ->check(CLI::IsMember({"distributed", "pronto"}));
  sim->add_option("--out", out, "output directory")->required();
  sim->add_option("--dt", dt, "time step override [s]");
  sim->add_flag("--log-costate", log_costate, "log co-state estimates");
  sim->add_flag("--parallel", parallel, "per-agent parallel evaluation");

  auto* ver = app.add_subcommand("verify", "check optimality conditions");
  ver->add_option("--traj", traj, "trajectory CSV")->required();
  ver->add_option("--config", config, "scenario JSON")->required();
  ver->add_option("--out", out_dir, "output directory (default: next to CSV)");

  auto* met = app.add_subcommand("metrics", "evaluation metrics");
  met->add_option("--traj", traj, "trajectory CSV")->required();
  met->add_option("--config", config, "scenario JSON")->required();
  met->add_option("--out", out_dir, "output directory (default: next to CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(config, mode, out, dt, log_costate, parallel);
    if (*ver) return cmd_verify(traj, config, out_dir);
    if (*met) return cmd_metrics(traj, config, out_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::out_of_range& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }
  return kConfig;
}
