#include "formtrack/record_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace formtrack {

namespace {

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : f_(std::fopen(path.c_str(), "w")) {
    if (!f_) throw ConfigError("output: cannot write '" + path + "'");
  }
  ~CsvWriter() {
    if (f_) std::fclose(f_);
  }
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& cols) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::fputs(k ? "," : "", f_);
      std::fputs(cols[k].c_str(), f_);
    }
    std::fputc('\n', f_);
  }
  CsvWriter& num(double v) {
    sep();
    std::fprintf(f_, "%.17g", v);
    return *this;
  }
  CsvWriter& integer(long v) {
    sep();
    std::fprintf(f_, "%ld", v);
    return *this;
  }
  CsvWriter& vec(const Vec& v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) num(v(k));
    return *this;
  }
  void end() {
    std::fputc('\n', f_);
    first_ = true;
  }

 private:
  void sep() {
    if (!first_) std::fputc(',', f_);
    first_ = false;
  }
  std::FILE* f_;
  bool first_ = true;
};

const char* kAxes = "xyz";

std::vector<std::string> trajectory_columns(int n, int M) {
  std::vector<std::string> cols{"t"};
  for (const char* pre : {"p_", "v_", "u_"}) {
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < M; ++c) {
        cols.push_back(pre + std::to_string(i + 1) + kAxes[c]);
      }
    }
  }
  return cols;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

nlohmann::json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          int n, int M) {
  CsvWriter w(path);
  w.header(trajectory_columns(n, M));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    w.num(traj.states[k].t)
        .vec(traj.states[k].p)
        .vec(traj.states[k].v)
        .vec(traj.inputs[k])
        .end();
  }
}

Trajectory read_trajectory_csv(const std::string& path, int n, int M) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trajectory: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory: empty file");
  const auto expected = trajectory_columns(n, M);
  if (split(line) != expected) {
    throw ConfigError("trajectory: header does not match n = " +
                      std::to_string(n) + ", M = " + std::to_string(M));
  }
  const int N = n * M;
  Trajectory traj;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != expected.size()) {
      throw ConfigError("trajectory: row " + std::to_string(row) +
                        " has the wrong number of columns");
    }
    std::vector<double> v(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        v[c] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("trajectory: bad number '" + cells[c] + "' in row " +
                          std::to_string(row));
      }
    }
    SystemState x;
    x.t = v[0];
    x.p = Eigen::Map<const Vec>(v.data() + 1, N);
    x.v = Eigen::Map<const Vec>(v.data() + 1 + N, N);
    traj.states.push_back(std::move(x));
    traj.inputs.push_back(Eigen::Map<const Vec>(v.data() + 1 + 2 * N, N));
  }
  if (traj.size() < 2) throw ConfigError("trajectory: need at least 2 rows");
  traj.dt = traj.states[1].t - traj.states[0].t;
  if (!(traj.dt > 0.0)) throw ConfigError("trajectory: time must increase");
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double expect = traj.states[0].t + k * traj.dt;
    if (std::abs(traj.states[k].t - expect) > 1e-6 * traj.dt + 1e-12) {
      throw ConfigError("trajectory: non-uniform time grid at row " +
                        std::to_string(k + 2));
    }
  }
  return traj;
}

void write_metrics_csv(const std::string& path, const MetricSeries& m) {
  CsvWriter w(path);
  w.header({"t", "l_tr", "l_fo1", "l_fo2", "l_in", "l_tf"});
  for (std::size_t k = 0; k < m.size(); ++k) {
    w.num(m.t[k]).num(m.l_tr[k]).num(m.l_fo1[k]).num(m.l_fo2[k]);
    w.num(m.l_in[k]).num(m.l_tf[k]).end();
  }
}

void write_edges_csv(const std::string& path, const MetricSeries& m,
                     std::size_t stride) {
  if (stride == 0) stride = 1;
  CsvWriter w(path);
  w.header({"t", "edge_i", "edge_j", "s_err", "sigma", "sigma_d1",
            "vel_mismatch"});
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (k % stride != 0 && k + 1 != m.size()) continue;
    for (const EdgeError& e : m.edges[k]) {
      w.num(m.t[k]).integer(e.edge.i + 1).integer(e.edge.j + 1);
      w.num(e.s_err).num(e.sigma).num(e.sigma_d1).num(e.vel_mismatch).end();
    }
  }
}

void write_estimator_csv(const std::string& path,
                         const std::vector<EstimatorErrorRow>& rows) {
  CsvWriter w(path);
  w.header({"t", "i", "e_pc", "e_vc"});
  for (const auto& r : rows) {
    w.num(r.t).integer(r.agent + 1).num(r.e_pc).num(r.e_vc).end();
  }
}

void write_pronto_csv(const std::string& path, const ProntoReport& rep) {
  CsvWriter w(path);
  w.header({"iter", "cost", "dtheta", "direction_norm", "gamma"});
  for (std::size_t k = 0; k < rep.dtheta.size(); ++k) {
    w.integer(static_cast<long>(k + 1)).num(rep.cost[k]).num(rep.dtheta[k]);
    w.num(rep.direction_norm[k]).num(rep.gamma[k]).end();
  }
}

void write_costate_csv(const std::string& path, const Trajectory& traj,
                       const std::vector<Vec>& costate,
                       const CostateApproxResidual* residual) {
  if (costate.size() != traj.size()) {
    throw ConfigError("costate log does not match the trajectory grid");
  }
  CsvWriter w(path);
  std::vector<std::string> cols{"t"};
  const Eigen::Index L = costate.empty() ? 0 : costate.front().size();
  for (Eigen::Index k = 0; k < L; ++k) {
    cols.push_back("lambda_" + std::to_string(k + 1));
  }
  if (residual) {
    for (const char* c : {"res_tr1", "res_fo1", "res_tr2", "res_fo2"}) {
      cols.emplace_back(c);
    }
  }
  w.header(cols);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    w.num(traj.states[k].t).vec(costate[k]);
    if (residual) {
      w.num(residual->tr1[k]).num(residual->fo1[k]);
      w.num(residual->tr2[k]).num(residual->fo2[k]);
    }
    w.end();
  }
}

void write_verify_csv(const std::string& path, const Trajectory& traj,
                      const std::vector<double>& residual,
                      const SufficiencyReport& suff) {
  CsvWriter w(path);
  w.header({"t", "residual", "min_eig_Hxx", "sufficient_flag"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    w.num(traj.states[k].t).num(residual[k]).num(suff.min_eig[k]);
    w.integer(suff.sufficient[k] ? 1 : 0).end();
  }
}

std::string summary_json(const MetricSummary& s, const SimRecord* rec,
                         const Scenario& scn) {
  nlohmann::json j;
  nlohmann::json settle = nlohmann::json::object();
  for (const auto& [delta, t] : s.settling) {
    char key[32];
    std::snprintf(key, sizeof key, "%g", delta);
    settle[key] = opt_json(t);
  }
  j["settling_times"] = settle;
  j["total_energy"] = s.total_energy;
  j["average_energy"] = s.average_energy;
  j["mean_input_cost"] = s.mean_input_cost;
  j["terminal_edge_rel_error"] = s.terminal_edge_rel;
  j["terminal_velocity_mismatch"] = s.terminal_vel_mismatch;
  j["n"] = scn.n();
  j["M"] = scn.M();
  j["T"] = scn.T;
  if (rec) {
    j["mode"] = rec->mode;
    j["dt"] = rec->traj.dt;
    j["steps"] = rec->traj.steps();
    double umax = 0.0;
    for (const Vec& u : rec->traj.inputs) {
      umax = std::max(umax, u.lpNorm<Eigen::Infinity>());
    }
    j["max_abs_input"] = umax;
    if (rec->pronto) {
      const ProntoReport& p = *rec->pronto;
      j["pronto"] = {{"iterations", p.iterations},
                     {"termination", to_string(p.reason)},
                     {"initial_cost", p.cost.front()},
                     {"final_cost", p.cost.back()}};
    }
  }
  return j.dump(2) + "\n";
}

void save_record(const SimRecord& rec, const Scenario& scn,
                 const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("output: cannot create '" + dir + "'");
  const fs::path base(dir);
  const int n = scn.n();
  const int M = scn.M();

  write_trajectory_csv((base / "trajectory.csv").string(), rec.traj, n, M);
  const MetricSeries m = compute_metrics(rec.traj, rec.ref, scn.spec, scn.weights);
  write_metrics_csv((base / "metrics.csv").string(), m);
  write_edges_csv((base / "edges.csv").string(), m,
                  std::max<std::size_t>(1, m.size() / 2000));
  if (!rec.estimator_errors.empty()) {
    write_estimator_csv((base / "estimator.csv").string(), rec.estimator_errors);
  }
  if (!rec.costate.empty()) {
    write_costate_csv((base / "costate.csv").string(), rec.traj, rec.costate,
                      rec.costate_residual ? &*rec.costate_residual : nullptr);
  }
  if (rec.pronto) {
    write_pronto_csv((base / "pronto_iterations.csv").string(), *rec.pronto);
  }
  std::ofstream js(base / "summary.json");
  if (!js) throw ConfigError("output: cannot write summary.json");
  js << summary_json(summarize(m, scn.weights), &rec, scn);
}

}  // namespace formtrack
