#include "formtrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace formtrack {

using nlohmann::json;

Mat rot_z(double a) {
  Mat r(3, 3);
  r << std::cos(a), -std::sin(a), 0.0,
       std::sin(a), std::cos(a), 0.0,
       0.0, 0.0, 1.0;
  return r;
}

Mat rot_y(double a) {
  Mat r(3, 3);
  r << std::cos(a), 0.0, std::sin(a),
       0.0, 1.0, 0.0,
       -std::sin(a), 0.0, std::cos(a);
  return r;
}

RefPoint reference_path(const ReferenceParams& rp, double T, double t, int M) {
  constexpr double kSlack = 1e-9;
  if (!(t >= -kSlack && t <= T + kSlack)) {
    throw std::out_of_range("reference_path: t = " + std::to_string(t) +
                            " outside [0, " + std::to_string(T) + "]");
  }
  if (rp.kind == ReferenceParams::Kind::kSampled) {
    const auto& ts = rp.t;
    if (ts.size() < 2) throw ConfigError("reference: need >= 2 samples");
    if (t <= ts.front()) return {rp.p.front(), rp.v.front()};
    if (t >= ts.back()) return {rp.p.back(), rp.v.back()};
    const auto hi = std::upper_bound(ts.begin(), ts.end(), t) - ts.begin();
    const auto lo = hi - 1;
    const double a = (t - ts[lo]) / (ts[hi] - ts[lo]);
    return {(1.0 - a) * rp.p[lo] + a * rp.p[hi],
            (1.0 - a) * rp.v[lo] + a * rp.v[hi]};
  }
  if (M != 3) throw ConfigError("reference: the chicane path needs M = 3");
  const double arg = rp.sharpness * (t - 0.5 * T);
  const double sech = 1.0 / std::cosh(arg);
  Vec g(3), gd(3);
  g << rp.speed * t, rp.amplitude * std::tanh(arg), 0.0;
  gd << rp.speed, rp.amplitude * rp.sharpness * sech * sech, 0.0;
  const Mat R = rot_z(rp.rot_z) * rot_y(rp.rot_y);
  return {R * g, R * gd};
}

ReferencePath sample_reference(const ReferenceParams& params, double T,
                               double dt, int M) {
  const double steps_f = T / dt;
  const int K = static_cast<int>(std::llround(steps_f));
  ReferencePath r;
  r.p.reserve(K + 1);
  r.v.reserve(K + 1);
  for (int k = 0; k <= K; ++k) {
    RefPoint pt = reference_path(params, T, std::min(k * dt, T), M);
    r.p.push_back(std::move(pt.p));
    r.v.push_back(std::move(pt.v));
  }
  return r;
}

int Scenario::steps(double step) const {
  if (!(step > 0.0)) throw ConfigError("scenario: time step must be positive");
  const double ratio = T / step;
  const double K = std::round(ratio);
  if (K < 1.0 || std::abs(K * step - T) > 1e-9) {
    throw ConfigError("scenario: dt = " + std::to_string(step) +
                      " does not divide T = " + std::to_string(T));
  }
  return static_cast<int>(K);
}

void Scenario::validate() const {
  if (!(T > 0.0)) throw ConfigError("scenario: T must be positive");
  steps(dt);
  steps(pronto_dt);
  const int N = n() * M();
  if (x0.p.size() != N || x0.v.size() != N) {
    throw ConfigError("scenario: initial state has wrong size");
  }
  if (!x0.finite()) throw ConfigError("scenario: non-finite initial state");
  weights.validate(spec.graph, M());
  controller.validate();
  estimator.validate();
  pronto.validate();
  if (reference.kind == ReferenceParams::Kind::kChicane && M() != 3) {
    throw ConfigError("scenario: the chicane reference needs M = 3");
  }
  if (reference.kind == ReferenceParams::Kind::kSampled) {
    const auto& r = reference;
    if (r.t.size() < 2 || r.p.size() != r.t.size() || r.v.size() != r.t.size()) {
      throw ConfigError("scenario: sampled reference needs matching t, p, v");
    }
    for (std::size_t k = 0; k < r.t.size(); ++k) {
      if (r.p[k].size() != M() || r.v[k].size() != M()) {
        throw ConfigError("scenario: sampled reference has wrong dimension");
      }
      if (k > 0 && !(r.t[k] > r.t[k - 1])) {
        throw ConfigError("scenario: sampled reference times must increase");
      }
    }
    if (r.t.front() > 1e-9 || r.t.back() < T - 1e-9) {
      throw ConfigError("scenario: sampled reference must cover [0, T]");
    }
  }
}

Scenario build_cube_scenario() {
  const double d = 5.0;
  const double s2 = std::sqrt(2.0) * d;
  const double s3 = std::sqrt(3.0) * d;
  // 1-based, as listed for the cube
  const std::vector<std::tuple<int, int, double>> list = {
      {1, 2, d},  {1, 4, d},  {1, 5, d},  {1, 6, s2}, {1, 8, s2},
      {2, 3, d},  {2, 4, s2}, {2, 6, d},  {2, 8, s3}, {3, 4, d},
      {3, 5, s3}, {3, 6, s2}, {3, 7, d},  {4, 7, s2}, {4, 8, d},
      {5, 6, d},  {5, 7, s2}, {5, 8, d},  {6, 7, d},  {7, 8, d}};
  std::vector<std::pair<int, int>> edges;
  std::map<Edge, PotentialParams> pots;
  for (const auto& [i, j, dist] : list) {
    edges.emplace_back(i - 1, j - 1);
    PotentialParams pp;
    pp.d = dist;
    pots[Edge(i - 1, j - 1)] = pp;
  }
  Graph g(8, edges);
  FormationSpec spec(g, 3, pots);

  const double p0[8][3] = {{-6, 3, 24}, {-9, -3, 3}, {6, -6, 15},
                           {15, 3, 15}, {-3, -18, 6}, {6, 6, 6},
                           {-3, -15, -3}, {15, 6, 9}};
  const double v0[8][3] = {{10, 1, 0}, {10, 0, 0},  {0, 0, 0},
                           {15, -5, 5}, {0, 0, 5},  {5, 5, 5},
                           {0, 0, 0},  {-10, -25, 10}};
  SystemState x0;
  x0.p.resize(24);
  x0.v.resize(24);
  for (int i = 0; i < 8; ++i) {
    for (int c = 0; c < 3; ++c) {
      x0.p(3 * i + c) = p0[i][c];
      x0.v(3 * i + c) = v0[i][c];
    }
  }

  Scenario s(spec);
  s.x0 = x0;
  s.weights = CostWeights::uniform(g, 3, 1.25, 0.125, 1.0, 2.0, 0.25, 1.0);
  s.controller = ControllerGains{};
  s.estimator = EstimatorGains{};
  s.pronto = ProntoConfig{};
  s.T = 20.0;
  s.dt = 1e-3;
  s.pronto_dt = 0.01;
  s.reference = ReferenceParams{};
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const json& req(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError("config: missing required key '" + std::string(key) +
                      "' in " + ctx);
  }
  return j.at(key);
}

double num(const json& j, const char* key, const std::string& ctx) {
  const json& v = req(j, key, ctx);
  if (!v.is_number()) {
    throw ConfigError("config: key '" + std::string(key) + "' in " + ctx +
                      " must be a number");
  }
  return v.get<double>();
}

double num_or(const json& j, const char* key, double fallback,
              const std::string& ctx) {
  return j.contains(key) ? num(j, key, ctx) : fallback;
}

Vec to_vec(const json& j, int size, const std::string& ctx) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw ConfigError("config: " + ctx + " must be an array of " +
                      std::to_string(size) + " numbers");
  }
  Vec v(size);
  for (int k = 0; k < size; ++k) {
    if (!j[k].is_number()) throw ConfigError("config: " + ctx + " not numeric");
    v(k) = j[k].get<double>();
  }
  return v;
}

// Row-major nested arrays.
Mat to_mat(const json& j, int rows, int cols, const std::string& ctx) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ConfigError("config: " + ctx + " must have " + std::to_string(rows) +
                      " rows");
  }
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    m.row(r) = to_vec(j[r], cols, ctx).transpose();
  }
  return m;
}

json from_vec(const Vec& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json from_mat(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(from_vec(m.row(r)));
  return a;
}

// n x M row-major block of per-agent vectors
Vec agent_rows(const json& j, int n, int M, const std::string& ctx) {
  const Mat m = to_mat(j, n, M, ctx);
  Vec out(n * M);
  for (int i = 0; i < n; ++i) out.segment(i * M, M) = m.row(i).transpose();
  return out;
}

json agent_rows_json(const Vec& v, int n, int M) {
  json a = json::array();
  for (int i = 0; i < n; ++i) a.push_back(from_vec(v.segment(i * M, M)));
  return a;
}

std::vector<Mat> per_agent_mats(const json& j, int n, int M,
                                const std::string& ctx) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw ConfigError("config: " + ctx + " needs one matrix per agent");
  }
  std::vector<Mat> out;
  for (int i = 0; i < n; ++i) out.push_back(to_mat(j[i], M, M, ctx));
  return out;
}

int agent_index(const json& j, const char* key, int n, const std::string& ctx) {
  const json& v = req(j, key, ctx);
  if (!v.is_number_integer()) {
    throw ConfigError("config: " + ctx + "." + key + " must be an integer");
  }
  const int i = v.get<int>();
  if (i < 1 || i > n) {
    throw ConfigError("config: agent index " + std::to_string(i) +
                      " out of range 1.." + std::to_string(n));
  }
  return i - 1;
}

PotentialParams read_potential(const json& j, PotentialParams base,
                               const std::string& ctx) {
  base.k_r = num_or(j, "k_r", base.k_r, ctx);
  base.k_a = num_or(j, "k_a", base.k_a, ctx);
  base.beta = num_or(j, "beta", base.beta, ctx);
  base.alpha = num_or(j, "alpha", base.alpha, ctx);
  return base;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  const std::string top = "scenario";
  const json& nj = req(root, "n", top);
  const json& Mj = req(root, "M", top);
  if (!nj.is_number_integer() || !Mj.is_number_integer()) {
    throw ConfigError("config: n and M must be integers");
  }
  const int n = nj.get<int>();
  const int M = Mj.get<int>();
  if (n < 2) throw ConfigError("config: n must be >= 2");
  if (M < 1 || M > 3) throw ConfigError("config: M must be 1, 2 or 3");

  PotentialParams base;
  if (root.contains("potential")) {
    base = read_potential(root["potential"], base, "potential");
  }
  const json& ej = req(root, "edges", top);
  if (!ej.is_array() || ej.empty()) {
    throw ConfigError("config: edges must be a non-empty array");
  }
  std::vector<std::pair<int, int>> edges;
  std::map<Edge, PotentialParams> pots;
  for (std::size_t k = 0; k < ej.size(); ++k) {
    const std::string ctx = "edges[" + std::to_string(k) + "]";
    const int i = agent_index(ej[k], "i", n, ctx);
    const int jj = agent_index(ej[k], "j", n, ctx);
    PotentialParams pp = read_potential(ej[k], base, ctx);
    pp.d = num(ej[k], "d", ctx);
    edges.emplace_back(i, jj);
    pots[Edge(i, jj)] = pp;
  }
  Graph g(n, edges);
  FormationSpec spec(g, M, pots);

  Scenario s(spec);
  s.x0.p = agent_rows(req(root, "p0", top), n, M, "p0");
  s.x0.v = agent_rows(req(root, "v0", top), n, M, "v0");
  s.T = num(root, "T", top);
  s.dt = num(root, "dt", top);

  const json& wj = req(root, "weights", top);
  if (wj.contains("Q_c")) {
    s.weights.Q_c = per_agent_mats(wj["Q_c"], n, M, "weights.Q_c");
    s.weights.Q_cdot =
        per_agent_mats(req(wj, "Q_cdot", "weights"), n, M, "weights.Q_cdot");
    s.weights.R = per_agent_mats(req(wj, "R", "weights"), n, M, "weights.R");
    s.weights.k_F = num(wj, "k_F", "weights");
    s.weights.k_A = num(wj, "k_A", "weights");
    const json& tj = req(wj, "Theta", "weights");
    if (!tj.is_array()) throw ConfigError("config: weights.Theta must be a list");
    for (std::size_t k = 0; k < tj.size(); ++k) {
      const std::string ctx = "weights.Theta[" + std::to_string(k) + "]";
      const int i = agent_index(tj[k], "i", n, ctx);
      const int jj = agent_index(tj[k], "j", n, ctx);
      s.weights.Theta[Edge(i, jj)] = to_mat(req(tj[k], "matrix", ctx), M, M, ctx);
    }
  } else {
    s.weights = CostWeights::uniform(
        g, M, num(wj, "q_p", "weights"), num(wj, "q_d", "weights"),
        num(wj, "r", "weights"), num(wj, "k_F", "weights"),
        num(wj, "k_A", "weights"), num_or(wj, "theta", 1.0, "weights"));
  }

  const json& cj = req(root, "controller", top);
  s.controller.kp_tr1 = num(cj, "kp_tr1", "controller");
  s.controller.kd_tr1 = num(cj, "kd_tr1", "controller");
  s.controller.kp_fo1 = num(cj, "kp_fo1", "controller");
  s.controller.kd_fo1 = num(cj, "kd_fo1", "controller");
  s.controller.kp_tr2 = num(cj, "kp_tr2", "controller");
  s.controller.kp_fo2 = num(cj, "kp_fo2", "controller");
  if (cj.contains("U") && !cj["U"].is_null()) {
    s.controller.U = num(cj, "U", "controller");
  } else {
    s.controller.U.reset();
  }

  const json& sj = req(root, "estimator", top);
  s.estimator.k_py = num(sj, "k_py", "estimator");
  s.estimator.k_dy = num(sj, "k_dy", "estimator");
  const std::string init = sj.value("init", std::string("degree_weighted"));
  if (init == "degree_weighted") {
    s.estimator_init = InitRule::kDegreeWeighted;
  } else if (init == "uniform") {
    s.estimator_init = InitRule::kUniform;
  } else {
    throw ConfigError("config: estimator.init must be degree_weighted or uniform");
  }

  if (root.contains("pronto")) {
    const json& pj = root["pronto"];
    ProntoConfig& c = s.pronto;
    c.k_p = num_or(pj, "k_p", c.k_p, "pronto");
    c.k_d = num_or(pj, "k_d", c.k_d, "pronto");
    c.max_iter = static_cast<int>(num_or(pj, "max_iter", c.max_iter, "pronto"));
    c.descent_tol = num_or(pj, "descent_tol", c.descent_tol, "pronto");
    c.armijo_alpha = num_or(pj, "armijo_alpha", c.armijo_alpha, "pronto");
    c.armijo_beta = num_or(pj, "armijo_beta", c.armijo_beta, "pronto");
    c.max_backtracks = static_cast<int>(
        num_or(pj, "max_backtracks", c.max_backtracks, "pronto"));
    s.pronto_dt = num_or(pj, "dt", s.pronto_dt, "pronto");
  }

  const json& rj = req(root, "reference", top);
  const std::string kind = req(rj, "kind", "reference").get<std::string>();
  if (kind == "rotated_tanh_chicane") {
    ReferenceParams& r = s.reference;
    r.kind = ReferenceParams::Kind::kChicane;
    r.speed = num(rj, "speed", "reference");
    r.amplitude = num(rj, "amplitude", "reference");
    r.sharpness = num(rj, "sharpness", "reference");
    r.rot_z = num(rj, "rot_z", "reference");
    r.rot_y = num(rj, "rot_y", "reference");
  } else if (kind == "sampled") {
    ReferenceParams& r = s.reference;
    r.kind = ReferenceParams::Kind::kSampled;
    const json& tj = req(rj, "t", "reference");
    const std::size_t K = tj.size();
    const Vec tv = to_vec(tj, static_cast<int>(K), "reference.t");
    r.t.assign(tv.data(), tv.data() + tv.size());
    const Mat pm = to_mat(req(rj, "p", "reference"), K, M, "reference.p");
    const Mat vm = to_mat(req(rj, "v", "reference"), K, M, "reference.v");
    for (std::size_t k = 0; k < K; ++k) {
      r.p.push_back(pm.row(k).transpose());
      r.v.push_back(vm.row(k).transpose());
    }
  } else {
    throw ConfigError("config: unknown reference kind '" + kind + "'");
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string dump_scenario(const Scenario& s) {
  const int n = s.n();
  const int M = s.M();
  json root;
  root["_comment"] =
      "Agent indices are 1-based, matrices row-major. The chicane reference "
      "is Rz(rot_z) Ry(rot_y) (speed t, amplitude tanh(sharpness (t - T/2)), "
      "0) with right-handed rotations; Ry acts first. No offset is added.";
  root["n"] = n;
  root["M"] = M;
  root["T"] = s.T;
  root["dt"] = s.dt;
  json edges = json::array();
  for (const Edge& e : s.spec.graph.edges()) {
    const PotentialParams& pp = s.spec.params(e.i, e.j);
    edges.push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"d", pp.d},
                     {"k_r", pp.k_r}, {"k_a", pp.k_a}, {"beta", pp.beta},
                     {"alpha", pp.alpha}});
  }
  root["edges"] = edges;
  root["p0"] = agent_rows_json(s.x0.p, n, M);
  root["v0"] = agent_rows_json(s.x0.v, n, M);

  json w;
  auto mats = [](const std::vector<Mat>& v) {
    json a = json::array();
    for (const Mat& m : v) a.push_back(from_mat(m));
    return a;
  };
  w["Q_c"] = mats(s.weights.Q_c);
  w["Q_cdot"] = mats(s.weights.Q_cdot);
  w["R"] = mats(s.weights.R);
  w["k_F"] = s.weights.k_F;
  w["k_A"] = s.weights.k_A;
  json theta = json::array();
  for (const auto& [e, m] : s.weights.Theta) {
    theta.push_back({{"i", e.i + 1}, {"j", e.j + 1}, {"matrix", from_mat(m)}});
  }
  w["Theta"] = theta;
  root["weights"] = w;

  const ControllerGains& c = s.controller;
  root["controller"] = {{"kp_tr1", c.kp_tr1}, {"kd_tr1", c.kd_tr1},
                        {"kp_fo1", c.kp_fo1}, {"kd_fo1", c.kd_fo1},
                        {"kp_tr2", c.kp_tr2}, {"kp_fo2", c.kp_fo2}};
  root["controller"]["U"] = c.U ? json(*c.U) : json(nullptr);
  root["estimator"] = {
      {"k_py", s.estimator.k_py},
      {"k_dy", s.estimator.k_dy},
      {"init", s.estimator_init == InitRule::kUniform ? "uniform"
                                                      : "degree_weighted"}};
  const ProntoConfig& p = s.pronto;
  root["pronto"] = {{"k_p", p.k_p},
                    {"k_d", p.k_d},
                    {"max_iter", p.max_iter},
                    {"descent_tol", p.descent_tol},
                    {"armijo_alpha", p.armijo_alpha},
                    {"armijo_beta", p.armijo_beta},
                    {"max_backtracks", p.max_backtracks},
                    {"dt", s.pronto_dt}};
  const ReferenceParams& r = s.reference;
  if (r.kind == ReferenceParams::Kind::kChicane) {
    root["reference"] = {{"kind", "rotated_tanh_chicane"},
                         {"speed", r.speed},
                         {"amplitude", r.amplitude},
                         {"sharpness", r.sharpness},
                         {"rot_z", r.rot_z},
                         {"rot_y", r.rot_y}};
  } else {
    json pj = json::array(), vj = json::array();
    for (const Vec& v : r.p) pj.push_back(from_vec(v));
    for (const Vec& v : r.v) vj.push_back(from_vec(v));
    root["reference"] = {{"kind", "sampled"}, {"t", r.t}, {"p", pj}, {"v", vj}};
  }
  return root.dump(2) + "\n";
}

void save_scenario(const Scenario& scn, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("config: cannot write '" + path + "'");
  out << dump_scenario(scn);
}

}  // namespace formtrack
