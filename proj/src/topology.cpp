#include "formtrack/topology.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace formtrack {

Graph::Graph(int n, std::vector<std::pair<int, int>> edges) : n_(n), adj_(n) {
  if (n < 2) {
    throw ConfigError("graph: need at least 2 agents, got " +
                      std::to_string(n));
  }
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n || b >= n) {
      throw ConfigError("graph: edge (" + std::to_string(a + 1) + "," +
                        std::to_string(b + 1) + ") out of range");
    }
    if (a == b) {
      throw ConfigError("graph: self-loop at agent " + std::to_string(a + 1));
    }
    Edge e(a, b);
    if (adj_[e.i].count(e.j)) {
      throw ConfigError("graph: duplicate edge (" + std::to_string(e.i + 1) +
                        "," + std::to_string(e.j + 1) + ")");
    }
    adj_[e.i].insert(e.j);
    adj_[e.j].insert(e.i);
    edges_.push_back(e);
  }
  std::sort(edges_.begin(), edges_.end());

  std::vector<bool> seen(n, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int v = frontier.front();
    frontier.pop();
    for (int w : adj_[v]) {
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        frontier.push(w);
      }
    }
  }
  if (reached != n) {
    throw ConfigError("graph: not connected (" + std::to_string(reached) +
                      " of " + std::to_string(n) + " agents reachable)");
  }
}

bool Graph::has_edge(int i, int j) const {
  return i != j && adj_[i].count(j) > 0;
}

Graph Graph::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return Graph(n, std::move(e));
}

Graph Graph::path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, std::move(e));
}

FormationSpec::FormationSpec(Graph g, int dim,
                             std::map<Edge, PotentialParams> params)
    : graph(std::move(g)), M(dim), potentials(std::move(params)) {
  if (M < 1 || M > 3) {
    throw ConfigError("formation: dimension M must be 1, 2 or 3");
  }
  for (const Edge& e : graph.edges()) {
    auto it = potentials.find(e);
    if (it == potentials.end()) {
      throw ConfigError("formation: edge (" + std::to_string(e.i + 1) + "," +
                        std::to_string(e.j + 1) + ") has no parameters");
    }
    it->second.validate();
  }
  if (potentials.size() != graph.edges().size()) {
    throw ConfigError("formation: parameters given for a non-edge");
  }
}

Mat adjacency(const Graph& g) {
  Mat a = Mat::Zero(g.n(), g.n());
  for (const Edge& e : g.edges()) {
    a(e.i, e.j) = 1.0;
    a(e.j, e.i) = 1.0;
  }
  return a;
}

Mat laplacian(const Graph& g) {
  Mat l = -adjacency(g);
  for (int i = 0; i < g.n(); ++i) l(i, i) = g.degree(i);
  return l;
}

Mat rigidity_matrix(const FormationSpec& spec, const Vec& positions) {
  const int M = spec.M;
  const auto& edges = spec.graph.edges();
  Mat r = Mat::Zero(static_cast<Eigen::Index>(edges.size()), positions.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    const Vec e = positions.segment(i * M, M) - positions.segment(j * M, M);
    r.block(k, i * M, 1, M) = e.transpose();
    r.block(k, j * M, 1, M) = -e.transpose();
  }
  return r;
}

int numeric_rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = rel_tol * sv(0);
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > cutoff) ++rank;
  return rank;
}

bool is_infinitesimally_rigid(const FormationSpec& spec,
                              const Vec& positions) {
  const int M = spec.M;
  if (M < 2) {
    throw ConfigError("rigidity: unsupported dimension M = 1");
  }
  const int n = spec.graph.n();
  const int expected = n * M - M * (M + 1) / 2;
  return numeric_rank(rigidity_matrix(spec, positions)) == expected;
}

Mat augmented_laplacian(const Graph& g, int M) {
  const int n = g.n();
  const int N = n * M;
  const Mat lap = laplacian(g);
  Mat w = Mat::Zero(n * N, n * N);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (lap(a, b) != 0.0) {
        w.block(a * N, b * N, N, N).diagonal().setConstant(lap(a, b));
      }
    }
    // N_a keeps agent a's own block of its N-dimensional estimate.
    w.block(a * N + a * M, a * N + a * M, M, M).diagonal().array() += 1.0;
  }
  return w;
}

double topological_constant(const Graph& g, int M) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(augmented_laplacian(g, M),
                                         Eigen::EigenvaluesOnly);
  // W is symmetric positive definite, so rho(W^-1) = 1 / lambda_min(W).
  return 1.0 / eig.eigenvalues().minCoeff();
}

}  // namespace formtrack
