#pragma once

#include <map>
#include <set>
#include <utility>
#include <vector>

#include "formtrack/potentials.hpp"
#include "formtrack/types.hpp"

namespace formtrack {

/// Unordered agent pair stored with i < j (0-based).
struct Edge {
  int i = 0;
  int j = 0;

  Edge() = default;
  Edge(int a, int b) : i(a < b ? a : b), j(a < b ? b : a) {}

  auto operator<=>(const Edge&) const = default;
};

/// Undirected, connected communication/formation graph.
///
/// Immutable after construction. Construction rejects self-loops, duplicate
/// edges, out-of-range indices and disconnected graphs.
class Graph {
 public:
  Graph(int n, std::vector<std::pair<int, int>> edges);

  int n() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::set<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  bool has_edge(int i, int j) const;

  /// Closed neighborhood: neighbors of i plus i itself.
  bool in_closed_neighborhood(int i, int j) const {
    return i == j || has_edge(i, j);
  }

  static Graph complete(int n);
  static Graph path(int n);

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::set<int>> adj_;
};

/// Graph plus desired edge lengths and per-edge potential parameters.
struct FormationSpec {
  Graph graph;
  int M = 3;
  std::map<Edge, PotentialParams> potentials;  // d lives in PotentialParams

  FormationSpec(Graph g, int dim, std::map<Edge, PotentialParams> params);

  Dims dims() const { return {graph.n(), M}; }
  const PotentialParams& params(int i, int j) const {
    return potentials.at(Edge(i, j));
  }
  double desired_distance(int i, int j) const { return params(i, j).d; }
};

Mat adjacency(const Graph& g);
Mat laplacian(const Graph& g);

/// |E| x nM matrix; the row of edge (i,j) holds (p_i - p_j)^T in block i and
/// (p_j - p_i)^T in block j.
Mat rigidity_matrix(const FormationSpec& spec, const Vec& positions);

/// Numeric rank with singular values below 1e-9 * sigma_max treated as zero.
int numeric_rank(const Mat& m, double rel_tol = 1e-9);

/// rank(R) == nM - M(M+1)/2. Throws ConfigError for M == 1.
bool is_infinitesimally_rigid(const FormationSpec& spec, const Vec& positions);

/// The nN x nN matrix (L kron I_N) + Diag(N_1..N_n) of the centroid estimator
/// error dynamics, N_i selecting agent i's M-block.
Mat augmented_laplacian(const Graph& g, int M);

/// Spectral radius of the inverse of augmented_laplacian(g, M).
double topological_constant(const Graph& g, int M);

}  // namespace formtrack
