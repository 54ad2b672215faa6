#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace attsync {

struct Edge {
  std::size_t i;
  std::size_t j;
  double weight = 1.0;

  bool operator==(const Edge&) const = default;
};

/// Undirected weighted communication graph on nodes 0..n-1.
///
/// Edge order is part of the value: the incidence matrix orients the k-th
/// edge from `i` (+1) to `j` (−1).
class Topology {
 public:
  /// Throws InvalidTopology on self-loops, duplicate pairs, out-of-range
  /// nodes, non-positive weights, or n < 1.
  Topology(std::size_t n, std::vector<Edge> edges);

  static Topology path(std::size_t n);
  static Topology complete(std::size_t n);

  std::size_t size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  /// Neighbours of node i with the connecting weight.
  const std::vector<std::pair<std::size_t, double>>& neighbors(std::size_t i) const {
    return adjacency_[i];
  }
  double degree(std::size_t i) const;

  bool operator==(const Topology& other) const {
    return n_ == other.n_ && edges_ == other.edges_;
  }

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency_;
};

/// L = Δ − A.
Eigen::MatrixXd laplacian(const Topology& t);

/// Unit-weight incidence matrix, n × m, one column per edge in listing order.
Eigen::MatrixXd incidence(const Topology& t);

bool is_connected(const Topology& t);

/// Number of connected components (breadth-first).
std::size_t component_count(const Topology& t);

/// All eigenvalues of a symmetric matrix in ascending order, by cyclic Jacobi
/// rotations. Throws NotSymmetric if |M − Mᵀ| exceeds 1e-12 anywhere.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m);

/// Second-smallest Laplacian eigenvalue. Throws Disconnected when the graph
/// is not connected.
double algebraic_connectivity(const Topology& t);

}  // namespace attsync
