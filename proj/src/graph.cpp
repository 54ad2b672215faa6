#include "attsync/graph.hpp"

#include "attsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

namespace attsync {

Topology::Topology(std::size_t n, std::vector<Edge> edges)
    : n_(n), edges_(std::move(edges)), adjacency_(n) {
  if (n_ == 0) throw InvalidTopology("topology needs at least one node");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Edge& e : edges_) {
    std::ostringstream where;
    where << "edge (" << e.i << ", " << e.j << "): ";
    if (e.i >= n_ || e.j >= n_) throw InvalidTopology(where.str() + "node index out of range");
    if (e.i == e.j) throw InvalidTopology(where.str() + "self-loops are not allowed");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw InvalidTopology(where.str() + "weight must be positive and finite");
    }
    if (!seen.emplace(std::min(e.i, e.j), std::max(e.i, e.j)).second) {
      throw InvalidTopology(where.str() + "duplicate edge");
    }
    adjacency_[e.i].emplace_back(e.j, e.weight);
    adjacency_[e.j].emplace_back(e.i, e.weight);
  }
}

Topology Topology::path(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Topology(n, std::move(edges));
}

Topology Topology::complete(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  }
  return Topology(n, std::move(edges));
}

double Topology::degree(std::size_t i) const {
  double d = 0.0;
  for (const auto& [j, w] : adjacency_[i]) d += w;
  return d;
}

Eigen::MatrixXd laplacian(const Topology& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : t.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    l(i, j) -= e.weight;
    l(j, i) -= e.weight;
    l(i, i) += e.weight;
    l(j, j) += e.weight;
  }
  return l;
}

Eigen::MatrixXd incidence(const Topology& t) {
  const auto n = static_cast<Eigen::Index>(t.size());
  const auto m = static_cast<Eigen::Index>(t.edges().size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Edge& e = t.edges()[static_cast<std::size_t>(k)];
    b(static_cast<Eigen::Index>(e.i), k) = 1.0;
    b(static_cast<Eigen::Index>(e.j), k) = -1.0;
  }
  return b;
}

std::size_t component_count(const Topology& t) {
  std::vector<bool> visited(t.size(), false);
  std::size_t components = 0;
  for (std::size_t start = 0; start < t.size(); ++start) {
    if (visited[start]) continue;
    ++components;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    visited[start] = true;
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop();
      for (const auto& [v, w] : t.neighbors(u)) {
        if (!visited[v]) {
          visited[v] = true;
          frontier.push(v);
        }
      }
    }
  }
  return components;
}

bool is_connected(const Topology& t) { return component_count(t) == 1; }

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw NotSymmetric("matrix is not square");
  if (((m - m.transpose()).array().abs() > 1e-12).any()) {
    throw NotSymmetric("matrix is not symmetric within 1e-12");
  }
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd a = 0.5 * (m + m.transpose());

  auto off_norm = [&a, n] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
    }
    return std::sqrt(s);
  };
  // Absolute 1e-12 is reachable for moderate norms; large matrices stop at
  // a few ulps of their own scale instead.
  const double target = std::max(1e-12, 4.0 * std::numeric_limits<double>::epsilon() * a.norm());

  for (int sweep = 0; sweep < 100 && off_norm() >= target; ++sweep) {
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, tau) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
      }
    }
  }

  std::vector<double> eig(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) eig[static_cast<std::size_t>(k)] = a(k, k);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double algebraic_connectivity(const Topology& t) {
  if (t.size() < 2 || !is_connected(t)) {
    throw Disconnected("algebraic connectivity requires a connected graph with n >= 2");
  }
  return symmetric_eigenvalues(laplacian(t))[1];
}

}  // namespace attsync
