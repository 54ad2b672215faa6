#pragma once

// Reference computations that share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& p) {
  Eigen::Matrix3d m;
  m << 0, -p.z(), p.y(), p.z(), 0, -p.x(), -p.y(), p.x(), 0;
  return m;
}

/// Truncated power series Σ_{k<terms} Aᵏ/k!.
inline Eigen::Matrix3d expm_series(const Eigen::Matrix3d& a, int terms = 50) {
  Eigen::Matrix3d sum = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity();
  for (int k = 1; k < terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

/// Ascending eigenvalues from Eigen's tridiagonal QR solver.
inline std::vector<double> eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd v = es.eigenvalues();
  return {v.data(), v.data() + v.size()};
}

/// Roots of the characteristic polynomial of a symmetric 3×3 matrix by the
/// trigonometric cubic formula. Loses half the digits at repeated roots.
inline std::vector<double> eigenvalues3(const Eigen::Matrix3d& a) {
  const double q = a.trace() / 3.0;
  const Eigen::Matrix3d b = a - q * Eigen::Matrix3d::Identity();
  const double p = std::sqrt((b * b).trace() / 6.0);
  if (p == 0.0) return {q, q, q};
  const double r = std::clamp((b / p).determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double pi = std::acos(-1.0);
  const double e1 = q + 2 * p * std::cos(phi);
  const double e3 = q + 2 * p * std::cos(phi + 2 * pi / 3);
  std::vector<double> out{e3, 3 * q - e1 - e3, e1};
  std::sort(out.begin(), out.end());
  return out;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
  std::size_t components() {
    std::size_t c = 0;
    for (std::size_t i = 0; i < parent.size(); ++i) c += find(i) == i;
    return c;
  }
};

/// Random connected edge list: a random spanning tree plus `extra` chords.
inline std::vector<std::pair<std::size_t, std::size_t>> random_connected(std::size_t n, std::size_t extra,
                                                                        std::mt19937_64& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t u = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    edges.emplace_back(u, v);
    used[u][v] = used[v][u] = true;
  }
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    if (a == b || used[a][b]) continue;
    edges.emplace_back(a, b);
    used[a][b] = used[b][a] = true;
  }
  return edges;
}

inline Eigen::Vector3d random_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector3d d(g(rng), g(rng), g(rng));
  return d.normalized() * radius * u(rng);
}

}  // namespace oracle
