#include "attsync/filippov.hpp"

#include "attsync/errors.hpp"
#include "attsync/so3.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <variant>

namespace attsync {

namespace {

Eigen::Vector3d body_rate(const StackedState& x, const Eigen::VectorXd& nu, std::size_t i) {
  try {
    const TransitionMatrix l = transition_matrix(x.agent(i));
    return l.m.partialPivLu().solve(nu.segment<3>(static_cast<Eigen::Index>(3 * i)));
  } catch (const OutOfDomain&) {
    std::ostringstream os;
    os << "agent " << i + 1 << " outside the transition domain";
    throw OutOfDomain(os.str(), i, x.t);
  }
}

double sign_residual(const Eigen::Vector3d& w, const Eigen::Vector3d& arg) {
  const double mag = arg.norm();
  if (mag < kFilippovZero) return std::max(0.0, w.norm() - 1.0);
  return (w - arg / mag).norm();
}

double scalar_sign_residual(double w, double arg) {
  if (std::abs(arg) < kFilippovZero) return std::max(0.0, std::abs(w) - 1.0);
  return std::abs(w - (arg > 0.0 ? 1.0 : -1.0));
}

/// Edmonds–Karp on a dense residual-capacity matrix.
double max_flow(Eigen::MatrixXd cap, Eigen::Index source, Eigen::Index sink) {
  const Eigen::Index n = cap.rows();
  double total = 0.0;
  constexpr double kEps = 1e-15;
  while (true) {
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n), -1);
    parent[static_cast<std::size_t>(source)] = source;
    std::queue<Eigen::Index> q;
    q.push(source);
    while (!q.empty() && parent[static_cast<std::size_t>(sink)] < 0) {
      const Eigen::Index u = q.front();
      q.pop();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (parent[static_cast<std::size_t>(v)] < 0 && cap(u, v) > kEps) {
          parent[static_cast<std::size_t>(v)] = u;
          q.push(v);
        }
      }
    }
    if (parent[static_cast<std::size_t>(sink)] < 0) break;
    double push = std::numeric_limits<double>::infinity();
    for (Eigen::Index v = sink; v != source; v = parent[static_cast<std::size_t>(v)]) {
      push = std::min(push, cap(parent[static_cast<std::size_t>(v)], v));
    }
    for (Eigen::Index v = sink; v != source; v = parent[static_cast<std::size_t>(v)]) {
      const Eigen::Index u = parent[static_cast<std::size_t>(v)];
      cap(u, v) -= push;
      cap(v, u) += push;
    }
    total += push;
  }
  return total;
}

/// Coordinate k of the componentwise protocol: can the tied edges absorb
/// what the decided edges leave unexplained?
double componentwise_residual(const StackedState& x, const Eigen::MatrixXd& omega, const Topology& t,
                              Eigen::Index k) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::VectorXd demand = omega.col(k);
  Eigen::MatrixXd cap = Eigen::MatrixXd::Zero(n + 2, n + 2);
  for (const Edge& e : t.edges()) {
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    const double diff = x.x(3 * j + k) - x.x(3 * i + k);
    if (std::abs(diff) < kFilippovZero) {
      cap(i, j) += e.weight;
      cap(j, i) += e.weight;
    } else {
      const double s = diff > 0.0 ? 1.0 : -1.0;
      demand(i) -= e.weight * s;
      demand(j) += e.weight * s;
    }
  }
  // A tied edge carrying s ∈ [−1, 1] adds w·s to ω_i and −w·s to ω_j: a flow
  // from j to i. Nodes with negative demand supply, positive demand absorb.
  const Eigen::Index source = n;
  const Eigen::Index sink = n + 1;
  double supply = 0.0;
  double absorb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (demand(i) < 0.0) {
      cap(source, i) = -demand(i);
      supply -= demand(i);
    } else {
      cap(i, sink) = demand(i);
      absorb += demand(i);
    }
  }
  return std::max(supply, absorb) - max_flow(cap, source, sink);
}

}  // namespace

MembershipReport filippov_residual(const StackedState& x, const Eigen::VectorXd& nu,
                                   const ProtocolConfig& cfg) {
  const std::size_t n = cfg.agent_count();
  if (x.agents() != n || nu.size() != x.x.size()) {
    throw InvalidConfig("state, velocity and configuration sizes disagree");
  }
  Eigen::MatrixXd omega(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) omega.row(static_cast<Eigen::Index>(i)) = body_rate(x, nu, i);

  MembershipReport report;
  auto note = [&report](double r, std::optional<std::size_t> agent) {
    if (r > report.residual) {
      report.residual = r;
      report.worst_agent = agent;
    }
  };

  if (cfg.protocol() == Protocol::DirectionPreserving) {
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::Vector3d w = omega.row(static_cast<Eigen::Index>(i)).transpose();
      const Eigen::Vector3d arg = disagreement(x.x, cfg.topology(), i);
      const ControllerKind& kind = cfg.kinds()[i];
      double r = 0.0;
      if (std::holds_alternative<SignDirectional>(kind)) {
        r = sign_residual(w, arg);
      } else if (std::holds_alternative<SignComponentwise>(kind)) {
        for (Eigen::Index k = 0; k < 3; ++k) r = std::max(r, scalar_sign_residual(w(k), arg(k)));
      } else {
        r = (w - apply_controller(kind, arg)).norm();
      }
      note(r, i);
    }
  } else {
    for (Eigen::Index k = 0; k < 3; ++k) {
      note(componentwise_residual(x, omega, cfg.topology(), k), std::nullopt);
    }
  }
  return report;
}

bool filippov_membership(const StackedState& x, const Eigen::VectorXd& nu, const ProtocolConfig& cfg,
                         double tol) {
  return filippov_residual(x, nu, cfg).residual <= tol;
}

StackedState sliding_consensus_trajectory(const AxisAngle& xbar, double eps1, double t0, double t,
                                          std::size_t n) {
  const double norm = xbar.norm();
  if (!(norm > 0.0)) throw InvalidConfig("sliding trajectory needs a nonzero consensus point");
  if (!(eps1 > 0.0 && eps1 < 1.0)) throw InvalidConfig("sliding speed eps1 must lie in (0, 1)");
  const AxisAngle eta = (t - t0) * eps1 * (xbar / norm) + xbar;
  return StackedState::consensus(n, eta, t);
}

Eigen::VectorXd sliding_consensus_velocity(const AxisAngle& xbar, double eps1, std::size_t n) {
  const double norm = xbar.norm();
  if (!(norm > 0.0)) throw InvalidConfig("sliding trajectory needs a nonzero consensus point");
  return StackedState::consensus(n, eps1 * (xbar / norm)).x;
}

double sliding_crossing_time(const AxisAngle& xbar, double eps1, double t0) {
  if (!(eps1 > 0.0)) throw InvalidConfig("sliding speed eps1 must be positive");
  return t0 + (std::numbers::pi - xbar.norm()) / eps1;
}

}  // namespace attsync
