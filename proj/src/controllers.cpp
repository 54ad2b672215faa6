#include "attsync/controllers.hpp"

#include "attsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace attsync {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string controller_name(const ControllerKind& kind) {
  return std::visit(Overloaded{[](const SignDirectional&) { return std::string("sign"); },
                               [](const SignComponentwise&) { return std::string("sign_c"); },
                               [](const LipschitzDirectional&) { return std::string("lipschitz"); }},
                    kind);
}

ProtocolConfig::ProtocolConfig(Topology topology, Protocol protocol, std::vector<ControllerKind> kinds)
    : topology_(std::move(topology)), protocol_(protocol), kinds_(std::move(kinds)) {}

ProtocolConfig ProtocolConfig::direction_preserving(Topology topology, std::vector<ControllerKind> kinds) {
  if (kinds.size() != topology.size()) {
    throw InvalidConfig("protocol 1 needs exactly one controller per agent");
  }
  for (const auto& k : kinds) {
    if (const auto* lip = std::get_if<LipschitzDirectional>(&k)) {
      if (!(lip->gain > 0.0)) throw InvalidConfig("lipschitz gain must be positive");
      if (lip->saturation && !(*lip->saturation > 0.0)) {
        throw InvalidConfig("lipschitz saturation must be positive");
      }
    }
  }
  return ProtocolConfig(std::move(topology), Protocol::DirectionPreserving, std::move(kinds));
}

ProtocolConfig ProtocolConfig::componentwise(Topology topology) {
  return ProtocolConfig(std::move(topology), Protocol::Componentwise, {});
}

std::vector<std::size_t> ProtocolConfig::lipschitz_agents() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < kinds_.size(); ++i) {
    if (std::holds_alternative<LipschitzDirectional>(kinds_[i])) out.push_back(i);
  }
  return out;
}

double sign_scalar(double w, const SignOptions& opts) {
  const double mag = std::abs(w);
  if (opts.mode == SignMode::Smoothed) return w / std::max(mag, opts.epsilon);
  if (mag < opts.deadband) return 0.0;
  if (mag < opts.chatter_band) return w / opts.chatter_band;
  return w > 0.0 ? 1.0 : -1.0;
}

Eigen::VectorXd sign_directional(const Eigen::VectorXd& w, const SignOptions& opts) {
  const double mag = w.norm();
  if (opts.mode == SignMode::Smoothed) return w / std::max(mag, opts.epsilon);
  if (mag < opts.deadband) return Eigen::VectorXd::Zero(w.size());
  if (mag < opts.chatter_band) return w / opts.chatter_band;
  return w / mag;
}

Eigen::VectorXd sign_componentwise(const Eigen::VectorXd& w, const SignOptions& opts) {
  Eigen::VectorXd out(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) out(k) = sign_scalar(w(k), opts);
  return out;
}

Eigen::Vector3d disagreement(const Eigen::VectorXd& x, const Topology& t, std::size_t i) {
  const auto xi = x.segment<3>(static_cast<Eigen::Index>(3 * i));
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& [j, w] : t.neighbors(i)) {
    sum += w * (x.segment<3>(static_cast<Eigen::Index>(3 * j)) - xi);
  }
  return sum;
}

Eigen::Vector3d apply_controller(const ControllerKind& kind, const Eigen::Vector3d& arg,
                                 const SignOptions& opts) {
  return std::visit(
      Overloaded{
          [&](const SignDirectional&) -> Eigen::Vector3d { return sign_directional(arg, opts); },
          [&](const SignComponentwise&) -> Eigen::Vector3d { return sign_componentwise(arg, opts); },
          [&](const LipschitzDirectional& lip) -> Eigen::Vector3d {
            Eigen::Vector3d out = lip.gain * arg;
            if (lip.saturation) {
              const double mag = out.norm();
              if (mag > *lip.saturation) out *= *lip.saturation / mag;
            }
            return out;
          }},
      kind);
}

Eigen::VectorXd control_protocol1(const Eigen::VectorXd& x, const ProtocolConfig& cfg,
                                  const SignOptions& opts) {
  const std::size_t n = cfg.agent_count();
  Eigen::VectorXd omega(static_cast<Eigen::Index>(3 * n));
  for (std::size_t i = 0; i < n; ++i) {
    omega.segment<3>(static_cast<Eigen::Index>(3 * i)) =
        apply_controller(cfg.kinds()[i], disagreement(x, cfg.topology(), i), opts);
  }
  return omega;
}

Eigen::VectorXd control_protocol2(const Eigen::VectorXd& x, const ProtocolConfig& cfg,
                                  const SignOptions& opts) {
  const Topology& t = cfg.topology();
  Eigen::VectorXd omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(3 * t.size()));
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto xi = x.segment<3>(static_cast<Eigen::Index>(3 * i));
    auto wi = omega.segment<3>(static_cast<Eigen::Index>(3 * i));
    for (const auto& [j, w] : t.neighbors(i)) {
      const Eigen::Vector3d diff = x.segment<3>(static_cast<Eigen::Index>(3 * j)) - xi;
      wi += w * sign_componentwise(diff, opts);
    }
  }
  return omega;
}

Eigen::VectorXd control(const Eigen::VectorXd& x, const ProtocolConfig& cfg, const SignOptions& opts) {
  return cfg.protocol() == Protocol::DirectionPreserving ? control_protocol1(x, cfg, opts)
                                                         : control_protocol2(x, cfg, opts);
}

GuaranteeReport validate_guarantees(const ProtocolConfig& cfg) {
  if (!is_connected(cfg.topology())) {
    throw Disconnected("communication graph is not connected");
  }
  const std::size_t n = cfg.agent_count();
  if (n < 2) throw InvalidConfig("at least two agents are required");

  GuaranteeReport r;
  if (cfg.protocol() == Protocol::Componentwise) {
    r.invariance_s1 = true;
    r.finite_time = true;
    r.notes =
        "componentwise protocol: local result; requires sum_i |x_i(0)|^2 < pi^2 "
        "(initial rotations within the squared-distance ball)";
    return r;
  }

  const bool componentwise_agent = std::any_of(cfg.kinds().begin(), cfg.kinds().end(), [](const auto& k) {
    return std::holds_alternative<SignComponentwise>(k);
  });
  if (componentwise_agent) {
    r.notes =
        "sign_c agents under the direction-preserving protocol are not direction preserving; "
        "no guarantee applies";
    return r;
  }

  const std::size_t ic = cfg.lipschitz_agents().size();
  r.invariance_s1 = (n == 2 && ic == 0) || (n >= 2 && ic >= 1);
  r.finite_time = (n > 2 && ic == 1) || (n == 2 && ic <= 1);
  r.sliding_risk = n > 2 && ic == 0;
  r.asymptotic_only = ic == n;

  if (r.finite_time) {
    r.notes = n == 2 ? "two agents with at most one Lipschitz controller: finite-time consensus"
                     : "exactly one Lipschitz controller: finite-time consensus";
  } else if (r.sliding_risk) {
    r.notes =
        "all agents use sign on more than two agents: sliding consensus solutions exist and "
        "|x_i| < pi is not guaranteed";
  } else if (r.asymptotic_only) {
    r.notes = "all controllers Lipschitz: the closed loop is Lipschitz, convergence is asymptotic only";
  } else {
    r.notes =
        "more than one Lipschitz controller: asymptotic consensus; finite time is not guaranteed";
  }
  return r;
}

}  // namespace attsync
