#include "attsync/simulator.hpp"

#include "attsync/analysis.hpp"
#include "attsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace attsync {

StackedState StackedState::from_agents(const std::vector<AxisAngle>& agents, double t) {
  StackedState s;
  s.t = t;
  s.x.resize(static_cast<Eigen::Index>(3 * agents.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    s.x.segment<3>(static_cast<Eigen::Index>(3 * i)) = agents[i];
  }
  return s;
}

StackedState StackedState::consensus(std::size_t n, const AxisAngle& xbar, double t) {
  return from_agents(std::vector<AxisAngle>(n, xbar), t);
}

double StackedState::max_norm() const {
  double m = 0.0;
  for (std::size_t i = 0; i < agents(); ++i) m = std::max(m, agent(i).norm());
  return m;
}

const std::vector<double>& SimResult::channel(const std::string& name) const {
  const auto it = channels.find(name);
  if (it == channels.end()) throw Error("no channel named '" + name + "'");
  return it->second;
}

std::optional<Event> SimResult::first_event(const std::string& kind) const {
  for (const Event& e : events) {
    if (e.kind == kind) return e;
  }
  return std::nullopt;
}

void IntegratorConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidConfig("integrator step h must be positive");
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw InvalidConfig("integrator t_max must be positive");
  if (record_every == 0) throw InvalidConfig("record_every must be at least 1");
  if (mode == SignMode::Smoothed && !(epsilon > 0.0)) {
    throw InvalidConfig("smoothed mode needs epsilon > 0");
  }
  if (!(chatter_factor >= 0.0)) throw InvalidConfig("chatter_factor must be non-negative");
}

SignOptions IntegratorConfig::sign_options() const {
  SignOptions opts;
  opts.mode = mode;
  opts.epsilon = epsilon;
  opts.chatter_band = mode == SignMode::Deadband ? chatter_factor * h : 0.0;
  return opts;
}

namespace {

struct Derivative {
  Eigen::VectorXd omega;
  Eigen::VectorXd xdot;
};

Derivative evaluate(const StackedState& s, const ProtocolConfig& cfg, const IntegratorConfig& icfg) {
  Derivative d;
  d.omega = control(s.x, cfg, icfg.sign_options());
  d.xdot.resize(s.x.size());
  for (std::size_t i = 0; i < s.agents(); ++i) {
    const auto seg = static_cast<Eigen::Index>(3 * i);
    try {
      d.xdot.segment<3>(seg) = transition_matrix(s.agent(i)).m * d.omega.segment<3>(seg);
    } catch (const OutOfDomain&) {
      std::ostringstream os;
      os << "agent " << i + 1 << " left the transition domain (|x_i| = " << s.agent(i).norm()
         << " >= 2pi) at t = " << s.t;
      throw OutOfDomain(os.str(), i, s.t);
    }
  }
  return d;
}

void record(SimResult& r, const StackedState& s, const Topology& t,
            const std::vector<RotationIntegrator>* rotations) {
  const LyapunovChannels c = lyapunov_channels(s.x, t);
  r.times.push_back(s.t);
  r.states.push_back(s);
  r.channels["V1"].push_back(c.v1);
  r.channels["V2"].push_back(c.v2);
  r.channels["V3"].push_back(c.v3);
  r.channels["disagreement"].push_back(c.disagreement);
  r.channels["max_norm"].push_back(s.max_norm());
  for (std::size_t i = 0; i < s.agents(); ++i) {
    r.channels["norm_" + std::to_string(i + 1)].push_back(s.agent(i).norm());
  }
  if (rotations) {
    double gap = 0.0;
    for (std::size_t i = 0; i < s.agents(); ++i) {
      try {
        gap = std::max(gap, riemannian_distance(exp_map(s.agent(i)), (*rotations)[i].rotation()));
      } catch (const AngleNearPi&) {
        gap = std::numeric_limits<double>::quiet_NaN();
        break;
      }
    }
    r.channels["rotation_gap"].push_back(gap);
  }
}

}  // namespace

Eigen::VectorXd closed_loop_velocity(const StackedState& s, const ProtocolConfig& cfg,
                                     const IntegratorConfig& icfg) {
  return evaluate(s, cfg, icfg).xdot;
}

StackedState step(const StackedState& s, const ProtocolConfig& cfg, const IntegratorConfig& icfg) {
  StackedState next;
  next.x = s.x + icfg.h * closed_loop_velocity(s, cfg, icfg);
  next.t = s.t + icfg.h;
  return next;
}

SimResult simulate(const StackedState& x0, const ProtocolConfig& cfg, const IntegratorConfig& icfg,
                   double consensus_tol) {
  icfg.validate();
  if (x0.agents() != cfg.agent_count() || x0.x.size() % 3 != 0) {
    throw InvalidConfig("initial state does not match the number of agents");
  }
  if (x0.agents() < 2) throw InvalidConfig("at least two agents are required");
  if (!x0.x.allFinite()) throw InvalidConfig("initial state must be finite");

  const Topology& topo = cfg.topology();
  SimResult r;

  std::vector<RotationIntegrator> rotations;
  if (icfg.track_rotations) {
    for (std::size_t i = 0; i < x0.agents(); ++i) {
      rotations.emplace_back(exp_map(x0.agent(i)), icfg.reorthonormalize_rotations ? 1000 : 0);
    }
  }
  const auto* rot = icfg.track_rotations ? &rotations : nullptr;

  // Steps are counted, not accumulated, so sample times are exact multiples of h.
  const double ratio = icfg.t_max / icfg.h;
  const auto total = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * std::max(1.0, ratio)));
  const double t0 = x0.t;

  StackedState s = x0;
  record(r, s, topo, rot);
  std::vector<bool> beyond_pi(s.agents());
  for (std::size_t i = 0; i < s.agents(); ++i) beyond_pi[i] = s.agent(i).norm() >= std::numbers::pi;
  bool in_consensus = r.channels["disagreement"].back() < consensus_tol;
  if (in_consensus) r.events.push_back({s.t, "consensus", std::nullopt, ""});

  for (std::size_t k = 1; k <= total; ++k) {
    Derivative d;
    try {
      d = evaluate(s, cfg, icfg);
    } catch (const OutOfDomain& e) {
      r.events.push_back({s.t, "out_of_domain", e.agent(), e.what()});
      r.completed = false;
      if (r.times.back() != s.t) record(r, s, topo, rot);
      return r;
    }
    if (icfg.track_rotations) {
      for (std::size_t i = 0; i < s.agents(); ++i) {
        rotations[i].step(d.omega.segment<3>(static_cast<Eigen::Index>(3 * i)), icfg.h);
      }
    }
    s.x += icfg.h * d.xdot;
    s.t = t0 + static_cast<double>(k) * icfg.h;

    for (std::size_t i = 0; i < s.agents(); ++i) {
      const bool now = s.agent(i).norm() >= std::numbers::pi;
      if (now && !beyond_pi[i]) r.events.push_back({s.t, "crossed_pi", i, ""});
      beyond_pi[i] = now;
    }

    if (k % icfg.record_every == 0 || k == total) {
      record(r, s, topo, rot);
      const bool close = r.channels["disagreement"].back() < consensus_tol;
      if (close && !in_consensus) r.events.push_back({s.t, "consensus", std::nullopt, ""});
      in_consensus = close;
    }
  }
  return r;
}

}  // namespace attsync
