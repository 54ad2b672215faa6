#include "attsync/commands.hpp"

#include "attsync/filippov.hpp"
#include "attsync/graph.hpp"
#include "attsync/run_io.hpp"
#include "attsync/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <thread>
#include <vector>

namespace attsync {

using nlohmann::ordered_json;

namespace {

void log(CommandContext& ctx, LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(ctx.level)) return;
  static const char* const kNames[] = {"error", "info", "debug"};
  ctx.err << "[attsync " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json guarantees_object(const GuaranteeReport& r) {
  return {{"invariance_s1", r.invariance_s1},
          {"finite_time", r.finite_time},
          {"asymptotic_only", r.asymptotic_only},
          {"sliding_risk", r.sliding_risk},
          {"notes", r.notes}};
}

ordered_json events_array(const SimResult& r) {
  ordered_json events = ordered_json::array();
  for (const Event& e : r.events) {
    events.push_back({{"time", e.time},
                      {"kind", e.kind},
                      {"agent", e.agent ? ordered_json(*e.agent + 1) : ordered_json(nullptr)},
                      {"detail", e.detail}});
  }
  return events;
}

void record_sample(SimResult& r, const StackedState& s, const Topology& t) {
  const LyapunovChannels c = lyapunov_channels(s.x, t);
  r.times.push_back(s.t);
  r.states.push_back(s);
  r.channels["V1"].push_back(c.v1);
  r.channels["V2"].push_back(c.v2);
  r.channels["V3"].push_back(c.v3);
  r.channels["disagreement"].push_back(c.disagreement);
  r.channels["max_norm"].push_back(s.max_norm());
}

RunOutcome run_sliding(const ScenarioFile& s, const ProtocolConfig& cfg) {
  const SlidingSpec& sp = *s.sliding;
  const AxisAngle xbar(sp.xbar[0], sp.xbar[1], sp.xbar[2]);
  const std::size_t n = cfg.agent_count();
  const Eigen::VectorXd nu = sliding_consensus_velocity(xbar, sp.eps1, n);

  RunOutcome o;
  o.guarantees = validate_guarantees(cfg);
  double worst = 0.0;
  for (std::size_t k = 0; k < sp.samples; ++k) {
    const double t = sp.t0 + (sp.t_end - sp.t0) * static_cast<double>(k) / static_cast<double>(sp.samples - 1);
    const StackedState x = sliding_consensus_trajectory(xbar, sp.eps1, sp.t0, t, n);
    record_sample(o.result, x, cfg.topology());
    worst = std::max(worst, filippov_residual(x, nu, cfg).residual);
  }
  o.membership_residual = worst;
  o.predicted_crossing_time = sliding_crossing_time(xbar, sp.eps1, sp.t0);

  // The norm is affine in t along the ray, so interpolating between the
  // bracketing samples recovers the crossing exactly.
  const auto& norms = o.result.channel("max_norm");
  for (std::size_t k = 0; k < norms.size(); ++k) {
    if (norms[k] < std::numbers::pi) continue;
    double tc = o.result.times[k];
    if (k > 0) {
      const double t0 = o.result.times[k - 1];
      tc = t0 + (std::numbers::pi - norms[k - 1]) / (norms[k] - norms[k - 1]) * (o.result.times[k] - t0);
    }
    o.crossing_time = tc;
    for (std::size_t i = 0; i < n; ++i) o.result.events.push_back({tc, "crossed_pi", i, ""});
    break;
  }
  o.v1_nonincreasing = nonincreasing(o.result.channel("V1"), 1e-6);
  o.v3_nonincreasing = nonincreasing(o.result.channel("V3"), 1e-6);
  o.convergence = classify_convergence(o.result, s.tolerance);

  ordered_json d;
  d["scenario"] = s.name;
  d["mode"] = "sliding-analytic";
  d["protocol"] = s.protocol;
  d["agents"] = n;
  d["completed"] = true;
  d["guarantees"] = guarantees_object(o.guarantees);
  d["membership"] = {{"samples", sp.samples},
                     {"tolerance", s.tolerance},
                     {"max_residual", worst},
                     {"passed", worst <= s.tolerance}};
  d["crossing_time"] = {{"predicted", *o.predicted_crossing_time},
                        {"observed", optional_number(o.crossing_time)}};
  d["lyapunov"] = {{"V1_nonincreasing", o.v1_nonincreasing}, {"V3_nonincreasing", o.v3_nonincreasing}};
  d["max_norm_peak"] = *std::max_element(norms.begin(), norms.end());
  d["events"] = events_array(o.result);
  o.diagnostics_json = d.dump(2) + "\n";
  o.guarantees_json = guarantees_to_json(o.guarantees);
  o.exit_code = exit_code::kCaveat;
  return o;
}

}  // namespace

LogLevel log_level_from_env() {
  const char* v = std::getenv("ATTSYNC_LOG");
  if (!v) return LogLevel::Error;
  const std::string s(v);
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  return LogLevel::Error;
}

bool nonincreasing(const std::vector<double>& series, double tol) {
  for (std::size_t k = 1; k < series.size(); ++k) {
    if (series[k] > series[k - 1] + tol) return false;
  }
  return true;
}

std::string guarantees_to_json(const GuaranteeReport& r) { return guarantees_object(r).dump(2) + "\n"; }

RunOutcome run_scenario(const ScenarioFile& s) {
  const ProtocolConfig cfg = protocol_config(s);
  if (s.sliding) return run_sliding(s, cfg);

  RunOutcome o;
  o.guarantees = validate_guarantees(cfg);
  const StackedState x0 = initial_state(s);
  o.result = simulate(x0, cfg, s.integrator, s.tolerance);
  if (o.result.times.size() >= 2) o.convergence = classify_convergence(o.result, s.tolerance);
  o.v1_nonincreasing = nonincreasing(o.result.channel("V1"), 1e-6);
  o.v3_nonincreasing = nonincreasing(o.result.channel("V3"), 1e-6);

  if (s.protocol == 1 && x0.max_norm() < std::numbers::pi) {
    o.rates = rate_constants(x0, cfg.topology());
    if (o.guarantees.finite_time) {
      o.settling_bound_met = o.convergence.kind == ConvergenceKind::FiniteTime &&
                             *o.convergence.settle_time <= o.rates->settling_bound;
    }
  }

  const auto& norms = o.result.channel("max_norm");
  ordered_json d;
  d["scenario"] = s.name;
  d["mode"] = "simulation";
  d["protocol"] = s.protocol;
  d["agents"] = cfg.agent_count();
  d["completed"] = o.result.completed;
  d["guarantees"] = guarantees_object(o.guarantees);
  d["classification"] = {{"label", o.convergence.label()},
                         {"settle_time", optional_number(o.convergence.settle_time)},
                         {"log_slope", o.convergence.log_slope},
                         {"fit_residual", o.convergence.fit_residual},
                         {"tolerance", s.tolerance}};
  if (o.rates) {
    d["rate_constants"] = {{"c1", o.rates->c1},
                           {"lambda2", o.rates->lambda2},
                           {"slope_bound", o.rates->slope_bound},
                           {"settling_bound", o.rates->settling_bound}};
  } else {
    d["rate_constants"] = nullptr;
  }
  d["settling_bound_met"] = o.settling_bound_met ? ordered_json(*o.settling_bound_met) : ordered_json(nullptr);
  d["lyapunov"] = {{"V1_nonincreasing", o.v1_nonincreasing}, {"V3_nonincreasing", o.v3_nonincreasing}};
  d["max_norm_peak"] = *std::max_element(norms.begin(), norms.end());
  d["events"] = events_array(o.result);
  o.diagnostics_json = d.dump(2) + "\n";
  o.guarantees_json = guarantees_to_json(o.guarantees);

  if (!o.result.completed) {
    o.exit_code = exit_code::kDomain;
  } else if (o.convergence.kind != ConvergenceKind::FiniteTime) {
    o.exit_code = exit_code::kCaveat;
  } else if (s.protocol == 1) {
    o.exit_code = o.guarantees.finite_time && o.settling_bound_met.value_or(false) ? exit_code::kOk
                                                                                    : exit_code::kCaveat;
  } else {
    o.exit_code = o.v3_nonincreasing ? exit_code::kOk : exit_code::kCaveat;
  }
  return o;
}

int cmd_check(const ScenarioFile& s, CommandContext& ctx) {
  try {
    const GuaranteeReport r = validate_guarantees(protocol_config(s));
    ctx.out << guarantees_to_json(r);
    log(ctx, LogLevel::Info, "checked scenario '" + s.name + "'");
    return r.finite_time ? exit_code::kOk : exit_code::kCaveat;
  } catch (const Disconnected& e) {
    ctx.out << ordered_json{{"error", "Disconnected"}, {"detail", e.what()}}.dump(2) << '\n';
    log(ctx, LogLevel::Error, e.what());
    return exit_code::kConfig;
  } catch (const Error& e) {
    log(ctx, LogLevel::Error, e.what());
    return exit_code::kConfig;
  }
}

int cmd_run(const ScenarioFile& s, const std::filesystem::path& out_dir, CommandContext& ctx) {
  RunOutcome o;
  try {
    log(ctx, LogLevel::Info, "running scenario '" + s.name + "'");
    o = run_scenario(s);
  } catch (const Error& e) {
    log(ctx, LogLevel::Error, e.what());
    return exit_code::kConfig;
  }
  std::filesystem::create_directories(out_dir);
  write_atomic(out_dir / "trajectory.csv", trajectory_csv(o.result));
  write_atomic(out_dir / "channels.csv", channels_csv(o.result));
  write_atomic(out_dir / "diagnostics.json", o.diagnostics_json);
  write_atomic(out_dir / "guarantees.json", o.guarantees_json);
  log(ctx, LogLevel::Debug, "wrote " + std::to_string(o.result.times.size()) + " samples to " + out_dir.string());
  if (auto ood = o.result.first_event("out_of_domain")) log(ctx, LogLevel::Error, ood->detail);
  ctx.out << o.diagnostics_json;
  return o.exit_code;
}

namespace {

struct TrialRecord {
  double max_norm0 = 0.0;
  bool invariant = false;
  bool monotone = false;
  bool completed = false;
  std::optional<bool> bound_met;
  std::optional<double> settling_bound;
  ConvergenceClass convergence;
};

TrialRecord run_trial(const ScenarioFile& s, const ProtocolConfig& cfg, const GuaranteeReport& g,
                      std::size_t trial) {
  const StackedState x0 = initial_state(s, trial);
  TrialRecord rec;
  rec.max_norm0 = x0.max_norm();
  const SimResult r = simulate(x0, cfg, s.integrator, s.tolerance);
  rec.completed = r.completed;
  if (r.times.size() >= 2) rec.convergence = classify_convergence(r, s.tolerance);
  if (s.protocol == 1) {
    const auto& peak = r.channel("max_norm");
    rec.invariant = r.completed && *std::max_element(peak.begin(), peak.end()) <= rec.max_norm0 + 1e-6;
    rec.monotone = nonincreasing(r.channel("V1"), 1e-6);
    if (g.finite_time) {
      const RateConstants rc = rate_constants(x0, cfg.topology());
      rec.settling_bound = rc.settling_bound;
      rec.bound_met = rec.convergence.kind == ConvergenceKind::FiniteTime &&
                      *rec.convergence.settle_time <= rc.settling_bound;
    }
  } else {
    const auto& v3 = r.channel("V3");
    rec.invariant = r.completed && *std::max_element(v3.begin(), v3.end()) <= v3.front() + 1e-6;
    rec.monotone = nonincreasing(v3, 1e-6);
  }
  return rec;
}

}  // namespace

int cmd_sweep(const ScenarioFile& base, const std::filesystem::path& out_dir, std::size_t trials,
              double max_norm, CommandContext& ctx, unsigned threads) {
  if (trials == 0) {
    log(ctx, LogLevel::Error, "--trials must be at least 1");
    return exit_code::kConfig;
  }
  if (base.sliding) {
    log(ctx, LogLevel::Error, "sweep needs a simulated scenario, not a closed-form sliding one");
    return exit_code::kConfig;
  }
  const double n = static_cast<double>(base.agents.size());
  if (!(max_norm > 0.0 && max_norm < std::numbers::pi)) {
    log(ctx, LogLevel::Error, "--max-norm must lie in (0, pi)");
    return exit_code::kConfig;
  }
  if (base.protocol == 2 && !(n * max_norm * max_norm < std::numbers::pi * std::numbers::pi)) {
    log(ctx, LogLevel::Error, "protocol 2 needs n * C^2 < pi^2 so that sum |x_i(0)|^2 < pi^2");
    return exit_code::kConfig;
  }

  ScenarioFile s = base;
  for (AgentSpec& a : s.agents) a.init = RandomInit{max_norm};

  GuaranteeReport g;
  std::optional<ProtocolConfig> cfg;
  try {
    cfg = protocol_config(s);
    g = validate_guarantees(*cfg);
    s.integrator.validate();
  } catch (const Error& e) {
    log(ctx, LogLevel::Error, e.what());
    return exit_code::kConfig;
  }

  std::vector<TrialRecord> records(trials);
  std::atomic<std::size_t> next{0};
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(trials)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < trials; k = next++) records[k] = run_trial(s, *cfg, g, k);
      });
    }
  }

  std::size_t invariant = 0, monotone = 0, met = 0, bound_checked = 0, out_of_domain = 0;
  std::size_t labels[3] = {0, 0, 0};
  std::string csv = "trial,max_norm0,invariant,monotone,label,settle_time,settling_bound,bound_met\n";
  for (std::size_t k = 0; k < trials; ++k) {
    const TrialRecord& r = records[k];
    invariant += r.invariant;
    monotone += r.monotone;
    out_of_domain += !r.completed;
    ++labels[static_cast<int>(r.convergence.kind)];
    if (r.bound_met) {
      ++bound_checked;
      met += *r.bound_met;
    }
    csv += std::to_string(k) + ',' + format_double(r.max_norm0) + ',' + (r.invariant ? "1" : "0") + ',' +
           (r.monotone ? "1" : "0") + ',' + r.convergence.label() + ',' +
           (r.convergence.settle_time ? format_double(*r.convergence.settle_time) : "") + ',' +
           (r.settling_bound ? format_double(*r.settling_bound) : "") + ',' +
           (r.bound_met ? (*r.bound_met ? "1" : "0") : "") + '\n';
  }
  const double total = static_cast<double>(trials);
  ordered_json summary;
  summary["scenario"] = base.name;
  summary["protocol"] = base.protocol;
  summary["trials"] = trials;
  summary["max_norm"] = max_norm;
  summary["seed"] = base.seed;
  summary["guarantees"] = guarantees_object(g);
  summary["fractions"] = {
      {"invariance", static_cast<double>(invariant) / total},
      {"monotone", static_cast<double>(monotone) / total},
      {"settling_bound", bound_checked ? ordered_json(static_cast<double>(met) / static_cast<double>(bound_checked))
                                       : ordered_json(nullptr)},
      {"finite_time", static_cast<double>(labels[0]) / total}};
  summary["labels"] = {{"finite_time", labels[0]}, {"asymptotic", labels[1]}, {"none", labels[2]}};
  summary["out_of_domain"] = out_of_domain;

  std::filesystem::create_directories(out_dir);
  write_atomic(out_dir / "trials.csv", csv);
  const std::string text = summary.dump(2) + "\n";
  write_atomic(out_dir / "summary.json", text);
  ctx.out << text;
  log(ctx, LogLevel::Info, "sweep of " + std::to_string(trials) + " trials finished");

  if (out_of_domain > 0) return exit_code::kDomain;
  const bool all = invariant == trials && monotone == trials && met == bound_checked &&
                   (!g.finite_time || labels[0] == trials);
  return all ? exit_code::kOk : exit_code::kCaveat;
}

}  // namespace attsync
