#include "attsync/analysis.hpp"

#include "attsync/errors.hpp"
#include "attsync/so3.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace attsync {

LyapunovChannels lyapunov_channels(const Eigen::VectorXd& x, const Topology& t) {
  LyapunovChannels c;
  const auto n = static_cast<Eigen::Index>(t.size());
  for (Eigen::Index i = 0; i < n; ++i) c.v1 = std::max(c.v1, x.segment<3>(3 * i).squaredNorm());
  double quad = 0.0;
  for (const Edge& e : t.edges()) {
    const double d2 = (x.segment<3>(static_cast<Eigen::Index>(3 * e.i)) -
                       x.segment<3>(static_cast<Eigen::Index>(3 * e.j)))
                          .squaredNorm();
    quad += e.weight * d2;
    c.disagreement = std::max(c.disagreement, std::sqrt(d2));
  }
  c.v2 = std::sqrt(quad);
  c.v3 = 0.5 * x.squaredNorm();
  return c;
}

double c1_bound(double max_norm) {
  if (!(max_norm > 0.0 && max_norm < std::numbers::pi)) {
    std::ostringstream os;
    os << "c1 bound needs 0 < C < pi, got " << max_norm;
    throw OutOfDomain(os.str());
  }
  // The radial eigenvalue is 1 and (θ/2)cot(θ/2) is decreasing on [0, π),
  // so the minimum over the ball sits on its boundary.
  return std::min(1.0, transition_ratio(max_norm));
}

RateConstants rate_constants(const StackedState& x0, const Topology& t) {
  RateConstants r;
  r.lambda2 = algebraic_connectivity(t);
  const double c = x0.max_norm();
  r.c1 = c > 0.0 ? c1_bound(c) : 1.0;
  const double v2 = lyapunov_channels(x0.x, t).v2;
  r.slope_bound = t.size() == 2 ? -r.c1 : -0.5 * r.c1 * std::sqrt(r.lambda2);
  r.settling_bound = v2 / -r.slope_bound;
  return r;
}

std::string ConvergenceClass::label() const {
  switch (kind) {
    case ConvergenceKind::FiniteTime:
      return "finite_time";
    case ConvergenceKind::Asymptotic:
      return "asymptotic";
    case ConvergenceKind::None:
      break;
  }
  return "none";
}

ConvergenceClass classify_convergence(const SimResult& result, double tol,
                                      std::optional<double> required_horizon) {
  const auto& times = result.times;
  if (times.size() < 2) throw InsufficientHorizon("need at least two samples to classify");
  if (required_horizon && times.back() < *required_horizon) {
    std::ostringstream os;
    os << "run ends at t = " << times.back() << " before the required horizon " << *required_horizon;
    throw InsufficientHorizon(os.str());
  }
  const auto& dis = result.channel("disagreement");
  const auto& v2 = result.channel("V2");

  ConvergenceClass out;

  // Scan backwards for the start of the final stretch that stays below 2·tol;
  // the earliest sample in it that is below tol is T_c.
  std::size_t tail = dis.size();
  while (tail > 0 && dis[tail - 1] < 2.0 * tol) --tail;
  for (std::size_t k = tail; k < dis.size(); ++k) {
    if (dis[k] < tol) {
      out.kind = ConvergenceKind::FiniteTime;
      out.settle_time = times[k];
      return out;
    }
  }

  const std::size_t begin = times.size() / 2;
  std::size_t count = 0;
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t k = begin; k < times.size(); ++k) {
    if (!(v2[k] > 0.0)) return out;
    const double y = std::log(v2[k]);
    st += times[k];
    sy += y;
    stt += times[k] * times[k];
    sty += times[k] * y;
    ++count;
  }
  if (count < 2) return out;
  const double m = static_cast<double>(count);
  const double denom = m * stt - st * st;
  if (!(denom > 0.0)) return out;
  out.log_slope = (m * sty - st * sy) / denom;
  const double intercept = (sy - out.log_slope * st) / m;
  double sq = 0.0;
  for (std::size_t k = begin; k < times.size(); ++k) {
    const double r = std::log(v2[k]) - (intercept + out.log_slope * times[k]);
    sq += r * r;
  }
  out.fit_residual = std::sqrt(sq / m);

  if (std::isfinite(out.log_slope) && out.log_slope < 0.0 && v2.back() > tol && out.fit_residual < 0.1) {
    out.kind = ConvergenceKind::Asymptotic;
  }
  return out;
}

}  // namespace attsync
