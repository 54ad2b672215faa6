#include "attsync/controllers.hpp"
#include "attsync/errors.hpp"
#include "attsync/graph.hpp"
#include "oracles.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <doctest.h>

#include <random>
#include <set>

using namespace attsync;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

VectorXd stack(std::initializer_list<Vector3d> xs) {
  VectorXd x(3 * static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (const auto& v : xs) x.segment<3>(3 * k++) = v;
  return x;
}

VectorXd random_state(std::size_t n, std::mt19937_64& rng) {
  VectorXd x(3 * static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) x.segment<3>(3 * static_cast<Eigen::Index>(i)) = oracle::random_ball(rng, 3.0);
  return x;
}

}  // namespace

TEST_CASE("directional sign") {
  CHECK(sign_directional(Vector3d(0, 0, 0)).isZero(0.0));
  CHECK((sign_directional(Vector3d(3, 4, 0)) - Vector3d(0.6, 0.8, 0)).norm() < 1e-16);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int k = 0; k < 10000; ++k) {
    const Vector3d w(g(rng), g(rng), g(rng));
    const double n = sign_directional(w).norm();
    CHECK((std::abs(n - 1.0) < 1e-15 || n == 0.0));
    const double c = std::exp(g(rng));
    CHECK((sign_directional(c * w) - sign_directional(w)).norm() < 1e-15);
  }
}

TEST_CASE("directional sign deadband and smoothing") {
  CHECK(sign_directional(Vector3d(1e-10, 0, 0)).isZero(0.0));
  SignOptions smooth{SignMode::Smoothed, 1e-9, 1e-3, 0.0};
  CHECK((sign_directional(Vector3d(1e-4, 0, 0), smooth) - Vector3d(0.1, 0, 0)).norm() < 1e-15);
  CHECK((sign_directional(Vector3d(2, 0, 0), smooth) - Vector3d(1, 0, 0)).norm() == 0.0);
  SignOptions band{SignMode::Deadband, 1e-9, 1e-6, 1e-2};
  CHECK((sign_directional(Vector3d(5e-3, 0, 0), band) - Vector3d(0.5, 0, 0)).norm() < 1e-15);
  CHECK((sign_directional(Vector3d(0, 0.5, 0), band) - Vector3d(0, 1, 0)).norm() == 0.0);
}

TEST_CASE("componentwise sign") {
  CHECK(sign_componentwise(Vector3d(-2, 0, 5)) == Vector3d(-1, 0, 1));
  CHECK(sign_scalar(0.7) == 1.0);
  VectorXd one(1);
  one << 0.7;
  CHECK(sign_componentwise(one)(0) == sign_directional(one)(0));

  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> coin(-1, 1);
  std::normal_distribution<double> g;
  std::set<std::tuple<double, double, double>> seen;
  for (int k = 0; k < 10000; ++k) {
    Vector3d w;
    for (int c = 0; c < 3; ++c) w(c) = coin(rng) == 0 ? 0.0 : g(rng);
    const Vector3d s = sign_componentwise(w);
    seen.insert({s(0), s(1), s(2)});
  }
  CHECK(seen.size() <= 27);
}

TEST_CASE("protocol 1 control at consensus is zero") {
  const auto cfg = ProtocolConfig::direction_preserving(
      Topology::complete(3), {SignDirectional{}, LipschitzDirectional{}, SignDirectional{}});
  const VectorXd x = stack({{0.3, -0.2, 0.1}, {0.3, -0.2, 0.1}, {0.3, -0.2, 0.1}});
  CHECK(control_protocol1(x, cfg).isZero(0.0));
}

TEST_CASE("protocol 1 two sign agents") {
  const auto cfg = ProtocolConfig::direction_preserving(Topology::path(2), {SignDirectional{}, SignDirectional{}});
  const VectorXd w = control_protocol1(stack({{1, 0, 0}, {0, 0, 0}}), cfg);
  CHECK(w == stack({{-1, 0, 0}, {1, 0, 0}}));
}

TEST_CASE("protocol 1 lipschitz agent on the line graph") {
  const auto cfg = ProtocolConfig::direction_preserving(
      Topology::path(3), {LipschitzDirectional{}, SignDirectional{}, SignDirectional{}});
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    const VectorXd x = random_state(3, rng);
    const VectorXd w = control_protocol1(x, cfg);
    CHECK((w.segment<3>(0) - (x.segment<3>(3) - x.segment<3>(0))).norm() == 0.0);
  }
}

TEST_CASE("lipschitz saturation") {
  const LipschitzDirectional f{2.0, 1.5};
  CHECK((apply_controller(f, Vector3d(0.5, 0, 0)) - Vector3d(1, 0, 0)).norm() == 0.0);
  CHECK((apply_controller(f, Vector3d(3, 4, 0)) - Vector3d(0.9, 1.2, 0)).norm() < 1e-15);
  CHECK(apply_controller(f, Vector3d(0, 0, 0)).isZero(0.0));
}

TEST_CASE("protocol 1 output preserves the disagreement direction") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<ControllerKind> kinds;
    for (std::size_t i = 0; i < n; ++i) {
      if (i % 3 == 0) kinds.push_back(LipschitzDirectional{0.5 + i, i % 2 ? std::optional<double>(0.7) : std::nullopt});
      else kinds.push_back(SignDirectional{});
    }
    const Topology t = Topology::complete(n);
    const auto cfg = ProtocolConfig::direction_preserving(t, kinds);
    const VectorXd x = random_state(n, rng);
    const VectorXd w = control_protocol1(x, cfg);
    const VectorXd lx = Eigen::kroneckerProduct(laplacian(t), Eigen::Matrix3d::Identity()) * x;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector3d wi = w.segment<3>(3 * static_cast<Eigen::Index>(i));
      const Vector3d yi = -lx.segment<3>(3 * static_cast<Eigen::Index>(i));
      CHECK((disagreement(x, t, i) - yi).norm() < 1e-13);
      CHECK(std::abs(wi.dot(yi) - wi.norm() * yi.norm()) < 1e-12 * std::max(1.0, wi.norm() * yi.norm()));
    }
  }
}

TEST_CASE("protocol 2 two agents") {
  const auto cfg = ProtocolConfig::componentwise(Topology::path(2));
  const VectorXd w = control_protocol2(stack({{1, -1, 0}, {0, 0, 0}}), cfg);
  CHECK(w.segment<3>(0) == Vector3d(-1, 1, 0));
  CHECK(w.segment<3>(3) == Vector3d(1, -1, 0));
  CHECK(control_protocol2(stack({{1, 2, 3}, {1, 2, 3}}), cfg).isZero(0.0));
}

TEST_CASE("protocol 2 stacked form and degree bound") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 8;
    std::vector<Edge> edges;
    for (auto [a, b] : oracle::random_connected(n, n, rng)) edges.push_back({a, b, 1.0});
    const Topology t(n, edges);
    const auto cfg = ProtocolConfig::componentwise(t);
    const VectorXd x = random_state(n, rng);
    const VectorXd w = control(x, cfg);

    const Eigen::MatrixXd bh = Eigen::kroneckerProduct(incidence(t), Eigen::Matrix3d::Identity());
    VectorXd s = bh.transpose() * x;
    for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = s(k) > 0 ? 1.0 : (s(k) < 0 ? -1.0 : 0.0);
    CHECK((w + bh * s).cwiseAbs().maxCoeff() < 1e-14);

    for (std::size_t i = 0; i < n; ++i) {
      CHECK(w.segment<3>(3 * static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() <= t.degree(i));
    }
  }
}

TEST_CASE("protocol config validation") {
  CHECK_THROWS_AS(ProtocolConfig::direction_preserving(Topology::path(3), {SignDirectional{}}), InvalidConfig);
  CHECK_THROWS_AS(
      ProtocolConfig::direction_preserving(Topology::path(2), {LipschitzDirectional{0.0}, SignDirectional{}}),
      InvalidConfig);
  const auto cfg = ProtocolConfig::direction_preserving(
      Topology::path(3), {LipschitzDirectional{}, SignDirectional{}, LipschitzDirectional{}});
  CHECK(cfg.lipschitz_agents() == std::vector<std::size_t>{0, 2});
  CHECK(controller_name(SignComponentwise{}) == "sign_c");
}

TEST_CASE("guarantees for the named configurations") {
  auto lip = [](std::size_t n, std::set<std::size_t> ic) {
    std::vector<ControllerKind> k;
    for (std::size_t i = 0; i < n; ++i) {
      if (ic.count(i)) k.push_back(LipschitzDirectional{});
      else k.push_back(SignDirectional{});
    }
    return ProtocolConfig::direction_preserving(Topology::path(n), k);
  };
  CHECK(validate_guarantees(lip(3, {0})).finite_time);
  CHECK(validate_guarantees(lip(3, {})).sliding_risk);
  CHECK(validate_guarantees(lip(2, {0, 1})).asymptotic_only);
  CHECK_THROWS_AS(validate_guarantees(ProtocolConfig::direction_preserving(
                      Topology(3, {{0, 1, 1.0}}), {SignDirectional{}, SignDirectional{}, SignDirectional{}})),
                  Disconnected);
  const GuaranteeReport p2 = validate_guarantees(ProtocolConfig::componentwise(Topology::path(3)));
  CHECK(p2.finite_time);
  CHECK(p2.invariance_s1);
}

TEST_CASE("guarantees depend only on n and the Lipschitz count") {
  for (std::size_t n = 2; n <= 5; ++n) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      std::vector<ControllerKind> kinds;
      std::size_t ic = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          kinds.push_back(LipschitzDirectional{});
          ++ic;
        } else {
          kinds.push_back(SignDirectional{});
        }
      }
      const bool invariance = (n == 2 && ic == 0) || ic >= 1;
      const bool finite = (n > 2 && ic == 1) || (n == 2 && ic <= 1);
      const bool sliding = n > 2 && ic == 0;
      const bool asym = ic == n;
      for (const Topology& t : {Topology::path(n), Topology::complete(n)}) {
        const GuaranteeReport r = validate_guarantees(ProtocolConfig::direction_preserving(t, kinds));
        CAPTURE(n);
        CAPTURE(mask);
        CHECK(r.invariance_s1 == invariance);
        CHECK(r.finite_time == finite);
        CHECK(r.sliding_risk == sliding);
        CHECK(r.asymptotic_only == asym);
        CHECK_FALSE(r.notes.empty());
      }
    }
  }
}

TEST_CASE("componentwise sign under the direction-preserving protocol carries no guarantee") {
  const GuaranteeReport r = validate_guarantees(ProtocolConfig::direction_preserving(
      Topology::path(3), {LipschitzDirectional{}, SignComponentwise{}, SignDirectional{}}));
  CHECK_FALSE(r.finite_time);
  CHECK_FALSE(r.invariance_s1);
}
