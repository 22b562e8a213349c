#include <random>
#include <sstream>

#include "../common/desk.hpp"
#include "doctest.h"
#include "vsl/config.hpp"
#include "vsl/scenario_sampling.hpp"

using namespace vsl;

namespace {

// Dense transition matrix of the chain: rho(t+1) = A rho(t) + h omega(t).
Eigen::MatrixXd transition(const HighwayScenario& sc, const std::vector<double>& u) {
  const int n = sc.n();
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  for (int e = 0; e < n; ++e) {
    A(e, e) -= sc.h() * u[e];
    if (e > 0) A(e, e - 1) += sc.h() * u[e - 1];
  }
  return A;
}

}  // namespace

TEST_CASE("sampling: generator is deterministic and respects its bounds") {
  const auto cfg = case_study_config();
  const GeneratorSpec g = cfg.generator->spec;
  const SampleSet a = generate_samples(g, 20, 4, 7);
  const SampleSet b = generate_samples(g, 20, 4, 7);
  const SampleSet c = generate_samples(g, 20, 4, 8);
  REQUIRE(a.N() == 4);
  CHECK(a.n() == 5);
  CHECK(a.T() == 20);
  bool differs = false;
  for (int l = 0; l < 4; ++l) {
    CHECK(a.samples[l].omega == b.samples[l].omega);
    CHECK(a.samples[l].rho0 == b.samples[l].rho0);
    differs = differs || a.samples[l].omega != c.samples[l].omega;
    for (int e = 0; e < 5; ++e) {
      CHECK(a.samples[l].rho0(e) == 260.0);
      for (int t = 0; t < 20; ++t) {
        const double w = a.samples[l].omega(e, t);
        CHECK(w >= g.omega_lo[e]);
        CHECK(w <= g.omega_hi[e]);
      }
    }
  }
  CHECK(differs);
  CHECK(g.omega_lo[0] == 2e4);
  CHECK(g.omega_hi[0] == 2.4e4);
  CHECK(g.omega_lo[3] == -1500);
  CHECK(g.omega_hi[3] == 2500);
}

TEST_CASE("sampling: generator rejects malformed specs") {
  GeneratorSpec g = case_study_generator(2);
  g.omega_hi[1] = g.omega_lo[1] - 1;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  GeneratorSpec h = case_study_generator(2);
  h.rho0_lo.pop_back();
  CHECK_THROWS_AS(h.validate(), std::invalid_argument);
}

TEST_CASE("sampling: propagation matches the matrix recursion") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 40; ++k) {
    const auto d = testing::random_desk(rng);
    const SpeedProfile u = testing::random_profile(rng, d.scenario);
    const auto speeds = u.speeds(d.scenario);
    const Eigen::MatrixXd A = transition(d.scenario, speeds);
    for (const auto& s : d.samples.samples) {
      const Trajectory r = propagate(d.scenario, u, s);
      Eigen::VectorXd x = s.rho0;
      for (int t = 0; t < d.scenario.T(); ++t) {
        x = A * x + d.scenario.h() * s.omega.col(t);
        for (int e = 0; e < d.scenario.n(); ++e) {
          CHECK(r(e, t) == doctest::Approx(x(e)).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("sampling: linearity and vehicle balance") {
  const HighwayScenario sc = make_scenario(case_study_config());
  const SampleSet s = generate_samples(case_study_generator(5), sc.T(), 2, 3);
  SpeedProfile u;
  u.index = {4, 2, 3, 2, 1};
  const auto speeds = u.speeds(sc);
  const auto& a = s.samples[0];
  const auto& b = s.samples[1];
  DisturbanceSample sum;
  sum.rho0 = 2.0 * a.rho0 - 0.5 * b.rho0;
  sum.omega = 2.0 * a.omega - 0.5 * b.omega;
  const Trajectory ra = propagate(sc, u, a), rb = propagate(sc, u, b), rs = propagate(sc, u, sum);
  CHECK((rs - (2.0 * ra - 0.5 * rb)).cwiseAbs().maxCoeff() <= 1e-9);

  // Total density changes by h times (boundary exit + net disturbance).
  Eigen::VectorXd prev = a.rho0;
  for (int t = 0; t < sc.T(); ++t) {
    const Eigen::VectorXd cur = ra.col(t);
    const double expected = sc.h() * (-speeds.back() * prev(sc.n() - 1) + a.omega.col(t).sum());
    CHECK(cur.sum() - prev.sum() == doctest::Approx(expected).epsilon(1e-9));
    prev = cur;
  }
}

TEST_CASE("sampling: zero disturbance decays geometrically on one edge") {
  ScenarioParams p = case_study_config().params;
  p.n = 1;
  p.length_km = 2;
  p.segments.resize(1);
  const HighwayScenario sc = HighwayScenario::create(p);
  DisturbanceSample s;
  s.rho0 = Eigen::VectorXd::Constant(1, 300.0);
  s.omega = Eigen::MatrixXd::Zero(1, sc.T());
  SpeedProfile u;
  u.index = {2};
  const Trajectory r = propagate(sc, u, s);
  const double q = 1.0 - sc.h() * 80.0;
  for (int t = 0; t < sc.T(); ++t) CHECK(r(0, t) == doctest::Approx(300.0 * std::pow(q, t + 1)));
}

TEST_CASE("sampling: CSV round trip is exact") {
  const SampleSet a = generate_samples(case_study_generator(5), 20, 3, 5);
  std::stringstream ss;
  write_samples_csv(ss, a);
  const SampleSet b = read_samples_csv(ss, "memory");
  REQUIRE(b.N() == a.N());
  for (int l = 0; l < a.N(); ++l) {
    CHECK(a.samples[l].rho0 == b.samples[l].rho0);
    CHECK(a.samples[l].omega == b.samples[l].omega);
  }
}

TEST_CASE("sampling: CSV reader rejects malformed input") {
  std::stringstream bad("l,e,rho0\n1,1,260\nl,e,t,omega\n1,1,0,abc\n");
  CHECK_THROWS(read_samples_csv(bad, "memory"));
  std::stringstream missing("l,e,rho0\n1,1,260\n1,2,260\nl,e,t,omega\n1,1,0,5\n");
  CHECK_THROWS(read_samples_csv(missing, "memory"));
}

TEST_CASE("sampling: dimension mismatch is rejected") {
  const HighwayScenario sc = make_scenario(case_study_config());
  const SampleSet short_set = generate_samples(case_study_generator(5), 3, 1, 1);
  SpeedProfile u;
  u.index = {0, 0, 0, 0, 0};
  CHECK_THROWS(propagate_batch(sc, u, short_set));
}
