#include <random>

#include "../common/desk.hpp"
#include "doctest.h"
#include "vsl/config.hpp"
#include "vsl/validation_oracle.hpp"

using namespace vsl;

namespace {

DisturbanceSample light_sample(std::mt19937_64& rng, int n, int T) {
  DisturbanceSample s;
  s.rho0.resize(n);
  s.omega.resize(n, T);
  for (int e = 0; e < n; ++e) {
    s.rho0(e) = testing::uniform(rng, 5, 30);
    for (int t = 0; t < T; ++t) s.omega(e, t) = testing::uniform(rng, 0, 300);
  }
  return s;
}

}  // namespace

TEST_CASE("ctm: free flow reproduces the linear recursion") {
  const HighwayScenario sc = make_scenario(case_study_config());
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const SpeedProfile u = testing::random_profile(rng, sc);
    const auto speeds = u.speeds(sc);
    const DisturbanceSample s = light_sample(rng, sc.n(), sc.T());
    const CtmTrajectory c = simulate_ctm(sc, speeds, s, sc.T());
    const Trajectory lin = propagate(sc, u, s);
    for (int t = 1; t <= sc.T(); ++t) {
      for (int e = 0; e < sc.n(); ++e) CHECK(c.rho(e, t) == doctest::Approx(lin(e, t - 1)).epsilon(1e-12));
    }
    CHECK(c.omega_accepted == s.omega);
  }
}

TEST_CASE("ctm: vehicles are conserved and densities stay in range") {
  const HighwayScenario sc = make_scenario(case_study_config());
  const SampleSet set = generate_samples(case_study_generator(5), 60, 5, 4);
  const auto speeds = uncontrolled_speeds(sc);
  for (const auto& s : set.samples) {
    const CtmTrajectory c = simulate_ctm(sc, speeds, s, 60);
    REQUIRE(c.rho.cols() == 61);
    for (int t = 0; t < 60; ++t) {
      const double change = c.rho.col(t + 1).sum() - c.rho.col(t).sum();
      const double net = sc.h() * (c.omega_accepted.col(t).sum() - c.flow(sc.n() - 1, t));
      CHECK(change == doctest::Approx(net).epsilon(1e-9).scale(1.0));
      for (int e = 0; e < sc.n(); ++e) {
        CHECK(c.rho(e, t + 1) >= 0.0);
        CHECK(c.rho(e, t + 1) <= sc.segment(e).rho_U);
        CHECK(c.flow(e, t) <= sc.segment(e).f_U + 1e-9);
      }
    }
  }
}

TEST_CASE("ctm: empty road with no demand stays empty") {
  const HighwayScenario sc = make_scenario(case_study_config());
  DisturbanceSample s;
  s.rho0 = Eigen::VectorXd::Zero(sc.n());
  s.omega = Eigen::MatrixXd::Zero(sc.n(), 30);
  const CtmTrajectory c = simulate_ctm(sc, uncontrolled_speeds(sc), s, 30);
  CHECK(c.rho.cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.flow.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(simulate_ctm(sc, uncontrolled_speeds(sc), s, 31), std::invalid_argument);
}

TEST_CASE("brute force: matches an independent enumeration and honours the cap") {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 15; ++k) {
    const auto d = testing::random_desk(rng);
    const BruteForceResult bf = brute_force_optimum(d.scenario, d.samples);
    double best = -std::numeric_limits<double>::infinity();
    long count = 0, invalid = 0;
    for_each_profile(d.scenario, [&](const SpeedProfile& u) {
      ++count;
      const auto c = certificate(d.scenario, propagate_batch(d.scenario, u, d.samples),
                                 d.scenario.epsilon());
      if (!c.finite()) ++invalid;
      best = std::max(best, c.value);
    });
    CHECK(bf.evaluated == count);
    CHECK(bf.invalid == invalid);
    CHECK(static_cast<double>(count) == d.scenario.profile_count());
    CHECK(bf.has_solution == (invalid < count));
    if (bf.has_solution) CHECK(bf.value == best);
  }
  const HighwayScenario sc = make_scenario(case_study_config());
  const SampleSet s = generate_samples(case_study_generator(5), sc.T(), 1, 1);
  CHECK_THROWS_AS(brute_force_optimum(sc, s, 100), EnumerationCapExceeded);
}

TEST_CASE("validation: deterministic, sized and consistent with the linear model") {
  const RunConfig cfg = case_study_config();
  const HighwayScenario sc = make_scenario(cfg);
  SpeedProfile u;
  u.index = {4, 2, 4, 2, 4};
  const auto speeds = u.speeds(sc);
  ValidationConfig vc;
  vc.N_val = 20;
  vc.T_val = 40;
  vc.seed = validation_seed(1);
  vc.generator = cfg.generator->spec;
  const ValidationReport a = validate(sc, speeds, 1.0, vc);
  const ValidationReport b = validate(sc, speeds, 1.0, vc);
  CHECK(a.mean_H == b.mean_H);
  CHECK(a.trajectories.size() == 20);
  CHECK(a.mean_density.cols() == 41);
  CHECK(a.guarantee_holds == (a.mean_H >= 1.0));
  CHECK(a.critical[3] == doctest::Approx(critical_density(sc.segment(3), 80)));

  const SampleSet fresh = generate_samples(vc.generator, std::max(sc.T(), vc.T_val), 20, vc.seed);
  double sum = 0.0;
  for (const auto& s : fresh.samples) {
    DisturbanceSample head = s;
    head.omega = s.omega.leftCols(sc.T());
    sum += sample_average_H(sc, propagate_batch(sc, u, SampleSet{{head}}));
  }
  CHECK(a.mean_H == doctest::Approx(sum / 20).epsilon(1e-12));
  vc.N_val = 0;
  CHECK_THROWS(validate(sc, speeds, 1.0, vc));
}
