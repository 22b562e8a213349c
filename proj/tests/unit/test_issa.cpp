#include <random>

#include "../common/desk.hpp"
#include "doctest.h"
#include "vsl/config.hpp"
#include "vsl/issa_solver.hpp"
#include "vsl/validation_oracle.hpp"

using namespace vsl;

namespace {

void check_log(const SolveReport& r) {
  for (std::size_t k = 0; k < r.log.size(); ++k) {
    const auto& it = r.log[k];
    CHECK(it.ub >= it.lb);
    if (k > 0) {
      CHECK(it.ub <= r.log[k - 1].ub);
      CHECK(it.lb >= r.log[k - 1].lb);
    }
  }
}

}  // namespace

TEST_CASE("issa: a single admissible profile is returned after one iteration") {
  ScenarioParams p = case_study_config().params;
  p.n = 1;
  p.length_km = 2;
  p.segments.resize(1);
  p.gamma = {60};
  p.T = 3;
  p.epsilon = 50;
  const HighwayScenario sc = HighwayScenario::create(p);
  const SampleSet s = generate_samples(case_study_generator(1), sc.T(), 2, 3);
  const SolveReport r = solve_issa(sc, s);
  const BruteForceResult bf = brute_force_optimum(sc, s);
  REQUIRE(bf.has_solution);
  REQUIRE(r.has_solution);
  CHECK(r.j_hat == doctest::Approx(bf.value).epsilon(1e-9));
  CHECK(r.log.size() <= 2);
}

TEST_CASE("issa: exhaustion agrees with enumeration, with and without options") {
  std::mt19937_64 rng(31);
  int compared = 0;
  for (int k = 0; k < 12; ++k) {
    const auto d = testing::random_desk(rng);
    const BruteForceResult bf = brute_force_optimum(d.scenario, d.samples);
    for (int variant = 0; variant < 3; ++variant) {
      IssaOptions o;
      if (variant == 1) o.polish = false;
      if (variant == 2) {
        o.polish = false;
        o.cap_lambda = false;
        o.ubp.validity_rows = false;
      }
      const SolveReport r = solve_issa(d.scenario, d.samples, o);
      check_log(r);
      CHECK(r.termination != Termination::kNumericalFailure);
      CHECK(r.has_solution == bf.has_solution);
      if (!bf.has_solution || !r.has_solution) continue;
      ++compared;
      CHECK(r.j_hat == doctest::Approx(bf.value).epsilon(1e-6));
      const auto c = certificate(d.scenario, propagate_batch(d.scenario, r.best, d.samples),
                                 d.scenario.epsilon());
      CHECK(c.value == doctest::Approx(r.j_hat).epsilon(1e-9));
      CHECK(r.log.front().ubp_bound >= bf.value - 1e-6 * std::max(1.0, std::abs(bf.value)));
    }
  }
  CHECK(compared >= 12);
}

TEST_CASE("issa: polish only ever adds finite, exactly scored profiles") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 6; ++k) {
    const auto d = testing::random_desk(rng);
    const SolveReport r = solve_issa(d.scenario, d.samples);
    for (const auto& it : r.log) {
      if (!std::isfinite(it.polished_value)) continue;
      const auto c = certificate(d.scenario, propagate_batch(d.scenario, it.polished, d.samples),
                                 d.scenario.epsilon());
      CHECK(c.value == it.polished_value);
      CHECK(it.lb >= it.polished_value);
    }
  }
}
