#include <cmath>
#include <vector>

#include "doctest.h"
#include "vsl/config.hpp"
#include "vsl/network_model.hpp"

using namespace vsl;

namespace {

const SegmentParams kNominal{3.1e4, 1050, 140, 3.1e4, 1050};
const std::vector<double> kGrid{40, 60, 80, 100, 120};

}  // namespace

TEST_CASE("network: tau of the nominal and incident segments") {
  CHECK(tau(kNominal) == doctest::Approx(31000.0 / 116000.0).epsilon(1e-12));
  CHECK(tau(kNominal) == doctest::Approx(0.267241).epsilon(1e-6));
  SegmentParams half{70 * 1000 / 2.0, 1000, 70, 70 * 1000 / 2.0, 1000};
  CHECK(tau(half) == doctest::Approx(1.0).epsilon(1e-14));
  SegmentParams inc{2.7e4, 1050, 140, 2.7e4, 1050};
  CHECK(tau(inc) == doctest::Approx(2.7e4 / (140 * 1050 - 2.7e4)).epsilon(1e-14));
  CHECK(tau(inc) == doctest::Approx(0.225).epsilon(1e-12));
}

TEST_CASE("network: degenerate diagram is rejected") {
  SegmentParams bad{140 * 1050, 1050, 140, 140 * 1050, 1050};
  CHECK_THROWS_AS(tau(bad), ModelError);
  CHECK_THROWS_AS(validate_segment(bad), ModelError);
}

TEST_CASE("network: critical density values") {
  CHECK(std::abs(critical_density(kNominal, 80) - 335) <= 1.0);
  CHECK(critical_density(kNominal, 140) == doctest::Approx(31000.0 / 140).epsilon(1e-12));
  CHECK(critical_density(kNominal, 40) == doctest::Approx(507.5).epsilon(1e-3));
  double prev = critical_density(kNominal, kGrid.front());
  for (std::size_t i = 1; i < kGrid.size(); ++i) {
    const double c = critical_density(kNominal, kGrid[i]);
    CHECK(c < prev);
    prev = c;
  }
  CHECK_THROWS_AS(critical_density(kNominal, 0.0), ModelError);
}

TEST_CASE("network: capacity product identity and monotonicity") {
  const auto& s = kNominal;
  double prev = 0.0;
  for (double u = 1.0; u <= s.u_bar; u += 0.5) {
    const double c = critical_density(s, u);
    const double closed = s.f_bar * s.rho_bar * s.u_bar * u /
                          (s.f_bar * s.u_bar + u * (s.u_bar * s.rho_bar - s.f_bar));
    CHECK(c * u == doctest::Approx(closed).epsilon(1e-12));
    CHECK(c * u > prev);
    prev = c * u;
    // Dual coefficient against the support bound.
    const double coef = s.f_bar + u * (s.rho_bar - s.f_bar / s.u_bar);
    CHECK(std::abs(coef - s.f_bar * s.rho_bar / c) <= 1e-12 * coef);
  }
}

TEST_CASE("network: allowable flow branches") {
  CHECK(allowable_flow(kNominal, 0.0, 80) == 0.0);
  CHECK(allowable_flow(kNominal, kNominal.rho_bar, 80) == doctest::Approx(0.0));
  const double c = critical_density(kNominal, 80);
  const double free = 80 * c;
  const double cong = tau(kNominal) * kNominal.u_bar * (kNominal.rho_bar - c);
  CHECK(free == doctest::Approx(cong).epsilon(1e-12));
  CHECK(allowable_flow(kNominal, c, 80) == doctest::Approx(2.677e4).epsilon(1e-3));
  double prev = 0.0;
  for (double r = 0.0; r <= kNominal.rho_bar; r += 1.0) {
    const double f = allowable_flow(kNominal, r, 80);
    if (r <= c) CHECK(f >= prev - 1e-9);
    else if (r - 1.0 >= c) CHECK(f <= prev + 1e-9);
    CHECK(std::abs(f - prev) <= 140.0 + 1e-9);  // Lipschitz, so no jump
    prev = f;
  }
  CHECK_THROWS_AS(allowable_flow(kNominal, -1.0, 80), ModelError);
  CHECK_THROWS_AS(allowable_flow(kNominal, 1051.0, 80), ModelError);
}

TEST_CASE("network: admissible bands") {
  SegmentParams inc = kNominal;
  inc.f_U = 2.7e4;
  const SpeedBand b = admissible_speed_set(inc, kGrid, 1.0);
  CHECK(b.lower == 40);
  CHECK(b.upper == 80);
  CHECK(b.first == 0);
  CHECK(b.last == 2);
  const SpeedBand all = admissible_speed_set(kNominal, kGrid, 1.0);
  CHECK(all.size() == kGrid.size());
  SegmentParams jam = kNominal;
  jam.rho_U = 1.0;
  CHECK_THROWS_AS(admissible_speed_set(jam, kGrid, 1.0), ModelError);
  // A tight jam-density cap removes the slow end of the grid.
  SegmentParams low = kNominal;
  low.rho_U = 400;
  const SpeedBand hi = admissible_speed_set(low, kGrid, 1.0);
  CHECK(hi.lower == 80);
  CHECK(hi.upper == 120);
}

TEST_CASE("network: band contiguity on random caps") {
  for (int k = 0; k < 200; ++k) {
    SegmentParams s = kNominal;
    s.f_U = 1.5e4 + 80.0 * k;
    s.rho_U = 300 + 3.5 * k;
    try {
      const SpeedBand b = admissible_speed_set(s, kGrid, 1.0);
      for (std::size_t i = 0; i < kGrid.size(); ++i) {
        const double c = critical_density(s, kGrid[i]);
        const bool ok = c * kGrid[i] <= s.f_U && c <= s.rho_U - 1.0;
        CHECK(ok == b.contains(i));
      }
    } catch (const ModelError&) {
      for (double g : kGrid) {
        const double c = critical_density(s, g);
        CHECK_FALSE((c * g <= s.f_U && c <= s.rho_U - 1.0));
      }
    }
  }
}

TEST_CASE("network: case-study scenario") {
  const HighwayScenario sc = make_scenario(case_study_config());
  CHECK(sc.n() == 5);
  CHECK(sc.T() == 20);
  CHECK(sc.h() == doctest::Approx(5 * (30.0 / 3600) / 10).epsilon(1e-12));
  CHECK(sc.band(3).upper == 80);
  for (int e : {0, 1, 2, 4}) CHECK(sc.band(e).upper == 120);
  CHECK(sc.profile_count() == 1875);
  CHECK(sc.eta_bar() > 0);
}

TEST_CASE("network: scenario invariants are enforced") {
  ScenarioParams p = case_study_config().params;
  SUBCASE("CFL condition") {
    p.delta_s = 300;
    CHECK_THROWS_AS(HighwayScenario::create(p), ModelError);
  }
  SUBCASE("grid order") {
    p.gamma = {60, 40};
    CHECK_THROWS_AS(HighwayScenario::create(p), ModelError);
  }
  SUBCASE("negative radius") {
    p.epsilon = -1;
    CHECK_THROWS_AS(HighwayScenario::create(p), ModelError);
  }
  SUBCASE("segment count") {
    p.segments.pop_back();
    CHECK_THROWS_AS(HighwayScenario::create(p), ModelError);
  }
  SUBCASE("beta range") {
    p.beta = 1.0;
    CHECK_THROWS_AS(HighwayScenario::create(p), ModelError);
  }
}
