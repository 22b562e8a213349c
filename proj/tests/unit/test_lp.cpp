#include <random>
#include <sstream>

#include "doctest.h"
#include "vsl/lp/simplex.hpp"

using namespace vsl::lp;

namespace {

void expect_certified(const LpModel& model, const LpSolution& sol) {
  INFO("status " << std::string(to_string(sol.status)) << " after " << sol.iterations << " iterations");
  REQUIRE(sol.optimal());
  const auto check = verify_solution(model, sol);
  CHECK(check.primal_residual <= 1e-7);
  CHECK(check.dual_infeasibility <= 1e-7);
  CHECK(check.objective_error <= 1e-7);
}

}  // namespace

TEST_CASE("lp: two variables sharing one unit of capacity") {
  LpModel m;
  const int x1 = m.add_column("x1", 0, kInf, 1);
  const int x2 = m.add_column("x2", 0, kInf, 1);
  m.add_le("cap", {{x1, 1}, {x2, 1}}, 1);
  const auto sol = solve_lp(m);
  expect_certified(m, sol);
  CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("lp: contradictory bounds are infeasible") {
  LpModel m;
  const int x = m.add_column("x", -kInf, kInf, 1);
  m.add_ge("lo", {{x, 1}}, 1);
  m.add_le("hi", {{x, 1}}, 0);
  CHECK(solve_lp(m).status == LpStatus::kInfeasible);
}

TEST_CASE("lp: ray without an upper bound is unbounded") {
  LpModel m;
  const int x = m.add_column("x", -kInf, kInf, 1);
  m.add_ge("nonneg", {{x, 1}}, 0);
  CHECK(solve_lp(m).status == LpStatus::kUnbounded);

  LpModel direct;
  direct.add_column("x", 0, kInf, 1);
  CHECK(solve_lp(direct).status == LpStatus::kUnbounded);
}

TEST_CASE("lp: empty model and column-only model") {
  LpModel m;
  m.add_column("x", -2, 3, 1);
  m.add_column("y", -2, 3, -1);
  const auto sol = solve_lp(m);
  REQUIRE(sol.optimal());
  CHECK(sol.objective == doctest::Approx(5.0));
}

TEST_CASE("lp: equality rows, free columns and minimization") {
  // min x + 2y + 3z, x + y + z = 6, x - y = 1, y free, z >= 0, x <= 2.
  LpModel m;
  m.sense = Sense::kMinimize;
  const int x = m.add_column("x", -kInf, 2, 1);
  const int y = m.add_column("y", -kInf, kInf, 2);
  const int z = m.add_column("z", 0, kInf, 3);
  m.add_eq("sum", {{x, 1}, {y, 1}, {z, 1}}, 6);
  m.add_eq("diff", {{x, 1}, {y, -1}}, 1);
  const auto sol = solve_lp(m);
  expect_certified(m, sol);
  // z = 6 - 2x + 1, objective = x + 2(x-1) + 3(7-2x) = 19 - 3x, so x = 2.
  CHECK(sol.x[x] == doctest::Approx(2.0));
  CHECK(sol.x[y] == doctest::Approx(1.0));
  CHECK(sol.x[z] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(13.0));
}

TEST_CASE("lp: classic cycling instance terminates at the optimum") {
  LpModel m;
  m.sense = Sense::kMinimize;
  const int x4 = m.add_column("x4", 0, kInf, -0.75);
  const int x5 = m.add_column("x5", 0, kInf, 20);
  const int x6 = m.add_column("x6", 0, kInf, -0.5);
  const int x7 = m.add_column("x7", 0, kInf, 6);
  m.add_le("r1", {{x4, 0.25}, {x5, -8}, {x6, -1}, {x7, 9}}, 0);
  m.add_le("r2", {{x4, 0.5}, {x5, -12}, {x6, -0.5}, {x7, 3}}, 0);
  m.add_le("r3", {{x6, 1}}, 1);
  SimplexOptions dantzig_only;
  dantzig_only.bland_after = 1 << 30;
  for (const auto& opts : {SimplexOptions{}, dantzig_only}) {
    const auto sol = solve_lp(m, opts);
    expect_certified(m, sol);
    CHECK(sol.objective == doctest::Approx(-1.25));
  }
}

TEST_CASE("lp: strong duality on random feasible bounded instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(0.1, 5.0), cost(-1.0, 4.0), rhs(1.0, 20.0);
  std::bernoulli_distribution keep(0.6);
  for (int trial = 0; trial < 25; ++trial) {
    const int rows = 3 + trial % 7, cols = 4 + (trial * 3) % 9;
    std::vector<std::vector<double>> A(rows, std::vector<double>(cols, 0.0));
    for (int j = 0; j < cols; ++j) {
      A[trial % rows][j] = coef(rng);  // every column bounded by some row
      for (int i = 0; i < rows; ++i) {
        if (keep(rng)) A[i][j] = coef(rng);
      }
    }
    std::vector<double> b(rows), c(cols);
    for (auto& v : b) v = rhs(rng);
    for (auto& v : c) v = cost(rng);

    // Primal: max c.x, A x <= b, x >= 0.
    LpModel primal;
    for (int j = 0; j < cols; ++j) primal.add_column("x" + std::to_string(j), 0, kInf, c[j]);
    for (int i = 0; i < rows; ++i) {
      std::vector<std::pair<int, double>> t;
      for (int j = 0; j < cols; ++j) {
        if (A[i][j] != 0.0) t.emplace_back(j, A[i][j]);
      }
      primal.add_le("r" + std::to_string(i), t, b[i]);
    }
    // Dual: min b.y, A^T y >= c, y >= 0.
    LpModel dual;
    dual.sense = Sense::kMinimize;
    for (int i = 0; i < rows; ++i) dual.add_column("y" + std::to_string(i), 0, kInf, b[i]);
    for (int j = 0; j < cols; ++j) {
      std::vector<std::pair<int, double>> t;
      for (int i = 0; i < rows; ++i) {
        if (A[i][j] != 0.0) t.emplace_back(i, A[i][j]);
      }
      dual.add_ge("c" + std::to_string(j), t, c[j]);
    }
    const auto ps = solve_lp(primal);
    const auto ds = solve_lp(dual);
    expect_certified(primal, ps);
    expect_certified(dual, ds);
    CHECK(ps.objective == doctest::Approx(ds.objective).epsilon(1e-6));
    // Reported row duals solve the dual problem too.
    double dual_obj = 0.0;
    for (int i = 0; i < rows; ++i) {
      CHECK(ps.row_dual[i] >= -1e-9);
      dual_obj += b[i] * ps.row_dual[i];
    }
    CHECK(dual_obj == doctest::Approx(ps.objective).epsilon(1e-6));
  }
}

TEST_CASE("lp: random boxed ranged instances pass the optimality check") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 5 + trial % 6, cols = 6 + trial % 5;
    LpModel m;
    m.sense = trial % 2 ? Sense::kMinimize : Sense::kMaximize;
    std::vector<double> x0(cols);
    for (int j = 0; j < cols; ++j) {
      const double l = -3.0 + u(rng), h = 3.0 + u(rng);
      m.add_column("x" + std::to_string(j), l, h, 1000.0 * u(rng));
      x0[j] = 0.5 * (l + h) + u(rng);
    }
    for (int i = 0; i < rows; ++i) {
      std::vector<std::pair<int, double>> t;
      double act = 0.0;
      for (int j = 0; j < cols; ++j) {
        // Mixed magnitudes exercise the scaling.
        const double a = u(rng) * (j % 3 == 0 ? 1e3 : 1e-2);
        t.emplace_back(j, a);
        act += a * x0[j];
      }
      const double w = std::abs(u(rng)) * 5.0;
      if (i % 3 == 0) {
        m.add_eq("e" + std::to_string(i), t, act);
      } else {
        m.add_row("g" + std::to_string(i), act - w, act + w, t);
      }
    }
    const auto sol = solve_lp(m);
    expect_certified(m, sol);
  }
}

TEST_CASE("lp: warm start after a bound change matches a cold solve") {
  LpModel m;
  const int a = m.add_column("a", 0, 10, 3);
  const int b = m.add_column("b", 0, 10, 2);
  const int c = m.add_column("c", 0, 10, 4);
  m.add_le("r1", {{a, 1}, {b, 1}, {c, 2}}, 12);
  m.add_le("r2", {{a, 2}, {b, 1}, {c, 1}}, 14);
  SimplexSolver solver(m);
  const auto first = solver.solve();
  REQUIRE(first.optimal());
  solver.set_column_bounds(c, 0, 1);
  const auto warm = solver.solve(&first.basis);
  LpModel changed = m;
  changed.set_bounds(c, 0, 1);
  const auto cold = solve_lp(changed);
  REQUIRE(warm.optimal());
  CHECK(warm.objective == doctest::Approx(cold.objective));
  expect_certified(changed, warm);
}

TEST_CASE("lp: warm basis shorter than the model gains basic logicals") {
  LpModel m;
  const int a = m.add_column("a", 0, kInf, 1);
  const int b = m.add_column("b", 0, kInf, 1);
  m.add_le("r1", {{a, 1}, {b, 2}}, 4);
  m.add_le("r2", {{a, 3}, {b, 1}}, 6);
  const auto first = solve_lp(m);
  REQUIRE(first.optimal());
  LpModel cut = m;
  cut.add_le("r3", {{a, 1}, {b, 1}}, 2);
  SimplexSolver solver(cut);
  const auto sol = solver.solve(&first.basis);
  expect_certified(cut, sol);
  CHECK(sol.objective == doctest::Approx(2.0));
}

TEST_CASE("lp: model validation rejects malformed input") {
  LpModel m;
  m.add_column("x", 1, 0, 1);
  CHECK_THROWS_AS(m.validate(), ModelError);
  LpModel dangling;
  dangling.add_column("x", 0, 1, 1);
  dangling.add_le("r", {{3, 1.0}}, 1);
  CHECK_THROWS_AS(dangling.validate(), ModelError);
  LpModel nan_coef;
  nan_coef.add_column("x", 0, 1, 1);
  nan_coef.add_le("r", {{0, std::nan("")}}, 1);
  CHECK_THROWS_AS(solve_lp(nan_coef), ModelError);
}

TEST_CASE("lp: text dump lists every section") {
  LpModel m;
  const int x = m.add_column("x", 0, kInf, 1);
  const int z = m.add_binary("z", 2);
  m.add_row("range", 1, 3, {{x, 1}, {z, -1}});
  std::ostringstream os;
  write_lp_format(os, m);
  const auto text = os.str();
  CHECK(text.find("Maximize") != std::string::npos);
  CHECK(text.find("range_lo:") != std::string::npos);
  CHECK(text.find("range_hi:") != std::string::npos);
  CHECK(text.find("Binaries\n z") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
}
