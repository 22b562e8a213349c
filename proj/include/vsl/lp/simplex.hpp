#pragma once

// Bounded-variable revised simplex: primal, plus a dual phase for warm
// starts after bound changes or added rows.
//
// Internally every row i gets a logical variable r_i = a_i.x carrying the
// row bounds, so the constraint system is [A | -I] (x, r) = 0 with bounds on
// all variables. Phase 1 minimizes the sum of basic infeasibilities from any
// starting basis; phase 2 minimizes the (scaled) objective. The basis matrix
// is factored by eliminating the rows covered by basic logicals and running a
// sparse LU on the remaining structural kernel; pivots in between are kept as
// product-form eta vectors.
//
// A warm basis that is dual feasible (after moving boxed nonbasics to the
// bound their reduced cost prefers) but primal infeasible is repaired by the
// dual simplex; the primal simplex then confirms optimality from wherever
// the dual phase stopped.

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "vsl/lp/model.hpp"

namespace vsl::lp {

enum class VarStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

struct Basis {
  std::vector<VarStatus> col;
  std::vector<VarStatus> row;

  bool empty() const { return col.empty() && row.empty(); }
};

enum class LpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kIterationLimit,
  kTimeLimit,
  kNumericalFailure,
};

const char* to_string(LpStatus status);

struct SimplexOptions {
  double primal_tol = 1e-9;  // on scaled rows and columns
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  long max_iterations = 0;   // 0 picks 20 * (rows + cols) + 10000
  int refactor_interval = 64;
  double time_limit_s = std::numeric_limits<double>::infinity();
  bool scale = true;
  // Consecutive degenerate pivots before switching to Bland's rule, and
  // before perturbing the bounds.
  int bland_after = 60;
  int perturb_after = 2000;
  // Warm starts whose basis is dual feasible run the dual simplex first.
  bool dual_simplex = true;
};

struct LpSolution {
  LpStatus status = LpStatus::kNumericalFailure;
  double objective = 0.0;             // model sense, including the offset
  std::vector<double> x;              // primal values per column
  std::vector<double> row_activity;   // a_i.x
  std::vector<double> row_dual;       // model sense: d(objective)/d(row bound)
  std::vector<double> reduced_cost;   // c - A^T y, model sense
  std::vector<double> col_scale;      // x_j = col_scale_j * x'_j
  std::vector<double> row_scale;      // scaled row = row_scale_i * row
  Basis basis;
  long iterations = 0;
  long phase1_iterations = 0;
  long dual_iterations = 0;
  int perturbations = 0;
  int refactorizations = 0;
  std::string message;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

class SimplexSolver {
 public:
  explicit SimplexSolver(const LpModel& model, SimplexOptions options = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  // Bounds in model units; they persist across solves.
  void set_column_bounds(int j, double lower, double upper);
  double column_lower(int j) const;
  double column_upper(int j) const;

  // Starts from `warm` if given and consistent, otherwise from the basis of
  // the previous solve, otherwise from the all-logical basis. A warm basis
  // with fewer rows than the model is extended with basic logicals, one with
  // fewer columns with nonbasic trailing columns.
  LpSolution solve(const Basis* warm = nullptr);

  const LpModel& model() const;
  const SimplexOptions& options() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

LpSolution solve_lp(const LpModel& model, const SimplexOptions& options = {});

// Independent check of an LP solution against the model.
struct SolutionCheck {
  double primal_residual = 0.0;       // largest bound violation on scaled rows/cols
  double dual_infeasibility = 0.0;    // largest sign violation of scaled reduced costs
  double complementarity = 0.0;       // largest |d_j| on strictly interior columns (scaled)
  double objective_error = 0.0;       // |c.x + offset - reported| / max(1, |reported|)
};

SolutionCheck verify_solution(const LpModel& model, const LpSolution& solution);

}  // namespace vsl::lp
