#pragma once

// Branch and bound over the binary columns of an LpModel.
//
// Best-bound node selection (ties: lowest node id), most-fractional
// branching (ties: lowest column index), children evaluated up-branch first.
// Each node warm-starts from its parent's optimal basis. Sequential and
// deterministic.

#include <limits>
#include <string>
#include <vector>

#include "vsl/lp/model.hpp"
#include "vsl/lp/simplex.hpp"

namespace vsl::lp {

struct MilpOptions {
  double gap_abs = 1e-6;
  double gap_rel = 0.0;          // relative to max(1, |incumbent|)
  double integrality_tol = 1e-6;
  double time_limit_s = std::numeric_limits<double>::infinity();
  long node_limit = 0;           // 0 = unlimited
  SimplexOptions lp;
};

enum class MilpStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  kTimeLimit,   // see has_incumbent
  kNodeLimit,
  kNumericalFailure,
};

const char* to_string(MilpStatus status);

struct MilpResult {
  MilpStatus status = MilpStatus::kNumericalFailure;
  bool has_incumbent = false;
  double objective = 0.0;  // incumbent value, model sense
  // Best proven bound on the optimum, model sense (>= objective when
  // maximizing). Infinite when the root relaxation is unbounded.
  double bound = 0.0;
  double root_bound = 0.0;
  std::vector<double> x;
  long nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;
  int lp_failures = 0;
  Basis root_basis;  // for warm-starting a related model

  bool optimal() const { return status == MilpStatus::kOptimal; }
};

// `warm` seeds the root relaxation (see SimplexSolver::solve).
MilpResult solve_milp(const MilpModel& model, const MilpOptions& options = {},
                      const Basis* warm = nullptr);

}  // namespace vsl::lp
