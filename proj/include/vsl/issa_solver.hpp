#pragma once

// Integer solution search: alternate an upper-bounding MILP (McCormick
// relaxation plus no-good cuts on visited speed assignments) with an exact
// lower-bounding LP on the candidate it proposes.

#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "vsl/certificate.hpp"
#include "vsl/dro_reformulation.hpp"
#include "vsl/lp/milp.hpp"
#include "vsl/network_model.hpp"
#include "vsl/scenario_sampling.hpp"

namespace vsl {

enum class Termination {
  kGap,             // UB - LB within tolerance
  kUbpInfeasible,   // every admissible assignment has been visited
  kTimeLimit,       // budget spent with a finite candidate in hand
  kNumericalFailure
};

const char* to_string(Termination t);

struct IterationRecord {
  int k = 0;
  SpeedProfile profile;
  std::vector<double> speeds;
  lp::MilpStatus ubp_status = lp::MilpStatus::kOptimal;
  double ubp_bound = 0.0;  // raw bound of this iteration's MILP
  double ub = 0.0;         // running upper bound
  double obj = 0.0;        // LBP value, -inf when the certificate is invalid
  double lb = 0.0;         // best obj so far (-inf until a finite one)
  double certificate = 0.0;  // closed-form value for the same candidate
  double lambda_star = 0.0;
  // Best profile found by the single-edge ascent from the candidate, and its
  // certificate (-inf when polishing is off or found nothing finite).
  SpeedProfile polished;
  double polished_value = -std::numeric_limits<double>::infinity();
  long ubp_nodes = 0;
  long lp_iterations = 0;
  double seconds = 0.0;  // wall time since the start of the run
};

struct IssaOptions {
  // Stop once UB - LB <= gap_eps * max(1, |UB|).
  double gap_eps = 1e-4;
  // Wall-clock budget; once spent, the run stops as soon as a finite
  // candidate exists.
  double time_limit_s = std::numeric_limits<double>::infinity();
  // Box lambda (and nu) by the largest admissible speed over T.
  bool cap_lambda = true;
  // Without the validity rows the MILP keeps proposing assignments whose
  // certificate is -inf.
  UbpOptions ubp{.validity_rows = true};
  // Climb from each candidate by changing one edge's speed at a time, scoring
  // with the closed-form certificate. Only raises LB.
  bool polish = true;
  lp::MilpOptions milp;
  std::function<void(const IterationRecord&)> on_iteration;
};

struct SolveReport {
  bool has_solution = false;
  SpeedProfile best;
  double j_hat = -std::numeric_limits<double>::infinity();
  double lambda_star = 0.0;
  Termination termination = Termination::kNumericalFailure;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  std::vector<IterationRecord> log;
  double seconds = 0.0;
  int feasible_candidates = 0;
  int discarded_candidates = 0;
  std::map<std::string, BlockStats> ubp_blocks;  // first iteration's model
  std::vector<std::string> warnings;
  std::string message;
};

SolveReport solve_issa(const HighwayScenario& scenario, const SampleSet& samples,
                       const IssaOptions& options = {});

}  // namespace vsl
