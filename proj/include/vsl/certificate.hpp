#pragma once

// Distributionally robust certificate of a fixed speed profile.
//
// With the 1-norm transport cost and the box support
// Z(u) = {rho : 0 <= rho_e(t) <= critical_density_e(u_e)}, the dual
//
//   J(u) = sup_{lambda >= 0} -lambda*eps
//          + (1/N) sum_l inf_{rho in Z(u)} (lambda*|rho - rho_l|_1 + H(u; rho))
//
// separates per component. Each component is a concave piecewise-linear
// function of lambda with its only kink at lambda = u_e / T, so the supremum
// is attained on the breakpoint set {0} U {u_e / T} unless the slope beyond
// the last breakpoint is positive, in which case the ambiguity set holds no
// distribution supported on Z(u).

#include <limits>
#include <vector>

#include "vsl/network_model.hpp"
#include "vsl/scenario_sampling.hpp"

namespace vsl {

enum class CertificateStatus { kFinite, kInvalidEmptyAmbiguity };

const char* to_string(CertificateStatus status);

struct CertificatePoint {
  double lambda = 0.0;
  double value = 0.0;  // F(lambda)
};

struct CertificateResult {
  double value = -std::numeric_limits<double>::infinity();
  double lambda_star = 0.0;
  CertificateStatus status = CertificateStatus::kInvalidEmptyAmbiguity;
  // Slope of F beyond the largest breakpoint:
  // -eps + (1/N) sum_l dist_1(rho_l, Z(u)).
  double asymptotic_slope = 0.0;
  std::vector<CertificatePoint> table;  // F at every breakpoint, ascending

  bool finite() const { return status == CertificateStatus::kFinite; }
};

// (1/T) sum_{e,t} rho_e(t) u_e, in veh/h.
double objective_H(const std::vector<double>& speeds, const Trajectory& rho);

// min over rho in [0, cap] of lambda*|rho - r| + a*rho, a >= 0, lambda >= 0.
double inner_inf_component(double a, double cap, double r, double lambda);

// Evaluates F(lambda) directly (no breakpoint logic); used by oracles too.
double certificate_objective(const std::vector<double>& weights,
                             const std::vector<double>& caps,
                             const TrajectoryBatch& batch, double epsilon,
                             double lambda);

CertificateResult certificate(const HighwayScenario& scenario,
                              const TrajectoryBatch& batch, double epsilon);

// Convenience: propagates the samples under `u` first.
CertificateResult certificate(const HighwayScenario& scenario,
                              const SpeedProfile& u, const SampleSet& samples,
                              double epsilon);

// Sample average of H over the batch.
double sample_average_H(const HighwayScenario& scenario,
                        const TrajectoryBatch& batch);

}  // namespace vsl
