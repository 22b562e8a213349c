#include "vsl/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vsl {

const char* to_string(CertificateStatus status) {
  switch (status) {
    case CertificateStatus::kFinite:
      return "finite";
    case CertificateStatus::kInvalidEmptyAmbiguity:
      return "invalid_empty_ambiguity";
  }
  return "unknown";
}

double objective_H(const std::vector<double>& speeds, const Trajectory& rho) {
  if (static_cast<Eigen::Index>(speeds.size()) != rho.rows()) {
    throw std::invalid_argument("objective_H: dimension mismatch");
  }
  double total = 0.0;
  for (Eigen::Index e = 0; e < rho.rows(); ++e) total += speeds[e] * rho.row(e).sum();
  return total / static_cast<double>(rho.cols());
}

double inner_inf_component(double a, double cap, double r, double lambda) {
  // Convex piecewise-linear in rho with a single kink at r, so the minimum
  // over [0, cap] sits at 0 or at the projection of r.
  const double at_zero = lambda * std::abs(r);
  const double p = std::clamp(r, 0.0, cap);
  const double at_proj = lambda * std::abs(p - r) + a * p;
  return std::min(at_zero, at_proj);
}

namespace {

struct Prepared {
  std::vector<double> weights;  // u_e / T
  std::vector<double> caps;     // critical density per edge
};

Prepared prepare(const HighwayScenario& scenario, const TrajectoryBatch& batch) {
  const int n = scenario.n();
  if (static_cast<int>(batch.profile.index.size()) != n) {
    throw std::invalid_argument("certificate: profile dimension mismatch");
  }
  if (batch.rho.empty()) throw std::invalid_argument("certificate: no trajectories");
  for (const auto& r : batch.rho) {
    if (r.rows() != n || r.cols() != scenario.T()) {
      throw std::invalid_argument("certificate: trajectory dimension mismatch");
    }
  }
  Prepared p;
  for (int e = 0; e < n; ++e) {
    const double u = batch.profile.speed(scenario, e);
    p.weights.push_back(u / scenario.T());
    p.caps.push_back(critical_density(scenario.segment(e), u));
  }
  return p;
}

}  // namespace

double certificate_objective(const std::vector<double>& weights,
                             const std::vector<double>& caps,
                             const TrajectoryBatch& batch, double epsilon,
                             double lambda) {
  double sum = 0.0;
  for (const auto& rho : batch.rho) {
    for (Eigen::Index e = 0; e < rho.rows(); ++e) {
      for (Eigen::Index t = 0; t < rho.cols(); ++t) {
        sum += inner_inf_component(weights[e], caps[e], rho(e, t), lambda);
      }
    }
  }
  return -lambda * epsilon + sum / static_cast<double>(batch.rho.size());
}

CertificateResult certificate(const HighwayScenario& scenario,
                              const TrajectoryBatch& batch, double epsilon) {
  if (!(epsilon >= 0.0)) throw std::invalid_argument("certificate: epsilon must be >= 0");
  const Prepared p = prepare(scenario, batch);

  std::vector<double> breakpoints{0.0};
  breakpoints.insert(breakpoints.end(), p.weights.begin(), p.weights.end());
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());

  CertificateResult result;
  double dist = 0.0;
  for (const auto& rho : batch.rho) {
    for (Eigen::Index e = 0; e < rho.rows(); ++e) {
      for (Eigen::Index t = 0; t < rho.cols(); ++t) {
        const double r = rho(e, t);
        dist += std::max(0.0, -r) + std::max(0.0, r - p.caps[e]);
      }
    }
  }
  result.asymptotic_slope = -epsilon + dist / static_cast<double>(batch.rho.size());

  for (double lambda : breakpoints) {
    result.table.push_back(
        {lambda, certificate_objective(p.weights, p.caps, batch, epsilon, lambda)});
  }
  if (result.asymptotic_slope > 0.0) {
    result.status = CertificateStatus::kInvalidEmptyAmbiguity;
    result.value = -std::numeric_limits<double>::infinity();
    result.lambda_star = breakpoints.back();
    return result;
  }
  result.status = CertificateStatus::kFinite;
  result.value = result.table.front().value;
  result.lambda_star = result.table.front().lambda;
  for (const auto& pt : result.table) {
    // Strict comparison keeps the smallest maximizing lambda.
    if (pt.value > result.value) {
      result.value = pt.value;
      result.lambda_star = pt.lambda;
    }
  }
  return result;
}

CertificateResult certificate(const HighwayScenario& scenario,
                              const SpeedProfile& u, const SampleSet& samples,
                              double epsilon) {
  return certificate(scenario, propagate_batch(scenario, u, samples), epsilon);
}

double sample_average_H(const HighwayScenario& scenario,
                        const TrajectoryBatch& batch) {
  const auto speeds = batch.profile.speeds(scenario);
  double total = 0.0;
  for (const auto& rho : batch.rho) total += objective_H(speeds, rho);
  return total / static_cast<double>(batch.rho.size());
}

}  // namespace vsl
