#pragma once

// Independent checks on the optimizer: exhaustive search over admissible
// speed profiles, a saturating cell-transmission simulator, and Monte-Carlo
// out-of-sample validation of a certified profile.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "vsl/certificate.hpp"
#include "vsl/network_model.hpp"
#include "vsl/scenario_sampling.hpp"

namespace vsl {

class EnumerationCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BruteForceResult {
  bool has_solution = false;  // false when every profile is invalid
  SpeedProfile best;
  double value = -std::numeric_limits<double>::infinity();
  double lambda_star = 0.0;
  long evaluated = 0;
  long invalid = 0;
};

// Evaluates the certificate of every admissible profile and keeps the
// largest; ties go to the lexicographically smallest speed vector. Throws
// EnumerationCapExceeded when the profile count exceeds `cap`.
BruteForceResult brute_force_optimum(const HighwayScenario& scenario, const SampleSet& samples,
                                     double cap = 1e5);

// Calls f(profile) for every admissible profile in lexicographic order.
template <class F>
void for_each_profile(const HighwayScenario& scenario, F&& f) {
  const int n = scenario.n();
  SpeedProfile p;
  p.index.resize(n);
  for (int e = 0; e < n; ++e) p.index[e] = scenario.band(e).first;
  for (;;) {
    f(static_cast<const SpeedProfile&>(p));
    int e = n - 1;
    while (e >= 0 && p.index[e] == scenario.band(e).last) {
      p.index[e] = scenario.band(e).first;
      --e;
    }
    if (e < 0) return;
    ++p.index[e];
  }
}

// Per-step trajectory of the saturating simulator. Column t holds time t
// (t = 0..T_val), so rho has T_val + 1 columns.
struct CtmTrajectory {
  Eigen::MatrixXd rho;             // n x (T_val + 1), veh/km
  Eigen::MatrixXd flow;            // n x T_val, outflow of each edge, veh/h
  Eigen::MatrixXd omega_accepted;  // n x T_val, veh/h
};

// Speeds for the uncontrolled road: every edge at its free-flow speed.
std::vector<double> uncontrolled_speeds(const HighwayScenario& scenario);

// Cell transmission with the piecewise-linear allowable flow of each edge
// capped by its incident capacity f_U. Flow into an edge never exceeds its
// free storage (rho_U - rho) / h; positive disturbances are admitted up to
// the storage left after the transfers, negative ones up to the vehicles
// present. Densities stay in [0, rho_U].
CtmTrajectory simulate_ctm(const HighwayScenario& scenario, const std::vector<double>& speeds,
                           const DisturbanceSample& sample, int T_val);

struct ValidationConfig {
  int N_val = 1000;
  int T_val = 60;
  std::uint64_t seed = 0;
  GeneratorSpec generator;
};

// Offset between a training seed and the seed of its validation stream.
constexpr std::uint64_t kValidationSeedOffset = 1000003;
inline std::uint64_t validation_seed(std::uint64_t training_seed) {
  return training_seed + kValidationSeedOffset;
}

struct ValidationReport {
  double mean_H = 0.0;  // over the training horizon, linear dynamics
  double j_hat = 0.0;
  bool guarantee_holds = false;  // mean_H >= j_hat
  int N_val = 0;
  int T_val = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd mean_density;    // n x (T_val + 1), simulator
  std::vector<double> max_mean_density;  // per edge, over t
  std::vector<double> max_density;       // per edge, over samples and t
  std::vector<double> critical;          // per edge, at the validated speeds
  std::vector<CtmTrajectory> trajectories;
};

// Draws fresh samples (config.seed, config.generator), evaluates the
// average objective under the linear dynamics over the scenario horizon and
// runs the simulator over T_val slots for the density statistics.
ValidationReport validate(const HighwayScenario& scenario, const std::vector<double>& speeds,
                          double j_hat, const ValidationConfig& config);

}  // namespace vsl
