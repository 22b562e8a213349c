#pragma once

// Disturbance samples (initial densities and net inflow rates), seeded
// generation, CSV exchange, and propagation of sample density trajectories
// through the linear chain dynamics
//
//   rho_e(t+1) = rho_e(t) + h * (u_s rho_s(t) - u_e rho_e(t) + omega_e(t)),
//
// where s is the upstream edge (no inflow term for edge 1).

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vsl/network_model.hpp"

namespace vsl {

struct DisturbanceSample {
  Eigen::VectorXd rho0;   // n initial densities, veh/km
  Eigen::MatrixXd omega;  // n x T net inflow rates, veh/h; column t drives t -> t+1

  int n() const { return static_cast<int>(rho0.size()); }
  int T() const { return static_cast<int>(omega.cols()); }
};

// Per-edge uniform intervals for the generator.
struct GeneratorSpec {
  std::vector<double> rho0_lo, rho0_hi;    // per edge; lo == hi gives a constant
  std::vector<double> omega_lo, omega_hi;  // per edge, shared by all slots

  int n() const { return static_cast<int>(omega_lo.size()); }
  // Throws std::invalid_argument on size mismatch or lo > hi.
  void validate() const;
};

struct SampleSet {
  std::vector<DisturbanceSample> samples;
  std::string provenance;  // "file:<path>" or "generator:seed=<s>"

  int N() const { return static_cast<int>(samples.size()); }
  int n() const { return samples.empty() ? 0 : samples.front().n(); }
  int T() const { return samples.empty() ? 0 : samples.front().T(); }
  // Throws std::invalid_argument unless N >= 1 and all dimensions agree.
  void validate() const;
};

// Deterministic given the seed. Draw order: for each sample, rho0 for every
// edge, then omega edge by edge and slot by slot.
SampleSet generate_samples(const GeneratorSpec& spec, int T, int N,
                           std::uint64_t seed);

// Case-study generating distribution: omega_1 ~ U[2e4, 2.4e4],
// omega_e ~ U[-1500, 2500] for e >= 2, rho0 = 260.
GeneratorSpec case_study_generator(int n);

// Density trajectory of one sample: n x T, column k holds time k+1.
using Trajectory = Eigen::MatrixXd;

struct TrajectoryBatch {
  std::vector<Trajectory> rho;
  SpeedProfile profile;

  int N() const { return static_cast<int>(rho.size()); }
};

// Exact recursion, no clamping or projection.
Trajectory propagate(const HighwayScenario& scenario,
                     const std::vector<double>& speeds,
                     const DisturbanceSample& sample);
Trajectory propagate(const HighwayScenario& scenario, const SpeedProfile& u,
                     const DisturbanceSample& sample);

TrajectoryBatch propagate_batch(const HighwayScenario& scenario,
                                const SpeedProfile& u, const SampleSet& samples);

// Two-block CSV: a header "l,e,rho0_veh_per_km" followed by its rows, then a
// header "l,e,t,omega_veh_per_h" followed by its rows (the unit suffixes are
// optional on input). Lines starting with '#' are skipped. l and e are
// 1-based, t is the 0-based slot index.
void write_samples_csv(std::ostream& os, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& is, const std::string& provenance);
SampleSet read_samples_file(const std::filesystem::path& path);

// Columns l,e,t,rho_veh_per_km with t = 1..T; the initial density lives in
// the sample file.
void write_trajectories_csv(std::ostream& os, const TrajectoryBatch& batch);

}  // namespace vsl
