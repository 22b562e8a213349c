#pragma once

// Chain-graph highway: triangular fundamental diagrams per speed limit,
// critical densities and the admissible speed-limit band of every edge.
//
// Units are fixed throughout the library: densities in veh/km, flows in
// veh/h, speeds in km/h, times in hours.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vsl {

// Raised when physical parameters violate a model invariant.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SegmentParams {
  double f_bar = 0.0;    // capacity, veh/h
  double rho_bar = 0.0;  // jam density, veh/km
  double u_bar = 0.0;    // maximal free-flow speed, km/h
  double f_U = 0.0;      // capacity under the current incident condition
  double rho_U = 0.0;    // jam density under the current incident condition
};

// Throws ModelError naming the first violated invariant.
void validate_segment(const SegmentParams& seg);

// f_bar / (u_bar * rho_bar - f_bar), the slope ratio of the congested branch.
double tau(const SegmentParams& seg);

// Density at which the diagram for speed limit `u` peaks:
// tau * rho_bar * u_bar / (tau * u_bar + u).
double critical_density(const SegmentParams& seg, double u);

// Piecewise-linear allowable flow u*rho (free branch) or
// tau*u_bar*(rho_bar - rho) (congested branch).
double allowable_flow(const SegmentParams& seg, double rho, double u);

// Contiguous band of the speed grid that respects the incident caps.
struct SpeedBand {
  std::size_t first = 0;  // index of the lowest admissible speed in the grid
  std::size_t last = 0;   // index of the highest admissible speed (inclusive)
  double lower = 0.0;     // u^L
  double upper = 0.0;     // u^U

  std::size_t size() const { return last - first + 1; }
  bool contains(std::size_t grid_index) const {
    return grid_index >= first && grid_index <= last;
  }
};

// Enumerates the grid and keeps every speed g with
// critical_density(g) * g <= f_U and critical_density(g) <= rho_U - pi.
// Throws ModelError when no grid speed qualifies.
SpeedBand admissible_speed_set(const SegmentParams& seg,
                               std::span<const double> gamma, double pi);

// Raw, unvalidated scenario description (what a config file carries).
struct ScenarioParams {
  int n = 0;                 // segment count
  double length_km = 0.0;    // road length L
  double delta_s = 0.0;      // slot length in seconds
  int T = 0;                 // slot count
  std::vector<SegmentParams> segments;
  std::vector<double> gamma;  // speed grid, strictly increasing
  double pi = 1.0;            // jam-density margin, veh/km
  double eta_bar = 0.0;       // dual bound; <= 0 selects the default
  double epsilon = 0.0;       // Wasserstein radius
  double beta = 0.05;         // confidence level
};

// Immutable, validated highway description. Build with `create`.
class HighwayScenario {
 public:
  // Validates every invariant and precomputes h, the admissible bands and
  // the dual bound. Throws ModelError on the first violation; the message
  // starts with the offending key.
  static HighwayScenario create(const ScenarioParams& params);

  int n() const { return n_; }
  int T() const { return T_; }
  std::size_t m() const { return gamma_.size(); }
  double length_km() const { return length_km_; }
  double delta_h() const { return delta_h_; }
  // Discretization ratio n*delta/L in h/km.
  double h() const { return h_; }
  double pi() const { return pi_; }
  double eta_bar() const { return eta_bar_; }
  double epsilon() const { return epsilon_; }
  double beta() const { return beta_; }
  const std::vector<double>& gamma() const { return gamma_; }
  const std::vector<SegmentParams>& segments() const { return segments_; }
  const SegmentParams& segment(int e) const { return segments_.at(e); }
  const std::vector<SpeedBand>& bands() const { return bands_; }
  const SpeedBand& band(int e) const { return bands_.at(e); }

  // Number of admissible speed profiles (product of band sizes).
  double profile_count() const;

  // Copy with a different Wasserstein radius.
  HighwayScenario with_epsilon(double epsilon) const;

  // Default dual bound: ten times the largest dual slope an optimal
  // certificate can need, max(gamma) / (T * min f_bar).
  static double default_eta_bar(const ScenarioParams& params);

 private:
  HighwayScenario() = default;

  int n_ = 0;
  int T_ = 0;
  double length_km_ = 0.0;
  double delta_h_ = 0.0;
  double h_ = 0.0;
  double pi_ = 1.0;
  double eta_bar_ = 0.0;
  double epsilon_ = 0.0;
  double beta_ = 0.05;
  std::vector<double> gamma_;
  std::vector<SegmentParams> segments_;
  std::vector<SpeedBand> bands_;
};

// One speed limit per edge, each taken from the grid.
struct SpeedProfile {
  std::vector<std::size_t> index;  // grid index per edge

  std::vector<double> speeds(const HighwayScenario& scenario) const;
  double speed(const HighwayScenario& scenario, int e) const {
    return scenario.gamma().at(index.at(e));
  }
  bool operator==(const SpeedProfile&) const = default;
};

// Profile whose speeds are given in km/h; every value must be in the grid.
SpeedProfile profile_from_speeds(const HighwayScenario& scenario,
                                 std::span<const double> speeds);

// Throws ModelError unless every edge's speed lies in its admissible band.
void check_admissible(const HighwayScenario& scenario,
                      const SpeedProfile& profile);

std::string format_speeds(const HighwayScenario& scenario,
                          const SpeedProfile& profile);

}  // namespace vsl
