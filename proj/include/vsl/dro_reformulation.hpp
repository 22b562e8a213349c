#pragma once

// Mixed-binary reformulation of the certificate maximization over speed
// profiles.
//
// Speeds are encoded by binaries x_{e,i} (u_e = sum_i gamma_i x_{e,i}).
// Products of a binary with a bounded continuous quantity are linearized
// exactly (z = x*eta, y = x*rho). The only remaining nonconvexity is the
// objective term nu*rho, which the upper-bounding MILP relaxes with a
// McCormick envelope and the lower-bounding LP removes by fixing x (so rho
// becomes data).
//
// Per sample l, edge e and slot t = 1..T, with a_e = u_e / T and
// k_e = rho_bar_e - f_bar_e / u_bar_e:
//
//   sum_i gamma_i k_e z_{e,i} + f_bar_e eta - mu >= 0
//   nu = mu + a_e,   -lambda <= nu <= lambda,   eta >= 0
//
// and the objective is max -lambda*eps - (1/N) sum f_bar rho_bar eta
// + (1/N) sum nu*rho.

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vsl/lp/model.hpp"
#include "vsl/network_model.hpp"
#include "vsl/scenario_sampling.hpp"

namespace vsl {

// Linearization of z = x * g for binary x and g in [lo, hi]. Returns the
// number of rows emitted. When lo == 0 and z's column lower bound is already
// 0, the row z >= lo*x is skipped as implied.
int glover_linearize(lp::LpModel& model, int x, int z,
                     const std::vector<std::pair<int, double>>& g_terms,
                     double g_const, double lo, double hi, const std::string& name);

// Componentwise interval hull of the trajectory of one sample over all
// profiles in the admissible bands: n x T matrices for slots 1..T.
struct DensityBounds {
  Eigen::MatrixXd lo, hi;
};
DensityBounds interval_density_bounds(const HighwayScenario& scenario,
                                      const DisturbanceSample& sample);

struct BlockStats {
  int rows = 0;
  int cols = 0;
  long long nnz = 0;
};

// Column indices of the reformulation. Per-(l,e,t) arrays are flattened as
// (l * n + e) * T + (t - 1) for t = 1..T; z and y add the speed index last.
struct VariableLayout {
  int n = 0, m = 0, T = 0, N = 0;
  std::vector<int> x;  // e * m + i
  int lambda = -1;
  std::vector<int> rho, eta, mu, nu, s;
  std::vector<int> z;  // ((l*n + e)*T + t-1)*m + i
  std::vector<int> y;  // same indexing; y(0) is data, y(T) is never needed

  int let(int l, int e, int t) const { return (l * n + e) * T + (t - 1); }
  int leti(int l, int e, int t, int i) const { return let(l, e, t) * m + i; }
  int xi(int e, int i) const { return x[e * m + i]; }
};

struct P4System {
  lp::LpModel model;  // objective holds the linear part only
  VariableLayout layout;
  std::map<std::string, BlockStats> blocks;
  std::vector<DensityBounds> rho_bounds;  // per sample
  double lambda_upper = lp::kInf;         // largest admissible speed / T when capped
  std::vector<double> nu_upper;           // per edge
  std::vector<double> nu_lower;           // per (l,e,t)
  std::vector<double> critical;           // critical density, e * m + i
  std::vector<double> gamma;
  std::vector<double> speed_lo, speed_hi;  // admissible band per edge
  double epsilon = 0.0;
};

// All constraints that do not involve the product nu*rho: binary speed
// encoding, the linearized dynamics with y = x*rho, the dual feasibility rows
// with z = x*eta, the dual-norm cap and the eta box.
//
// With `cap_lambda`, lambda is boxed by the largest admissible speed over T
// and nu by the same value. A finite certificate peaks at a breakpoint u_e/T,
// so no profile with a finite certificate loses its optimum; the McCormick
// envelopes get far tighter than with the eta_bar-derived nu bound alone.
P4System build_p4_constraints(const HighwayScenario& scenario, const SampleSet& samples,
                              bool cap_lambda = true);

// Value of min sum f_bar*rho_bar*eta s.t. (f_bar + u*(rho_bar - f_bar/u_bar))*eta >= mu,
// eta >= 0, per edge e (rows of mu) and slot, in closed form:
// sum critical_density_e(u_e) * max(0, mu).
double support_function(const HighwayScenario& scenario, const std::vector<double>& speeds,
                        const Eigen::MatrixXd& mu);
// The same quantity from the LP itself, solved by the in-house simplex.
double support_function_lp(const HighwayScenario& scenario, const std::vector<double>& speeds,
                           const Eigen::MatrixXd& mu);

// Visited speed assignments, one grid index per edge.
class IntegerCutPool {
 public:
  void add(const SpeedProfile& profile);
  bool contains(const SpeedProfile& profile) const;
  int size() const { return static_cast<int>(visited_.size()); }
  const std::vector<SpeedProfile>& visited() const { return visited_; }

  // Left-hand side of the cut of visited assignment p at `profile`
  // (matching edges minus differing edges); the cut requires lhs <= n - 1.
  int cut_lhs(int p, const SpeedProfile& profile) const;

 private:
  std::vector<SpeedProfile> visited_;
};

struct UbpModel {
  lp::MilpModel model;
  VariableLayout layout;  // includes the McCormick columns s
  std::map<std::string, BlockStats> blocks;
  int cut_rows = 0;
};

struct UbpOptions {
  // Require
  //   (1/N) sum_{l,e,t} (max(0, -rho) + max(0, rho - sum_i c_{e,i} x_{e,i})) <= eps,
  // which at integral x is exactly the condition for a finite certificate,
  // so only assignments whose certificate is -inf are removed.
  bool validity_rows = false;
  // With validity_rows: also bound s <= sum_i c_{e,i} w_i + N*eps*nu where
  // w_i = nu * x_{e,i} is linearized exactly, i.e. the McCormick row at the
  // upper density bound uses the critical density of the chosen speed.
  bool speed_envelope = false;
};

// Upper-bounding MILP: the P4 system plus McCormick rows for the bilinear
// objective term and one canonical integer cut per visited assignment.
UbpModel build_ubp(const P4System& base, const IntegerCutPool& cuts,
                   const UbpOptions& options = {});

// Appends the cut row of one visited assignment to a model laid out by
// `layout`.
void add_integer_cut(lp::LpModel& model, const VariableLayout& layout,
                     const SpeedProfile& visited, const std::string& name);

struct LbpModel {
  lp::LpModel model;
  std::vector<int> eta;  // per (l,e,t)
  std::vector<int> nu;
  int lambda = -1;
  std::map<std::string, BlockStats> blocks;
};

// Lower-bounding LP for a fixed profile with its propagated trajectories.
// Its optimum equals the certificate; it is unbounded when the ambiguity set
// is empty. eta carries no upper bound here (see the builder).
LbpModel build_lbp(const HighwayScenario& scenario, const TrajectoryBatch& batch);

// Reads the profile encoded by the binaries of a (near-)integral solution.
SpeedProfile decode_profile(const VariableLayout& layout, const std::vector<double>& x);

}  // namespace vsl
