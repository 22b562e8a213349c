#include "vsl/validation_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vsl {

BruteForceResult brute_force_optimum(const HighwayScenario& sc, const SampleSet& samples,
                                     double cap) {
  const double count = sc.profile_count();
  if (count > cap) {
    throw EnumerationCapExceeded("brute force would enumerate " + std::to_string(count) +
                                 " profiles, above the cap of " + std::to_string(cap) +
                                 "; use the iterative solver instead");
  }
  BruteForceResult res;
  for_each_profile(sc, [&](const SpeedProfile& p) {
    ++res.evaluated;
    const TrajectoryBatch batch = propagate_batch(sc, p, samples);
    const CertificateResult c = certificate(sc, batch, sc.epsilon());
    if (!c.finite()) {
      ++res.invalid;
      return;
    }
    // Strictly better only: enumeration order is lexicographic, so the
    // earliest of tied profiles survives.
    if (!res.has_solution || c.value > res.value + 1e-12 * std::max(1.0, std::abs(res.value))) {
      res.has_solution = true;
      res.best = p;
      res.value = c.value;
      res.lambda_star = c.lambda_star;
    }
  });
  return res;
}

std::vector<double> uncontrolled_speeds(const HighwayScenario& sc) {
  std::vector<double> u;
  for (const auto& s : sc.segments()) u.push_back(s.u_bar);
  return u;
}

CtmTrajectory simulate_ctm(const HighwayScenario& sc, const std::vector<double>& speeds,
                           const DisturbanceSample& sample, int T_val) {
  const int n = sc.n();
  if (static_cast<int>(speeds.size()) != n || sample.n() != n) {
    throw std::invalid_argument("simulate_ctm: dimension mismatch");
  }
  if (T_val < 0 || sample.T() < T_val) {
    throw std::invalid_argument("simulate_ctm: sample covers " + std::to_string(sample.T()) +
                                " slots, " + std::to_string(T_val) + " requested");
  }
  const double h = sc.h();
  CtmTrajectory out;
  out.rho.resize(n, T_val + 1);
  out.flow.resize(n, T_val);
  out.omega_accepted.resize(n, T_val);
  Eigen::VectorXd rho(n);
  for (int e = 0; e < n; ++e) rho(e) = std::clamp(sample.rho0(e), 0.0, sc.segment(e).rho_U);
  out.rho.col(0) = rho;
  Eigen::VectorXd q(n);
  for (int t = 0; t < T_val; ++t) {
    // Outflows from the current state.
    for (int e = 0; e < n; ++e) {
      const auto& s = sc.segment(e);
      const double r = std::min(rho(e), s.rho_bar);
      double demand = std::min(allowable_flow(s, r, speeds[e]), s.f_U);
      if (e + 1 < n) {
        const double room = (sc.segment(e + 1).rho_U - rho(e + 1)) / h;
        demand = std::min(demand, std::max(room, 0.0));
      }
      q(e) = std::max(demand, 0.0);
    }
    for (int e = 0; e < n; ++e) {
      const double in = e > 0 ? q(e - 1) : 0.0;
      const double moved = rho(e) + h * (in - q(e));
      double w = sample.omega(e, t);
      if (w > 0.0) {
        w = std::min(w, std::max(0.0, (sc.segment(e).rho_U - moved) / h));
      } else {
        w = std::max(w, -std::max(0.0, moved / h));
      }
      out.omega_accepted(e, t) = w;
      rho(e) = std::clamp(moved + h * w, 0.0, sc.segment(e).rho_U);
    }
    out.flow.col(t) = q;
    out.rho.col(t + 1) = rho;
  }
  return out;
}

ValidationReport validate(const HighwayScenario& sc, const std::vector<double>& speeds,
                          double j_hat, const ValidationConfig& cfg) {
  if (cfg.N_val < 1) throw std::invalid_argument("validate: N_val must be at least 1");
  if (cfg.T_val < 1) throw std::invalid_argument("validate: T_val must be at least 1");
  const int n = sc.n(), T = sc.T();
  const int slots = std::max(T, cfg.T_val);
  const SampleSet fresh = generate_samples(cfg.generator, slots, cfg.N_val, cfg.seed);

  ValidationReport rep;
  rep.j_hat = j_hat;
  rep.N_val = cfg.N_val;
  rep.T_val = cfg.T_val;
  rep.seed = cfg.seed;
  rep.mean_density = Eigen::MatrixXd::Zero(n, cfg.T_val + 1);
  rep.max_density.assign(n, 0.0);
  rep.max_mean_density.assign(n, 0.0);
  for (int e = 0; e < n; ++e) rep.critical.push_back(critical_density(sc.segment(e), speeds[e]));

  double sum_h = 0.0;
  for (const auto& s : fresh.samples) {
    DisturbanceSample head = s;
    head.omega = s.omega.leftCols(T);
    sum_h += objective_H(speeds, propagate(sc, speeds, head));
    CtmTrajectory traj = simulate_ctm(sc, speeds, s, cfg.T_val);
    rep.mean_density += traj.rho;
    for (int e = 0; e < n; ++e) rep.max_density[e] = std::max(rep.max_density[e], traj.rho.row(e).maxCoeff());
    rep.trajectories.push_back(std::move(traj));
  }
  rep.mean_H = sum_h / cfg.N_val;
  rep.mean_density /= cfg.N_val;
  for (int e = 0; e < n; ++e) rep.max_mean_density[e] = rep.mean_density.row(e).maxCoeff();
  rep.guarantee_holds = rep.mean_H >= j_hat;
  return rep;
}

}  // namespace vsl
