#include "vsl/issa_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "vsl/lp/simplex.hpp"

namespace vsl {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kGap:
      return "gap";
    case Termination::kUbpInfeasible:
      return "ubp_infeasible";
    case Termination::kTimeLimit:
      return "time_limit";
    case Termination::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// eta at its box edge means the UBP may be cutting off dual mass.
int count_at_cap(const std::vector<double>& x, const std::vector<int>& eta, double cap) {
  int hits = 0;
  for (int j : eta) {
    if (x[j] >= cap - 1e-6 * std::max(1.0, cap)) ++hits;
  }
  return hits;
}

// Steepest ascent over profiles differing from `start` on one edge.
std::pair<SpeedProfile, double> polish(const HighwayScenario& sc, const SampleSet& samples,
                                       SpeedProfile start, double value) {
  auto score = [&](const SpeedProfile& u) {
    return certificate(sc, propagate_batch(sc, u, samples), sc.epsilon()).value;
  };
  for (;;) {
    SpeedProfile best = start;
    double best_value = value;
    for (int e = 0; e < sc.n(); ++e) {
      const SpeedBand& band = sc.band(e);
      for (std::size_t i = band.first; i <= band.last; ++i) {
        if (i == start.index[e]) continue;
        SpeedProfile u = start;
        u.index[e] = i;
        const double v = score(u);
        if (v > best_value) {
          best = u;
          best_value = v;
        }
      }
    }
    if (best.index == start.index) return {start, value};
    start = best;
    value = best_value;
  }
}

}  // namespace

SolveReport solve_issa(const HighwayScenario& sc, const SampleSet& samples,
                       const IssaOptions& options) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };

  SolveReport rep;
  const P4System base = build_p4_constraints(sc, samples, options.cap_lambda);
  IntegerCutPool pool;
  lp::Basis warm;
  int ubp_eta_hits = 0, lbp_eta_hits = 0;

  for (int k = 1;; ++k) {
    const double spent = elapsed();
    if (spent >= options.time_limit_s && rep.has_solution) {
      rep.termination = Termination::kTimeLimit;
      break;
    }
    if (k == 1 && options.ubp.validity_rows) {
      // The relaxation without the validity rows solves much faster from
      // scratch; its basis stays dual feasible once they are added.
      lp::SimplexOptions so = options.milp.lp;
      if (std::isfinite(options.time_limit_s)) so.time_limit_s = options.time_limit_s;
      UbpOptions plain = options.ubp;
      plain.validity_rows = false;
      const lp::LpSolution pre = lp::solve_lp(build_ubp(base, pool, plain).model, so);
      if (pre.status == lp::LpStatus::kOptimal) warm = pre.basis;
    }
    UbpModel ubp = build_ubp(base, pool, options.ubp);
    if (k == 1) rep.ubp_blocks = ubp.blocks;

    lp::MilpOptions mo = options.milp;
    if (std::isfinite(options.time_limit_s)) {
      mo.time_limit_s = std::min(mo.time_limit_s, std::max(0.0, options.time_limit_s - spent));
    }
    const lp::MilpResult mr = lp::solve_milp(ubp.model, mo, warm.empty() ? nullptr : &warm);
    if (!mr.root_basis.empty()) warm = mr.root_basis;

    if (mr.status == lp::MilpStatus::kInfeasible) {
      rep.termination = Termination::kUbpInfeasible;
      // Nothing unvisited remains, so the best visited value is exact.
      rep.ub = rep.lb;
      break;
    }
    if (!mr.has_incumbent || mr.status == lp::MilpStatus::kUnbounded) {
      rep.termination = Termination::kNumericalFailure;
      rep.message = std::string("upper-bounding MILP ended without a candidate: ") +
                    lp::to_string(mr.status);
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.ubp_status = mr.status;
    rec.ubp_bound = mr.bound;
    rec.ubp_nodes = mr.nodes;
    rec.lp_iterations = mr.lp_iterations;
    rec.profile = decode_profile(ubp.layout, mr.x);
    rec.speeds = rec.profile.speeds(sc);
    if (pool.contains(rec.profile)) {
      rep.termination = Termination::kNumericalFailure;
      rep.message = "upper-bounding MILP returned an assignment excluded by its cuts";
      break;
    }
    ubp_eta_hits += count_at_cap(mr.x, ubp.layout.eta, sc.eta_bar());

    const TrajectoryBatch batch = propagate_batch(sc, rec.profile, samples);
    const CertificateResult cert = certificate(sc, batch, sc.epsilon());
    rec.certificate = cert.value;
    rec.lambda_star = cert.lambda_star;

    const LbpModel lbp = build_lbp(sc, batch);
    const lp::LpSolution ls = lp::solve_lp(lbp.model, options.milp.lp);
    rec.lp_iterations += ls.iterations;
    if (ls.status == lp::LpStatus::kOptimal) {
      rec.obj = ls.objective;
      lbp_eta_hits += count_at_cap(ls.x, lbp.eta, sc.eta_bar());
    } else if (ls.status == lp::LpStatus::kUnbounded || ls.status == lp::LpStatus::kInfeasible) {
      rec.obj = kNegInf;
    } else {
      rep.termination = Termination::kNumericalFailure;
      rep.message = std::string("lower-bounding LP failed: ") + lp::to_string(ls.status);
      break;
    }
    if (std::isfinite(rec.obj) != cert.finite() ||
        (cert.finite() &&
         std::abs(rec.obj - cert.value) > 1e-6 * std::max(1.0, std::abs(cert.value)))) {
      std::ostringstream w;
      w.precision(12);
      w << "iteration " << k << ": LP value " << rec.obj << " differs from closed form "
        << cert.value;
      rep.warnings.push_back(w.str());
    }

    if (std::isfinite(rec.obj)) {
      ++rep.feasible_candidates;
      if (rec.obj > rep.lb) {
        rep.lb = rec.obj;
        rep.best = rec.profile;
        rep.j_hat = rec.obj;
        rep.lambda_star = cert.lambda_star;
        rep.has_solution = true;
      }
    } else {
      ++rep.discarded_candidates;
    }
    if (options.polish) {
      auto [u, v] = polish(sc, samples, rec.profile, cert.value);
      if (std::isfinite(v) && u.index != rec.profile.index) {
        rec.polished = u;
        rec.polished_value = v;
        if (v > rep.lb) {
          const CertificateResult pc = certificate(sc, propagate_batch(sc, u, samples), sc.epsilon());
          rep.lb = v;
          rep.best = u;
          rep.j_hat = v;
          rep.lambda_star = pc.lambda_star;
          rep.has_solution = true;
        }
      }
    }
    // The MILP bound covers every assignment unvisited before this
    // iteration; visited ones are covered by LB.
    rep.ub = std::max(rep.lb, std::min(rep.ub, mr.bound));
    rec.ub = rep.ub;
    rec.lb = rep.lb;
    pool.add(rec.profile);
    rec.seconds = elapsed();
    rep.log.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);

    if (rep.has_solution && rep.ub - rep.lb <= options.gap_eps * std::max(1.0, std::abs(rep.ub))) {
      rep.termination = Termination::kGap;
      break;
    }
  }

  if (ubp_eta_hits > 0) {
    rep.warnings.push_back("eta reached its bound eta_bar in " + std::to_string(ubp_eta_hits) +
                           " upper-bounding cells; consider a larger eta_bar");
  }
  if (lbp_eta_hits > 0) {
    rep.warnings.push_back("exact LP used eta above eta_bar in " + std::to_string(lbp_eta_hits) +
                           " cells; the upper bound may be too small");
  }
  rep.seconds = elapsed();
  return rep;
}

}  // namespace vsl
