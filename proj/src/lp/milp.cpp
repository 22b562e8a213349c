#include "vsl/lp/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <set>

namespace vsl::lp {

const char* to_string(MilpStatus status) {
  switch (status) {
    case MilpStatus::kOptimal:
      return "optimal";
    case MilpStatus::kInfeasible:
      return "infeasible";
    case MilpStatus::kUnbounded:
      return "unbounded";
    case MilpStatus::kTimeLimit:
      return "time_limit";
    case MilpStatus::kNodeLimit:
      return "node_limit";
    case MilpStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

struct Node {
  long id = 0;
  int depth = 0;
  double bound = 0.0;  // parent relaxation value, maximize sense
  std::vector<std::pair<int, double>> fixes;
  std::shared_ptr<const Basis> basis;
};

struct BestFirst {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.id < b.id;
  }
};

struct DeepestFirst {
  bool operator()(const Node& a, const Node& b) const {
    if (a.depth != b.depth) return a.depth > b.depth;
    return a.id > b.id;  // later (up) child first among equals
  }
};

}  // namespace

MilpResult solve_milp(const MilpModel& model, const MilpOptions& options,
                      const Basis* warm) {
  const auto start = Clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  const double s = model.sense == Sense::kMaximize ? 1.0 : -1.0;
  const auto binaries = model.binary_columns();

  MilpResult result;
  SimplexSolver solver(model, options.lp);
  std::vector<std::pair<double, double>> root_bounds;
  for (int j : binaries) root_bounds.emplace_back(model.column(j).lower, model.column(j).upper);

  double inc_score = -kInf;
  auto gap_tol = [&] {
    return std::max(options.gap_abs,
                    options.gap_rel * std::max(1.0, std::abs(inc_score)));
  };

  std::set<Node, BestFirst> open;
  std::set<Node, DeepestFirst> dive;
  bool diving = false;
  long next_id = 0;
  double lost_bound = -kInf;  // bounds of nodes dropped after LP failures

  auto push = [&](Node node) {
    if (diving) {
      dive.insert(std::move(node));
    } else {
      open.insert(std::move(node));
    }
  };
  auto open_bound = [&] {
    double b = lost_bound;
    if (!open.empty()) b = std::max(b, open.begin()->bound);
    for (const auto& nd : dive) b = std::max(b, nd.bound);
    return b;
  };

  Node root;
  root.id = next_id++;
  root.bound = kInf;
  if (warm != nullptr) root.basis = std::make_shared<Basis>(*warm);
  push(std::move(root));

  bool unbounded = false;
  bool time_out = false;
  bool node_cap = false;
  while (!open.empty() || !dive.empty()) {
    if (std::isfinite(options.time_limit_s) && elapsed() > options.time_limit_s) {
      if (result.has_incumbent) {
        time_out = true;
        break;
      }
      if (!diving) {
        diving = true;
        for (const auto& nd : open) dive.insert(nd);
        open.clear();
      }
    }
    if (options.node_limit > 0 && result.nodes >= options.node_limit) {
      node_cap = true;
      break;
    }
    Node node;
    if (diving) {
      node = *dive.begin();
      dive.erase(dive.begin());
    } else {
      node = *open.begin();
      open.erase(open.begin());
    }
    if (result.has_incumbent && node.bound - inc_score <= gap_tol()) continue;

    for (std::size_t k = 0; k < binaries.size(); ++k) {
      solver.set_column_bounds(binaries[k], root_bounds[k].first, root_bounds[k].second);
    }
    for (const auto& [j, v] : node.fixes) solver.set_column_bounds(j, v, v);

    LpSolution lp = solver.solve(node.basis.get());
    result.lp_iterations += lp.iterations;
    if (lp.status == LpStatus::kNumericalFailure || lp.status == LpStatus::kIterationLimit) {
      // One cold retry from the all-logical basis.
      Basis none;
      SimplexSolver fresh(solver.model(), options.lp);
      lp = fresh.solve(&none);
      result.lp_iterations += lp.iterations;
    }
    ++result.nodes;
    if (node.id == 0) {
      result.root_basis = lp.basis;
      result.root_bound = lp.optimal() ? lp.objective : (lp.status == LpStatus::kUnbounded ? s * kInf : 0.0);
    }
    if (lp.status == LpStatus::kInfeasible) continue;
    if (lp.status == LpStatus::kUnbounded) {
      unbounded = true;
      break;
    }
    if (lp.status == LpStatus::kTimeLimit) {
      lost_bound = std::max(lost_bound, node.bound);
      continue;
    }
    if (!lp.optimal()) {
      ++result.lp_failures;
      lost_bound = std::max(lost_bound, node.bound);
      continue;
    }
    const double score = s * lp.objective;
    if (result.has_incumbent && score - inc_score <= gap_tol()) continue;

    int branch = -1;
    double best_frac = options.integrality_tol;
    for (int j : binaries) {
      const double v = lp.x[j];
      const double frac = std::min(v - std::floor(v), std::ceil(v) - v);
      if (frac > best_frac + 1e-12) {
        best_frac = frac;
        branch = j;
      }
    }
    if (branch < 0) {
      if (score > inc_score) {
        inc_score = score;
        result.has_incumbent = true;
        result.x = lp.x;
        for (int j : binaries) result.x[j] = std::round(result.x[j]);
        result.objective = model.evaluate_objective(result.x);
        if (diving) {
          // Resume best-first search with the incumbent in hand; the time
          // check at the top of the loop ends the search.
          diving = false;
          for (const auto& nd : dive) open.insert(nd);
          dive.clear();
        }
      }
      continue;
    }
    auto shared = std::make_shared<const Basis>(lp.basis);
    for (double v : {0.0, 1.0}) {
      Node child;
      child.id = next_id++;
      child.depth = node.depth + 1;
      child.bound = score;
      child.fixes = node.fixes;
      child.fixes.emplace_back(branch, v);
      child.basis = shared;
      push(std::move(child));
    }
  }

  result.seconds = elapsed();
  if (unbounded) {
    result.status = MilpStatus::kUnbounded;
    result.bound = s * kInf;
    return result;
  }
  const double remaining = open_bound();
  if (!result.has_incumbent) {
    if (time_out || node_cap || remaining > -kInf) {
      result.status = result.lp_failures > 0 && !time_out && !node_cap
                          ? MilpStatus::kNumericalFailure
                          : (node_cap ? MilpStatus::kNodeLimit : MilpStatus::kTimeLimit);
      result.bound = s * remaining;
    } else {
      result.status = MilpStatus::kInfeasible;
      result.bound = -s * kInf;
    }
    return result;
  }
  const double bound_score = std::max(inc_score, remaining);
  result.bound = s * bound_score;
  if (bound_score - inc_score <= gap_tol()) {
    result.status = MilpStatus::kOptimal;
  } else if (time_out) {
    result.status = MilpStatus::kTimeLimit;
  } else if (node_cap) {
    result.status = MilpStatus::kNodeLimit;
  } else {
    result.status = MilpStatus::kNumericalFailure;
  }
  return result;
}

}  // namespace vsl::lp
