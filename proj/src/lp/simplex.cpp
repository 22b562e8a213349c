#include "vsl/lp/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace vsl::lp {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
    case LpStatus::kIterationLimit:
      return "iteration_limit";
    case LpStatus::kTimeLimit:
      return "time_limit";
    case LpStatus::kNumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

double pow2_round(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) return 1.0;
  return std::ldexp(1.0, static_cast<int>(std::lround(std::log2(f))));
}

struct Eta {
  int r = 0;
  double pivot = 1.0;
  std::vector<int> idx;  // entries other than r
  std::vector<double> val;
};

using Clock = std::chrono::steady_clock;

}  // namespace

struct SimplexSolver::Impl {
  LpModel model;
  SimplexOptions opt;
  int n = 0, m = 0, N = 0;
  double sense = 1.0;  // internal objective = sense * model objective (minimized)

  std::vector<int> cstart, crow;
  std::vector<double> cval;
  std::vector<double> cs, rs;
  std::vector<double> cost;
  std::vector<double> base_lo, base_up;
  std::vector<double> lo, up;
  std::vector<double> x;
  std::vector<VarStatus> st;
  std::vector<int> head, pos;
  bool have_basis = false;
  bool perturbed = false;

  using SpMat = Eigen::SparseMatrix<double>;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  int kdim = 0;
  std::vector<int> kernel_rows;  // kernel row k -> model row
  std::vector<int> kernel_cols;  // kernel col k -> structural column
  std::vector<int> row_to_k;     // -1 when the row is covered by a basic logical
  std::vector<char> covered;
  // Positions at factorization time; etas account for later pivots.
  std::vector<int> kernel_pos;   // kernel col k -> basis position
  std::vector<int> logical_pos;  // covered row -> basis position
  std::vector<Eta> etas;

  long iterations = 0;
  long phase1_iterations = 0;
  long dual_iterations = 0;
  int perturbations = 0;
  int refactorizations = 0;

  // Scratch.
  std::vector<double> work_m, work_m2, alpha, y, cb;
  std::vector<double> d, prow;  // dual phase: reduced costs, pivot row
  Eigen::VectorXd kin, kout;

  Impl(const LpModel& mdl, SimplexOptions o) : model(mdl), opt(o) {
    model.validate();
    n = model.num_cols();
    m = model.num_rows();
    N = n + m;
    sense = model.sense == Sense::kMinimize ? 1.0 : -1.0;
    build();
  }

  void build() {
    // Geometric scaling, rounded to powers of two so it is exact.
    cs.assign(n, 1.0);
    rs.assign(m, 1.0);
    if (opt.scale) {
      for (int pass = 0; pass < 6; ++pass) {
        for (int i = 0; i < m; ++i) {
          const auto& r = model.row(i);
          double lo_a = kInf, hi_a = 0.0;
          for (std::size_t k = 0; k < r.index.size(); ++k) {
            const double a = std::abs(r.value[k]) * cs[r.index[k]];
            lo_a = std::min(lo_a, a);
            hi_a = std::max(hi_a, a);
          }
          if (hi_a > 0.0) rs[i] = pow2_round(1.0 / std::sqrt(lo_a * hi_a));
        }
        std::vector<double> clo(n, kInf), chi(n, 0.0);
        for (int i = 0; i < m; ++i) {
          const auto& r = model.row(i);
          for (std::size_t k = 0; k < r.index.size(); ++k) {
            const int j = r.index[k];
            const double a = std::abs(r.value[k]) * rs[i];
            clo[j] = std::min(clo[j], a);
            chi[j] = std::max(chi[j], a);
          }
        }
        for (int j = 0; j < n; ++j) {
          if (chi[j] > 0.0) cs[j] = pow2_round(1.0 / std::sqrt(clo[j] * chi[j]));
        }
      }
    }
    std::vector<int> count(n + 1, 0);
    for (int i = 0; i < m; ++i) {
      for (int j : model.row(i).index) ++count[j + 1];
    }
    cstart.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) cstart[j + 1] = cstart[j] + count[j + 1];
    crow.assign(cstart[n], 0);
    cval.assign(cstart[n], 0.0);
    std::vector<int> fill(cstart.begin(), cstart.end() - 1);
    for (int i = 0; i < m; ++i) {
      const auto& r = model.row(i);
      for (std::size_t k = 0; k < r.index.size(); ++k) {
        const int j = r.index[k];
        crow[fill[j]] = i;
        cval[fill[j]] = r.value[k] * rs[i] * cs[j];
        ++fill[j];
      }
    }
    cost.assign(N, 0.0);
    base_lo.assign(N, 0.0);
    base_up.assign(N, 0.0);
    for (int j = 0; j < n; ++j) {
      const auto& c = model.column(j);
      cost[j] = sense * c.cost * cs[j];
      base_lo[j] = c.lower / cs[j];
      base_up[j] = c.upper / cs[j];
    }
    for (int i = 0; i < m; ++i) {
      base_lo[n + i] = model.row(i).lower * rs[i];
      base_up[n + i] = model.row(i).upper * rs[i];
    }
    lo = base_lo;
    up = base_up;
    x.assign(N, 0.0);
    st.assign(N, VarStatus::kAtLower);
    head.assign(m, 0);
    pos.assign(N, -1);
    covered.assign(m, 0);
    row_to_k.assign(m, -1);
    work_m.assign(m, 0.0);
    work_m2.assign(m, 0.0);
    alpha.assign(m, 0.0);
    y.assign(m, 0.0);
    cb.assign(m, 0.0);
    d.assign(N, 0.0);
    prow.assign(N, 0.0);
  }

  // ---- basis bookkeeping -------------------------------------------------

  void place_nonbasic(int j) {
    if (st[j] == VarStatus::kBasic) return;
    const bool has_lo = lo[j] > -kInf, has_up = up[j] < kInf;
    if (!has_lo && !has_up) {
      st[j] = VarStatus::kFree;
      x[j] = 0.0;
    } else if (st[j] == VarStatus::kAtUpper && has_up) {
      x[j] = up[j];
    } else if (st[j] == VarStatus::kAtLower && has_lo) {
      x[j] = lo[j];
    } else if (has_lo) {
      st[j] = VarStatus::kAtLower;
      x[j] = lo[j];
    } else {
      st[j] = VarStatus::kAtUpper;
      x[j] = up[j];
    }
  }

  void slack_basis() {
    for (int j = 0; j < n; ++j) {
      st[j] = VarStatus::kAtLower;
      pos[j] = -1;
    }
    for (int i = 0; i < m; ++i) {
      st[n + i] = VarStatus::kBasic;
      head[i] = n + i;
      pos[n + i] = i;
    }
    for (int j = 0; j < n; ++j) place_nonbasic(j);
    have_basis = true;
  }

  bool load_basis(const Basis& b) {
    if (static_cast<int>(b.col.size()) > n || static_cast<int>(b.row.size()) > m) return false;
    // Columns beyond the stored basis start nonbasic, rows beyond it basic.
    std::vector<VarStatus> s(N, VarStatus::kBasic);
    for (int j = 0; j < n; ++j) {
      s[j] = j < static_cast<int>(b.col.size()) ? b.col[j] : VarStatus::kAtLower;
    }
    for (std::size_t i = 0; i < b.row.size(); ++i) s[n + i] = b.row[i];
    int basics = 0;
    for (auto v : s) basics += v == VarStatus::kBasic;
    if (basics != m) return false;
    st = std::move(s);
    int p = 0;
    std::fill(pos.begin(), pos.end(), -1);
    for (int j = 0; j < N; ++j) {
      if (st[j] == VarStatus::kBasic) {
        head[p] = j;
        pos[j] = p++;
      }
    }
    for (int j = 0; j < N; ++j) place_nonbasic(j);
    have_basis = true;
    return true;
  }

  Basis export_basis() const {
    Basis b;
    b.col.assign(st.begin(), st.begin() + n);
    b.row.assign(st.begin() + n, st.end());
    return b;
  }

  // ---- factorization -----------------------------------------------------

  bool factor() {
    etas.clear();
    ++refactorizations;
    std::fill(covered.begin(), covered.end(), 0);
    kernel_cols.clear();
    kernel_pos.clear();
    logical_pos.assign(m, -1);
    for (int p = 0; p < m; ++p) {
      const int j = head[p];
      if (j >= n) {
        covered[j - n] = 1;
        logical_pos[j - n] = p;
      } else {
        kernel_cols.push_back(j);
        kernel_pos.push_back(p);
      }
    }
    kernel_rows.clear();
    for (int i = 0; i < m; ++i) {
      if (!covered[i]) {
        row_to_k[i] = static_cast<int>(kernel_rows.size());
        kernel_rows.push_back(i);
      } else {
        row_to_k[i] = -1;
      }
    }
    kdim = static_cast<int>(kernel_cols.size());
    if (static_cast<int>(kernel_rows.size()) != kdim) return false;
    if (kdim == 0) return true;
    std::vector<Eigen::Triplet<double>> trip;
    for (int k = 0; k < kdim; ++k) {
      const int j = kernel_cols[k];
      for (int e = cstart[j]; e < cstart[j + 1]; ++e) {
        const int rk = row_to_k[crow[e]];
        if (rk >= 0) trip.emplace_back(rk, k, cval[e]);
      }
    }
    SpMat K(kdim, kdim);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success) return false;
    kin.resize(kdim);
    kout.resize(kdim);
    return true;
  }

  // Row-indexed a in, position-indexed B^{-1} a out (in place).
  void ftran(std::vector<double>& a) {
    std::vector<double>& w = work_m;
    if (kdim > 0) {
      for (int k = 0; k < kdim; ++k) kin[k] = a[kernel_rows[k]];
      kout = lu.solve(kin);
    }
    // Covered rows: logical value = (A_S xs)_i - a_i.
    std::vector<double>& acc = work_m2;
    for (int i = 0; i < m; ++i) acc[i] = covered[i] ? -a[i] : 0.0;
    for (int k = 0; k < kdim; ++k) {
      const int j = kernel_cols[k];
      const double v = kout[k];
      if (v == 0.0) continue;
      for (int e = cstart[j]; e < cstart[j + 1]; ++e) {
        if (covered[crow[e]]) acc[crow[e]] += cval[e] * v;
      }
    }
    for (int i = 0; i < m; ++i) {
      if (covered[i]) w[logical_pos[i]] = acc[i];
    }
    for (int k = 0; k < kdim; ++k) w[kernel_pos[k]] = kout[k];
    for (const Eta& eta : etas) {
      const double wr = w[eta.r] / eta.pivot;
      w[eta.r] = wr;
      if (wr == 0.0) continue;
      for (std::size_t t = 0; t < eta.idx.size(); ++t) w[eta.idx[t]] -= eta.val[t] * wr;
    }
    a.swap(w);
  }

  // Position-indexed c in, row-indexed y with B^T y = c out (in place).
  void btran(std::vector<double>& c) {
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      double s = c[it->r];
      for (std::size_t t = 0; t < it->idx.size(); ++t) s -= it->val[t] * c[it->idx[t]];
      c[it->r] = s / it->pivot;
    }
    std::vector<double>& yy = work_m;
    for (int i = 0; i < m; ++i) yy[i] = covered[i] ? -c[logical_pos[i]] : 0.0;
    if (kdim > 0) {
      for (int k = 0; k < kdim; ++k) {
        const int j = kernel_cols[k];
        double s = c[kernel_pos[k]];
        for (int e = cstart[j]; e < cstart[j + 1]; ++e) {
          if (covered[crow[e]]) s -= cval[e] * yy[crow[e]];
        }
        kin[k] = s;
      }
      kout = lu.transpose().solve(kin);
      for (int k = 0; k < kdim; ++k) yy[kernel_rows[k]] = kout[k];
    }
    c.swap(yy);
  }

  void load_column(int j, std::vector<double>& a) const {
    std::fill(a.begin(), a.end(), 0.0);
    if (j < n) {
      for (int e = cstart[j]; e < cstart[j + 1]; ++e) a[crow[e]] = cval[e];
    } else {
      a[j - n] = -1.0;
    }
  }

  void compute_basic_values() {
    std::vector<double> rhs(m, 0.0);
    for (int j = 0; j < n; ++j) {
      if (st[j] == VarStatus::kBasic || x[j] == 0.0) continue;
      for (int e = cstart[j]; e < cstart[j + 1]; ++e) rhs[crow[e]] -= cval[e] * x[j];
    }
    for (int i = 0; i < m; ++i) {
      if (st[n + i] != VarStatus::kBasic) rhs[i] += x[n + i];
    }
    ftran(rhs);
    for (int p = 0; p < m; ++p) x[head[p]] = rhs[p];
  }

  // Largest |[A -I] x| over rows, to catch a numerically singular kernel.
  double row_residual() const {
    std::vector<double> r(m, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int e = cstart[j]; e < cstart[j + 1]; ++e) r[crow[e]] += cval[e] * x[j];
    }
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      worst = std::max(worst, std::abs(r[i] - x[n + i]) / (1.0 + std::abs(x[n + i])));
    }
    return worst;
  }

  bool refactor_and_recompute() {
    if (!factor()) return false;
    compute_basic_values();
    return row_residual() <= 1e-6;
  }

  void recover_with_slack_basis() {
    slack_basis();
    const bool ok = factor();
    (void)ok;  // the all-logical kernel is empty and always factors
    compute_basic_values();
  }

  // ---- perturbation --------------------------------------------------------

  void perturb_bounds() {
    std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(perturbations));
    std::uniform_real_distribution<double> u(0.5, 1.0);
    for (int j = 0; j < N; ++j) {
      const double d = u(rng);
      if (lo[j] == up[j]) continue;
      if (lo[j] > -kInf) lo[j] -= 1e-7 * d * (1.0 + std::abs(lo[j]));
      if (up[j] < kInf) up[j] += 1e-7 * d * (1.0 + std::abs(up[j]));
      if (st[j] != VarStatus::kBasic) place_nonbasic(j);
    }
    perturbed = true;
    ++perturbations;
  }

  void restore_bounds() {
    lo = base_lo;
    up = base_up;
    for (int j = 0; j < N; ++j) place_nonbasic(j);
    perturbed = false;
  }

  // ---- dual phase ----------------------------------------------------------

  void compute_reduced_costs() {
    for (int p = 0; p < m; ++p) cb[p] = cost[head[p]];
    y = cb;
    btran(y);
    for (int j = 0; j < N; ++j) {
      if (st[j] == VarStatus::kBasic) {
        d[j] = 0.0;
      } else if (j < n) {
        double v = cost[j];
        for (int e = cstart[j]; e < cstart[j + 1]; ++e) v -= cval[e] * y[crow[e]];
        d[j] = v;
      } else {
        d[j] = y[j - n];
      }
    }
  }

  // Moves boxed nonbasics to the bound their reduced cost favours. False when
  // some one-sided or free nonbasic has a reduced cost of the wrong sign.
  bool make_dual_feasible() {
    compute_reduced_costs();
    const double dtol = opt.dual_tol;
    bool moved = false;
    for (int j = 0; j < N; ++j) {
      if (st[j] == VarStatus::kBasic || lo[j] == up[j]) continue;
      const bool has_lo = lo[j] > -kInf, has_up = up[j] < kInf;
      if (d[j] < -dtol) {
        if (!has_up) return false;
        if (st[j] != VarStatus::kAtUpper) {
          st[j] = VarStatus::kAtUpper;
          x[j] = up[j];
          moved = true;
        }
      } else if (d[j] > dtol) {
        if (!has_lo) return false;
        if (st[j] != VarStatus::kAtLower) {
          st[j] = VarStatus::kAtLower;
          x[j] = lo[j];
          moved = true;
        }
      }
    }
    if (moved) compute_basic_values();
    return true;
  }

  LpStatus dual_iterate(long max_iter, Clock::time_point deadline_start) {
    const double ptol = opt.primal_tol, dtol = opt.dual_tol;
    int since_refactor = 0;
    bool fresh = true;  // factorization has no etas
    for (;;) {
      if (iterations >= max_iter) return LpStatus::kIterationLimit;
      if ((iterations & 63) == 0 && std::isfinite(opt.time_limit_s)) {
        const double el = std::chrono::duration<double>(Clock::now() - deadline_start).count();
        if (el > opt.time_limit_s) return LpStatus::kTimeLimit;
      }
      if (since_refactor >= opt.refactor_interval) {
        if (!refactor_and_recompute()) return LpStatus::kNumericalFailure;
        compute_reduced_costs();
        since_refactor = 0;
        fresh = true;
      }
      // Leaving row: largest bound violation.
      int r = -1;
      double worst = ptol;
      for (int p = 0; p < m; ++p) {
        const double v = infeasibility(head[p]);
        if (v > worst) {
          worst = v;
          r = p;
        }
      }
      if (r < 0) return LpStatus::kOptimal;
      const int leaving = head[r];
      const double sigma = x[leaving] < lo[leaving] ? 1.0 : -1.0;
      const double target = sigma > 0 ? lo[leaving] : up[leaving];

      // Pivot row alpha_r = e_r' B^-1 [A -I].
      std::vector<double>& rho = y;
      std::fill(rho.begin(), rho.end(), 0.0);
      rho[r] = 1.0;
      btran(rho);
      // Harris pass 1.
      double theta_max = kInf;
      for (int j = 0; j < N; ++j) {
        prow[j] = 0.0;
        if (st[j] == VarStatus::kBasic || lo[j] == up[j]) continue;
        double a;
        if (j < n) {
          a = 0.0;
          for (int e = cstart[j]; e < cstart[j + 1]; ++e) a += cval[e] * rho[crow[e]];
        } else {
          a = -rho[j - n];
        }
        prow[j] = a;
        const double sa = sigma * a;
        if (std::abs(a) <= opt.pivot_tol) continue;
        double ratio;
        if (st[j] == VarStatus::kAtLower && sa < 0) {
          ratio = (std::max(d[j], 0.0) + dtol) / -sa;
        } else if (st[j] == VarStatus::kAtUpper && sa > 0) {
          ratio = (std::max(-d[j], 0.0) + dtol) / sa;
        } else if (st[j] == VarStatus::kFree) {
          ratio = (std::abs(d[j]) + dtol) / std::abs(a);
        } else {
          continue;
        }
        theta_max = std::min(theta_max, ratio);
      }
      if (!std::isfinite(theta_max)) {
        if (!fresh) {
          // Confirm the ray on a clean factorization.
          if (!refactor_and_recompute()) return LpStatus::kNumericalFailure;
          compute_reduced_costs();
          since_refactor = 0;
          fresh = true;
          continue;
        }
        return LpStatus::kInfeasible;
      }
      // Pass 2: largest pivot among ratios within the relaxed bound.
      int q = -1;
      double best_piv = 0.0;
      for (int j = 0; j < N; ++j) {
        const double a = prow[j];
        if (a == 0.0 || std::abs(a) <= opt.pivot_tol) continue;
        const double sa = sigma * a;
        double ratio;
        if (st[j] == VarStatus::kAtLower && sa < 0) {
          ratio = std::max(d[j], 0.0) / -sa;
        } else if (st[j] == VarStatus::kAtUpper && sa > 0) {
          ratio = std::max(-d[j], 0.0) / sa;
        } else if (st[j] == VarStatus::kFree) {
          ratio = std::abs(d[j]) / std::abs(a);
        } else {
          continue;
        }
        if (ratio <= theta_max && std::abs(a) > best_piv) {
          best_piv = std::abs(a);
          q = j;
        }
      }
      if (q < 0) return LpStatus::kNumericalFailure;
      const double aq = prow[q];
      double theta_d = d[q] / (-sigma * aq);
      if (theta_d < 0) theta_d = 0.0;

      load_column(q, alpha);
      ftran(alpha);
      const double piv = alpha[r];
      if (std::abs(piv) < 1e-7 || std::abs(piv - aq) > 1e-6 * (1.0 + std::abs(aq))) {
        // Row and column disagree: the factorization has drifted.
        if (fresh) return LpStatus::kNumericalFailure;
        if (!refactor_and_recompute()) return LpStatus::kNumericalFailure;
        compute_reduced_costs();
        since_refactor = 0;
        fresh = true;
        continue;
      }

      // Primal step: bring the leaving variable onto its violated bound.
      const double dq = (target - x[leaving]) / -piv;
      x[q] += dq;
      for (int p = 0; p < m; ++p) {
        if (alpha[p] != 0.0) x[head[p]] -= alpha[p] * dq;
      }
      x[leaving] = target;
      // Dual step.
      for (int j = 0; j < N; ++j) {
        if (prow[j] != 0.0 && st[j] != VarStatus::kBasic) d[j] += sigma * theta_d * prow[j];
      }
      d[q] = 0.0;
      d[leaving] = sigma * theta_d;

      st[leaving] = sigma > 0 ? VarStatus::kAtLower : VarStatus::kAtUpper;
      pos[leaving] = -1;
      head[r] = q;
      pos[q] = r;
      st[q] = VarStatus::kBasic;
      Eta eta;
      eta.r = r;
      eta.pivot = piv;
      for (int p = 0; p < m; ++p) {
        if (p != r && alpha[p] != 0.0) {
          eta.idx.push_back(p);
          eta.val.push_back(alpha[p]);
        }
      }
      etas.push_back(std::move(eta));
      ++since_refactor;
      fresh = false;
      ++iterations;
      ++dual_iterations;
    }
  }

  // ---- main loop -----------------------------------------------------------

  double infeasibility(int j) const {
    return std::max({0.0, lo[j] - x[j], x[j] - up[j]});
  }

  LpStatus iterate(long max_iter, Clock::time_point deadline_start) {
    const double ptol = opt.primal_tol, dtol = opt.dual_tol;
    int degenerate_streak = 0;
    int since_refactor = 0;
    std::vector<double>& d_alpha = alpha;
    for (;;) {
      if (iterations >= max_iter) return LpStatus::kIterationLimit;
      if ((iterations & 63) == 0 && std::isfinite(opt.time_limit_s)) {
        const double el = std::chrono::duration<double>(Clock::now() - deadline_start).count();
        if (el > opt.time_limit_s) return LpStatus::kTimeLimit;
      }
      if (since_refactor >= opt.refactor_interval) {
        if (!refactor_and_recompute()) recover_with_slack_basis();
        since_refactor = 0;
      }
      bool phase1 = false;
      for (int p = 0; p < m; ++p) {
        const int j = head[p];
        if (x[j] < lo[j] - ptol) {
          cb[p] = -1.0;
          phase1 = true;
        } else if (x[j] > up[j] + ptol) {
          cb[p] = 1.0;
          phase1 = true;
        } else {
          cb[p] = 0.0;
        }
      }
      if (!phase1) {
        for (int p = 0; p < m; ++p) cb[p] = cost[head[p]];
      }
      y = cb;
      btran(y);

      const bool bland = degenerate_streak >= opt.bland_after;
      int q = -1;
      double best = 0.0, dir = 0.0;
      for (int j = 0; j < N; ++j) {
        if (st[j] == VarStatus::kBasic || lo[j] == up[j]) continue;
        double dj;
        if (j < n) {
          dj = phase1 ? 0.0 : cost[j];
          for (int e = cstart[j]; e < cstart[j + 1]; ++e) dj -= cval[e] * y[crow[e]];
        } else {
          dj = y[j - n];
        }
        double dj_dir = 0.0;
        if (st[j] == VarStatus::kAtLower) {
          if (dj < -dtol) dj_dir = 1.0;
        } else if (st[j] == VarStatus::kAtUpper) {
          if (dj > dtol) dj_dir = -1.0;
        } else if (std::abs(dj) > dtol) {
          dj_dir = dj < 0 ? 1.0 : -1.0;
        }
        if (dj_dir == 0.0) continue;
        if (bland) {
          q = j;
          dir = dj_dir;
          break;
        }
        if (std::abs(dj) > best) {
          best = std::abs(dj);
          q = j;
          dir = dj_dir;
        }
      }
      if (q < 0) {
        return phase1 ? LpStatus::kInfeasible : LpStatus::kOptimal;
      }

      load_column(q, d_alpha);
      ftran(d_alpha);

      // Ratio test. Basic position p moves at rate -dir * alpha_p.
      const double range = up[q] - lo[q];
      double theta_max = kInf;
      for (int p = 0; p < m; ++p) {
        const double a = d_alpha[p];
        if (std::abs(a) <= opt.pivot_tol) continue;
        const double rate = -dir * a;
        const int j = head[p];
        double relaxed;
        if (rate < 0) {
          if (x[j] > up[j] + ptol) {
            relaxed = (x[j] - up[j] + ptol) / -rate;
          } else if (x[j] >= lo[j] - ptol && lo[j] > -kInf) {
            relaxed = (x[j] - lo[j] + ptol) / -rate;
          } else {
            continue;
          }
        } else {
          if (x[j] < lo[j] - ptol) {
            relaxed = (lo[j] - x[j] + ptol) / rate;
          } else if (x[j] <= up[j] + ptol && up[j] < kInf) {
            relaxed = (up[j] - x[j] + ptol) / rate;
          } else {
            continue;
          }
        }
        theta_max = std::min(theta_max, relaxed);
      }

      int r = -1;
      double theta = 0.0, target = 0.0;
      if (range <= theta_max) {
        if (!std::isfinite(range)) {
          return phase1 ? LpStatus::kNumericalFailure : LpStatus::kUnbounded;
        }
        theta = range;
      } else {
        double best_piv = 0.0;
        int best_var = N;
        for (int p = 0; p < m; ++p) {
          const double a = d_alpha[p];
          if (std::abs(a) <= opt.pivot_tol) continue;
          const double rate = -dir * a;
          const int j = head[p];
          double bound;
          if (rate < 0) {
            if (x[j] > up[j] + ptol) {
              bound = up[j];
            } else if (x[j] >= lo[j] - ptol && lo[j] > -kInf) {
              bound = lo[j];
            } else {
              continue;
            }
          } else {
            if (x[j] < lo[j] - ptol) {
              bound = lo[j];
            } else if (x[j] <= up[j] + ptol && up[j] < kInf) {
              bound = up[j];
            } else {
              continue;
            }
          }
          const double ratio = (bound - x[j]) / rate;
          if (ratio > theta_max) continue;
          bool take;
          if (bland) {
            take = r < 0 || ratio < theta - 1e-12 ||
                   (ratio <= theta + 1e-12 && j < best_var);
          } else {
            take = std::abs(a) > best_piv;
          }
          if (take) {
            r = p;
            best_piv = std::abs(a);
            best_var = j;
            theta = ratio;
            target = bound;
          }
        }
        if (r < 0) return LpStatus::kNumericalFailure;
        theta = std::max(theta, 0.0);
        if (best_piv < 1e-7 && !etas.empty()) {
          // Weak pivot on an aged factorization: refresh and retry.
          if (!refactor_and_recompute()) recover_with_slack_basis();
          since_refactor = 0;
          continue;
        }
      }

      ++iterations;
      if (phase1) ++phase1_iterations;
      if (theta <= 1e-12) {
        ++degenerate_streak;
      } else {
        degenerate_streak = 0;
      }
      if (degenerate_streak >= opt.perturb_after && !perturbed) {
        perturb_bounds();
        compute_basic_values();
        degenerate_streak = 0;
      }

      if (theta != 0.0) {
        x[q] += dir * theta;
        for (int p = 0; p < m; ++p) {
          if (d_alpha[p] != 0.0) x[head[p]] -= dir * theta * d_alpha[p];
        }
      }
      if (r < 0) {
        // Bound flip.
        if (dir > 0) {
          st[q] = VarStatus::kAtUpper;
          x[q] = up[q];
        } else {
          st[q] = VarStatus::kAtLower;
          x[q] = lo[q];
        }
        continue;
      }
      const int leaving = head[r];
      x[leaving] = target;
      st[leaving] = (target == lo[leaving]) ? VarStatus::kAtLower : VarStatus::kAtUpper;
      pos[leaving] = -1;
      head[r] = q;
      pos[q] = r;
      st[q] = VarStatus::kBasic;

      Eta eta;
      eta.r = r;
      eta.pivot = d_alpha[r];
      for (int p = 0; p < m; ++p) {
        if (p != r && d_alpha[p] != 0.0) {
          eta.idx.push_back(p);
          eta.val.push_back(d_alpha[p]);
        }
      }
      etas.push_back(std::move(eta));
      ++since_refactor;
    }
  }

  LpSolution solve(const Basis* warm) {
    const auto start = Clock::now();
    iterations = 0;
    phase1_iterations = 0;
    dual_iterations = 0;
    perturbations = 0;
    refactorizations = 0;
    lo = base_lo;
    up = base_up;
    perturbed = false;

    const bool had_basis = have_basis;
    bool loaded = false;
    if (warm != nullptr && !warm->empty()) loaded = load_basis(*warm);
    if (!loaded && !have_basis) slack_basis();
    for (int j = 0; j < N; ++j) place_nonbasic(j);
    if (!refactor_and_recompute()) recover_with_slack_basis();

    const long max_iter =
        opt.max_iterations > 0 ? opt.max_iterations : 20L * (N) + 10000L;
    LpStatus status = LpStatus::kNumericalFailure;
    if (opt.dual_simplex && (loaded || had_basis) && make_dual_feasible()) {
      const LpStatus ds = dual_iterate(max_iter, start);
      if (ds == LpStatus::kInfeasible || ds == LpStatus::kTimeLimit) {
        if (perturbed) restore_bounds();
        return package(ds);
      }
      // Otherwise the primal loop confirms or finishes from this basis.
      if (ds != LpStatus::kOptimal && !refactor_and_recompute()) recover_with_slack_basis();
    }
    int final_checks = 0;
    for (;;) {
      status = iterate(max_iter, start);
      if (perturbed && (status == LpStatus::kOptimal || status == LpStatus::kUnbounded)) {
        restore_bounds();
        if (!refactor_and_recompute()) recover_with_slack_basis();
        continue;
      }
      if (status == LpStatus::kOptimal || status == LpStatus::kInfeasible) {
        // Recompute from a fresh factorization and confirm.
        if (!refactor_and_recompute()) {
          recover_with_slack_basis();
          if (++final_checks > 3) {
            status = LpStatus::kNumericalFailure;
            break;
          }
          continue;
        }
        if (status == LpStatus::kOptimal) {
          double worst = 0.0;
          for (int p = 0; p < m; ++p) worst = std::max(worst, infeasibility(head[p]));
          if (worst > opt.primal_tol && ++final_checks <= 3) continue;
        }
      }
      break;
    }
    if (perturbed) restore_bounds();
    return package(status);
  }

  LpSolution package(LpStatus status) {
    LpSolution sol;
    sol.status = status;
    sol.iterations = iterations;
    sol.phase1_iterations = phase1_iterations;
    sol.dual_iterations = dual_iterations;
    sol.perturbations = perturbations;
    sol.refactorizations = refactorizations;
    sol.col_scale = cs;
    sol.row_scale = rs;
    sol.basis = export_basis();
    sol.x.resize(n);
    for (int j = 0; j < n; ++j) {
      double v = x[j] * cs[j];
      // Snap nonbasic values exactly onto their model bounds.
      if (st[j] == VarStatus::kAtLower) v = model.column(j).lower;
      if (st[j] == VarStatus::kAtUpper) v = model.column(j).upper;
      sol.x[j] = v;
    }
    sol.row_activity = model.row_activity(sol.x);
    sol.objective = model.evaluate_objective(sol.x);
    if (status == LpStatus::kOptimal) {
      for (int p = 0; p < m; ++p) cb[p] = cost[head[p]];
      y = cb;
      btran(y);
      sol.row_dual.resize(m);
      for (int i = 0; i < m; ++i) sol.row_dual[i] = sense * rs[i] * y[i];
      sol.reduced_cost.resize(n);
      for (int j = 0; j < n; ++j) sol.reduced_cost[j] = model.column(j).cost;
      for (int i = 0; i < m; ++i) {
        const auto& r = model.row(i);
        for (std::size_t k = 0; k < r.index.size(); ++k) {
          sol.reduced_cost[r.index[k]] -= r.value[k] * sol.row_dual[i];
        }
      }
    }
    sol.message = to_string(status);
    return sol;
  }
};

SimplexSolver::SimplexSolver(const LpModel& model, SimplexOptions options)
    : impl_(std::make_unique<Impl>(model, options)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

void SimplexSolver::set_column_bounds(int j, double lower, double upper) {
  if (j < 0 || j >= impl_->n) throw ModelError("set_column_bounds: column out of range");
  if (!(lower <= upper)) throw ModelError("set_column_bounds: crossed bounds");
  impl_->model.set_bounds(j, lower, upper);
  impl_->base_lo[j] = lower / impl_->cs[j];
  impl_->base_up[j] = upper / impl_->cs[j];
  impl_->lo[j] = impl_->base_lo[j];
  impl_->up[j] = impl_->base_up[j];
}

double SimplexSolver::column_lower(int j) const { return impl_->model.column(j).lower; }
double SimplexSolver::column_upper(int j) const { return impl_->model.column(j).upper; }

LpSolution SimplexSolver::solve(const Basis* warm) { return impl_->solve(warm); }

const LpModel& SimplexSolver::model() const { return impl_->model; }
const SimplexOptions& SimplexSolver::options() const { return impl_->opt; }

LpSolution solve_lp(const LpModel& model, const SimplexOptions& options) {
  SimplexSolver solver(model, options);
  return solver.solve();
}

SolutionCheck verify_solution(const LpModel& model, const LpSolution& sol) {
  SolutionCheck check;
  const int n = model.num_cols(), m = model.num_rows();
  auto cscale = [&](int j) { return sol.col_scale.empty() ? 1.0 : sol.col_scale[j]; };
  auto rscale = [&](int i) { return sol.row_scale.empty() ? 1.0 : sol.row_scale[i]; };
  const auto act = model.row_activity(sol.x);
  const double bound_tol = 1e-7;
  for (int j = 0; j < n; ++j) {
    const auto& c = model.column(j);
    const double v = std::max({0.0, c.lower - sol.x[j], sol.x[j] - c.upper}) / cscale(j);
    check.primal_residual = std::max(check.primal_residual, v);
  }
  for (int i = 0; i < m; ++i) {
    const auto& r = model.row(i);
    const double v = std::max({0.0, r.lower - act[i], act[i] - r.upper}) * rscale(i);
    check.primal_residual = std::max(check.primal_residual, v);
  }
  const double obj = model.evaluate_objective(sol.x);
  check.objective_error = std::abs(obj - sol.objective) / std::max(1.0, std::abs(sol.objective));
  if (sol.row_dual.size() != static_cast<std::size_t>(m)) return check;

  const double s = model.sense == Sense::kMinimize ? 1.0 : -1.0;
  // Recompute reduced costs from the duals rather than trusting the solver.
  std::vector<double> d(n);
  for (int j = 0; j < n; ++j) d[j] = model.column(j).cost;
  for (int i = 0; i < m; ++i) {
    const auto& r = model.row(i);
    for (std::size_t k = 0; k < r.index.size(); ++k) d[r.index[k]] -= r.value[k] * sol.row_dual[i];
  }
  auto classify = [&](double v, double l, double u, double dmin, double scale_to_unit) {
    // v, l, u in scaled units; dmin is the minimize-sense reduced cost, scaled.
    const bool at_lo = l > -kInf && v - l <= bound_tol * (1.0 + std::abs(l));
    const bool at_up = u < kInf && u - v <= bound_tol * (1.0 + std::abs(u));
    (void)scale_to_unit;
    if (at_lo && at_up) return std::pair{0.0, 0.0};
    if (at_lo) return std::pair{std::max(0.0, -dmin), 0.0};
    if (at_up) return std::pair{std::max(0.0, dmin), 0.0};
    return std::pair{std::abs(dmin), std::abs(dmin)};
  };
  for (int j = 0; j < n; ++j) {
    const auto& c = model.column(j);
    const double sc = cscale(j);
    const auto [inf, comp] =
        classify(sol.x[j] / sc, c.lower / sc, c.upper / sc, s * d[j] * sc, sc);
    check.dual_infeasibility = std::max(check.dual_infeasibility, inf);
    check.complementarity = std::max(check.complementarity, comp);
  }
  for (int i = 0; i < m; ++i) {
    const auto& r = model.row(i);
    const double sc = rscale(i);
    // Logical reduced cost in scaled units is y'_i = y_i / row_scale_i.
    const auto [inf, comp] =
        classify(act[i] * sc, r.lower * sc, r.upper * sc, s * sol.row_dual[i] / sc, sc);
    check.dual_infeasibility = std::max(check.dual_infeasibility, inf);
    check.complementarity = std::max(check.complementarity, comp);
  }
  return check;
}

}  // namespace vsl::lp
