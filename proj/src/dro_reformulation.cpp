#include "vsl/dro_reformulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vsl/lp/simplex.hpp"

namespace vsl {

using lp::kInf;

namespace {

std::string idx(int l, int e, int t) {
  return std::to_string(l + 1) + "_" + std::to_string(e + 1) + "_" + std::to_string(t);
}

// Records the rows/columns/nonzeros added between construction and close().
class BlockCounter {
 public:
  BlockCounter(const lp::LpModel& model, std::map<std::string, BlockStats>& out,
               std::string name)
      : model_(model), out_(out), name_(std::move(name)),
        rows0_(model.num_rows()), cols0_(model.num_cols()), nnz0_(model.nnz()) {}
  void close() {
    auto& b = out_[name_];
    b.rows += model_.num_rows() - rows0_;
    b.cols += model_.num_cols() - cols0_;
    b.nnz += model_.nnz() - nnz0_;
  }

 private:
  const lp::LpModel& model_;
  std::map<std::string, BlockStats>& out_;
  std::string name_;
  int rows0_, cols0_;
  long long nnz0_;
};

// Extremes of a bilinear a*b over a box are attained at its corners.
std::pair<double, double> product_range(double alo, double ahi, double blo, double bhi) {
  const double c[] = {alo * blo, alo * bhi, ahi * blo, ahi * bhi};
  return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

double max_gamma(const HighwayScenario& sc) { return sc.gamma().back(); }

}  // namespace

int glover_linearize(lp::LpModel& model, int x, int z,
                     const std::vector<std::pair<int, double>>& g_terms,
                     double g_const, double lo, double hi, const std::string& name) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw std::invalid_argument("glover_linearize: " + name +
                                " needs finite bounds lo <= hi on the continuous factor");
  }
  int rows = 0;
  // lo*x <= z <= hi*x
  if (!(lo == 0.0 && model.column(z).lower >= 0.0)) {
    model.add_ge(name + "_lo", {{z, 1.0}, {x, -lo}}, 0.0);
    ++rows;
  }
  model.add_le(name + "_hi", {{z, 1.0}, {x, -hi}}, 0.0);
  ++rows;
  // g - hi*(1-x) <= z <= g - lo*(1-x)
  std::vector<std::pair<int, double>> t{{z, 1.0}, {x, -hi}};
  for (const auto& [j, a] : g_terms) t.emplace_back(j, -a);
  model.add_ge(name + "_glo", t, g_const - hi);
  t[1] = {x, -lo};
  model.add_le(name + "_ghi", std::move(t), g_const - lo);
  return rows + 2;
}

DensityBounds interval_density_bounds(const HighwayScenario& sc,
                                      const DisturbanceSample& sample) {
  const int n = sc.n(), T = sc.T();
  const double h = sc.h();
  DensityBounds b;
  b.lo.resize(n, T);
  b.hi.resize(n, T);
  Eigen::VectorXd lo = sample.rho0, hi = sample.rho0;
  Eigen::VectorXd nlo(n), nhi(n);
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < n; ++e) {
      const auto& band = sc.band(e);
      auto [a_lo, a_hi] = product_range(1.0 - h * band.upper, 1.0 - h * band.lower, lo(e), hi(e));
      double in_lo = 0.0, in_hi = 0.0;
      if (e > 0) {
        const auto& up = sc.band(e - 1);
        std::tie(in_lo, in_hi) = product_range(h * up.lower, h * up.upper, lo(e - 1), hi(e - 1));
      }
      nlo(e) = a_lo + in_lo + h * sample.omega(e, t);
      nhi(e) = a_hi + in_hi + h * sample.omega(e, t);
    }
    lo = nlo;
    hi = nhi;
    b.lo.col(t) = lo;
    b.hi.col(t) = hi;
  }
  return b;
}

P4System build_p4_constraints(const HighwayScenario& sc, const SampleSet& samples,
                              bool cap_lambda) {
  samples.validate();
  const int n = sc.n(), m = static_cast<int>(sc.gamma().size()), T = sc.T(), N = samples.N();
  if (samples.n() != n) throw std::invalid_argument("samples: edge count differs from scenario");
  if (samples.T() < T) throw std::invalid_argument("samples: fewer slots than the horizon");
  const auto& gamma = sc.gamma();
  const double h = sc.h(), eta_bar = sc.eta_bar();

  P4System sys;
  auto& M = sys.model;
  M.sense = lp::Sense::kMaximize;
  auto& L = sys.layout;
  L.n = n;
  L.m = m;
  L.T = T;
  L.N = N;
  const int cells = N * n * T;

  for (int l = 0; l < N; ++l) sys.rho_bounds.push_back(interval_density_bounds(sc, samples.samples[l]));
  if (cap_lambda) {
    sys.lambda_upper = 0.0;
    for (int e = 0; e < n; ++e) sys.lambda_upper = std::max(sys.lambda_upper, sc.band(e).upper / T);
  }
  sys.nu_upper.resize(n);
  for (int e = 0; e < n; ++e) {
    const auto& s = sc.segment(e);
    const double u_cap = std::max(s.u_bar, sc.band(e).upper);
    sys.nu_upper[e] = std::min(u_cap * (1.0 / T + s.rho_bar * eta_bar), sys.lambda_upper);
  }
  sys.nu_lower.assign(cells, 0.0);
  sys.epsilon = sc.epsilon();
  sys.gamma = gamma;
  for (int e = 0; e < n; ++e) {
    sys.speed_lo.push_back(sc.band(e).lower);
    sys.speed_hi.push_back(sc.band(e).upper);
  }
  sys.critical.resize(n * m);
  for (int e = 0; e < n; ++e) {
    for (int i = 0; i < m; ++i) sys.critical[e * m + i] = critical_density(sc.segment(e), gamma[i]);
  }

  // Speed encoding.
  BlockCounter enc(M, sys.blocks, "speed_encoding");
  L.x.resize(n * m);
  for (int e = 0; e < n; ++e) {
    for (int i = 0; i < m; ++i) {
      const int j = M.add_binary("x_" + std::to_string(e + 1) + "_" + std::to_string(i + 1));
      if (!sc.band(e).contains(i)) M.set_bounds(j, 0.0, 0.0);
      L.x[e * m + i] = j;
    }
  }
  for (int e = 0; e < n; ++e) {
    std::vector<std::pair<int, double>> one, speed;
    for (int i = 0; i < m; ++i) {
      one.emplace_back(L.xi(e, i), 1.0);
      speed.emplace_back(L.xi(e, i), gamma[i]);
    }
    M.add_eq("pick_" + std::to_string(e + 1), one, 1.0);
    M.add_row("band_" + std::to_string(e + 1), sc.band(e).lower, sc.band(e).upper, speed);
  }
  enc.close();

  // Continuous per-cell variables.
  BlockCounter cont(M, sys.blocks, "cell_variables");
  L.lambda = M.add_column("lambda", 0.0, sys.lambda_upper, -sc.epsilon());
  L.rho.assign(cells, -1);
  L.eta.assign(cells, -1);
  L.mu.assign(cells, -1);
  L.nu.assign(cells, -1);
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      const auto& seg = sc.segment(e);
      for (int t = 1; t <= T; ++t) {
        const int c = L.let(l, e, t);
        const double rlo = sys.rho_bounds[l].lo(e, t - 1), rhi = sys.rho_bounds[l].hi(e, t - 1);
        // nu >= 0 loses nothing when the density cannot go negative; otherwise
        // the optimal multiplier never exceeds the largest breakpoint.
        sys.nu_lower[c] = rlo >= 0.0 ? 0.0 : -max_gamma(sc) / T;
        L.rho[c] = M.add_column("rho_" + idx(l, e, t), rlo, rhi);
        L.eta[c] = M.add_column("eta_" + idx(l, e, t), 0.0, eta_bar,
                                -seg.f_bar * seg.rho_bar / N);
        L.mu[c] = M.add_column("mu_" + idx(l, e, t), -kInf, kInf);
        L.nu[c] = M.add_column("nu_" + idx(l, e, t), sys.nu_lower[c], sys.nu_upper[e]);
      }
    }
  }
  cont.close();

  // z = x * eta.
  BlockCounter zb(M, sys.blocks, "glover_z");
  L.z.assign(static_cast<std::size_t>(cells) * m, -1);
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      for (int t = 1; t <= T; ++t) {
        const int c = L.let(l, e, t);
        std::vector<std::pair<int, double>> sum{{L.eta[c], -1.0}};
        for (int i = 0; i < m; ++i) {
          const bool open = sc.band(e).contains(i);
          const std::string name = "z_" + idx(l, e, t) + "_" + std::to_string(i + 1);
          const int z = M.add_column(name, 0.0, open ? eta_bar : 0.0);
          L.z[L.leti(l, e, t, i)] = z;
          sum.emplace_back(z, 1.0);
          if (open) glover_linearize(M, L.xi(e, i), z, {{L.eta[c], 1.0}}, 0.0, 0.0, eta_bar, name);
        }
        M.add_eq("zsum_" + idx(l, e, t), sum, 0.0);
      }
    }
  }
  zb.close();

  // y = x * rho for t = 1..T-1 (y at t = 0 is data, the dynamics never use
  // y at T).
  BlockCounter yb(M, sys.blocks, "glover_y");
  L.y.assign(static_cast<std::size_t>(cells) * m, -1);
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      for (int t = 1; t < T; ++t) {
        const int c = L.let(l, e, t);
        const double rlo = sys.rho_bounds[l].lo(e, t - 1), rhi = sys.rho_bounds[l].hi(e, t - 1);
        std::vector<std::pair<int, double>> sum{{L.rho[c], -1.0}};
        for (int i = 0; i < m; ++i) {
          const bool open = sc.band(e).contains(i);
          const std::string name = "y_" + idx(l, e, t) + "_" + std::to_string(i + 1);
          const int y = open ? M.add_column(name, std::min(rlo, 0.0), std::max(rhi, 0.0))
                             : M.add_column(name, 0.0, 0.0);
          L.y[L.leti(l, e, t, i)] = y;
          sum.emplace_back(y, 1.0);
          if (open) glover_linearize(M, L.xi(e, i), y, {{L.rho[c], 1.0}}, 0.0, rlo, rhi, name);
        }
        M.add_eq("ysum_" + idx(l, e, t), sum, 0.0);
      }
    }
  }
  yb.close();

  // Linearized dynamics.
  BlockCounter dyn(M, sys.blocks, "dynamics");
  for (int l = 0; l < N; ++l) {
    const auto& smp = samples.samples[l];
    for (int e = 0; e < n; ++e) {
      for (int t = 0; t < T; ++t) {
        std::vector<std::pair<int, double>> row{{L.rho[L.let(l, e, t + 1)], 1.0}};
        double rhs = h * smp.omega(e, t);
        if (t == 0) {
          rhs += smp.rho0(e);
          for (int i = 0; i < m; ++i) {
            row.emplace_back(L.xi(e, i), h * gamma[i] * smp.rho0(e));
            if (e > 0) row.emplace_back(L.xi(e - 1, i), -h * gamma[i] * smp.rho0(e - 1));
          }
        } else {
          row.emplace_back(L.rho[L.let(l, e, t)], -1.0);
          for (int i = 0; i < m; ++i) {
            row.emplace_back(L.y[L.leti(l, e, t, i)], h * gamma[i]);
            if (e > 0) row.emplace_back(L.y[L.leti(l, e - 1, t, i)], -h * gamma[i]);
          }
        }
        M.add_eq("dyn_" + idx(l, e, t + 1), std::move(row), rhs);
      }
    }
  }
  dyn.close();

  // Dual feasibility, multiplier link and norm cap.
  BlockCounter d1(M, sys.blocks, "dual_feasibility");
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      const auto& seg = sc.segment(e);
      const double k = seg.rho_bar - seg.f_bar / seg.u_bar;
      for (int t = 1; t <= T; ++t) {
        const int c = L.let(l, e, t);
        std::vector<std::pair<int, double>> row{{L.eta[c], seg.f_bar}, {L.mu[c], -1.0}};
        for (int i = 0; i < m; ++i) {
          if (sc.band(e).contains(i)) row.emplace_back(L.z[L.leti(l, e, t, i)], gamma[i] * k);
        }
        M.add_ge("dual_" + idx(l, e, t), std::move(row), 0.0);
      }
    }
  }
  d1.close();
  BlockCounter d2(M, sys.blocks, "multiplier_link");
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      for (int t = 1; t <= T; ++t) {
        const int c = L.let(l, e, t);
        std::vector<std::pair<int, double>> row{{L.nu[c], 1.0}, {L.mu[c], -1.0}};
        for (int i = 0; i < m; ++i) row.emplace_back(L.xi(e, i), -gamma[i] / T);
        M.add_eq("link_" + idx(l, e, t), std::move(row), 0.0);
      }
    }
  }
  d2.close();
  BlockCounter d3(M, sys.blocks, "norm_cap");
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      for (int t = 1; t <= T; ++t) {
        const int c = L.let(l, e, t);
        M.add_le("cap_hi_" + idx(l, e, t), {{L.nu[c], 1.0}, {L.lambda, -1.0}}, 0.0);
        M.add_ge("cap_lo_" + idx(l, e, t), {{L.nu[c], 1.0}, {L.lambda, 1.0}}, 0.0);
      }
    }
  }
  d3.close();
  return sys;
}

void IntegerCutPool::add(const SpeedProfile& profile) { visited_.push_back(profile); }

bool IntegerCutPool::contains(const SpeedProfile& profile) const {
  return std::find(visited_.begin(), visited_.end(), profile) != visited_.end();
}

int IntegerCutPool::cut_lhs(int p, const SpeedProfile& profile) const {
  const auto& v = visited_.at(p);
  int lhs = 0;
  for (std::size_t e = 0; e < v.index.size(); ++e) lhs += v.index[e] == profile.index[e] ? 1 : -1;
  return lhs;
}

void add_integer_cut(lp::LpModel& model, const VariableLayout& layout,
                     const SpeedProfile& visited, const std::string& name) {
  std::vector<std::pair<int, double>> row;
  for (int e = 0; e < layout.n; ++e) {
    for (int i = 0; i < layout.m; ++i) {
      row.emplace_back(layout.xi(e, i), visited.index[e] == static_cast<std::size_t>(i) ? 1.0 : -1.0);
    }
  }
  model.add_le(name, std::move(row), layout.n - 1.0);
}

UbpModel build_ubp(const P4System& base, const IntegerCutPool& cuts, const UbpOptions& options) {
  UbpModel ubp;
  ubp.model = base.model;
  ubp.layout = base.layout;
  ubp.blocks = base.blocks;
  auto& M = ubp.model;
  auto& L = ubp.layout;
  const int cells = L.N * L.n * L.T;
  BlockCounter mc(M, ubp.blocks, "mccormick");
  L.s.assign(cells, -1);
  for (int l = 0; l < L.N; ++l) {
    for (int e = 0; e < L.n; ++e) {
      for (int t = 1; t <= L.T; ++t) {
        const int c = L.let(l, e, t);
        const double vl = base.nu_lower[c], vu = base.nu_upper[e];
        const int nu = L.nu[c];
        double rl = base.rho_bounds[l].lo(e, t - 1), ru = base.rho_bounds[l].hi(e, t - 1);
        if (options.validity_rows) {
          // Each cell alone may leave the box by at most N * eps.
          double cmax = 0.0;
          for (int i = 0; i < L.m; ++i) {
            if (M.column(L.xi(e, i)).upper > 0.0) cmax = std::max(cmax, base.critical[e * L.m + i]);
          }
          const double slack = L.N * base.epsilon;
          rl = std::max(rl, -slack);
          ru = std::max(rl, std::min(ru, cmax + slack));
          M.set_bounds(L.rho[c], rl, ru);
        }
        const int s = M.add_column("s_" + idx(l, e, t), -kInf, kInf, 1.0 / L.N);
        L.s[c] = s;
        const int rho = L.rho[c];
        const std::string tag = idx(l, e, t);
        M.add_ge("mc1_" + tag, {{s, 1.0}, {rho, -vu}, {nu, -ru}}, -vu * ru);
        M.add_ge("mc2_" + tag, {{s, 1.0}, {rho, -vl}, {nu, -rl}}, -vl * rl);
        M.add_le("mc3_" + tag, {{s, 1.0}, {rho, -vu}, {nu, -rl}}, -vu * rl);
        M.add_le("mc4_" + tag, {{s, 1.0}, {rho, -vl}, {nu, -ru}}, -vl * ru);
        if (options.validity_rows && options.speed_envelope && vl >= 0.0) {
          std::vector<std::pair<int, double>> env{{s, 1.0}, {nu, -L.N * base.epsilon}};
          std::vector<std::pair<int, double>> wsum{{nu, -1.0}};
          for (int i = 0; i < L.m; ++i) {
            const int x = L.xi(e, i);
            if (M.column(x).upper <= 0.0) continue;
            const std::string name = "w_" + tag + "_" + std::to_string(i + 1);
            const int w = M.add_column(name, 0.0, vu);
            glover_linearize(M, x, w, {{nu, 1.0}}, 0.0, vl, vu, name);
            env.emplace_back(w, -base.critical[e * L.m + i]);
            wsum.emplace_back(w, 1.0);
          }
          M.add_eq("wsum_" + tag, std::move(wsum), 0.0);
          M.add_le("env_" + tag, std::move(env), 0.0);
        }
      }
    }
  }
  mc.close();
  if (options.validity_rows) {
    BlockCounter vb(M, ubp.blocks, "validity");
    std::vector<std::pair<int, double>> total;
    for (int l = 0; l < L.N; ++l) {
      for (int e = 0; e < L.n; ++e) {
        std::vector<std::pair<int, double>> cap;
        for (int i = 0; i < L.m; ++i) {
          const double c = base.critical[e * L.m + i];
          if (c != 0.0) cap.emplace_back(L.xi(e, i), c);
        }
        for (int t = 1; t <= L.T; ++t) {
          const std::string tag = idx(l, e, t);
          const int rho = L.rho[L.let(l, e, t)];
          const int v = M.add_column("dist_" + tag, 0.0, kInf);
          M.add_ge("below_" + tag, {{v, 1.0}, {rho, 1.0}}, 0.0);
          auto above = cap;
          above.emplace_back(v, 1.0);
          above.emplace_back(rho, -1.0);
          M.add_ge("above_" + tag, std::move(above), 0.0);
          total.emplace_back(v, 1.0 / L.N);
        }
      }
    }
    M.add_le("validity", std::move(total), base.epsilon);
    vb.close();
  }
  BlockCounter cb(M, ubp.blocks, "integer_cuts");
  for (int p = 0; p < cuts.size(); ++p) {
    add_integer_cut(M, L, cuts.visited()[p], "cut_" + std::to_string(p + 1));
  }
  cb.close();
  ubp.cut_rows = cuts.size();
  return ubp;
}

LbpModel build_lbp(const HighwayScenario& sc, const TrajectoryBatch& batch) {
  const int n = sc.n(), m = static_cast<int>(sc.gamma().size()), T = sc.T(), N = batch.N();
  if (N < 1) throw std::invalid_argument("build_lbp: empty trajectory batch");
  const auto& gamma = sc.gamma();
  const auto& u = batch.profile;
  LbpModel lbp;
  auto& M = lbp.model;
  M.sense = lp::Sense::kMaximize;
  lbp.lambda = M.add_column("lambda", 0.0, kInf, -sc.epsilon());
  const int cells = N * n * T;
  lbp.eta.assign(cells, -1);
  lbp.nu.assign(cells, -1);
  auto cell = [&](int l, int e, int t) { return (l * n + e) * T + (t - 1); };
  BlockCounter all(M, lbp.blocks, "lbp");
  for (int l = 0; l < N; ++l) {
    for (int e = 0; e < n; ++e) {
      const auto& seg = sc.segment(e);
      const double k = seg.rho_bar - seg.f_bar / seg.u_bar;
      const std::size_t sel = u.index[e];
      for (int t = 1; t <= T; ++t) {
        const int c = cell(l, e, t);
        const std::string tag = idx(l, e, t);
        const double r = batch.rho[l](e, t - 1);
        // eta is left unbounded above: with x fixed the products z = x*eta
        // are exact without it, and the LP can then expose an empty
        // ambiguity set as unboundedness.
        const int eta = M.add_column("eta_" + tag, 0.0, kInf, -seg.f_bar * seg.rho_bar / N);
        const int mu = M.add_column("mu_" + tag, -kInf, kInf);
        const int nu = M.add_column("nu_" + tag, -kInf, kInf, r / N);
        lbp.eta[c] = eta;
        lbp.nu[c] = nu;
        std::vector<std::pair<int, double>> zsum{{eta, -1.0}};
        std::vector<std::pair<int, double>> dual{{eta, seg.f_bar}, {mu, -1.0}};
        for (int i = 0; i < m; ++i) {
          const bool on = static_cast<std::size_t>(i) == sel;
          const int z = M.add_column("z_" + tag + "_" + std::to_string(i + 1), 0.0, on ? kInf : 0.0);
          zsum.emplace_back(z, 1.0);
          if (on) dual.emplace_back(z, gamma[i] * k);
        }
        M.add_eq("zsum_" + tag, std::move(zsum), 0.0);
        M.add_ge("dual_" + tag, std::move(dual), 0.0);
        M.add_eq("link_" + tag, {{nu, 1.0}, {mu, -1.0}}, gamma[sel] / T);
        M.add_le("cap_hi_" + tag, {{nu, 1.0}, {lbp.lambda, -1.0}}, 0.0);
        M.add_ge("cap_lo_" + tag, {{nu, 1.0}, {lbp.lambda, 1.0}}, 0.0);
      }
    }
  }
  all.close();
  return lbp;
}

SpeedProfile decode_profile(const VariableLayout& layout, const std::vector<double>& x) {
  SpeedProfile p;
  p.index.resize(layout.n);
  for (int e = 0; e < layout.n; ++e) {
    int best = 0;
    for (int i = 1; i < layout.m; ++i) {
      if (x.at(layout.xi(e, i)) > x.at(layout.xi(e, best))) best = i;
    }
    p.index[e] = static_cast<std::size_t>(best);
  }
  return p;
}

namespace {

void check_support_args(const HighwayScenario& sc, const std::vector<double>& speeds,
                        const Eigen::MatrixXd& mu) {
  if (static_cast<int>(speeds.size()) != sc.n() || mu.rows() != sc.n()) {
    throw std::invalid_argument("support_function: dimension mismatch");
  }
}

}  // namespace

double support_function(const HighwayScenario& sc, const std::vector<double>& speeds,
                        const Eigen::MatrixXd& mu) {
  check_support_args(sc, speeds, mu);
  double total = 0.0;
  for (int e = 0; e < sc.n(); ++e) {
    const double c = critical_density(sc.segment(e), speeds[e]);
    for (Eigen::Index t = 0; t < mu.cols(); ++t) total += c * std::max(0.0, mu(e, t));
  }
  return total;
}

double support_function_lp(const HighwayScenario& sc, const std::vector<double>& speeds,
                           const Eigen::MatrixXd& mu) {
  check_support_args(sc, speeds, mu);
  lp::LpModel M;
  M.sense = lp::Sense::kMinimize;
  for (int e = 0; e < sc.n(); ++e) {
    const auto& seg = sc.segment(e);
    const double coef = seg.f_bar + speeds[e] * (seg.rho_bar - seg.f_bar / seg.u_bar);
    for (Eigen::Index t = 0; t < mu.cols(); ++t) {
      const std::string tag = std::to_string(e + 1) + "_" + std::to_string(t + 1);
      const int eta = M.add_column("eta_" + tag, 0.0, kInf, seg.f_bar * seg.rho_bar);
      M.add_ge("row_" + tag, {{eta, coef}}, mu(e, t));
    }
  }
  const lp::LpSolution sol = lp::solve_lp(M);
  if (!sol.optimal()) {
    throw std::runtime_error(std::string("support_function_lp: ") + lp::to_string(sol.status));
  }
  return sol.objective;
}

}  // namespace vsl
