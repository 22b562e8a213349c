#include "vsl/scenario_sampling.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace vsl {

void GeneratorSpec::validate() const {
  const std::size_t n = omega_lo.size();
  if (n == 0) throw std::invalid_argument("generator: no edges");
  if (omega_hi.size() != n || rho0_lo.size() != n || rho0_hi.size() != n) {
    throw std::invalid_argument("generator: per-edge bound lists differ in length");
  }
  for (std::size_t e = 0; e < n; ++e) {
    if (!(omega_lo[e] <= omega_hi[e]) || !std::isfinite(omega_lo[e]) ||
        !std::isfinite(omega_hi[e])) {
      throw std::invalid_argument("generator: omega bounds need lo <= hi at edge " +
                                  std::to_string(e + 1));
    }
    if (!(rho0_lo[e] <= rho0_hi[e]) || !std::isfinite(rho0_lo[e]) ||
        !std::isfinite(rho0_hi[e])) {
      throw std::invalid_argument("generator: rho0 bounds need lo <= hi at edge " +
                                  std::to_string(e + 1));
    }
  }
}

void SampleSet::validate() const {
  if (samples.empty()) throw std::invalid_argument("sample set is empty");
  const int n0 = samples.front().n();
  const int T0 = samples.front().T();
  for (const auto& s : samples) {
    if (s.n() != n0 || s.omega.rows() != n0 || s.T() != T0) {
      throw std::invalid_argument("samples disagree on dimensions");
    }
    if (!s.rho0.allFinite() || !s.omega.allFinite()) {
      throw std::invalid_argument("sample contains non-finite values");
    }
  }
}

namespace {

double draw(std::mt19937_64& rng, double lo, double hi) {
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

}  // namespace

SampleSet generate_samples(const GeneratorSpec& spec, int T, int N,
                           std::uint64_t seed) {
  spec.validate();
  if (N < 1) throw std::invalid_argument("generator: N must be at least 1");
  if (T < 1) throw std::invalid_argument("generator: T must be at least 1");
  const int n = spec.n();
  std::mt19937_64 rng(seed);
  SampleSet set;
  set.provenance = "generator:seed=" + std::to_string(seed);
  set.samples.reserve(N);
  for (int l = 0; l < N; ++l) {
    DisturbanceSample s;
    s.rho0.resize(n);
    s.omega.resize(n, T);
    for (int e = 0; e < n; ++e) s.rho0(e) = draw(rng, spec.rho0_lo[e], spec.rho0_hi[e]);
    for (int e = 0; e < n; ++e) {
      for (int t = 0; t < T; ++t) s.omega(e, t) = draw(rng, spec.omega_lo[e], spec.omega_hi[e]);
    }
    set.samples.push_back(std::move(s));
  }
  return set;
}

GeneratorSpec case_study_generator(int n) {
  GeneratorSpec g;
  g.rho0_lo.assign(n, 260.0);
  g.rho0_hi.assign(n, 260.0);
  g.omega_lo.assign(n, -1500.0);
  g.omega_hi.assign(n, 2500.0);
  g.omega_lo[0] = 2.0e4;
  g.omega_hi[0] = 2.4e4;
  return g;
}

Trajectory propagate(const HighwayScenario& scenario,
                     const std::vector<double>& speeds,
                     const DisturbanceSample& sample) {
  const int n = scenario.n();
  const int T = scenario.T();
  if (static_cast<int>(speeds.size()) != n || sample.n() != n || sample.T() < T) {
    throw std::invalid_argument("propagate: dimension mismatch");
  }
  const double h = scenario.h();
  Trajectory rho(n, T);
  Eigen::VectorXd cur = sample.rho0;
  Eigen::VectorXd next(n);
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < n; ++e) {
      const double inflow = e == 0 ? 0.0 : speeds[e - 1] * cur(e - 1);
      next(e) = cur(e) + h * (inflow - speeds[e] * cur(e) + sample.omega(e, t));
    }
    rho.col(t) = next;
    cur.swap(next);
  }
  return rho;
}

Trajectory propagate(const HighwayScenario& scenario, const SpeedProfile& u,
                     const DisturbanceSample& sample) {
  return propagate(scenario, u.speeds(scenario), sample);
}

TrajectoryBatch propagate_batch(const HighwayScenario& scenario,
                                const SpeedProfile& u, const SampleSet& samples) {
  TrajectoryBatch batch;
  batch.profile = u;
  const auto speeds = u.speeds(scenario);
  batch.rho.reserve(samples.samples.size());
  for (const auto& s : samples.samples) batch.rho.push_back(propagate(scenario, speeds, s));
  return batch;
}

void write_samples_csv(std::ostream& os, const SampleSet& samples) {
  os << std::setprecision(17);
  os << "l,e,rho0_veh_per_km\n";
  for (int l = 0; l < samples.N(); ++l) {
    const auto& s = samples.samples[l];
    for (int e = 0; e < s.n(); ++e) os << l + 1 << ',' << e + 1 << ',' << s.rho0(e) << '\n';
  }
  os << "l,e,t,omega_veh_per_h\n";
  for (int l = 0; l < samples.N(); ++l) {
    const auto& s = samples.samples[l];
    for (int e = 0; e < s.n(); ++e) {
      for (int t = 0; t < s.T(); ++t) {
        os << l + 1 << ',' << e + 1 << ',' << t << ',' << s.omega(e, t) << '\n';
      }
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& cell, int line_no) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(cell, &pos);
    if (pos != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("samples csv line " + std::to_string(line_no) +
                                ": bad number '" + cell + "'");
  }
}

}  // namespace

SampleSet read_samples_csv(std::istream& is, const std::string& provenance) {
  enum class Block { kNone, kRho0, kOmega } block = Block::kNone;
  std::map<std::pair<int, int>, double> rho0;
  std::map<std::tuple<int, int, int>, double> omega;
  int max_l = 0, max_e = 0, max_t = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "l,e,rho0_veh_per_km" || line == "l,e,rho0") {
      block = Block::kRho0;
      continue;
    }
    if (line == "l,e,t,omega_veh_per_h" || line == "l,e,t,omega") {
      block = Block::kOmega;
      continue;
    }
    const auto cells = split_csv(line);
    const std::string where = "samples csv line " + std::to_string(line_no);
    if (block == Block::kRho0) {
      if (cells.size() != 3) throw std::invalid_argument(where + ": expected 3 columns");
      const int l = static_cast<int>(parse_number(cells[0], line_no));
      const int e = static_cast<int>(parse_number(cells[1], line_no));
      if (l < 1 || e < 1) throw std::invalid_argument(where + ": indices are 1-based");
      rho0[{l, e}] = parse_number(cells[2], line_no);
      max_l = std::max(max_l, l);
      max_e = std::max(max_e, e);
    } else if (block == Block::kOmega) {
      if (cells.size() != 4) throw std::invalid_argument(where + ": expected 4 columns");
      const int l = static_cast<int>(parse_number(cells[0], line_no));
      const int e = static_cast<int>(parse_number(cells[1], line_no));
      const int t = static_cast<int>(parse_number(cells[2], line_no));
      if (l < 1 || e < 1 || t < 0) throw std::invalid_argument(where + ": bad index");
      omega[{l, e, t}] = parse_number(cells[3], line_no);
      max_l = std::max(max_l, l);
      max_e = std::max(max_e, e);
      max_t = std::max(max_t, t);
    } else {
      throw std::invalid_argument(where + ": data before a header row");
    }
  }
  if (max_l == 0 || max_t < 0) throw std::invalid_argument("samples csv: no data");
  const int N = max_l, n = max_e, T = max_t + 1;
  if (rho0.size() != static_cast<std::size_t>(N) * n ||
      omega.size() != static_cast<std::size_t>(N) * n * T) {
    throw std::invalid_argument("samples csv: missing entries (expected a full l x e x t grid)");
  }
  SampleSet set;
  set.provenance = provenance;
  for (int l = 1; l <= N; ++l) {
    DisturbanceSample s;
    s.rho0.resize(n);
    s.omega.resize(n, T);
    for (int e = 1; e <= n; ++e) {
      s.rho0(e - 1) = rho0.at({l, e});
      for (int t = 0; t < T; ++t) s.omega(e - 1, t) = omega.at({l, e, t});
    }
    set.samples.push_back(std::move(s));
  }
  set.validate();
  return set;
}

SampleSet read_samples_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open samples file " + path.string());
  return read_samples_csv(in, "file:" + path.string());
}

void write_trajectories_csv(std::ostream& os, const TrajectoryBatch& batch) {
  os << std::setprecision(12);
  os << "l,e,t,rho_veh_per_km\n";
  for (int l = 0; l < batch.N(); ++l) {
    const auto& rho = batch.rho[l];
    for (int e = 0; e < rho.rows(); ++e) {
      for (int t = 0; t < rho.cols(); ++t) {
        os << l + 1 << ',' << e + 1 << ',' << t + 1 << ',' << rho(e, t) << '\n';
      }
    }
  }
}

}  // namespace vsl
