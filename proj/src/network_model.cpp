#include "vsl/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace vsl {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ModelError(message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate_segment(const SegmentParams& seg) {
  require(finite_positive(seg.f_bar), "f_bar: must be positive");
  require(finite_positive(seg.rho_bar), "rho_bar: must be positive");
  require(finite_positive(seg.u_bar), "u_bar: must be positive");
  require(finite_positive(seg.f_U) && seg.f_U <= seg.f_bar,
          "f_U: must satisfy 0 < f_U <= f_bar");
  require(finite_positive(seg.rho_U) && seg.rho_U <= seg.rho_bar,
          "rho_U: must satisfy 0 < rho_U <= rho_bar");
  require(seg.u_bar * seg.rho_bar > seg.f_bar,
          "f_bar: degenerate diagram, need u_bar * rho_bar > f_bar");
}

double tau(const SegmentParams& seg) {
  const double denom = seg.u_bar * seg.rho_bar - seg.f_bar;
  if (!(denom > 0.0) || !(seg.f_bar > 0.0)) {
    throw ModelError("degenerate fundamental diagram: u_bar * rho_bar <= f_bar");
  }
  return seg.f_bar / denom;
}

double critical_density(const SegmentParams& seg, double u) {
  if (!(u > 0.0)) throw ModelError("critical_density: speed must be positive");
  const double t = tau(seg);
  return t * seg.rho_bar * seg.u_bar / (t * seg.u_bar + u);
}

double allowable_flow(const SegmentParams& seg, double rho, double u) {
  if (!(rho >= 0.0 && rho <= seg.rho_bar)) {
    throw ModelError("allowable_flow: density outside [0, rho_bar]");
  }
  if (!(u > 0.0 && u <= seg.u_bar)) {
    throw ModelError("allowable_flow: speed outside (0, u_bar]");
  }
  if (rho <= critical_density(seg, u)) return u * rho;
  return tau(seg) * seg.u_bar * (seg.rho_bar - rho);
}

SpeedBand admissible_speed_set(const SegmentParams& seg,
                               std::span<const double> gamma, double pi) {
  require(!gamma.empty(), "gamma: speed grid is empty");
  bool found = false;
  SpeedBand band;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    const double rc = critical_density(seg, gamma[i]);
    const bool ok = rc * gamma[i] <= seg.f_U && rc <= seg.rho_U - pi;
    if (!ok) continue;
    if (!found) {
      band.first = i;
      found = true;
    } else if (i != band.last + 1) {
      // rc*g increases and rc decreases with g, so the set cannot have holes.
      throw ModelError("admissible speeds are not contiguous in the grid");
    }
    band.last = i;
  }
  require(found, "no admissible speed in the grid for this segment");
  band.lower = gamma[band.first];
  band.upper = gamma[band.last];
  return band;
}

double HighwayScenario::default_eta_bar(const ScenarioParams& params) {
  double min_f = std::numeric_limits<double>::infinity();
  for (const auto& s : params.segments) min_f = std::min(min_f, s.f_bar);
  const double max_gamma =
      *std::max_element(params.gamma.begin(), params.gamma.end());
  return 10.0 * max_gamma / (params.T * min_f);
}

HighwayScenario HighwayScenario::create(const ScenarioParams& p) {
  require(p.n >= 1, "n: must be at least 1");
  require(p.T >= 1, "T: must be at least 1");
  require(finite_positive(p.length_km), "L_km: must be positive");
  require(finite_positive(p.delta_s), "delta_s: must be positive");
  require(static_cast<int>(p.segments.size()) == p.n,
          "segments: expected exactly n entries");
  for (std::size_t e = 0; e < p.segments.size(); ++e) {
    try {
      validate_segment(p.segments[e]);
    } catch (const ModelError& err) {
      std::ostringstream os;
      os << "segments[" << e << "]." << err.what();
      throw ModelError(os.str());
    }
  }
  require(!p.gamma.empty(), "gamma: speed grid is empty");
  for (std::size_t i = 0; i < p.gamma.size(); ++i) {
    std::ostringstream key;
    key << "gamma[" << i << "]";
    require(finite_positive(p.gamma[i]), key.str() + ": must be positive");
    require(i == 0 || p.gamma[i] > p.gamma[i - 1],
            key.str() + ": grid must be strictly increasing");
  }
  require(finite_positive(p.pi), "pi: must be positive");
  require(std::isfinite(p.epsilon) && p.epsilon >= 0.0,
          "epsilon: must be nonnegative");
  require(p.beta > 0.0 && p.beta < 1.0, "beta: must lie in (0, 1)");
  require(std::isfinite(p.eta_bar), "eta_bar: must be finite");

  HighwayScenario s;
  s.n_ = p.n;
  s.T_ = p.T;
  s.length_km_ = p.length_km;
  s.delta_h_ = p.delta_s / 3600.0;
  s.h_ = p.n * s.delta_h_ / p.length_km;
  double max_u = 0.0;
  for (const auto& seg : p.segments) max_u = std::max(max_u, seg.u_bar);
  require(s.h_ <= 1.0 / max_u,
          "delta_s: discretization ratio h = n*delta/L exceeds 1/max(u_bar)");
  s.pi_ = p.pi;
  s.eta_bar_ = p.eta_bar > 0.0 ? p.eta_bar : default_eta_bar(p);
  s.epsilon_ = p.epsilon;
  s.beta_ = p.beta;
  s.gamma_ = p.gamma;
  s.segments_ = p.segments;
  s.bands_.reserve(p.segments.size());
  for (std::size_t e = 0; e < p.segments.size(); ++e) {
    try {
      s.bands_.push_back(admissible_speed_set(p.segments[e], p.gamma, p.pi));
    } catch (const ModelError& err) {
      std::ostringstream os;
      os << "segments[" << e << "]: " << err.what();
      throw ModelError(os.str());
    }
  }
  return s;
}

double HighwayScenario::profile_count() const {
  double count = 1.0;
  for (const auto& b : bands_) count *= static_cast<double>(b.size());
  return count;
}

HighwayScenario HighwayScenario::with_epsilon(double epsilon) const {
  require(std::isfinite(epsilon) && epsilon >= 0.0,
          "epsilon: must be nonnegative");
  HighwayScenario copy = *this;
  copy.epsilon_ = epsilon;
  return copy;
}

std::vector<double> SpeedProfile::speeds(const HighwayScenario& scenario) const {
  std::vector<double> u(index.size());
  for (std::size_t e = 0; e < index.size(); ++e) u[e] = scenario.gamma().at(index[e]);
  return u;
}

SpeedProfile profile_from_speeds(const HighwayScenario& scenario,
                                 std::span<const double> speeds) {
  if (static_cast<int>(speeds.size()) != scenario.n()) {
    throw ModelError("speed profile: expected one speed per edge");
  }
  SpeedProfile p;
  p.index.reserve(speeds.size());
  for (double v : speeds) {
    const auto& g = scenario.gamma();
    auto it = std::find(g.begin(), g.end(), v);
    if (it == g.end()) {
      std::ostringstream os;
      os << "speed profile: " << v << " km/h is not in the speed grid";
      throw ModelError(os.str());
    }
    p.index.push_back(static_cast<std::size_t>(it - g.begin()));
  }
  return p;
}

void check_admissible(const HighwayScenario& scenario,
                      const SpeedProfile& profile) {
  if (static_cast<int>(profile.index.size()) != scenario.n()) {
    throw ModelError("speed profile: expected one speed per edge");
  }
  for (int e = 0; e < scenario.n(); ++e) {
    if (!scenario.band(e).contains(profile.index[e])) {
      std::ostringstream os;
      os << "speed profile: edge " << e + 1 << " speed "
         << profile.speed(scenario, e) << " km/h outside admissible band ["
         << scenario.band(e).lower << ", " << scenario.band(e).upper << "]";
      throw ModelError(os.str());
    }
  }
}

std::string format_speeds(const HighwayScenario& scenario,
                          const SpeedProfile& profile) {
  std::ostringstream os;
  os << '[';
  for (std::size_t e = 0; e < profile.index.size(); ++e) {
    if (e) os << ',';
    os << profile.speed(scenario, static_cast<int>(e));
  }
  os << ']';
  return os.str();
}

}  // namespace vsl
