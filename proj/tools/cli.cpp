#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vsl/certificate.hpp"
#include "vsl/config.hpp"
#include "vsl/issa_solver.hpp"
#include "vsl/validation_oracle.hpp"

namespace vsl::cli {

namespace {

namespace fs = std::filesystem;

// Failure that maps directly onto an exit code.
struct Exit {
  int code;
  std::string message;
};

struct Common {
  std::string scenario;
  std::string samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_samples;
  std::optional<double> epsilon;
  std::string out = ".";
};

struct Loaded {
  RunConfig config;
  HighwayScenario scenario;
  SampleSet samples;
  std::string seed_tag;  // value of the seed= header field
  std::string source;    // scenario file or builtin
};

RunConfig read_config(const Common& c) {
  RunConfig cfg = c.scenario.empty() ? case_study_config() : load_config(c.scenario);
  if (c.epsilon) cfg.params.epsilon = *c.epsilon;
  if (cfg.generator) {
    if (c.seed) cfg.generator->seed = *c.seed;
    if (c.n_samples) cfg.generator->N = *c.n_samples;
  }
  return cfg;
}

// Samples cover at least `slots` steps; the training horizon comes first.
Loaded load(const Common& c, int slots = 0) {
  RunConfig cfg = read_config(c);
  HighwayScenario sc = make_scenario(cfg);
  const int T = std::max(sc.T(), slots);
  SampleSet samples;
  std::string seed_tag;
  if (!c.samples.empty()) {
    try {
      samples = read_samples_file(c.samples);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--samples: ") + e.what());
    }
    if (samples.n() != sc.n() || samples.T() < T) {
      throw ConfigError("--samples: file has n=" + std::to_string(samples.n()) + ", T=" +
                        std::to_string(samples.T()) + "; need n=" + std::to_string(sc.n()) +
                        ", T>=" + std::to_string(T));
    }
    seed_tag = "none";
  } else {
    if (!cfg.generator) throw ConfigError("generator: scenario has no generator and no --samples");
    if (cfg.generator->N < 1) throw ConfigError("generator.N: must be at least 1");
    samples = generate_samples(cfg.generator->spec, T, cfg.generator->N, cfg.generator->seed);
    seed_tag = std::to_string(cfg.generator->seed);
  }
  const std::string source = c.scenario.empty() ? "builtin:case-study" : c.scenario;
  return {std::move(cfg), std::move(sc), std::move(samples), seed_tag, source};
}

SampleSet head(const SampleSet& s, int T) {
  SampleSet out = s;
  for (auto& d : out.samples) d.omega = d.omega.leftCols(T).eval();
  return out;
}

std::vector<double> parse_speeds(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("--u: not a number: '" + item + "'");
    v.push_back(x);
  }
  return v;
}

std::vector<double> profile_speeds(const HighwayScenario& sc, const std::string& text,
                                   bool allow_uncontrolled) {
  if (allow_uncontrolled && text == "uncontrolled") return uncontrolled_speeds(sc);
  const std::vector<double> speeds = parse_speeds(text);
  if (static_cast<int>(speeds.size()) != sc.n()) {
    throw ConfigError("--u: expected " + std::to_string(sc.n()) + " speeds, got " +
                      std::to_string(speeds.size()));
  }
  try {
    check_admissible(sc, profile_from_speeds(sc, speeds));
  } catch (const ModelError& e) {
    throw ConfigError(std::string("--u: ") + e.what());
  }
  return speeds;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& meta, const std::string& header)
      : path_(path), os_(path) {
    if (!os_) throw Exit{kConfigError, "cannot write " + path.string()};
    os_ << std::setprecision(17);
    os_ << "# " << meta << '\n' << header << '\n';
  }
  std::ostream& os() { return os_; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
  std::ofstream os_;
};

std::string meta(const Loaded& L, const std::string& command) {
  std::ostringstream m;
  m << "seed=" << L.seed_tag << " samples=" << L.samples.provenance << " scenario=" << L.source
    << " command=" << command << " epsilon=" << std::setprecision(17) << L.scenario.epsilon();
  return m.str();
}

std::string speed_columns(int n) {
  std::string s;
  for (int e = 1; e <= n; ++e) s += ",u" + std::to_string(e) + "_km_per_h";
  return s;
}

void write_speeds(std::ostream& os, const std::vector<double>& u) {
  for (double v : u) os << ',' << v;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Exit{kConfigError, "--out: cannot create " + dir + ": " + ec.message()};
  return fs::path(dir);
}

void write_mean_density(const fs::path& path, const std::string& m, const Eigen::MatrixXd& mean,
                        const std::vector<double>& critical, double delta_min) {
  CsvFile f(path, m, "t,time_min,e,mean_rho_veh_per_km,critical_veh_per_km");
  for (int t = 0; t < mean.cols(); ++t) {
    for (int e = 0; e < mean.rows(); ++e) {
      f.os() << t << ',' << t * delta_min << ',' << e + 1 << ',' << mean(e, t) << ','
             << critical[e] << '\n';
    }
  }
}

int cmd_simulate(const Common& c, const std::string& u_text, int tval, std::ostream& out) {
  const Loaded L = load(c, tval);
  const auto speeds = profile_speeds(L.scenario, u_text, true);
  const fs::path dir = prepare_out(c.out);
  const std::string m = meta(L, "simulate") + " u=" + u_text;
  const SampleSet train = head(L.samples, L.scenario.T());
  {
    CsvFile f(dir / "trajectories.csv", m, "l,e,t,rho_veh_per_km");
    TrajectoryBatch batch;
    for (const auto& s : train.samples) batch.rho.push_back(propagate(L.scenario, speeds, s));
    std::ostringstream body;
    write_trajectories_csv(body, batch);
    const std::string text = body.str();
    f.os() << text.substr(text.find('\n') + 1);
  }
  {
    std::ofstream f(dir / "samples.csv");
    f << "# " << m << '\n';
    write_samples_csv(f, L.samples);
  }
  if (tval > 0) {
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(L.scenario.n(), tval + 1);
    for (const auto& s : L.samples.samples) mean += simulate_ctm(L.scenario, speeds, s, tval).rho;
    mean /= L.samples.N();
    std::vector<double> crit;
    for (int e = 0; e < L.scenario.n(); ++e) crit.push_back(critical_density(L.scenario.segment(e), speeds[e]));
    write_mean_density(dir / "ctm_density.csv", m + " tval=" + std::to_string(tval), mean, crit,
                       L.scenario.delta_h() * 60.0);
  }
  out << "wrote " << (dir / "trajectories.csv").string() << '\n';
  return kOk;
}

int cmd_certify(const Common& c, const std::string& u_text, std::ostream& out) {
  const Loaded L = load(c);
  const auto speeds = profile_speeds(L.scenario, u_text, false);
  const SpeedProfile u = profile_from_speeds(L.scenario, speeds);
  const TrajectoryBatch batch = propagate_batch(L.scenario, u, head(L.samples, L.scenario.T()));
  const CertificateResult cert = certificate(L.scenario, batch, L.scenario.epsilon());
  const fs::path dir = prepare_out(c.out);
  CsvFile f(dir / "certificate.csv", meta(L, "certify"),
            "status,J_hat_veh_per_h,lambda_star_km_per_h,sample_average_H_veh_per_h" +
                speed_columns(L.scenario.n()));
  f.os() << to_string(cert.status) << ',' << cert.value << ',' << cert.lambda_star << ','
         << sample_average_H(L.scenario, batch);
  write_speeds(f.os(), speeds);
  f.os() << '\n';
  out << "J_hat = " << cert.value << " veh/h (" << to_string(cert.status) << ")\n";
  return cert.finite() ? kOk : kInfeasible;
}

int cmd_solve(const Common& c, double gap, double time_limit, std::ostream& out) {
  const Loaded L = load(c);
  IssaOptions o;
  o.gap_eps = gap;
  if (time_limit > 0) o.time_limit_s = time_limit;
  o.on_iteration = [&](const IterationRecord& r) {
    out << "k=" << r.k << " UB=" << r.ub << " LB=" << r.lb << " t=" << r.seconds << "s\n";
  };
  const SolveReport rep = solve_issa(L.scenario, head(L.samples, L.scenario.T()), o);
  const fs::path dir = prepare_out(c.out);
  const std::string m = meta(L, "solve");
  {
    CsvFile f(dir / "report.csv", m,
              "k,ubp_status,ubp_bound_veh_per_h,ub_veh_per_h,lb_veh_per_h,obj_veh_per_h,"
              "certificate_veh_per_h,polished_veh_per_h,ubp_nodes,lp_iterations,elapsed_s" +
                  speed_columns(L.scenario.n()));
    for (const auto& r : rep.log) {
      f.os() << r.k << ',' << lp::to_string(r.ubp_status) << ',' << r.ubp_bound << ',' << r.ub
             << ',' << r.lb << ',' << r.obj << ',' << r.certificate << ',' << r.polished_value
             << ',' << r.ubp_nodes << ',' << r.lp_iterations << ',' << r.seconds;
      write_speeds(f.os(), r.speeds);
      f.os() << '\n';
    }
  }
  {
    CsvFile f(dir / "result.csv", m,
              "termination,has_solution,J_hat_veh_per_h,lambda_star_km_per_h,ub_veh_per_h,"
              "lb_veh_per_h,iterations,feasible_candidates,discarded_candidates,elapsed_s" +
                  speed_columns(L.scenario.n()));
    f.os() << to_string(rep.termination) << ',' << (rep.has_solution ? 1 : 0) << ','
           << rep.j_hat << ',' << rep.lambda_star << ',' << rep.ub << ',' << rep.lb << ','
           << rep.log.size() << ',' << rep.feasible_candidates << ',' << rep.discarded_candidates
           << ',' << rep.seconds;
    if (rep.has_solution) {
      write_speeds(f.os(), rep.best.speeds(L.scenario));
    } else {
      for (int e = 0; e < L.scenario.n(); ++e) f.os() << ",nan";
    }
    f.os() << '\n';
  }
  for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
  if (rep.termination == Termination::kNumericalFailure) {
    throw Exit{kNumericalFailure, "solver failed: " + rep.message};
  }
  if (!rep.has_solution) throw Exit{kInfeasible, "no admissible profile has a finite certificate"};
  out << "u_best = " << format_speeds(L.scenario, rep.best) << " J_hat = " << rep.j_hat
      << " veh/h (" << to_string(rep.termination) << ")\n";
  return kOk;
}

int cmd_brute_force(const Common& c, double cap, std::ostream& out) {
  const Loaded L = load(c);
  BruteForceResult bf;
  try {
    bf = brute_force_optimum(L.scenario, head(L.samples, L.scenario.T()), cap);
  } catch (const EnumerationCapExceeded& e) {
    throw Exit{kConfigError, e.what()};
  }
  const fs::path dir = prepare_out(c.out);
  CsvFile f(dir / "brute_force.csv", meta(L, "brute-force"),
            "has_solution,J_star_veh_per_h,lambda_star_km_per_h,evaluated,invalid" +
                speed_columns(L.scenario.n()));
  f.os() << (bf.has_solution ? 1 : 0) << ',' << bf.value << ',' << bf.lambda_star << ','
         << bf.evaluated << ',' << bf.invalid;
  if (bf.has_solution) {
    write_speeds(f.os(), bf.best.speeds(L.scenario));
  } else {
    for (int e = 0; e < L.scenario.n(); ++e) f.os() << ",nan";
  }
  f.os() << '\n';
  if (!bf.has_solution) throw Exit{kInfeasible, "every admissible profile has certificate -inf"};
  out << "u* = " << format_speeds(L.scenario, bf.best) << " J* = " << bf.value << " veh/h\n";
  return kOk;
}

int cmd_validate(const Common& c, const std::string& u_text, double jhat, int nval, int tval,
                 std::ostream& out) {
  const RunConfig cfg = read_config(c);
  const HighwayScenario sc = make_scenario(cfg);
  if (!cfg.generator) throw ConfigError("generator: validation needs the generating distribution");
  if (nval < 1) throw ConfigError("--nval: must be at least 1");
  if (tval < 1) throw ConfigError("--tval: must be at least 1");
  const auto speeds = profile_speeds(sc, u_text, true);
  ValidationConfig vc;
  vc.N_val = nval;
  vc.T_val = tval;
  vc.seed = validation_seed(cfg.generator->seed);
  vc.generator = cfg.generator->spec;
  const ValidationReport rep = validate(sc, speeds, jhat, vc);

  const fs::path dir = prepare_out(c.out);
  std::ostringstream m;
  m << "seed=" << cfg.generator->seed << " validation_seed=" << vc.seed
    << " scenario=" << (c.scenario.empty() ? "builtin:case-study" : c.scenario)
    << " command=validate u=" << u_text;
  {
    CsvFile f(dir / "validation.csv", m.str(),
              "N_val,T_val,mean_H_veh_per_h,J_hat_veh_per_h,guarantee_holds" +
                  speed_columns(sc.n()));
    f.os() << rep.N_val << ',' << rep.T_val << ',' << rep.mean_H << ',' << rep.j_hat << ','
           << (rep.guarantee_holds ? 1 : 0);
    write_speeds(f.os(), speeds);
    f.os() << '\n';
  }
  {
    CsvFile f(dir / "validation_edges.csv", m.str(),
              "e,u_km_per_h,critical_veh_per_km,max_mean_rho_veh_per_km,max_rho_veh_per_km");
    for (int e = 0; e < sc.n(); ++e) {
      f.os() << e + 1 << ',' << speeds[e] << ',' << rep.critical[e] << ','
             << rep.max_mean_density[e] << ',' << rep.max_density[e] << '\n';
    }
  }
  write_mean_density(dir / "validation_density.csv", m.str(), rep.mean_density, rep.critical,
                     sc.delta_h() * 60.0);
  out << "mean H = " << rep.mean_H << " veh/h, J_hat = " << rep.j_hat
      << (rep.guarantee_holds ? " (holds)" : " (violated)") << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Data-driven variable speed limits on a chain highway"};
  app.require_subcommand(1);
  Common c;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", c.scenario, "scenario JSON (default: built-in case study)")
        ->check(CLI::ExistingFile);
    sub->add_option("--samples", c.samples, "samples CSV (default: the scenario's generator)")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "generator seed");
    sub->add_option("--n-samples", c.n_samples, "number of generated samples");
    sub->add_option("--epsilon", c.epsilon, "override the Wasserstein radius")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
  };

  std::string u_text;
  int tval = 0, nval = 1000, vtval = 60;
  double gap = 1e-4, time_limit = 0.0, jhat = 0.0, cap = 1e5;

  auto* sim = app.add_subcommand("simulate", "propagate the samples under a speed profile");
  add_common(sim);
  sim->add_option("--u", u_text, "speeds in km/h, comma separated, or 'uncontrolled'")->required();
  sim->add_option("--tval", tval, "also run the saturating simulator for this many slots")
      ->check(CLI::NonNegativeNumber);

  auto* cer = app.add_subcommand("certify", "certificate of a speed profile");
  add_common(cer);
  cer->add_option("--u", u_text, "speeds in km/h, comma separated")->required();

  auto* sol = app.add_subcommand("solve", "integer solution search");
  add_common(sol);
  sol->add_option("--gap", gap, "relative UB-LB tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  sol->add_option("--time-limit", time_limit, "seconds, 0 for none")->check(CLI::NonNegativeNumber);

  auto* bf = app.add_subcommand("brute-force", "enumerate every admissible profile");
  add_common(bf);
  bf->add_option("--cap", cap, "largest profile count to enumerate")->capture_default_str();

  auto* val = app.add_subcommand("validate", "out-of-sample check of a certified profile");
  add_common(val);
  val->add_option("--u", u_text, "speeds in km/h, comma separated, or 'uncontrolled'")->required();
  val->add_option("--jhat", jhat, "certificate to test, veh/h")->required();
  val->add_option("--nval", nval, "validation samples")->capture_default_str();
  val->add_option("--tval", vtval, "simulator slots")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(c, u_text, tval, out);
    if (cer->parsed()) return cmd_certify(c, u_text, out);
    if (sol->parsed()) return cmd_solve(c, gap, time_limit, out);
    if (bf->parsed()) return cmd_brute_force(c, cap, out);
    return cmd_validate(c, u_text, jhat, nval, vtval, out);
  } catch (const Exit& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace vsl::cli
