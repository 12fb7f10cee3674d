// Command-line front end: ground, optimize, sequence, fisher, fit, sweep.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "sli/bloch.hpp"
#include "sli/errors.hpp"
#include "sli/fitness.hpp"
#include "sli/ga.hpp"
#include "sli/protocol.hpp"
#include "sli/robustness.hpp"
#include "sli/sensitivity.hpp"
#include "sli/sequencer.hpp"
#include "sli/table.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sli;

namespace {

constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kNotConverged = 3, kWarning = 4 };

// Option combinations CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out_dir;

  std::optional<double> depth_er, wavelength_m, atom_mass_kg, dt_s;
  std::optional<std::string> backend;
  std::optional<int> population, generations, lines;
  std::optional<double> target, bandwidth_hz, duration_s, sigma;
};

template <typename T, typename U>
void override_with(const std::optional<T>& flag, U& into) {
  if (flag) into = *flag;
}

// Output directory plus the manifest describing how it was produced.
class Run {
 public:
  Run(std::string command, const Overrides& o, int argc, char** argv) : command_(std::move(command)) {
    if (!o.config_path.empty()) config_ = cli::load_run_config(o.config_path);
    override_with(o.depth_er, config_.depth_er);
    override_with(o.wavelength_m, config_.wavelength_m);
    override_with(o.atom_mass_kg, config_.atom_mass_kg);
    override_with(o.dt_s, config_.propagation.dt_s);
    if (o.backend) config_.propagation.backend = cli::parse_backend(*o.backend);
    override_with(o.population, config_.ga.population);
    override_with(o.generations, config_.ga.max_generations);
    override_with(o.lines, config_.ga.lines);
    override_with(o.target, config_.ga.fitness_target);
    override_with(o.bandwidth_hz, config_.ga.bandwidth_hz);
    override_with(o.duration_s, config_.ga.duration_s);
    override_with(o.sigma, config_.ga.sigma);
    override_with(o.threads, config_.threads);

    if (o.seed) {
      config_.seed = o.seed;
      seed_source_ = "flag";
    } else if (config_.seed) {
      seed_source_ = "config";
    } else {
      std::random_device rd;
      config_.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
      seed_source_ = "generated";
      std::cerr << "seed " << *config_.seed << " (generated)\n";
    }
    config_.ga.seed = *config_.seed;
    config_.ga.threads = config_.threads;

    dir_ = o.out_dir.empty() ? fs::path("runs") / (command_ + "-" + std::to_string(*config_.seed))
                             : fs::path(o.out_dir);
    fs::create_directories(dir_);
    for (int i = 0; i < argc; ++i) argv_.push_back(argv[i]);
  }

  const cli::RunConfig& config() const { return config_; }
  LatticeConfig lattice() const { return config_.lattice(); }
  const PropagationSettings& settings() const { return config_.propagation; }
  const GAConfig& ga() const { return config_.ga; }
  int threads() const { return config_.threads; }
  std::uint64_t seed() const { return *config_.seed; }
  const fs::path& dir() const { return dir_; }

  fs::path output(const std::string& name) {
    outputs_.push_back(name);
    return dir_ / name;
  }
  void input(const std::string& key, const fs::path& path) { inputs_[key] = fs::absolute(path).string(); }
  void warn(const std::string& message) {
    std::cerr << "warning: " << message << '\n';
    warnings_.push_back(message);
  }
  json& results() { return results_; }

  int finish(int code) {
    if (code == kOk && !warnings_.empty()) code = kWarning;
    json m;
    m["tool"] = "sli";
    m["version"] = kToolVersion;
    m["command"] = command_;
    m["argv"] = argv_;
    m["seed"] = seed();
    m["seed_source"] = seed_source_;
    m["config"] = cli::to_json(config_);
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["warnings"] = warnings_;
    m["results"] = results_;
    m["exit_code"] = code;
    write_text_file(dir_ / "manifest.json", m.dump(2) + "\n");
    return code;
  }

 private:
  std::string command_;
  cli::RunConfig config_;
  std::string seed_source_;
  fs::path dir_;
  std::vector<std::string> argv_;
  json inputs_ = json::object();
  std::vector<std::string> outputs_;
  std::vector<std::string> warnings_;
  json results_ = json::object();
};

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Table population_table(const MomentumPopulations& p) {
  Table t({"n", "population"});
  for (int n = -p.truncation(); n <= p.truncation(); ++n) t.add_row({double(n), p.at(n)});
  return t;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ParseError("not a number: `" + item + "`");
    }
  }
  return out;
}

SequencePlan load_plan(Run& run, const std::string& manifest_path) {
  run.input("manifest", manifest_path);
  const SequenceManifest m = load_manifest(manifest_path);
  return plan_from_manifest(m, fs::absolute(manifest_path).parent_path());
}

// ---- ground ---------------------------------------------------------------

struct GroundArgs {
  int basis = kDefaultBasisSize;
  int truncation = kDefaultTruncation;
};

int cmd_ground(Run& run, const GroundArgs& a) {
  const BlochGroundState g = solve_ground_state(run.lattice(), a.basis);
  const MomentumPopulations p = populations_of(g.state, a.truncation);
  const Table t = population_table(p);
  t.write_csv(std::cout);
  t.save_csv(run.output("populations.csv"));
  run.results()["energy_er"] = g.energy_er;
  run.results()["populations"] = to_json(p.values());
  run.results()["discarded"] = p.discarded();
  return kOk;
}

// ---- optimize -------------------------------------------------------------

struct OptimizeArgs {
  std::string stage;
  int restarts = 1;
  double bias_a = 0.0;
  std::string manifest;
  int basis = kDefaultBasisSize;
};

int cmd_optimize(Run& run, const OptimizeArgs& a) {
  const StageKind kind = parse_stage_kind(a.stage);
  const LatticeConfig lattice = run.lattice();
  const SignalSpec signal = a.bias_a == 0.0 ? SignalSpec::none() : SignalSpec::dc(a.bias_a);
  run.results()["stage"] = std::string(to_string(kind));
  run.results()["bias_a_mps2"] = a.bias_a;

  std::vector<Table> histories;
  std::vector<double> best_per_restart;
  auto observer = [&](const GenerationRecord& r, const ShakingProtocol& best) {
    if (r.generation == 1) {
      histories.emplace_back(std::vector<std::string>{"generation", "best_fitness", "mean_fitness"});
      best_per_restart.push_back(std::numeric_limits<double>::infinity());
    }
    histories.back().add_row({double(r.generation), r.best_fitness, r.mean_fitness});
    if (r.best_fitness < best_per_restart.back()) {
      best_per_restart.back() = r.best_fitness;
      ShakingProtocol snapshot = best;
      snapshot.metadata().fitness = r.best_fitness;
      snapshot.metadata().stage_label = std::string(to_string(kind));
      save_protocol(snapshot, run.dir() / "checkpoints" /
                                  ("restart" + std::to_string(histories.size() - 1) + "_gen" +
                                   std::to_string(r.generation) + ".json"));
    }
  };

  std::optional<EvolutionResult> evolved;
  std::optional<StageObjective> objective;
  std::optional<SequencePlan> plan;
  if (kind == StageKind::recombine) {
    if (a.manifest.empty()) throw UsageError("optimize recombine needs --manifest");
    plan = load_plan(run, a.manifest).arms();
    RecombinationResult rec = optimize_recombination(*plan, lattice, run.ga(), run.settings(),
                                                     signal, a.restarts, observer);
    evolved = std::move(rec.evolution);
    plan = std::move(rec.plan);
  } else {
    StageObjective base = kind == StageKind::split       ? split_objective(lattice, run.settings(), a.basis)
                          : kind == StageKind::propagate ? propagate_objective(lattice, run.settings(), a.basis)
                                                         : reflect_objective(lattice, run.settings(), a.basis);
    objective.emplace(base.runs(), lattice, run.settings(), signal);
    evolved = evolve_best_of(run.ga(), [&](const ShakingProtocol& p) { return (*objective)(p); },
                            a.restarts, observer);
  }

  const EvolutionResult& result = *evolved;
  ShakingProtocol best = result.best;
  best.metadata().stage_label = std::string(to_string(kind));
  best.metadata().lattice = lattice;
  best.metadata().seed = run.seed();
  const std::string file = std::string(to_string(kind)) + ".json";
  save_protocol(best, run.output(file));

  for (std::size_t r = 0; r < histories.size(); ++r) {
    histories[r].save_csv(run.output("history_restart" + std::to_string(r) + ".csv"));
  }
  for (std::size_t r = 0; r < histories.size(); ++r) {
    if (best_per_restart[r] == result.best_fitness) {
      histories[r].save_csv(run.output("history.csv"));
      run.results()["best_restart"] = r;
      break;
    }
  }

  json& res = run.results();
  res["fitness"] = result.best_fitness;
  res["converged"] = result.converged;
  res["generations"] = result.history.size();
  res["restarts_run"] = histories.size();

  if (objective) {
    const StageEvaluation ev = objective->evaluate(best);
    json runs = json::array();
    for (std::size_t i = 0; i < ev.populations.size(); ++i) {
      runs.push_back({{"populations", to_json(ev.populations[i].values())},
                      {"variation_from_desired_percent",
                       variation_from_desired(ev.populations[i], objective->runs()[i].spec)}});
    }
    res["runs"] = runs;
  } else {
    const MomentumPopulations p = run_sequence(*plan, lattice, signal, run.settings());
    const MomentumPopulations ground = populations_of(ground_state(lattice));
    res["runs"] = json::array({{{"populations", to_json(p.values())},
                                {"variation_from_desired_percent", normalized_variation(p, ground)}}});
    SequenceManifest m = load_manifest(a.manifest);
    const fs::path base = fs::absolute(a.manifest).parent_path();
    for (fs::path* f : {&m.split, &m.propagate, &m.reflect}) {
      if (f->is_relative()) *f = base / *f;
    }
    m.recombine = fs::absolute(run.dir() / file);
    save_manifest(m, run.output("sequence.json"));
  }

  std::cout << to_string(kind) << " fitness " << result.best_fitness
            << (result.converged ? " (converged)" : " (not converged)") << '\n';
  return result.converged ? kOk : kNotConverged;
}

// ---- sequence -------------------------------------------------------------

struct SequenceArgs {
  std::string manifest;
  std::string signal = "none";
  double a = 0.0;
  double freq_hz = 0.0;
  std::string ac_freqs;
};

SignalSpec make_signal(const SequenceArgs& a) {
  if (a.signal == "none") return SignalSpec::none();
  if (a.signal == "dc") return SignalSpec::dc(a.a);
  if (a.signal == "ac") return SignalSpec::sinusoid(a.a, 2.0 * M_PI * a.freq_hz);
  throw ParseError("unknown signal `" + a.signal + "`");
}

int cmd_sequence(Run& run, const SequenceArgs& a) {
  const SequencePlan plan = load_plan(run, a.manifest);
  const LatticeConfig lattice = run.lattice();
  json& res = run.results();
  res["topology"] = std::string(to_string(plan.topology()));
  res["interrogation_time_s"] = plan.interrogation_time_s();
  res["total_duration_s"] = plan.total_duration_s();

  if (!a.ac_freqs.empty()) {
    const auto freqs = parse_list(a.ac_freqs);
    const auto curve = scan_ac_response(plan, lattice, a.a, freqs, run.settings(), run.threads());
    Table t({"frequency_hz", "variation_percent"});
    for (const auto& p : curve) t.add_row({p.x, p.variation_percent});
    t.write_csv(std::cout);
    t.save_csv(run.output("ac_response.csv"));
    return kOk;
  }

  const SignalSpec signal = make_signal(a);
  const MomentumPopulations reference = run_sequence(plan, lattice, SignalSpec::none(), run.settings());
  const MomentumPopulations p = run_sequence(plan, lattice, signal, run.settings());
  const MomentumPopulations ground = populations_of(ground_state(lattice));
  const Table t = population_table(p);
  t.write_csv(std::cout);
  t.save_csv(run.output("final_populations.csv"));
  res["populations"] = to_json(p.values());
  res["variation_vs_zero_signal_percent"] = normalized_variation(p, reference);
  res["variation_vs_ground_percent"] = normalized_variation(p, ground);
  std::cout << "variation vs zero-signal " << normalized_variation(p, reference) << " %\n";
  std::cout << "variation vs ground " << normalized_variation(p, ground) << " %\n";
  if (p.truncation_warning()) run.warn("population outside the measured window: " + format_number(p.discarded()));
  return kOk;
}

// ---- fisher ---------------------------------------------------------------

struct FisherArgs {
  std::string manifest;
  double a0 = 0.0;
  double atoms = 1.0;
  FisherOptions options;
  std::string scaling;
  int restarts = 1;
  double project_time_s = 1.0;
  double project_atoms = 1e6;
};

json fisher_json(const FisherResult& f) {
  return {{"a0_mps2", f.a0},
          {"delta_a_mps2", f.delta_a},
          {"population_floor", f.population_floor},
          {"atoms", f.atoms},
          {"information_per_atom", f.information_per_atom},
          {"information_half_step", f.information_half_step},
          {"min_detectable_mps2", std::isfinite(f.min_detectable) ? json(f.min_detectable) : json(nullptr)},
          {"zero_information", f.zero_information},
          {"converged", f.converged},
          {"warning", f.warning}};
}

json fit_json(const PowerLawFit& fit) {
  return {{"C", fit.prefactor},
          {"n", fit.exponent},
          {"n_stderr", std::isfinite(fit.exponent_stderr) ? json(fit.exponent_stderr) : json(nullptr)},
          {"lnC_stderr", std::isfinite(fit.prefactor_log_stderr) ? json(fit.prefactor_log_stderr) : json(nullptr)},
          {"x_min", fit.x_min},
          {"x_max", fit.x_max},
          {"residuals", to_json(fit.residuals)},
          {"excluded", fit.excluded}};
}

json projection_json(const SensitivityProjection& p, double t, double atoms) {
  return {{"interrogation_time_s", t},
          {"atoms", atoms},
          {"min_detectable_mps2", p.min_detectable},
          {"relative_to_g", p.relative_to_g},
          {"extrapolated", p.extrapolated},
          {"far_extrapolated", p.far_extrapolated}};
}

int cmd_fisher(Run& run, FisherArgs a) {
  a.options.threads = run.threads();
  const SequencePlan plan = load_plan(run, a.manifest);
  const LatticeConfig lattice = run.lattice();
  json& res = run.results();

  if (!a.scaling.empty()) {
    std::vector<int> repeats;
    for (double k : parse_list(a.scaling)) repeats.push_back(static_cast<int>(k));
    StageSet stages{plan.stages()[0].protocol, plan.stages()[1].protocol, plan.stages()[2].protocol,
                    std::nullopt};
    const ScalingStudy study = scaling_study(stages, plan.topology(), repeats, lattice, run.ga(),
                                             run.settings(), a.options, a.restarts);
    Table t({"T_I_s", "delta_a_mps2"});
    Table total({"T_total_s", "delta_a_mps2"});
    json points = json::array();
    for (const auto& p : study.points) {
      if (p.included) {
        t.add_row({p.interrogation_time_s, p.fisher.min_detectable});
        total.add_row({p.total_time_s, p.fisher.min_detectable});
      }
      if (!p.fisher.converged) run.warn("repeats " + std::to_string(p.repeats) + ": " + p.fisher.warning);
      if (!p.included) run.warn("repeats " + std::to_string(p.repeats) + ": non-finite bound, excluded");
      points.push_back({{"repeats", p.repeats},
                        {"interrogation_time_s", p.interrogation_time_s},
                        {"total_time_s", p.total_time_s},
                        {"recombine_fitness", p.recombine_fitness},
                        {"included", p.included},
                        {"fisher", fisher_json(p.fisher)}});
    }
    t.write_csv(std::cout);
    t.save_csv(run.output("scaling.csv"));
    total.save_csv(run.output("scaling_total.csv"));
    res["points"] = points;
    res["fit"] = fit_json(study.fit);
    res["fit_total_time"] = fit_json(study.fit_total);
    res["population_floor"] = a.options.population_floor;
    res["delta_a_mps2"] = a.options.delta_a;
    res["projection"] = projection_json(project_sensitivity(study.fit, a.project_time_s, a.project_atoms),
                                        a.project_time_s, a.project_atoms);
    std::cout << "n = " << study.fit.exponent << " +- " << study.fit.exponent_stderr << '\n';
    return kOk;
  }

  const FisherResult f = fisher_at(plan, lattice, a.a0, a.atoms, run.settings(), a.options);
  Table bins({"n", "population", "derivative_s2_per_m", "term"});
  const int nmax = static_cast<int>(f.populations.size() - 1) / 2;
  for (int n = -nmax; n <= nmax; ++n) {
    bins.add_row({double(n), f.populations(n + nmax), f.derivatives(n + nmax), f.terms(n + nmax)});
  }
  bins.save_csv(run.output("fisher_bins.csv"));
  res["fisher"] = fisher_json(f);
  write_text_file(run.output("fisher.json"), res["fisher"].dump(2) + "\n");
  if (!f.converged) run.warn(f.warning);
  std::cout << "information per atom " << f.information_per_atom << " s^4/m^2, delta_a "
            << f.min_detectable << " m/s^2\n";
  return kOk;
}

// ---- fit ------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::optional<double> project_time_s;
  double atoms = 1.0;
};

int cmd_fit(Run& run, const FitArgs& a) {
  run.input("data", a.input);
  std::ifstream in(a.input);
  if (!in) throw ParseError("cannot open " + a.input);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> x, y;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto v = parse_list(line);
    if (v.size() < 2) throw ParseError(a.input + ":" + std::to_string(row) + ": expected two columns");
    x.push_back(v[0]);
    y.push_back(v[1]);
  }
  const PowerLawFit fit = fit_power_law(x, y);
  json& res = run.results();
  res["fit"] = fit_json(fit);
  for (auto i : fit.excluded) run.warn("row " + std::to_string(i + 2) + " excluded (non-finite or non-positive)");
  if (a.project_time_s) {
    const auto p = project_sensitivity(fit, *a.project_time_s, a.atoms);
    res["projection"] = projection_json(p, *a.project_time_s, a.atoms);
    std::cout << "projected delta_a " << p.min_detectable << " m/s^2 = " << p.relative_to_g << " g"
              << (p.extrapolated ? " (extrapolated)" : "") << '\n';
  }
  write_text_file(run.output("fit.json"), res.dump(2) + "\n");
  std::cout.precision(10);
  std::cout << "C = " << fit.prefactor << "\nn = " << fit.exponent << '\n';
  return kOk;
}

// ---- sweep ----------------------------------------------------------------

struct SweepArgs {
  std::string kind;
  std::string protocol;
  std::string stage = "split";
  std::string manifest;
  std::optional<double> lo, hi;
  std::optional<int> count;
  int seeds = 5;
  std::string epsilons = "0.001,0.01,0.04";
  int deltas = 16;
  double a_x = 0.115;
  std::string reference = "ground";
};

int cmd_sweep(Run& run, const SweepArgs& a) {
  const LatticeConfig lattice = run.lattice();
  json& res = run.results();
  res["kind"] = a.kind;
  res["integration_step_s"] = run.settings().dt_s;

  struct Defaults {
    double lo, hi;
    int count;
  };
  const Defaults d = a.kind == "depth"       ? Defaults{-0.1, 0.1, 21}
                     : a.kind == "wavelength" ? Defaults{-0.02, 0.02, 21}
                     : a.kind == "noise"      ? Defaults{0.0, 0.3, 16}
                     : a.kind == "ac"         ? Defaults{0.0, 20000.0, 41}
                     : a.kind == "dc"         ? Defaults{-1.0, 1.0, 21}
                                              : Defaults{0.0, 0.0, 1};
  const auto grid = linear_grid(a.lo.value_or(d.lo), a.hi.value_or(d.hi), a.count.value_or(d.count));

  if (a.kind == "ac" || a.kind == "dc") {
    if (a.manifest.empty()) throw UsageError("sweep " + a.kind + " needs --manifest");
    const SequencePlan plan = load_plan(run, a.manifest);
    std::vector<ResponsePoint> curve;
    Table t({a.kind == "ac" ? "frequency_hz" : "a_mps2", "variation_percent"});
    if (a.kind == "ac") {
      curve = scan_ac_response(plan, lattice, a.a_x, grid, run.settings(), run.threads());
    } else {
      const MomentumPopulations reference =
          a.reference == "zero" ? run_sequence(plan, lattice, SignalSpec::none(), run.settings())
                                : populations_of(ground_state(lattice));
      curve = scan_dc_response(plan, lattice, grid, reference, run.settings(), run.threads());
    }
    for (const auto& p : curve) t.add_row({p.x, p.variation_percent});
    t.write_csv(std::cout);
    t.save_csv(run.output("sweep_" + a.kind + ".csv"));
    return kOk;
  }

  if (a.protocol.empty()) throw UsageError("sweep " + a.kind + " needs --protocol");
  run.input("protocol", a.protocol);
  const RobustnessCase c = robustness_case(parse_stage_kind(a.stage), load_protocol(a.protocol));
  res["stage"] = a.stage;

  if (a.kind == "parasitic") {
    const auto eps = parse_list(a.epsilons);
    std::vector<double> deltas;
    for (int i = 0; i < a.deltas; ++i) deltas.push_back(2.0 * M_PI * i / a.deltas);
    const auto rows = sweep_parasitic(c, lattice, eps, deltas, run.settings(), run.threads());
    Table t({"epsilon", "delta_rad", "variation_percent"});
    for (const auto& r : rows) t.add_row({r.epsilon, r.delta_rad, r.variation_percent});
    t.write_csv(std::cout);
    t.save_csv(run.output("sweep_parasitic.csv"));
    return kOk;
  }

  std::vector<SweepPoint> curve;
  if (a.kind == "depth") {
    curve = sweep_depth(c, lattice, grid, run.settings(), run.threads());
  } else if (a.kind == "wavelength") {
    curve = sweep_wavelength(c, lattice, grid, run.settings(), run.threads());
  } else {
    curve = sweep_phase_noise(c, lattice, grid, run.settings(), a.seeds, run.seed(), run.threads());
    res["seeds"] = a.seeds;
  }
  Table t = a.kind == "noise" ? Table({"perturbation", "variation_percent", "stddev"})
                              : Table({"perturbation", "variation_percent"});
  for (const auto& p : curve) {
    if (a.kind == "noise") {
      t.add_row({p.perturbation, p.variation_percent, p.stddev});
    } else {
      t.add_row({p.perturbation, p.variation_percent});
    }
  }
  t.write_csv(std::cout);
  t.save_csv(run.output("sweep_" + a.kind + ".csv"));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaken-lattice interferometer simulator"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", kToolVersion);

  Overrides o;
  app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed (chosen and recorded when absent)");
  app.add_option("--threads", o.threads, "worker cap")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out_dir, "run directory (default runs/<command>-<seed>)");
  app.add_option("--depth", o.depth_er, "lattice depth in E_R");
  app.add_option("--wavelength", o.wavelength_m, "lattice wavelength in m");
  app.add_option("--mass", o.atom_mass_kg, "atom mass in kg");
  app.add_option("--dt", o.dt_s, "maximum integration step in s");
  app.add_option("--backend", o.backend, "ladder | split-step")
      ->check(CLI::IsMember({"ladder", "split-step"}));
  app.add_option("--population", o.population, "GA population size");
  app.add_option("--generations", o.generations, "GA generation budget");
  app.add_option("--target", o.target, "GA fitness target");
  app.add_option("--lines", o.lines, "spectral lines per protocol");
  app.add_option("--bandwidth", o.bandwidth_hz, "protocol bandwidth in Hz");
  app.add_option("--duration", o.duration_s, "stage duration in s");
  app.add_option("--sigma", o.sigma, "initial coefficient spread");

  GroundArgs ground;
  auto* ground_cmd = app.add_subcommand("ground", "ground Bloch state populations");
  ground_cmd->add_option("--basis", ground.basis, "ladder size (odd)");
  ground_cmd->add_option("--truncation", ground.truncation, "measured bins |n| <= N");

  OptimizeArgs opt;
  auto* opt_cmd = app.add_subcommand("optimize", "run the GA for one stage");
  opt_cmd->add_option("stage", opt.stage, "split | propagate | reflect | recombine")
      ->required()
      ->check(CLI::IsMember({"split", "propagate", "reflect", "recombine"}));
  opt_cmd->add_option("--restarts", opt.restarts, "independent GA runs, best kept")
      ->check(CLI::PositiveNumber);
  opt_cmd->add_option("--bias-a", opt.bias_a, "DC acceleration present during optimization (m/s^2)");
  opt_cmd->add_option("--manifest", opt.manifest, "sequence manifest (recombine only)");
  opt_cmd->add_option("--basis", opt.basis, "ladder size (odd)");

  SequenceArgs seq;
  auto* seq_cmd = app.add_subcommand("sequence", "run a full interferometer");
  seq_cmd->add_option("--manifest", seq.manifest, "sequence manifest")->required();
  seq_cmd->add_option("--signal", seq.signal, "none | dc | ac")->check(CLI::IsMember({"none", "dc", "ac"}));
  seq_cmd->add_option("--a", seq.a, "signal amplitude (m/s^2)");
  seq_cmd->add_option("--freq", seq.freq_hz, "AC signal frequency (Hz)");
  seq_cmd->add_option("--ac-freq", seq.ac_freqs, "comma-separated frequencies: emit an AC response curve");

  FisherArgs fisher;
  auto* fisher_cmd = app.add_subcommand("fisher", "classical Fisher information and Cramer-Rao bound");
  fisher_cmd->add_option("--manifest", fisher.manifest, "sequence manifest")->required();
  fisher_cmd->add_option("--a0", fisher.a0, "acceleration the derivative is taken around");
  fisher_cmd->add_option("--delta-a", fisher.options.delta_a, "finite-difference step (m/s^2)");
  fisher_cmd->add_option("--atoms", fisher.atoms, "atom number");
  fisher_cmd->add_option("--floor", fisher.options.population_floor, "population floor");
  fisher_cmd->add_option("--tolerance", fisher.options.richardson_tolerance, "step-halving tolerance");
  fisher_cmd->add_option("--scaling", fisher.scaling, "comma-separated propagation repeats: run a scaling study");
  fisher_cmd->add_option("--restarts", fisher.restarts, "GA restarts per scaling point");
  fisher_cmd->add_option("--project-time", fisher.project_time_s, "projection interrogation time (s)");
  fisher_cmd->add_option("--project-atoms", fisher.project_atoms, "projection atom number");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "power-law fit of a two-column CSV");
  fit_cmd->add_option("--input", fit.input, "CSV with header: x,y")->required();
  fit_cmd->add_option("--project-time", fit.project_time_s, "project the fit to this time (s)");
  fit_cmd->add_option("--atoms", fit.atoms, "atom number for the projection");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "robustness and response sweeps");
  sweep_cmd->add_option("kind", sweep.kind, "depth | wavelength | noise | parasitic | ac | dc")
      ->required()
      ->check(CLI::IsMember({"depth", "wavelength", "noise", "parasitic", "ac", "dc"}));
  sweep_cmd->add_option("--protocol", sweep.protocol, "stage protocol file");
  sweep_cmd->add_option("--stage", sweep.stage, "stage the protocol implements")
      ->check(CLI::IsMember({"split", "propagate", "reflect"}));
  sweep_cmd->add_option("--manifest", sweep.manifest, "sequence manifest (ac, dc)");
  sweep_cmd->add_option("--min", sweep.lo, "grid start");
  sweep_cmd->add_option("--max", sweep.hi, "grid end");
  sweep_cmd->add_option("--count", sweep.count, "grid points")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--seeds", sweep.seeds, "noise realizations per amplitude");
  sweep_cmd->add_option("--epsilons", sweep.epsilons, "parasitic amplitudes, comma-separated");
  sweep_cmd->add_option("--deltas", sweep.deltas, "parasitic phase grid size over [0, 2 pi)");
  sweep_cmd->add_option("--a-x", sweep.a_x, "AC amplitude (m/s^2)");
  sweep_cmd->add_option("--reference", sweep.reference, "dc reference: ground | zero")
      ->check(CLI::IsMember({"ground", "zero"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* cmd = app.get_subcommands().front();
  std::optional<Run> run;
  try {
    run.emplace(cmd->get_name(), o, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  int code = kOk;
  try {
    if (cmd == ground_cmd) code = cmd_ground(*run, ground);
    else if (cmd == opt_cmd) code = cmd_optimize(*run, opt);
    else if (cmd == seq_cmd) code = cmd_sequence(*run, seq);
    else if (cmd == fisher_cmd) code = cmd_fisher(*run, fisher);
    else if (cmd == fit_cmd) code = cmd_fit(*run, fit);
    else if (cmd == sweep_cmd) code = cmd_sweep(*run, sweep);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    run->results()["error"] = e.what();
    code = kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    run->results()["error"] = e.what();
    code = kFailure;
  }
  return run->finish(code);
}
