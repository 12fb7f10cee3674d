#include "sli/sequencer.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sli/errors.hpp"
#include "sli/parallel.hpp"

namespace sli {

namespace {

template <typename E>
[[noreturn]] void rethrow_in_stage(const E& e, std::size_t index, StageKind kind) {
  std::ostringstream msg;
  msg << "stage " << index + 1 << " (" << to_string(kind) << "): " << e.what();
  throw E(msg.str());
}

}  // namespace

std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::split:
      return "split";
    case StageKind::propagate:
      return "propagate";
    case StageKind::reflect:
      return "reflect";
    case StageKind::recombine:
      return "recombine";
  }
  return "?";
}

std::string_view to_string(Topology topology) {
  return topology == Topology::michelson ? "michelson" : "reciprocal";
}

StageKind parse_stage_kind(std::string_view name) {
  if (name == "split") return StageKind::split;
  if (name == "propagate" || name == "prop") return StageKind::propagate;
  if (name == "reflect") return StageKind::reflect;
  if (name == "recombine") return StageKind::recombine;
  throw ParseError("unknown stage `" + std::string(name) + "`");
}

Topology parse_topology(std::string_view name) {
  if (name == "michelson") return Topology::michelson;
  if (name == "reciprocal") return Topology::reciprocal;
  throw ParseError("unknown topology `" + std::string(name) + "`");
}

SequencePlan::SequencePlan(Topology topology, std::vector<Stage> stages)
    : topology_(topology), stages_(std::move(stages)) {
  validate();
}

void SequencePlan::validate() const {
  for (const auto& s : stages_) {
    if (s.repeat < 1) throw DomainError("SequencePlan: repeat counts must be at least 1");
  }
}

double SequencePlan::total_duration_s() const {
  double t = 0.0;
  for (const auto& s : stages_) t += s.repeat * s.protocol.duration_s();
  return t;
}

double SequencePlan::interrogation_time_s() const {
  double t = 0.0;
  for (const auto& s : stages_) {
    if (s.kind == StageKind::propagate) t += s.repeat * s.protocol.duration_s();
  }
  return t;
}

bool SequencePlan::has_recombine() const {
  return !stages_.empty() && stages_.back().kind == StageKind::recombine;
}

SequencePlan SequencePlan::with_recombine(ShakingProtocol protocol) const {
  SequencePlan out = arms();
  out.stages_.push_back({StageKind::recombine, std::move(protocol), 1});
  return out;
}

SequencePlan SequencePlan::arms() const {
  std::vector<Stage> stages = stages_;
  if (has_recombine()) stages.pop_back();
  return SequencePlan(topology_, std::move(stages));
}

SequencePlan make_michelson(const StageSet& s, int k) {
  if (k < 1) throw DomainError("make_michelson: k must be at least 1");
  std::vector<Stage> stages{{StageKind::split, s.split, 1},
                            {StageKind::propagate, s.propagate, k},
                            {StageKind::reflect, s.reflect, 1},
                            {StageKind::propagate, s.propagate, k}};
  if (s.recombine) stages.push_back({StageKind::recombine, *s.recombine, 1});
  return SequencePlan(Topology::michelson, std::move(stages));
}

SequencePlan make_reciprocal(const StageSet& s, int k) {
  if (k < 1) throw DomainError("make_reciprocal: k must be at least 1");
  std::vector<Stage> stages{{StageKind::split, s.split, 1},
                            {StageKind::propagate, s.propagate, k},
                            {StageKind::reflect, s.reflect, 1},
                            {StageKind::propagate, s.propagate, 2 * k},
                            {StageKind::reflect, s.reflect, 1},
                            {StageKind::propagate, s.propagate, k}};
  if (s.recombine) stages.push_back({StageKind::recombine, *s.recombine, 1});
  return SequencePlan(Topology::reciprocal, std::move(stages));
}

SequencePlan make_plan(Topology topology, const StageSet& stages, int k) {
  return topology == Topology::michelson ? make_michelson(stages, k) : make_reciprocal(stages, k);
}

QuantumState run_sequence_state(const SequencePlan& plan, const QuantumState& initial,
                                const LatticeConfig& lattice, const SignalSpec& signal,
                                const PropagationSettings& settings,
                                const LatticePerturbation& perturbation) {
  QuantumState state = initial;
  const auto& stages = plan.stages();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const Stage& stage = stages[i];
    try {
      const PhaseSchedule schedule = PhaseSchedule::of(stage.protocol, settings.dt_s);
      for (int r = 0; r < stage.repeat; ++r) {
        state = propagate(state, schedule, lattice, signal, settings, perturbation);
      }
    } catch (const BasisOverflowError& e) {
      rethrow_in_stage(e, i, stage.kind);
    } catch (const NumericalError& e) {
      rethrow_in_stage(e, i, stage.kind);
    } catch (const DomainError& e) {
      rethrow_in_stage(e, i, stage.kind);
    }
  }
  return state;
}

MomentumPopulations run_sequence(const SequencePlan& plan, const LatticeConfig& lattice,
                                 const SignalSpec& signal, const PropagationSettings& settings,
                                 int basis_size, int truncation) {
  const QuantumState final_state =
      run_sequence_state(plan, ground_state(lattice, basis_size), lattice, signal, settings);
  return populations_of(final_state, truncation);
}

std::vector<ResponsePoint> scan_ac_response(const SequencePlan& plan, const LatticeConfig& lattice,
                                            double a_x, const std::vector<double>& frequencies_hz,
                                            const PropagationSettings& settings, int threads) {
  if (frequencies_hz.empty()) throw DomainError("scan_ac_response: empty frequency grid");
  const QuantumState initial = ground_state(lattice, kSequenceBasisSize);
  const auto reference = populations_of(
      run_sequence_state(plan, initial, lattice, SignalSpec::none(), settings), kDefaultTruncation);
  std::vector<ResponsePoint> out(frequencies_hz.size());
  parallel_for(frequencies_hz.size(), threads, [&](std::size_t i) {
    const double f = frequencies_hz[i];
    const auto signal = SignalSpec::sinusoid(a_x, 2.0 * M_PI * f);
    const auto p = populations_of(run_sequence_state(plan, initial, lattice, signal, settings),
                                  kDefaultTruncation);
    out[i] = {f, normalized_variation(p, reference)};
  });
  return out;
}

std::vector<ResponsePoint> scan_dc_response(const SequencePlan& plan, const LatticeConfig& lattice,
                                            const std::vector<double>& accelerations,
                                            const MomentumPopulations& reference,
                                            const PropagationSettings& settings, int threads) {
  if (accelerations.empty()) throw DomainError("scan_dc_response: empty acceleration grid");
  const QuantumState initial = ground_state(lattice, kSequenceBasisSize);
  std::vector<ResponsePoint> out(accelerations.size());
  parallel_for(accelerations.size(), threads, [&](std::size_t i) {
    const double a = accelerations[i];
    const auto signal = a == 0.0 ? SignalSpec::none() : SignalSpec::dc(a);
    const auto p = populations_of(run_sequence_state(plan, initial, lattice, signal, settings),
                                  reference.truncation());
    out[i] = {a, normalized_variation(p, reference)};
  });
  return out;
}

RecombinationResult optimize_recombination(const SequencePlan& plan, const LatticeConfig& lattice,
                                           const GAConfig& ga, const PropagationSettings& settings,
                                           const SignalSpec& signal, int restarts,
                                           const GenerationObserver& observer) {
  const SequencePlan arms = plan.arms();
  const QuantumState incoming =
      run_sequence_state(arms, ground_state(lattice, kSequenceBasisSize), lattice, signal, settings);
  const StageObjective objective = recombine_objective(incoming, lattice, settings, signal);
  EvolutionResult evolution = evolve_best_of(
      ga, [&](const ShakingProtocol& p) { return objective(p); }, restarts, observer);
  evolution.best.metadata().stage_label = "recombine";
  evolution.best.metadata().lattice = lattice;
  return {arms.with_recombine(evolution.best), std::move(evolution)};
}

RecombinationResult optimize_with_bias(const SequencePlan& plan, const LatticeConfig& lattice,
                                       const GAConfig& ga, const PropagationSettings& settings,
                                       double a_dc, int restarts,
                                       const GenerationObserver& observer) {
  const SignalSpec signal = a_dc == 0.0 ? SignalSpec::none() : SignalSpec::dc(a_dc);
  return optimize_recombination(plan, lattice, ga, settings, signal, restarts, observer);
}

SequenceManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  SequenceManifest m;
  try {
    if (doc.value("version", 0) != kProtocolFileVersion) {
      throw UnsupportedVersionError("manifest " + path.string() + ": unsupported version");
    }
    m.topology = parse_topology(doc.at("topology").get<std::string>());
    m.repeats = doc.value("repeats", m.topology == Topology::michelson ? 2 : 1);
    for (const auto& entry : doc.at("stages")) {
      const StageKind kind = parse_stage_kind(entry.at("stage").get<std::string>());
      const std::filesystem::path file = entry.at("file").get<std::string>();
      switch (kind) {
        case StageKind::split:
          m.split = file;
          break;
        case StageKind::propagate:
          m.propagate = file;
          break;
        case StageKind::reflect:
          m.reflect = file;
          break;
        case StageKind::recombine:
          m.recombine = file;
          break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  return m;
}

void save_manifest(const SequenceManifest& m, const std::filesystem::path& path) {
  nlohmann::json doc;
  doc["version"] = kProtocolFileVersion;
  doc["topology"] = std::string(to_string(m.topology));
  doc["repeats"] = m.repeats;
  doc["stages"] = nlohmann::json::array();
  const std::pair<StageKind, const std::filesystem::path*> entries[] = {
      {StageKind::split, &m.split},
      {StageKind::propagate, &m.propagate},
      {StageKind::reflect, &m.reflect},
      {StageKind::recombine, &m.recombine}};
  for (const auto& [kind, file] : entries) {
    if (file->empty()) continue;
    doc["stages"].push_back({{"stage", std::string(to_string(kind))}, {"file", file->string()}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  out << doc.dump(2) << '\n';
}

SequencePlan plan_from_manifest(const SequenceManifest& m, const std::filesystem::path& base_dir) {
  auto load = [&](StageKind kind, const std::filesystem::path& file) {
    if (file.empty()) throw ParseError("manifest lists no file for stage " + std::string(to_string(kind)));
    const auto full = file.is_absolute() ? file : base_dir / file;
    if (!std::filesystem::exists(full)) {
      throw Error("stage " + std::string(to_string(kind)) + ": protocol file " + full.string() +
                       " not found");
    }
    return load_protocol(full);
  };
  StageSet set{load(StageKind::split, m.split), load(StageKind::propagate, m.propagate),
               load(StageKind::reflect, m.reflect), std::nullopt};
  if (!m.recombine.empty()) set.recombine = load(StageKind::recombine, m.recombine);
  return make_plan(m.topology, set, m.repeats);
}

}  // namespace sli
