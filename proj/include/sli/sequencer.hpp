#pragma once

// Full interferometer sequences assembled from stage protocols.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sli/bloch.hpp"
#include "sli/fitness.hpp"
#include "sli/ga.hpp"
#include "sli/propagator.hpp"
#include "sli/protocol.hpp"
#include "sli/units.hpp"

namespace sli {

/// Ladder size for multi-stage runs. Imperfect stages compound, so a whole
/// sequence pushes more weight toward high |n| than any single stage does.
inline constexpr int kSequenceBasisSize = 41;

enum class StageKind { split, propagate, reflect, recombine };
enum class Topology { michelson, reciprocal };

std::string_view to_string(StageKind kind);
std::string_view to_string(Topology topology);
StageKind parse_stage_kind(std::string_view name);
Topology parse_topology(std::string_view name);

struct Stage {
  StageKind kind;
  ShakingProtocol protocol;
  int repeat = 1;
};

/// The optimized single-stage protocols an interferometer is built from.
/// `recombine` may be left empty while it is still being optimized.
struct StageSet {
  ShakingProtocol split;
  ShakingProtocol propagate;
  ShakingProtocol reflect;
  std::optional<ShakingProtocol> recombine;
};

class SequencePlan {
 public:
  SequencePlan(Topology topology, std::vector<Stage> stages);

  Topology topology() const { return topology_; }
  const std::vector<Stage>& stages() const { return stages_; }

  /// Shaking time of all stages including repeats.
  double total_duration_s() const;
  /// Time spent in propagation stages (the arms of the interferometer).
  double interrogation_time_s() const;
  bool has_recombine() const;

  /// Same plan with the final recombination protocol replaced.
  SequencePlan with_recombine(ShakingProtocol protocol) const;
  /// Stages up to (excluding) the recombination.
  SequencePlan arms() const;

 private:
  void validate() const;

  Topology topology_;
  std::vector<Stage> stages_;
};

/// split, prop x k, reflect, prop x k, recombine.
SequencePlan make_michelson(const StageSet& stages, int k = 2);
/// split, prop x k, reflect, prop x 2k, reflect, prop x k, recombine.
SequencePlan make_reciprocal(const StageSet& stages, int k = 1);
SequencePlan make_plan(Topology topology, const StageSet& stages, int k);

/// Evolves `initial` through every stage with `signal` applied from t = 0.
/// Propagation errors are rethrown with the failing stage named.
QuantumState run_sequence_state(const SequencePlan& plan, const QuantumState& initial,
                                const LatticeConfig& lattice, const SignalSpec& signal,
                                const PropagationSettings& settings,
                                const LatticePerturbation& perturbation = {});

/// Final populations starting from the ground Bloch state.
MomentumPopulations run_sequence(const SequencePlan& plan, const LatticeConfig& lattice,
                                 const SignalSpec& signal, const PropagationSettings& settings,
                                 int basis_size = kSequenceBasisSize,
                                 int truncation = kDefaultTruncation);

struct ResponsePoint {
  double x = 0.0;  // frequency in Hz or acceleration in m/s^2
  double variation_percent = 0.0;
};

/// Normalized variation between the signal-on and signal-off final
/// populations for a(t) = a_x sin(2 pi f t), one point per frequency.
std::vector<ResponsePoint> scan_ac_response(const SequencePlan& plan, const LatticeConfig& lattice,
                                            double a_x, const std::vector<double>& frequencies_hz,
                                            const PropagationSettings& settings, int threads = 1);

/// Normalized variation between final populations under each DC
/// acceleration and `reference`.
std::vector<ResponsePoint> scan_dc_response(const SequencePlan& plan, const LatticeConfig& lattice,
                                            const std::vector<double>& accelerations,
                                            const MomentumPopulations& reference,
                                            const PropagationSettings& settings, int threads = 1);

struct RecombinationResult {
  SequencePlan plan;
  EvolutionResult evolution;
};

/// Runs the GA for the recombination stage of `plan` against the state the
/// arms actually deliver under `signal`, and installs the result.
RecombinationResult optimize_recombination(const SequencePlan& plan, const LatticeConfig& lattice,
                                           const GAConfig& ga, const PropagationSettings& settings,
                                           const SignalSpec& signal = {}, int restarts = 1,
                                           const GenerationObserver& observer = {});

/// Recombination optimized with a DC bias present in every propagation.
RecombinationResult optimize_with_bias(const SequencePlan& plan, const LatticeConfig& lattice,
                                       const GAConfig& ga, const PropagationSettings& settings,
                                       double a_dc, int restarts = 1,
                                       const GenerationObserver& observer = {});

/// Manifest listing stage protocol files in order. Relative paths resolve
/// against the manifest's directory.
struct SequenceManifest {
  Topology topology = Topology::michelson;
  int repeats = 2;
  std::filesystem::path split;
  std::filesystem::path propagate;
  std::filesystem::path reflect;
  std::filesystem::path recombine;
};

SequenceManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const SequenceManifest& manifest, const std::filesystem::path& path);
/// Loads every referenced protocol; a missing file is reported by stage name.
SequencePlan plan_from_manifest(const SequenceManifest& manifest,
                                const std::filesystem::path& base_dir);

}  // namespace sli
