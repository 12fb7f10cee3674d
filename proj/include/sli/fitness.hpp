#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "sli/bloch.hpp"
#include "sli/propagator.hpp"
#include "sli/protocol.hpp"
#include "sli/units.hpp"

namespace sli {

/// Penalty shape comparing achieved populations P with a target P_d:
///
///   f = |P_d - P|_2 + sum_{n not in free_bins} |P_d,n - P_n|
///       + |(P_m - P_-m) / (P_m + P_-m)|          (if symmetric_pair = m)
struct FitnessSpec {
  Eigen::VectorXd target;
  std::vector<int> free_bins;
  std::optional<int> symmetric_pair;

  int truncation() const { return static_cast<int>(target.size() - 1) / 2; }
  void validate() const;

  /// Equal split into +-2 hbar k_L.
  static FitnessSpec split(int truncation = kDefaultTruncation);
  /// All population in bin n; no asymmetry term (used per run of a dual-state stage).
  static FitnessSpec single_bin(int n, int truncation = kDefaultTruncation);
  /// Return to `target` (normally the ground-state populations); bins |n| <= 2 free.
  static FitnessSpec recombine(const MomentumPopulations& target);
};

double fitness_split(const MomentumPopulations& p, const FitnessSpec& spec);

/// Sum of the single-state fitnesses of the two runs of a dual-state stage.
double fitness_dual(const MomentumPopulations& p_plus, const MomentumPopulations& p_minus,
                    const FitnessSpec& target_plus, const FitnessSpec& target_minus);

/// Normalized variation between achieved and desired populations, in percent.
double variation_from_desired(const MomentumPopulations& p, const FitnessSpec& spec);

/// One propagation scored against one target. A stage objective holds one
/// run (single-state mode) or two (dual-state mode).
struct FitnessRun {
  QuantumState initial;
  FitnessSpec spec;
};

struct StageEvaluation {
  double fitness = 0.0;
  std::vector<MomentumPopulations> populations;
};

/// Scores a shaking protocol by propagating every run and summing fitnesses.
class StageObjective {
 public:
  StageObjective(std::vector<FitnessRun> runs, LatticeConfig lattice,
                 PropagationSettings settings = {}, SignalSpec signal = {});

  /// Fitness for the protocol; +inf when the propagation itself fails or
  /// the sampled phase leaves [-kMaxPhase, kMaxPhase].
  double operator()(const ShakingProtocol& protocol) const;
  StageEvaluation evaluate(const ShakingProtocol& protocol) const;

  const std::vector<FitnessRun>& runs() const { return runs_; }
  const LatticeConfig& lattice() const { return lattice_; }
  const PropagationSettings& settings() const { return settings_; }
  const SignalSpec& signal() const { return signal_; }

 private:
  StageEvaluation evaluate(const PhaseSchedule& schedule) const;

  std::vector<FitnessRun> runs_;
  LatticeConfig lattice_;
  PropagationSettings settings_;
  SignalSpec signal_;
};

/// Ground state -> equal +-1 split.
StageObjective split_objective(const LatticeConfig& lattice, const PropagationSettings& settings = {},
                               int basis_size = kDefaultBasisSize);
/// +-1 plane waves each kept in their own bin.
StageObjective propagate_objective(const LatticeConfig& lattice,
                                   const PropagationSettings& settings = {},
                                   int basis_size = kDefaultBasisSize);
/// +-1 plane waves each sent to the mirrored bin.
StageObjective reflect_objective(const LatticeConfig& lattice,
                                 const PropagationSettings& settings = {},
                                 int basis_size = kDefaultBasisSize);
/// `incoming` (the split wavefunction as it arrives) -> ground-state populations.
StageObjective recombine_objective(const QuantumState& incoming, const LatticeConfig& lattice,
                                   const PropagationSettings& settings = {},
                                   const SignalSpec& signal = {});

}  // namespace sli
