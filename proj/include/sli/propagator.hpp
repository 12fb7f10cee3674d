#pragma once

// Time evolution under the shaken lattice
//
//   V(x, t) = -(V0/2) cos[2 k_L x + phi(t)] + m a(t) x
//
// The linear term is removed by a gauge transformation: the ladder stays
// discrete and the applied force shows up as a quasimomentum offset
// q(t) = q(0) - (m / hbar k_L) * integral of a dt, entering the kinetic
// energies as (2n + q)^2 E_R.
//
// Both backends use the same symmetric (Strang) splitting with the lattice
// phase sampled at step midpoints; they differ only in how the lattice
// operator is exponentiated (exactly on the truncated ladder, or pointwise on
// a periodic real-space grid reached by FFT).

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "sli/protocol.hpp"
#include "sli/state.hpp"
#include "sli/units.hpp"

namespace sli {

enum class Backend { ladder, split_step };

struct PropagationSettings {
  double dt_s = 1e-7;
  Backend backend = Backend::ladder;
  int grid_points = 64;  // split-step only; one lattice period
  double unitarity_tolerance = 1e-9;
  double edge_tolerance = 1e-6;
};

/// Static secondary lattice -(eps V0 / 2) cos(2 k_L x + delta) from a stray reflection.
struct LatticePerturbation {
  double parasitic_amplitude = 0.0;
  double parasitic_phase = 0.0;

  bool is_zero() const { return parasitic_amplitude == 0.0; }
};

/// Number of uniform steps of length <= max_dt covering `duration`.
int steps_for(double duration, double max_dt);

/// Lattice phase sampled at the midpoint of every integration step.
///
/// The step grid is piecewise uniform: one segment per protocol stage, each
/// with its own dt so stage boundaries fall on step boundaries.
class PhaseSchedule {
 public:
  struct Segment {
    int steps;
    double dt;
  };

  PhaseSchedule() = default;

  static PhaseSchedule of(const ShakingProtocol& protocol, double max_dt);
  static PhaseSchedule of(const ProtocolSequence& sequence, double max_dt);
  /// phi = 0 for `duration` seconds.
  static PhaseSchedule flat(double duration, double max_dt);

  void append(const PhaseSchedule& other);
  PhaseSchedule reversed() const;

  const std::vector<Segment>& segments() const { return segments_; }
  const Eigen::VectorXd& samples() const { return samples_; }
  Eigen::VectorXd& samples() { return samples_; }
  int steps() const { return static_cast<int>(samples_.size()); }
  double duration_s() const;

 private:
  std::vector<Segment> segments_;
  Eigen::VectorXd samples_;
};

/// Evolves `state` from state.time_s through the schedule. Throws
/// NumericalError on a unitarity breach and BasisOverflowError when
/// probability at the ladder edge exceeds settings.edge_tolerance.
QuantumState propagate(const QuantumState& state, const PhaseSchedule& schedule,
                       const LatticeConfig& lattice, const SignalSpec& signal,
                       const PropagationSettings& settings,
                       const LatticePerturbation& perturbation = {});

QuantumState propagate(const QuantumState& state, const ShakingProtocol& protocol,
                       const LatticeConfig& lattice, const SignalSpec& signal,
                       const PropagationSettings& settings,
                       const LatticePerturbation& perturbation = {});

/// Runs the +2 hbar k_L and -2 hbar k_L plane waves through the same protocol.
std::pair<QuantumState, QuantumState> propagate_dual(const QuantumState& state_plus,
                                                     const QuantumState& state_minus,
                                                     const ShakingProtocol& protocol,
                                                     const LatticeConfig& lattice,
                                                     const SignalSpec& signal,
                                                     const PropagationSettings& settings);

/// Quasimomentum offset (units of k_L) reached at t1 from q0 at t0.
double quasimomentum_at(const LatticeConfig& lattice, const SignalSpec& signal, double q0,
                        double t0, double t1);

}  // namespace sli
