#pragma once

// Sensitivity of one optimized stage to lattice miscalibration, shaking
// noise, and stray reflections. Every curve reports the normalized variation
// between perturbed and nominal final populations.

#include <cstdint>
#include <vector>

#include "sli/bloch.hpp"
#include "sli/propagator.hpp"
#include "sli/protocol.hpp"
#include "sli/sequencer.hpp"
#include "sli/units.hpp"

namespace sli {

/// A stage protocol together with the states it is run on. An empty
/// `plane_waves` list means "start from the ground Bloch state of whatever
/// lattice is being simulated".
struct RobustnessCase {
  ShakingProtocol protocol;
  std::vector<int> plane_waves;
  /// When false, the ground state of the nominal lattice is used even for
  /// perturbed lattices.
  bool reload_ground_state = true;
  int basis_size = kDefaultBasisSize;
  int truncation = kDefaultTruncation;
};

/// Split starts from the ground state; propagate and reflect from the
/// +-2 hbar k_L plane waves. Recombination has no standalone input state.
RobustnessCase robustness_case(StageKind kind, ShakingProtocol protocol);

struct SweepPoint {
  double perturbation = 0.0;
  double variation_percent = 0.0;
  double stddev = 0.0;
};

struct ParasiticPoint {
  double epsilon = 0.0;
  double delta_rad = 0.0;
  double variation_percent = 0.0;
};

/// Final populations of every run, concatenated.
Eigen::VectorXd case_populations(const RobustnessCase& c, const LatticeConfig& lattice,
                                 const PropagationSettings& settings,
                                 const LatticePerturbation& perturbation = {});

/// Depth scaled by (1 + x) for each fractional change x.
std::vector<SweepPoint> sweep_depth(const RobustnessCase& c, const LatticeConfig& lattice,
                                    const std::vector<double>& fractions,
                                    const PropagationSettings& settings, int threads = 1);

/// Wavelength scaled by (1 + x) at fixed physical depth, so k_L, E_R and the
/// depth in recoil units all follow.
std::vector<SweepPoint> sweep_wavelength(const RobustnessCase& c, const LatticeConfig& lattice,
                                         const std::vector<double>& fractions,
                                         const PropagationSettings& settings, int threads = 1);

/// Gaussian noise of standard deviation (amplitude x max|phi|) added to every
/// integration-step phase sample. Mean and sample standard deviation over
/// `seeds` noise realizations per amplitude.
std::vector<SweepPoint> sweep_phase_noise(const RobustnessCase& c, const LatticeConfig& lattice,
                                          const std::vector<double>& amplitudes,
                                          const PropagationSettings& settings, int seeds = 5,
                                          std::uint64_t base_seed = 1, int threads = 1);

/// Static stray lattice of relative amplitude epsilon and phase delta.
std::vector<ParasiticPoint> sweep_parasitic(const RobustnessCase& c, const LatticeConfig& lattice,
                                            const std::vector<double>& epsilons,
                                            const std::vector<double>& deltas,
                                            const PropagationSettings& settings, int threads = 1);

/// Uniform grid of `count` points on [lo, hi]; a single point when count == 1.
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace sli
