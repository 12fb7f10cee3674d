#pragma once

#include <Eigen/Dense>

#include <complex>

namespace sli {

/// Wavefunction on the plane-wave ladder |2n k_L + q k_L>, n in [-N_b, N_b].
///
/// The ladder is the comoving frame of any applied force: `quasimomentum_offset`
/// holds q(t) in units of k_L, so lab-frame momenta are (2n + q) hbar k_L.
struct QuantumState {
  Eigen::VectorXcd amplitudes;
  double quasimomentum_offset = 0.0;
  double time_s = 0.0;

  QuantumState() = default;
  explicit QuantumState(Eigen::VectorXcd amps, double offset = 0.0, double time = 0.0)
      : amplitudes(std::move(amps)), quasimomentum_offset(offset), time_s(time) {}

  /// All probability in ladder state n.
  static QuantumState plane_wave(int half_width, int n);

  int half_width() const { return static_cast<int>(amplitudes.size() - 1) / 2; }
  std::complex<double> at(int n) const { return amplitudes(n + half_width()); }
  std::complex<double>& at(int n) { return amplitudes(n + half_width()); }
  double norm_squared() const { return amplitudes.squaredNorm(); }

  /// Probability resting on the outermost ladder states |n| = N_b.
  double edge_probability() const {
    const auto last = amplitudes.size() - 1;
    return std::max(std::norm(amplitudes(0)), std::norm(amplitudes(last)));
  }
};

/// Multiplies c_n by exp(i n theta): the image of a state under a lattice
/// translation that adds theta to the lattice phase.
QuantumState shift_lattice_phase(const QuantumState& state, double theta);

/// Complex conjugation in position space, c_n -> conj(c_{-n}).
QuantumState time_reverse(const QuantumState& state);

/// Same amplitudes re-embedded in a ladder of a different half-width (zero padded or cropped).
QuantumState resize_ladder(const QuantumState& state, int half_width);

}  // namespace sli
