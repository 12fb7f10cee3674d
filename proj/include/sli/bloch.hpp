#pragma once

#include <Eigen/Dense>

#include "sli/state.hpp"
#include "sli/units.hpp"

namespace sli {

inline constexpr int kDefaultBasisSize = 21;
inline constexpr int kDefaultTruncation = 5;

/// Stationary lattice Hamiltonian on the plane-wave ladder, in units of E_R.
///
/// Diagonal (2n + q)^2, nearest-neighbour coupling -depth/4. Basis index i
/// corresponds to n = i - half_width.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ladder_hamiltonian(
    Scalar depth_er, int half_width, Scalar quasimomentum = Scalar(0)) {
  const int size = 2 * half_width + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(size, size);
  for (int i = 0; i < size; ++i) {
    const Scalar k = Scalar(2 * (i - half_width)) + quasimomentum;
    h(i, i) = k * k;
    if (i + 1 < size) {
      h(i, i + 1) = -depth_er / Scalar(4);
      h(i + 1, i) = -depth_er / Scalar(4);
    }
  }
  return h;
}

struct BlochGroundState {
  QuantumState state;
  double energy_er = 0.0;
};

/// Lowest q = 0 Bloch state of the unshaken lattice. `basis_size` counts ladder
/// states (odd, >= 11). The n = 0 amplitude is real and positive.
BlochGroundState solve_ground_state(const LatticeConfig& config, int basis_size = kDefaultBasisSize);

inline QuantumState ground_state(const LatticeConfig& config, int basis_size = kDefaultBasisSize) {
  return solve_ground_state(config, basis_size).state;
}

/// |c_n|^2 over n in [-truncation, truncation], renormalized over that window.
MomentumPopulations populations_of(const QuantumState& state, int truncation = kDefaultTruncation);

}  // namespace sli
