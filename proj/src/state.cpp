#include "sli/state.hpp"

#include "sli/errors.hpp"

namespace sli {

QuantumState QuantumState::plane_wave(int half_width, int n) {
  if (half_width < 0 || std::abs(n) > half_width) {
    throw DomainError("plane_wave: ladder index outside basis");
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(2 * half_width + 1);
  amps(n + half_width) = 1.0;
  return QuantumState(std::move(amps));
}

QuantumState shift_lattice_phase(const QuantumState& state, double theta) {
  QuantumState out = state;
  const int nb = state.half_width();
  for (int n = -nb; n <= nb; ++n) out.at(n) *= std::polar(1.0, n * theta);
  return out;
}

QuantumState time_reverse(const QuantumState& state) {
  QuantumState out = state;
  out.amplitudes = state.amplitudes.reverse().conjugate();
  out.quasimomentum_offset = -state.quasimomentum_offset;
  return out;
}

QuantumState resize_ladder(const QuantumState& state, int half_width) {
  QuantumState out(Eigen::VectorXcd::Zero(2 * half_width + 1), state.quasimomentum_offset,
                   state.time_s);
  const int common = std::min(half_width, state.half_width());
  for (int n = -common; n <= common; ++n) out.at(n) = state.at(n);
  return out;
}

}  // namespace sli
