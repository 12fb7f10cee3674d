#include "sli/bloch.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace sli {

BlochGroundState solve_ground_state(const LatticeConfig& config, int basis_size) {
  if (basis_size < 11 || basis_size % 2 == 0) {
    throw DomainError("ground_state: basis size must be odd and >= 11, got " +
                      std::to_string(basis_size));
  }
  const int half_width = (basis_size - 1) / 2;
  const Eigen::MatrixXd h = ladder_hamiltonian(config.depth_er(), half_width);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("ground_state: eigensolver did not converge");
  }

  Eigen::VectorXd v = solver.eigenvectors().col(0);
  if (v(half_width) < 0.0) v = -v;
  v.normalize();

  BlochGroundState out;
  out.state = QuantumState(v.cast<std::complex<double>>());
  out.energy_er = solver.eigenvalues()(0);
  return out;
}

MomentumPopulations populations_of(const QuantumState& state, int truncation) {
  if (truncation < 0) throw DomainError("populations_of: negative truncation");
  const int nb = state.half_width();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(2 * truncation + 1);
  const double total = state.norm_squared();
  if (total <= 0.0) throw DomainError("populations_of: zero state");
  for (int n = -std::min(nb, truncation); n <= std::min(nb, truncation); ++n) {
    p(n + truncation) = std::norm(state.at(n));
  }
  const double kept = p.sum();
  if (kept <= 0.0) throw DomainError("populations_of: no probability inside truncation window");
  p /= kept;
  return MomentumPopulations(std::move(p), state.quasimomentum_offset,
                             std::max(0.0, (total - kept) / total));
}

}  // namespace sli
