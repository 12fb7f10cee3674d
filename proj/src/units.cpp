#include "sli/units.hpp"

#include <string>

namespace sli {

LatticeConfig::LatticeConfig(double depth_er, double wavelength_m, double atom_mass_kg)
    : depth_er_(depth_er), wavelength_m_(wavelength_m), atom_mass_kg_(atom_mass_kg) {
  if (!(depth_er >= 0.0) || !std::isfinite(depth_er)) {
    throw DomainError("LatticeConfig: depth must be a finite non-negative number");
  }
  if (!(wavelength_m > 0.0) || !(atom_mass_kg > 0.0)) {
    throw DomainError("LatticeConfig: wavelength and atom mass must be positive");
  }
  wavenumber_ = 2.0 * std::numbers::pi / wavelength_m_;
  recoil_energy_ =
      constants::kHbar * constants::kHbar * wavenumber_ * wavenumber_ / (2.0 * atom_mass_kg_);
}

LatticeConfig make_default_config() {
  return {constants::kDefaultDepth, constants::kDefaultWavelength, constants::kRubidium87Mass};
}

MomentumPopulations::MomentumPopulations(Eigen::VectorXd values, double residual_offset,
                                         double discarded)
    : values_(std::move(values)), residual_offset_(residual_offset), discarded_(discarded) {
  if (values_.size() % 2 == 0) {
    throw DimensionError("MomentumPopulations: expected 2N+1 entries, got " +
                         std::to_string(values_.size()));
  }
}

MomentumPopulations MomentumPopulations::one_hot(int truncation, int n) {
  if (std::abs(n) > truncation) throw DomainError("one_hot: bin outside truncation window");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * truncation + 1);
  v(n + truncation) = 1.0;
  return MomentumPopulations(std::move(v));
}

void SignalSpec::validate() const {
  if (!std::isfinite(a_dc) || !std::isfinite(a_x) || !std::isfinite(omega) || !std::isfinite(phase)) {
    throw DomainError("SignalSpec: non-finite parameter");
  }
  if (omega < 0.0) throw DomainError("SignalSpec: omega must be non-negative");
  if (kind == Kind::none && (a_dc != 0.0 || a_x != 0.0)) {
    throw DomainError("SignalSpec: kind none carries nonzero magnitudes");
  }
  if (kind == Kind::dc && a_x != 0.0) throw DomainError("SignalSpec: dc signal with AC amplitude");
}

double SignalSpec::acceleration(double t) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::dc:
      return a_dc;
    case Kind::sinusoid:
      return a_dc + a_x * std::sin(omega * t + phase);
  }
  return 0.0;
}

double SignalSpec::velocity_change(double t0, double t1) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::dc:
      return a_dc * (t1 - t0);
    case Kind::sinusoid: {
      double v = a_dc * (t1 - t0);
      if (omega == 0.0) {
        v += a_x * std::sin(phase) * (t1 - t0);
      } else {
        v += a_x * (std::cos(omega * t0 + phase) - std::cos(omega * t1 + phase)) / omega;
      }
      return v;
    }
  }
  return 0.0;
}

double variation(const MomentumPopulations& p, const MomentumPopulations& q) {
  if (p.truncation() != q.truncation()) {
    throw DimensionError("variation: truncation mismatch (" + std::to_string(p.truncation()) +
                         " vs " + std::to_string(q.truncation()) + ")");
  }
  return variation(p.values(), q.values());
}

double normalized_variation(const MomentumPopulations& p, const MomentumPopulations& q) {
  if (p.truncation() != q.truncation()) {
    throw DimensionError("normalized_variation: truncation mismatch");
  }
  return normalized_variation(p.values(), q.values());
}

}  // namespace sli
