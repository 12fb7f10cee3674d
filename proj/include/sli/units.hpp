#pragma once

// Unit system and shared value types.
//
// Energies are carried in recoil units E_R = hbar^2 k_L^2 / 2m, momenta in
// units of hbar k_L, times in seconds and accelerations in m/s^2.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "sli/errors.hpp"

namespace sli {

namespace constants {
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kHbar = kPlanck / (2.0 * std::numbers::pi);
inline constexpr double kRubidium87Mass = 1.44316060e-25;  // kg
inline constexpr double kDefaultWavelength = 1064e-9;  // m
inline constexpr double kDefaultDepth = 10.0;          // E_R
inline constexpr double kStandardGravity = 9.80665;    // m/s^2
}  // namespace constants

class LatticeConfig {
 public:
  LatticeConfig(double depth_er, double wavelength_m, double atom_mass_kg);

  double depth_er() const { return depth_er_; }
  double wavelength_m() const { return wavelength_m_; }
  double atom_mass_kg() const { return atom_mass_kg_; }

  /// k_L = 2 pi / lambda_L in 1/m.
  double wavenumber() const { return wavenumber_; }
  /// E_R in joules.
  double recoil_energy() const { return recoil_energy_; }
  double recoil_frequency_hz() const { return recoil_energy_ / constants::kPlanck; }
  /// E_R / hbar in rad/s; converts recoil-unit energies into phase rates.
  double recoil_angular_frequency() const { return recoil_energy_ / constants::kHbar; }
  /// m / (hbar k_L) in s/m: quasimomentum (units of k_L) gained per unit of integrated acceleration.
  double quasimomentum_per_velocity() const {
    return atom_mass_kg_ / (constants::kHbar * wavenumber_);
  }

  LatticeConfig with_depth(double depth_er) const {
    return {depth_er, wavelength_m_, atom_mass_kg_};
  }
  LatticeConfig with_wavelength(double wavelength_m) const {
    return {depth_er_, wavelength_m, atom_mass_kg_};
  }

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;

 private:
  double depth_er_;
  double wavelength_m_;
  double atom_mass_kg_;
  double wavenumber_;
  double recoil_energy_;
};

/// Rb-87 in a 1064 nm lattice at 10 E_R.
LatticeConfig make_default_config();

/// Probability per momentum bin 2n hbar k_L for n in [-N, N].
class MomentumPopulations {
 public:
  MomentumPopulations() = default;
  explicit MomentumPopulations(Eigen::VectorXd values, double residual_offset = 0.0,
                               double discarded = 0.0);

  static MomentumPopulations one_hot(int truncation, int n);

  int truncation() const { return static_cast<int>(values_.size() - 1) / 2; }
  Eigen::Index size() const { return values_.size(); }
  const Eigen::VectorXd& values() const { return values_; }
  double at(int n) const { return values_(n + truncation()); }

  /// Quasimomentum offset q(T) in units of k_L carried by the measured ladder.
  double residual_offset() const { return residual_offset_; }
  /// Probability that fell outside the truncation window before renormalization.
  double discarded() const { return discarded_; }
  bool truncation_warning() const { return discarded_ > 1e-6; }

 private:
  Eigen::VectorXd values_;
  double residual_offset_ = 0.0;
  double discarded_ = 0.0;
};

/// Applied inertial signal a(t) = a_dc + a_x sin(omega t + phase).
struct SignalSpec {
  enum class Kind { none, dc, sinusoid };

  Kind kind = Kind::none;
  double a_dc = 0.0;
  double a_x = 0.0;
  double omega = 0.0;
  double phase = 0.0;

  static SignalSpec none() { return {}; }
  static SignalSpec dc(double a) { return {Kind::dc, a, 0.0, 0.0, 0.0}; }
  static SignalSpec sinusoid(double a_x, double omega, double phase = 0.0, double a_dc = 0.0) {
    return {Kind::sinusoid, a_dc, a_x, omega, phase};
  }

  void validate() const;
  bool is_zero() const { return kind == Kind::none || (a_dc == 0.0 && a_x == 0.0); }
  double acceleration(double t) const;
  /// Integral of a(t') over [t0, t1] in m/s.
  double velocity_change(double t0, double t1) const;
};

/// Raw population-vector distance (1 - p.q) x 100.
template <typename DerivedA, typename DerivedB>
double variation(const Eigen::MatrixBase<DerivedA>& p, const Eigen::MatrixBase<DerivedB>& q) {
  if (p.size() != q.size()) throw DimensionError("variation: population vectors differ in size");
  return (1.0 - p.dot(q)) * 100.0;
}

/// Scale-free distance (1 - p.q / |p||q|) x 100; zero for identical vectors.
template <typename DerivedA, typename DerivedB>
double normalized_variation(const Eigen::MatrixBase<DerivedA>& p,
                            const Eigen::MatrixBase<DerivedB>& q) {
  if (p.size() != q.size()) {
    throw DimensionError("normalized_variation: population vectors differ in size");
  }
  const double denom = p.norm() * q.norm();
  if (denom == 0.0) throw DomainError("normalized_variation: zero population vector");
  // Rounding in the ratio can leave ~1e-16 for identical inputs.
  if ((p.array() == q.array()).all()) return 0.0;
  return std::max(0.0, 1.0 - p.dot(q) / denom) * 100.0;
}

double variation(const MomentumPopulations& p, const MomentumPopulations& q);
double normalized_variation(const MomentumPopulations& p, const MomentumPopulations& q);

}  // namespace sli
