#pragma once

// Classical Fisher information of the measured momentum populations with
// respect to a uniform acceleration, the resulting Cramer-Rao bound, and
// power-law fits of the bound against interrogation time.

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

#include "sli/ga.hpp"
#include "sli/propagator.hpp"
#include "sli/sequencer.hpp"
#include "sli/units.hpp"

namespace sli {

struct FisherOptions {
  double delta_a = 0.01;  // m/s^2
  /// Bins below this population are left out of the sum.
  double population_floor = 1e-9;
  /// Relative disagreement allowed between the step and half-step totals.
  double richardson_tolerance = 0.05;
  int truncation = kDefaultTruncation;
  int threads = 1;
};

struct FisherResult {
  double a0 = 0.0;
  double delta_a = 0.0;
  double population_floor = 0.0;
  double atoms = 1.0;

  Eigen::VectorXd populations;  // at a0
  Eigen::VectorXd derivatives;  // dP_n/da, s^2/m
  Eigen::VectorXd terms;        // (dP_n/da)^2 / P_n, zero for floored bins

  double information_per_atom = 0.0;  // s^4/m^2
  double information_half_step = 0.0;
  double min_detectable = std::numeric_limits<double>::infinity();  // m/s^2
  bool zero_information = true;
  bool converged = true;
  std::string warning;

  double relative_step_change() const;
};

/// Assembles a result from populations at a0 and at a0 +- delta_a and
/// a0 +- delta_a / 2.
FisherResult fisher_from_populations(const Eigen::VectorXd& at_a0, const Eigen::VectorXd& plus,
                                     const Eigen::VectorXd& minus, const Eigen::VectorXd& plus_half,
                                     const Eigen::VectorXd& minus_half, double a0, double delta_a,
                                     double atoms, double population_floor,
                                     double richardson_tolerance);

/// Central-difference Fisher information of `plan`'s final populations
/// under a DC acceleration around a0, for `atoms` independent atoms.
FisherResult fisher_at(const SequencePlan& plan, const LatticeConfig& lattice, double a0,
                       double atoms, const PropagationSettings& settings,
                       const FisherOptions& options = {});

/// delta_a = 1 / sqrt(atoms * information_per_atom).
double cramer_rao_bound(double information_per_atom, double atoms);

/// y = C x^(-n) fitted by least squares on (ln x, ln y).
struct PowerLawFit {
  double prefactor = 0.0;  // C
  double exponent = 0.0;   // n
  double prefactor_log_stderr = 0.0;
  double exponent_stderr = 0.0;
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // of (ln C, n)
  Eigen::VectorXd residuals;                             // in ln y
  double x_min = 0.0;
  double x_max = 0.0;
  std::vector<std::size_t> excluded;  // indices of non-finite or non-positive points

  double operator()(double x) const;
};

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

struct SensitivityProjection {
  double min_detectable = 0.0;  // m/s^2
  double relative_to_g = 0.0;
  /// Outside the fitted range at all.
  bool extrapolated = false;
  /// More than 100 fitted-range widths beyond either end.
  bool far_extrapolated = false;
};

/// Fitted single-atom bound divided by sqrt(atoms), also expressed in g.
SensitivityProjection project_sensitivity(const PowerLawFit& fit, double interrogation_time_s,
                                          double atoms);

struct ScalingPoint {
  int repeats = 0;
  double interrogation_time_s = 0.0;
  double total_time_s = 0.0;
  double recombine_fitness = 0.0;
  FisherResult fisher;
  bool included = true;
};

struct ScalingStudy {
  std::vector<ScalingPoint> points;
  PowerLawFit fit;        // against interrogation (propagation) time
  PowerLawFit fit_total;  // against total shaking time
};

/// For each repeat count k: build the interferometer, re-optimize its
/// recombination, and evaluate the single-atom bound at a = 0.
ScalingPoint scaling_point(const StageSet& stages, Topology topology, int repeats,
                           const LatticeConfig& lattice, const GAConfig& ga,
                           const PropagationSettings& settings, const FisherOptions& options,
                           int restarts = 1);

/// Fits points whose bound is finite; needs at least four of them.
ScalingStudy fit_scaling(std::vector<ScalingPoint> points);

ScalingStudy scaling_study(const StageSet& stages, Topology topology,
                           const std::vector<int>& repeats, const LatticeConfig& lattice,
                           const GAConfig& ga, const PropagationSettings& settings,
                           const FisherOptions& options = {}, int restarts = 1);

}  // namespace sli
