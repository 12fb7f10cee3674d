#include "sli/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sli/bloch.hpp"
#include "sli/errors.hpp"
#include "sli/parallel.hpp"

namespace sli {

namespace {

struct Information {
  Eigen::VectorXd derivatives;
  Eigen::VectorXd terms;
  double total = 0.0;
};

Information central_difference(const Eigen::VectorXd& at_a0, const Eigen::VectorXd& plus,
                               const Eigen::VectorXd& minus, double step, double floor) {
  Information out;
  out.derivatives = (plus - minus) / (2.0 * step);
  out.terms = Eigen::VectorXd::Zero(at_a0.size());
  for (Eigen::Index n = 0; n < at_a0.size(); ++n) {
    if (at_a0(n) < floor) continue;
    out.terms(n) = out.derivatives(n) * out.derivatives(n) / at_a0(n);
  }
  out.total = out.terms.sum();
  return out;
}

}  // namespace

double FisherResult::relative_step_change() const {
  if (information_half_step == 0.0) return information_per_atom == 0.0 ? 0.0 : 1.0;
  return std::abs(information_per_atom - information_half_step) / information_half_step;
}

double cramer_rao_bound(double information_per_atom, double atoms) {
  if (!(atoms > 0.0)) throw DomainError("cramer_rao_bound: atom number must be positive");
  if (information_per_atom <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(atoms * information_per_atom);
}

FisherResult fisher_from_populations(const Eigen::VectorXd& at_a0, const Eigen::VectorXd& plus,
                                     const Eigen::VectorXd& minus, const Eigen::VectorXd& plus_half,
                                     const Eigen::VectorXd& minus_half, double a0, double delta_a,
                                     double atoms, double population_floor,
                                     double richardson_tolerance) {
  if (!(delta_a > 0.0)) throw DomainError("fisher: delta_a must be positive");
  const auto n = at_a0.size();
  if (plus.size() != n || minus.size() != n || plus_half.size() != n || minus_half.size() != n) {
    throw DimensionError("fisher: population vectors differ in size");
  }

  const Information full = central_difference(at_a0, plus, minus, delta_a, population_floor);
  const Information half =
      central_difference(at_a0, plus_half, minus_half, delta_a / 2.0, population_floor);

  FisherResult r;
  r.a0 = a0;
  r.delta_a = delta_a;
  r.population_floor = population_floor;
  r.atoms = atoms;
  r.populations = at_a0;
  r.derivatives = full.derivatives;
  r.terms = full.terms;
  r.information_per_atom = full.total;
  r.information_half_step = half.total;
  r.zero_information = full.total == 0.0;
  r.min_detectable = cramer_rao_bound(full.total, atoms);

  const double change = r.relative_step_change();
  if (r.zero_information) {
    r.warning = "zero Fisher information: populations do not respond to acceleration";
  } else if (change > richardson_tolerance) {
    r.converged = false;
    std::ostringstream msg;
    msg.precision(6);
    msg << "derivative not converged: information " << full.total << " at step " << delta_a
        << " vs " << half.total << " at step " << delta_a / 2.0;
    r.warning = msg.str();
  }
  return r;
}

FisherResult fisher_at(const SequencePlan& plan, const LatticeConfig& lattice, double a0,
                       double atoms, const PropagationSettings& settings,
                       const FisherOptions& options) {
  if (!(options.delta_a > 0.0)) throw DomainError("fisher_at: delta_a must be positive");
  const double h = options.delta_a;
  const double offsets[] = {0.0, h, -h, h / 2.0, -h / 2.0};
  const QuantumState initial = ground_state(lattice, kSequenceBasisSize);
  std::vector<Eigen::VectorXd> p(5);
  parallel_for(5, options.threads, [&](std::size_t i) {
    const double a = a0 + offsets[i];
    const SignalSpec signal = a == 0.0 ? SignalSpec::none() : SignalSpec::dc(a);
    const QuantumState final_state = run_sequence_state(plan, initial, lattice, signal, settings);
    p[i] = populations_of(final_state, options.truncation).values();
  });
  return fisher_from_populations(p[0], p[1], p[2], p[3], p[4], a0, h, atoms,
                                 options.population_floor, options.richardson_tolerance);
}

double PowerLawFit::operator()(double x) const { return prefactor * std::pow(x, -exponent); }

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("fit_power_law: x and y differ in length");
  PowerLawFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::isfinite(x[i]) && std::isfinite(y[i]) && x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    } else {
      fit.excluded.push_back(i);
    }
  }
  const auto m = static_cast<Eigen::Index>(lx.size());
  if (m < 2) throw DomainError("fit_power_law: need at least two usable points");

  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = -lx[i];
    rhs(i) = ly[i];
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(rhs);
  fit.prefactor = std::exp(beta(0));
  fit.exponent = beta(1);
  fit.residuals = rhs - design * beta;

  fit.x_min = std::numeric_limits<double>::infinity();
  fit.x_max = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::find(fit.excluded.begin(), fit.excluded.end(), i) != fit.excluded.end()) continue;
    fit.x_min = std::min(fit.x_min, x[i]);
    fit.x_max = std::max(fit.x_max, x[i]);
  }
  if (fit.x_min == fit.x_max) throw DomainError("fit_power_law: x values must not all coincide");

  if (m > 2) {
    const double s2 = fit.residuals.squaredNorm() / static_cast<double>(m - 2);
    fit.covariance = s2 * (design.transpose() * design).inverse();
  }
  fit.prefactor_log_stderr = std::sqrt(fit.covariance(0, 0));
  fit.exponent_stderr = std::sqrt(fit.covariance(1, 1));
  return fit;
}

SensitivityProjection project_sensitivity(const PowerLawFit& fit, double interrogation_time_s,
                                          double atoms) {
  if (!(interrogation_time_s > 0.0)) throw DomainError("project_sensitivity: time must be positive");
  if (!(atoms > 0.0)) throw DomainError("project_sensitivity: atom number must be positive");
  SensitivityProjection p;
  p.min_detectable = fit(interrogation_time_s) / std::sqrt(atoms);
  p.relative_to_g = p.min_detectable / constants::kStandardGravity;
  p.extrapolated = interrogation_time_s < fit.x_min || interrogation_time_s > fit.x_max;
  const double width = fit.x_max - fit.x_min;
  p.far_extrapolated = interrogation_time_s > fit.x_max + 100.0 * width ||
                       interrogation_time_s < fit.x_min - 100.0 * width;
  return p;
}

ScalingPoint scaling_point(const StageSet& stages, Topology topology, int repeats,
                           const LatticeConfig& lattice, const GAConfig& ga,
                           const PropagationSettings& settings, const FisherOptions& options,
                           int restarts) {
  StageSet arms = stages;
  arms.recombine.reset();
  const SequencePlan plan = make_plan(topology, arms, repeats);
  GAConfig cfg = ga;
  cfg.threads = options.threads;
  const RecombinationResult rec =
      optimize_recombination(plan, lattice, cfg, settings, SignalSpec::none(), restarts);

  ScalingPoint point;
  point.repeats = repeats;
  point.interrogation_time_s = rec.plan.interrogation_time_s();
  point.total_time_s = rec.plan.total_duration_s();
  point.recombine_fitness = rec.evolution.best_fitness;
  point.fisher = fisher_at(rec.plan, lattice, 0.0, 1.0, settings, options);
  return point;
}

ScalingStudy fit_scaling(std::vector<ScalingPoint> points) {
  ScalingStudy study;
  std::vector<double> t, t_total, bound;
  for (auto& p : points) {
    p.included = std::isfinite(p.fisher.min_detectable) && p.fisher.min_detectable > 0.0;
    if (!p.included) continue;
    t.push_back(p.interrogation_time_s);
    t_total.push_back(p.total_time_s);
    bound.push_back(p.fisher.min_detectable);
  }
  if (t.size() < 4) throw DomainError("scaling study: fewer than four points with finite bounds");
  study.fit = fit_power_law(t, bound);
  study.fit_total = fit_power_law(t_total, bound);
  study.points = std::move(points);
  return study;
}

ScalingStudy scaling_study(const StageSet& stages, Topology topology,
                           const std::vector<int>& repeats, const LatticeConfig& lattice,
                           const GAConfig& ga, const PropagationSettings& settings,
                           const FisherOptions& options, int restarts) {
  if (repeats.size() < 4) throw DomainError("scaling study: need at least four grid points");
  std::vector<ScalingPoint> points;
  for (int k : repeats) {
    points.push_back(scaling_point(stages, topology, k, lattice, ga, settings, options, restarts));
  }
  return fit_scaling(std::move(points));
}

}  // namespace sli
