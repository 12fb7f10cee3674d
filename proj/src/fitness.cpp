#include "sli/fitness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sli {

void FitnessSpec::validate() const {
  if (target.size() % 2 == 0) throw DimensionError("FitnessSpec: target must hold 2N+1 entries");
  if (std::abs(target.sum() - 1.0) > 1e-9) throw DomainError("FitnessSpec: target must sum to 1");
  const int n = truncation();
  for (int b : free_bins) {
    if (std::abs(b) > n) throw DomainError("FitnessSpec: free bin outside truncation");
  }
  if (symmetric_pair && (*symmetric_pair <= 0 || *symmetric_pair > n)) {
    throw DomainError("FitnessSpec: symmetric pair must be in 1..N");
  }
}

FitnessSpec FitnessSpec::split(int truncation) {
  FitnessSpec s;
  s.target = Eigen::VectorXd::Zero(2 * truncation + 1);
  s.target(truncation - 1) = 0.5;
  s.target(truncation + 1) = 0.5;
  s.free_bins = {-1, 1};
  s.symmetric_pair = 1;
  return s;
}

FitnessSpec FitnessSpec::single_bin(int n, int truncation) {
  FitnessSpec s;
  s.target = MomentumPopulations::one_hot(truncation, n).values();
  s.free_bins = {n};
  return s;
}

FitnessSpec FitnessSpec::recombine(const MomentumPopulations& target) {
  FitnessSpec s;
  s.target = target.values();
  s.free_bins = {-2, -1, 0, 1, 2};
  s.symmetric_pair = 1;
  return s;
}

double fitness_split(const MomentumPopulations& p, const FitnessSpec& spec) {
  if (p.size() != spec.target.size()) throw DimensionError("fitness: truncation mismatch");
  const Eigen::VectorXd diff = spec.target - p.values();
  double f = diff.norm();

  const int n_max = spec.truncation();
  for (int n = -n_max; n <= n_max; ++n) {
    if (std::find(spec.free_bins.begin(), spec.free_bins.end(), n) != spec.free_bins.end()) continue;
    f += std::abs(diff(n + n_max));
  }

  if (spec.symmetric_pair) {
    const int m = *spec.symmetric_pair;
    const double plus = p.at(m);
    const double minus = p.at(-m);
    const double denom = plus + minus;
    if (denom >= 1e-12) f += std::abs((plus - minus) / denom);
  }
  return f;
}

double fitness_dual(const MomentumPopulations& p_plus, const MomentumPopulations& p_minus,
                    const FitnessSpec& target_plus, const FitnessSpec& target_minus) {
  return fitness_split(p_plus, target_plus) + fitness_split(p_minus, target_minus);
}

double variation_from_desired(const MomentumPopulations& p, const FitnessSpec& spec) {
  return normalized_variation(p.values(), spec.target);
}

StageObjective::StageObjective(std::vector<FitnessRun> runs, LatticeConfig lattice,
                               PropagationSettings settings, SignalSpec signal)
    : runs_(std::move(runs)), lattice_(lattice), settings_(settings), signal_(signal) {
  if (runs_.empty()) throw DomainError("StageObjective: at least one run required");
  for (const auto& r : runs_) r.spec.validate();
  signal_.validate();
}

StageEvaluation StageObjective::evaluate(const ShakingProtocol& protocol) const {
  return evaluate(PhaseSchedule::of(protocol, settings_.dt_s));
}

StageEvaluation StageObjective::evaluate(const PhaseSchedule& schedule) const {
  StageEvaluation out;
  for (const auto& run : runs_) {
    const QuantumState final_state = propagate(run.initial, schedule, lattice_, signal_, settings_);
    out.populations.push_back(populations_of(final_state, run.spec.truncation()));
    out.fitness += fitness_split(out.populations.back(), run.spec);
  }
  return out;
}

double StageObjective::operator()(const ShakingProtocol& protocol) const {
  const PhaseSchedule schedule = PhaseSchedule::of(protocol, settings_.dt_s);
  if (schedule.samples().cwiseAbs().maxCoeff() > kMaxPhase) {
    return std::numeric_limits<double>::infinity();
  }
  try {
    return evaluate(schedule).fitness;
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
}

StageObjective split_objective(const LatticeConfig& lattice, const PropagationSettings& settings,
                               int basis_size) {
  return StageObjective({{ground_state(lattice, basis_size), FitnessSpec::split()}}, lattice,
                        settings);
}

StageObjective propagate_objective(const LatticeConfig& lattice,
                                   const PropagationSettings& settings, int basis_size) {
  const int nb = (basis_size - 1) / 2;
  return StageObjective({{QuantumState::plane_wave(nb, 1), FitnessSpec::single_bin(1)},
                         {QuantumState::plane_wave(nb, -1), FitnessSpec::single_bin(-1)}},
                        lattice, settings);
}

StageObjective reflect_objective(const LatticeConfig& lattice, const PropagationSettings& settings,
                                 int basis_size) {
  const int nb = (basis_size - 1) / 2;
  return StageObjective({{QuantumState::plane_wave(nb, 1), FitnessSpec::single_bin(-1)},
                         {QuantumState::plane_wave(nb, -1), FitnessSpec::single_bin(1)}},
                        lattice, settings);
}

StageObjective recombine_objective(const QuantumState& incoming, const LatticeConfig& lattice,
                                   const PropagationSettings& settings, const SignalSpec& signal) {
  const auto target = populations_of(ground_state(lattice, 2 * incoming.half_width() + 1));
  return StageObjective({{incoming, FitnessSpec::recombine(target)}}, lattice, settings, signal);
}

}  // namespace sli
