#include "sli/robustness.hpp"

#include <cmath>
#include <random>

#include "sli/errors.hpp"
#include "sli/ga.hpp"
#include "sli/parallel.hpp"

namespace sli {

namespace {

double case_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& reference, int runs,
                      int truncation) {
  const Eigen::Index width = 2 * truncation + 1;
  double sum = 0.0;
  for (int r = 0; r < runs; ++r) {
    sum += normalized_variation(p.segment(r * width, width), reference.segment(r * width, width));
  }
  return sum / runs;
}

int run_count(const RobustnessCase& c) {
  return c.plane_waves.empty() ? 1 : static_cast<int>(c.plane_waves.size());
}

Eigen::VectorXd run_case(const RobustnessCase& c, const PhaseSchedule& schedule,
                         const LatticeConfig& lattice, const LatticeConfig& nominal,
                         const PropagationSettings& settings,
                         const LatticePerturbation& perturbation) {
  std::vector<QuantumState> initial;
  if (c.plane_waves.empty()) {
    initial.push_back(ground_state(c.reload_ground_state ? lattice : nominal, c.basis_size));
  } else {
    const int nb = (c.basis_size - 1) / 2;
    for (int n : c.plane_waves) initial.push_back(QuantumState::plane_wave(nb, n));
  }
  const Eigen::Index width = 2 * c.truncation + 1;
  Eigen::VectorXd out(width * static_cast<Eigen::Index>(initial.size()));
  for (std::size_t r = 0; r < initial.size(); ++r) {
    const QuantumState final_state =
        propagate(initial[r], schedule, lattice, SignalSpec::none(), settings, perturbation);
    out.segment(static_cast<Eigen::Index>(r) * width, width) =
        populations_of(final_state, c.truncation).values();
  }
  return out;
}

template <typename LatticeFor>
std::vector<SweepPoint> lattice_sweep(const RobustnessCase& c, const LatticeConfig& lattice,
                                      const std::vector<double>& fractions,
                                      const PropagationSettings& settings, int threads,
                                      LatticeFor lattice_for) {
  const PhaseSchedule schedule = PhaseSchedule::of(c.protocol, settings.dt_s);
  const Eigen::VectorXd reference = run_case(c, schedule, lattice, lattice, settings, {});
  std::vector<SweepPoint> out(fractions.size());
  parallel_for(fractions.size(), threads, [&](std::size_t i) {
    const double x = fractions[i];
    if (x == 0.0) {
      out[i] = {x, 0.0, 0.0};
      return;
    }
    const Eigen::VectorXd p = run_case(c, schedule, lattice_for(x), lattice, settings, {});
    out[i] = {x, case_variation(p, reference, run_count(c), c.truncation), 0.0};
  });
  return out;
}

}  // namespace

RobustnessCase robustness_case(StageKind kind, ShakingProtocol protocol) {
  RobustnessCase c{std::move(protocol), {}};
  switch (kind) {
    case StageKind::split:
      break;
    case StageKind::propagate:
    case StageKind::reflect:
      c.plane_waves = {1, -1};
      break;
    case StageKind::recombine:
      throw DomainError("robustness: recombination has no standalone input state");
  }
  return c;
}

Eigen::VectorXd case_populations(const RobustnessCase& c, const LatticeConfig& lattice,
                                 const PropagationSettings& settings,
                                 const LatticePerturbation& perturbation) {
  return run_case(c, PhaseSchedule::of(c.protocol, settings.dt_s), lattice, lattice, settings,
                  perturbation);
}

std::vector<SweepPoint> sweep_depth(const RobustnessCase& c, const LatticeConfig& lattice,
                                    const std::vector<double>& fractions,
                                    const PropagationSettings& settings, int threads) {
  return lattice_sweep(c, lattice, fractions, settings, threads, [&](double x) {
    return lattice.with_depth(lattice.depth_er() * (1.0 + x));
  });
}

std::vector<SweepPoint> sweep_wavelength(const RobustnessCase& c, const LatticeConfig& lattice,
                                         const std::vector<double>& fractions,
                                         const PropagationSettings& settings, int threads) {
  return lattice_sweep(c, lattice, fractions, settings, threads, [&](double x) {
    const double scale = 1.0 + x;
    // E_R goes as 1 / lambda^2; hold V0 in joules fixed.
    return LatticeConfig(lattice.depth_er() * scale * scale, lattice.wavelength_m() * scale,
                         lattice.atom_mass_kg());
  });
}

std::vector<SweepPoint> sweep_phase_noise(const RobustnessCase& c, const LatticeConfig& lattice,
                                          const std::vector<double>& amplitudes,
                                          const PropagationSettings& settings, int seeds,
                                          std::uint64_t base_seed, int threads) {
  if (seeds < 1) throw DomainError("sweep_phase_noise: need at least one seed");
  const PhaseSchedule schedule = PhaseSchedule::of(c.protocol, settings.dt_s);
  const double peak = schedule.samples().cwiseAbs().maxCoeff();
  const Eigen::VectorXd reference = run_case(c, schedule, lattice, lattice, settings, {});

  const std::size_t jobs = amplitudes.size() * static_cast<std::size_t>(seeds);
  std::vector<double> d(jobs, 0.0);
  parallel_for(jobs, threads, [&](std::size_t j) {
    const std::size_t a = j / seeds;
    const auto s = static_cast<std::uint64_t>(j % seeds);
    const double sd = amplitudes[a] * peak;
    if (sd == 0.0) return;
    PhaseSchedule noisy = schedule;
    auto rng = derive_rng(base_seed, {s});
    std::normal_distribution<double> noise(0.0, sd);
    for (Eigen::Index k = 0; k < noisy.samples().size(); ++k) noisy.samples()(k) += noise(rng);
    const Eigen::VectorXd p = run_case(c, noisy, lattice, lattice, settings, {});
    d[j] = case_variation(p, reference, run_count(c), c.truncation);
  });

  std::vector<SweepPoint> out;
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    double mean = 0.0;
    for (int s = 0; s < seeds; ++s) mean += d[a * seeds + s];
    mean /= seeds;
    double var = 0.0;
    for (int s = 0; s < seeds; ++s) var += std::pow(d[a * seeds + s] - mean, 2);
    const double sd = seeds > 1 ? std::sqrt(var / (seeds - 1)) : 0.0;
    out.push_back({amplitudes[a], mean, sd});
  }
  return out;
}

std::vector<ParasiticPoint> sweep_parasitic(const RobustnessCase& c, const LatticeConfig& lattice,
                                            const std::vector<double>& epsilons,
                                            const std::vector<double>& deltas,
                                            const PropagationSettings& settings, int threads) {
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw DomainError("sweep_parasitic: epsilon must be non-negative");
  }
  const PhaseSchedule schedule = PhaseSchedule::of(c.protocol, settings.dt_s);
  const Eigen::VectorXd reference = run_case(c, schedule, lattice, lattice, settings, {});
  std::vector<ParasiticPoint> out(epsilons.size() * deltas.size());
  parallel_for(out.size(), threads, [&](std::size_t j) {
    const double eps = epsilons[j / deltas.size()];
    const double delta = deltas[j % deltas.size()];
    if (eps == 0.0) {
      out[j] = {eps, delta, 0.0};
      return;
    }
    const Eigen::VectorXd p = run_case(c, schedule, lattice, lattice, settings, {eps, delta});
    out[j] = {eps, delta, case_variation(p, reference, run_count(c), c.truncation)};
  });
  return out;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
  if (count < 1) throw DomainError("linear_grid: count must be at least 1");
  if (count == 1) return {lo};
  std::vector<double> g(count);
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  return g;
}

}  // namespace sli
