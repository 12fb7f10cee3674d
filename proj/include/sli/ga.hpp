#pragma once

// Genetic algorithm over shaking-protocol genomes.
//
// Each generation: rank by fitness (ascending), carry the best `elites`
// unchanged, drop the worst `culled`, and refill the remaining slots with
// children of parents drawn uniformly from the survivors.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "sli/protocol.hpp"

namespace sli {

using Genome = Eigen::VectorXd;

/// Relative weights of the four variation operators.
struct OperatorMix {
  double one_point = 0.35;
  double two_point = 0.35;
  double mutation = 0.15;
  double creep = 0.15;
};

struct GAConfig {
  int population = 20;
  int elites = 2;
  int culled = 4;
  double mutation_limit = 1000.0;
  double creep_rate = 1000.0;
  double sigma = kDefaultSigma;
  int max_generations = 2000;
  double fitness_target = 1e-3;
  OperatorMix mix;
  std::uint64_t seed = 1;
  int threads = 1;

  int lines = kDefaultLines;
  double bandwidth_hz = kDefaultBandwidthHz;
  double duration_s = kDefaultStageDuration;

  void validate() const;
};

/// Deterministic generator for (master seed, stream indices...).
std::mt19937_64 derive_rng(std::uint64_t master, std::initializer_list<std::uint64_t> stream);

/// Children keep the first `cut` genes of their own parent and take the rest
/// from the other parent.
std::pair<Genome, Genome> crossover_one_point(const Genome& a, const Genome& b, Eigen::Index cut);
std::pair<Genome, Genome> crossover_one_point(const Genome& a, const Genome& b, std::mt19937_64& rng);

/// Exchange of the genes in positions (first, second] (1-based), first < second.
std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b, Eigen::Index first,
                                              Eigen::Index second);
std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b, std::mt19937_64& rng);

/// Replaces gene `index` with `value`.
Genome mutate_at(const Genome& parent, Eigen::Index index, double value);
/// One random gene replaced by a uniform draw from [-limit, limit].
Genome mutate(const Genome& parent, std::mt19937_64& rng, double limit);

/// Gene `index` shifted by (0.5 - r) * rate.
Genome creep_at(const Genome& parent, Eigen::Index index, double r, double rate);
Genome creep(const Genome& parent, std::mt19937_64& rng, double rate);

struct GenerationRecord {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
};

struct EvolutionResult {
  ShakingProtocol best;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;
  bool converged = false;
};

using FitnessFunction = std::function<double(const ShakingProtocol&)>;
/// Called once per generation with the generation record and the current best.
using GenerationObserver = std::function<void(const GenerationRecord&, const ShakingProtocol&)>;

/// Runs one GA from a random initial population. `restart` selects an
/// independent seed stream so restarts never share draws.
EvolutionResult evolve(const GAConfig& config, const FitnessFunction& fitness,
                       const GenerationObserver& observer = {}, std::uint64_t restart = 0);

/// Same, starting from a supplied population (missing slots filled randomly).
EvolutionResult evolve_from(const GAConfig& config, const FitnessFunction& fitness,
                            std::vector<Genome> initial, const GenerationObserver& observer = {},
                            std::uint64_t restart = 0);

/// Best of `restarts` independent runs; ties go to the earlier restart.
EvolutionResult evolve_best_of(const GAConfig& config, const FitnessFunction& fitness, int restarts,
                               const GenerationObserver& observer = {});

}  // namespace sli
