#include "sli/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sli/errors.hpp"
#include "sli/parallel.hpp"

namespace sli {

namespace {

constexpr std::uint64_t kInitStream = 0xffffffffULL;

struct Individual {
  Genome genome;
  double fitness = std::numeric_limits<double>::infinity();
};

ShakingProtocol to_protocol(const GAConfig& c, const Genome& g, std::uint64_t seed) {
  ProtocolMetadata meta;
  meta.seed = seed;
  return ShakingProtocol(g, c.bandwidth_hz, c.duration_s, calibrated_gain(c.lines, c.sigma), meta);
}

// Evaluates individuals [first, end) in place; each slot is written by one
// worker only, so results do not depend on the thread count.
void evaluate(const GAConfig& c, const FitnessFunction& fitness, std::vector<Individual>& pop,
              std::size_t first) {
  parallel_for(pop.size() - first, c.threads, [&](std::size_t k) {
    Individual& ind = pop[first + k];
    const double f = fitness(to_protocol(c, ind.genome, c.seed));
    ind.fitness = std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  });
}

void rank(std::vector<Individual>& pop) {
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
}

GenerationRecord record(int generation, const std::vector<Individual>& pop) {
  GenerationRecord r;
  r.generation = generation;
  r.best_fitness = pop.front().fitness;
  double sum = 0.0;
  int finite = 0;
  for (const auto& ind : pop) {
    if (std::isfinite(ind.fitness)) {
      sum += ind.fitness;
      ++finite;
    }
  }
  r.mean_fitness = finite > 0 ? sum / finite : std::numeric_limits<double>::infinity();
  return r;
}

void check_pair(const Genome& a, const Genome& b) {
  if (a.size() != b.size()) throw DimensionError("crossover: parents differ in length");
  if (a.size() < 2) throw DimensionError("crossover: genomes need at least two genes");
}

}  // namespace

void GAConfig::validate() const {
  if (population < 2) throw DomainError("GAConfig: population must be at least 2");
  if (elites < 0 || culled < 0) throw DomainError("GAConfig: counts must be non-negative");
  if (elites + culled > population) throw DomainError("GAConfig: elites + culled exceeds population");
  if (population - culled < 1) throw DomainError("GAConfig: no survivors to breed from");
  if (!(mutation_limit > 0.0) || !(creep_rate > 0.0)) {
    throw DomainError("GAConfig: mutation limit and creep rate must be positive");
  }
  if (!(sigma > 0.0)) throw DomainError("GAConfig: sigma must be positive");
  if (max_generations < 1) throw DomainError("GAConfig: max_generations must be at least 1");
  if (mix.one_point < 0 || mix.two_point < 0 || mix.mutation < 0 || mix.creep < 0 ||
      mix.one_point + mix.two_point + mix.mutation + mix.creep <= 0) {
    throw DomainError("GAConfig: operator weights must be non-negative and not all zero");
  }
  if (lines < 1 || !(bandwidth_hz > 0.0) || !(duration_s > 0.0)) {
    throw DomainError("GAConfig: invalid protocol shape");
  }
}

std::mt19937_64 derive_rng(std::uint64_t master, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(master);
  for (auto s : stream) push(s);
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

std::pair<Genome, Genome> crossover_one_point(const Genome& a, const Genome& b, Eigen::Index cut) {
  check_pair(a, b);
  if (cut < 0 || cut > a.size()) throw DomainError("crossover_one_point: cut out of range");
  Genome ca = a;
  Genome cb = b;
  const Eigen::Index tail = a.size() - cut;
  ca.tail(tail) = b.tail(tail);
  cb.tail(tail) = a.tail(tail);
  return {std::move(ca), std::move(cb)};
}

std::pair<Genome, Genome> crossover_one_point(const Genome& a, const Genome& b, std::mt19937_64& rng) {
  check_pair(a, b);
  std::uniform_int_distribution<Eigen::Index> pick(1, a.size() - 1);
  return crossover_one_point(a, b, pick(rng));
}

std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b, Eigen::Index first,
                                              Eigen::Index second) {
  check_pair(a, b);
  if (first < 0 || second <= first || second > a.size()) {
    throw DomainError("crossover_two_point: need 0 <= first < second <= length");
  }
  Genome ca = a;
  Genome cb = b;
  const Eigen::Index len = second - first;
  ca.segment(first, len) = b.segment(first, len);
  cb.segment(first, len) = a.segment(first, len);
  return {std::move(ca), std::move(cb)};
}

std::pair<Genome, Genome> crossover_two_point(const Genome& a, const Genome& b, std::mt19937_64& rng) {
  check_pair(a, b);
  std::uniform_int_distribution<Eigen::Index> pick_first(1, a.size() - 1);
  const Eigen::Index first = pick_first(rng);
  std::uniform_int_distribution<Eigen::Index> pick_second(first + 1, a.size());
  return crossover_two_point(a, b, first, pick_second(rng));
}

Genome mutate_at(const Genome& parent, Eigen::Index index, double value) {
  if (index < 0 || index >= parent.size()) throw DomainError("mutate: index out of range");
  Genome child = parent;
  child(index) = value;
  return child;
}

Genome mutate(const Genome& parent, std::mt19937_64& rng, double limit) {
  if (!(limit >= 0.0)) throw DomainError("mutate: limit must be non-negative");
  if (parent.size() == 0) throw DimensionError("mutate: empty genome");
  std::uniform_int_distribution<Eigen::Index> pick(0, parent.size() - 1);
  const Eigen::Index index = pick(rng);
  std::uniform_real_distribution<double> value(-limit, limit);
  return mutate_at(parent, index, limit == 0.0 ? 0.0 : value(rng));
}

Genome creep_at(const Genome& parent, Eigen::Index index, double r, double rate) {
  if (index < 0 || index >= parent.size()) throw DomainError("creep: index out of range");
  Genome child = parent;
  child(index) += (0.5 - r) * rate;
  return child;
}

Genome creep(const Genome& parent, std::mt19937_64& rng, double rate) {
  if (!(rate >= 0.0)) throw DomainError("creep: rate must be non-negative");
  if (parent.size() == 0) throw DimensionError("creep: empty genome");
  std::uniform_int_distribution<Eigen::Index> pick(0, parent.size() - 1);
  const Eigen::Index index = pick(rng);
  std::uniform_real_distribution<double> r(0.0, 1.0);
  return creep_at(parent, index, r(rng), rate);
}

EvolutionResult evolve_from(const GAConfig& config, const FitnessFunction& fitness,
                            std::vector<Genome> initial, const GenerationObserver& observer,
                            std::uint64_t restart) {
  config.validate();
  const Eigen::Index genes = 2 * config.lines;

  std::vector<Individual> pop;
  pop.reserve(config.population);
  for (auto& g : initial) {
    if (static_cast<int>(pop.size()) == config.population) break;
    if (g.size() != genes) throw DimensionError("evolve: seeded genome has the wrong length");
    pop.push_back({std::move(g), 0.0});
  }
  {
    auto rng = derive_rng(config.seed, {restart, kInitStream});
    std::normal_distribution<double> normal(0.0, config.sigma);
    while (static_cast<int>(pop.size()) < config.population) {
      Genome g(genes);
      for (Eigen::Index i = 0; i < genes; ++i) g(i) = normal(rng);
      pop.push_back({std::move(g), 0.0});
    }
  }

  evaluate(config, fitness, pop, 0);
  rank(pop);

  EvolutionResult result{to_protocol(config, pop.front().genome, config.seed), pop.front().fitness,
                         {}, false};
  auto report = [&](int generation) {
    result.history.push_back(record(generation, pop));
    if (observer) observer(result.history.back(), to_protocol(config, pop.front().genome, config.seed));
  };
  report(1);

  const double weights[] = {config.mix.one_point, config.mix.two_point, config.mix.mutation,
                            config.mix.creep};
  const int survivors = config.population - config.culled;

  for (int generation = 2; generation <= config.max_generations; ++generation) {
    if (pop.front().fitness <= config.fitness_target) break;

    auto rng = derive_rng(config.seed, {restart, static_cast<std::uint64_t>(generation)});
    std::discrete_distribution<int> op(std::begin(weights), std::end(weights));
    std::uniform_int_distribution<int> parent(0, survivors - 1);

    std::vector<Individual> next(pop.begin(), pop.begin() + config.elites);
    while (static_cast<int>(next.size()) < config.population) {
      const Genome& a = pop[parent(rng)].genome;
      const int kind = op(rng);
      if (kind == 0 || kind == 1) {
        const Genome& b = pop[parent(rng)].genome;
        auto children = kind == 0 ? crossover_one_point(a, b, rng) : crossover_two_point(a, b, rng);
        next.push_back({std::move(children.first), 0.0});
        if (static_cast<int>(next.size()) < config.population) {
          next.push_back({std::move(children.second), 0.0});
        }
      } else if (kind == 2) {
        next.push_back({mutate(a, rng, config.mutation_limit), 0.0});
      } else {
        next.push_back({creep(a, rng, config.creep_rate), 0.0});
      }
    }
    pop = std::move(next);
    evaluate(config, fitness, pop, static_cast<std::size_t>(config.elites));
    rank(pop);
    report(generation);
  }

  result.best = to_protocol(config, pop.front().genome, config.seed);
  result.best.metadata().fitness = pop.front().fitness;
  result.best_fitness = pop.front().fitness;
  result.converged = result.best_fitness <= config.fitness_target;
  return result;
}

EvolutionResult evolve(const GAConfig& config, const FitnessFunction& fitness,
                       const GenerationObserver& observer, std::uint64_t restart) {
  return evolve_from(config, fitness, {}, observer, restart);
}

EvolutionResult evolve_best_of(const GAConfig& config, const FitnessFunction& fitness, int restarts,
                               const GenerationObserver& observer) {
  if (restarts < 1) throw DomainError("evolve_best_of: restarts must be at least 1");
  EvolutionResult best = evolve(config, fitness, observer, 0);
  for (int r = 1; r < restarts && !best.converged; ++r) {
    EvolutionResult run = evolve(config, fitness, observer, static_cast<std::uint64_t>(r));
    if (run.best_fitness < best.best_fitness) best = std::move(run);
  }
  return best;
}

}  // namespace sli
