#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sli/fitness.hpp"

using namespace sli;

namespace {

MomentumPopulations pops(std::initializer_list<double> v) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) e(i++) = x;
  return MomentumPopulations(e);
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

TEST_CASE("perfect split scores zero") {
  CHECK(fitness_split(pops({0, 0.5, 0, 0.5, 0}), FitnessSpec::split(2)) == 0.0);
}

TEST_CASE("ground-state row against the split target") {
  const auto p = pops({0.0026, 0.1345, 0.7259, 0.1345, 0.0026});
  const auto spec = FitnessSpec::split(2);
  const auto terms = oracle::split_penalty(as_vector(p.values()), as_vector(spec.target));
  CHECK(terms.euclidean == doctest::Approx(0.8911).epsilon(1e-4));
  CHECK(terms.outside == doctest::Approx(0.7311).epsilon(1e-12));
  CHECK(terms.asymmetry == 0.0);
  CHECK(fitness_split(p, spec) == doctest::Approx(terms.total()).epsilon(1e-14));
  CHECK(fitness_split(p, spec) == doctest::Approx(1.622).epsilon(5e-4));
}

TEST_CASE("asymmetry term") {
  const auto p = pops({0, 0.6, 0, 0.4, 0});
  CHECK(fitness_split(p, FitnessSpec::split(2)) == doctest::Approx(std::sqrt(0.02) + 0.2).epsilon(1e-14));
  // Empty pair: asymmetry term is dropped rather than dividing by zero.
  const auto empty = pops({0, 0, 1, 0, 0});
  const double f = fitness_split(empty, FitnessSpec::split(2));
  CHECK(std::isfinite(f));
  CHECK(f == doctest::Approx(std::sqrt(1.5) + 1.0));
}

TEST_CASE("fitness agrees with the term-by-term oracle on random populations") {
  std::mt19937_64 rng(11);
  const auto spec = FitnessSpec::split(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = oracle::random_probabilities(rng, 11);
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(p.data(), 11);
    const double f = fitness_split(MomentumPopulations(v), spec);
    CHECK(f == doctest::Approx(oracle::split_penalty(p, as_vector(spec.target)).total()).epsilon(1e-12));
    CHECK(f >= 0.0);
  }
}

TEST_CASE("dual fitness is the sum of the two runs") {
  const auto plus = FitnessSpec::single_bin(1, 2);
  const auto minus = FitnessSpec::single_bin(-1, 2);
  CHECK(fitness_dual(pops({0, 0, 0, 1, 0}), pops({0, 1, 0, 0, 0}), plus, minus) == 0.0);

  const auto a = pops({0.001, 0.0005, 0.0015, 0.9962, 0.0008});
  const auto b = pops({0.0009, 0.9951, 0.002, 0.0011, 0.0009});
  CHECK(fitness_dual(a, b, plus, minus) ==
        doctest::Approx(fitness_split(a, plus) + fitness_split(b, minus)).epsilon(1e-15));

  const auto leaked = pops({0, 0, 1, 0, 0});
  const double f = fitness_dual(pops({0, 0, 0, 1, 0}), leaked, plus, minus);
  CHECK(f == doctest::Approx(fitness_split(leaked, minus)));
  CHECK(f == doctest::Approx(std::sqrt(2.0) + 1.0));
}

TEST_CASE("variation from the desired populations") {
  const auto spec = FitnessSpec::split(2);
  CHECK(variation_from_desired(pops({0, 0.5, 0, 0.5, 0}), spec) < 1e-12);
  CHECK(variation_from_desired(pops({0, 0, 1, 0, 0}), spec) == doctest::Approx(100.0));
}

TEST_CASE("fitness specs validate their targets") {
  FitnessSpec s = FitnessSpec::split(2);
  s.target(2) = 0.3;
  CHECK_THROWS_AS(s.validate(), DomainError);
  FitnessSpec t = FitnessSpec::split(2);
  t.free_bins = {7};
  CHECK_THROWS_AS(t.validate(), DomainError);
  CHECK_THROWS_AS(fitness_split(pops({0, 0, 1}), FitnessSpec::split(2)), DimensionError);
}

TEST_CASE("stage objectives score protocols by propagation") {
  const auto lattice = make_default_config();
  const auto flat = ShakingProtocol::flat(1e-4);
  // A flat protocol leaves the ground state where it is.
  const auto split = split_objective(lattice).evaluate(flat);
  REQUIRE(split.populations.size() == 1);
  CHECK(split.fitness == doctest::Approx(fitness_split(populations_of(ground_state(lattice)), FitnessSpec::split())).epsilon(1e-5));
  // Mirror symmetry makes the two dual runs score alike under a flat protocol.
  const auto prop = propagate_objective(lattice).evaluate(flat);
  REQUIRE(prop.populations.size() == 2);
  for (int n = -5; n <= 5; ++n) {
    CHECK(prop.populations[0].at(n) == doctest::Approx(prop.populations[1].at(-n)).epsilon(1e-12));
  }
  const auto refl = reflect_objective(lattice).evaluate(flat);
  CHECK(refl.fitness > 0.0);
}

TEST_CASE("protocols beyond the phase bound are infeasible") {
  const auto lattice = make_default_config();
  const auto objective = split_objective(lattice);
  const auto p = random_protocol(kDefaultLines, kDefaultBandwidthHz, 1e-4, kDefaultSigma, 11);
  const double peak = sample_midpoints(p, 1000).cwiseAbs().maxCoeff();
  REQUIRE(peak > 0.0);
  // Scaled just inside and just outside the bound.
  const auto inside = p.with_amplitudes(p.amplitudes() * (0.99 * kMaxPhase / peak));
  const auto outside = p.with_amplitudes(p.amplitudes() * (1.01 * kMaxPhase / peak));
  CHECK(std::isfinite(objective(inside)));
  CHECK(std::isinf(objective(outside)));
  // Direct evaluation still reports the populations.
  CHECK(objective.evaluate(outside).populations.size() == 1);
}

TEST_CASE("recombination target is the ground-state row") {
  const auto lattice = make_default_config();
  const auto g = ground_state(lattice);
  const auto objective = recombine_objective(g, lattice);
  CHECK(objective(ShakingProtocol::flat(1e-4)) < 1e-5);
}
