#include <doctest.h>

#include "sli/robustness.hpp"

using namespace sli;

namespace {

const LatticeConfig kLattice = make_default_config();

ShakingProtocol sample(std::uint64_t seed) {
  return random_protocol(kDefaultLines, kDefaultBandwidthHz, 2e-4, kDefaultSigma, seed);
}

}  // namespace

TEST_CASE("grids") {
  CHECK(linear_grid(-1.0, 1.0, 5) == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
  CHECK(linear_grid(0.3, 0.3, 1) == std::vector<double>{0.3});
  CHECK_THROWS(linear_grid(0.0, 1.0, 0));
}

TEST_CASE("case construction per stage") {
  CHECK(robustness_case(StageKind::split, sample(1)).plane_waves.empty());
  CHECK(robustness_case(StageKind::reflect, sample(1)).plane_waves == std::vector<int>{1, -1});
  CHECK_THROWS_AS(robustness_case(StageKind::recombine, sample(1)), DomainError);
  const auto pops = case_populations(robustness_case(StageKind::propagate, sample(1)), kLattice,
                                     PropagationSettings{});
  CHECK(pops.size() == 22);
}

TEST_CASE("unperturbed points are exactly zero") {
  const auto c = robustness_case(StageKind::split, sample(2));
  const PropagationSettings s;
  CHECK(sweep_depth(c, kLattice, {0.0}, s)[0].variation_percent == 0.0);
  CHECK(sweep_wavelength(c, kLattice, {0.0}, s)[0].variation_percent == 0.0);
  CHECK(sweep_phase_noise(c, kLattice, {0.0}, s, 3)[0].variation_percent == 0.0);
  const auto para = sweep_parasitic(c, kLattice, {0.0}, {0.0, 1.0, 2.0}, s);
  for (const auto& p : para) CHECK(p.variation_percent == 0.0);
}

TEST_CASE("variation grows away from the nominal depth") {
  const auto c = robustness_case(StageKind::split, sample(3));
  const auto sweep = sweep_depth(c, kLattice, {-0.1, -0.05, 0.0, 0.05, 0.1}, PropagationSettings{});
  REQUIRE(sweep.size() == 5);
  CHECK(sweep[0].variation_percent > sweep[1].variation_percent);
  CHECK(sweep[4].variation_percent > sweep[3].variation_percent);
  for (const auto& p : sweep) CHECK(p.variation_percent >= 0.0);
  CHECK(sweep[1].perturbation == -0.05);
}

TEST_CASE("parasitic phase is 2 pi periodic") {
  const auto c = robustness_case(StageKind::split, sample(4));
  const auto a = sweep_parasitic(c, kLattice, {0.04}, {0.7, 0.7 + 2.0 * M_PI}, PropagationSettings{});
  CHECK(a[0].variation_percent == doctest::Approx(a[1].variation_percent).epsilon(1e-8));
  CHECK(a[0].variation_percent > 0.0);
}

TEST_CASE("an in-phase stray lattice on a flat protocol is a depth change") {
  // With phi = 0 the two lattices add to one of depth (1 + eps) V0.
  RobustnessCase c = robustness_case(StageKind::propagate, ShakingProtocol::flat(3e-4));
  c.reload_ground_state = false;
  const PropagationSettings s;
  for (double eps : {0.01, 0.04}) {
    const double depth = sweep_depth(c, kLattice, {eps}, s)[0].variation_percent;
    const double stray = sweep_parasitic(c, kLattice, {eps}, {0.0}, s)[0].variation_percent;
    CHECK(stray == doctest::Approx(depth).epsilon(1e-8));
  }
}

TEST_CASE("noise sweeps are reproducible and independent of threads") {
  const auto c = robustness_case(StageKind::split, sample(5));
  const PropagationSettings s;
  const auto a = sweep_phase_noise(c, kLattice, {0.05, 0.2}, s, 3, 17, 1);
  const auto b = sweep_phase_noise(c, kLattice, {0.05, 0.2}, s, 3, 17, 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(a[i].variation_percent == b[i].variation_percent);
    CHECK(a[i].stddev == b[i].stddev);
  }
  CHECK(a[1].variation_percent > a[0].variation_percent);
  CHECK(a[0].stddev > 0.0);
  const auto other = sweep_phase_noise(c, kLattice, {0.05}, s, 3, 18, 1);
  CHECK(other[0].variation_percent != a[0].variation_percent);
}

TEST_CASE("wavelength sweep holds the physical depth") {
  // At fixed physical depth a 1% longer wavelength lowers E_R by ~2%, so the
  // ground-state split protocol sees a deeper lattice in recoil units.
  const auto c = robustness_case(StageKind::split, ShakingProtocol::flat(1e-4));
  const auto w = sweep_wavelength(c, kLattice, {0.01}, PropagationSettings{});
  const auto d = sweep_depth(c, kLattice, {std::pow(1.01, 2) - 1.0}, PropagationSettings{});
  // A flat protocol leaves each reloaded ground state in place, so only the
  // depth in recoil units matters and the two sweeps coincide.
  CHECK(w[0].variation_percent > 0.0);
  CHECK(w[0].variation_percent == doctest::Approx(d[0].variation_percent).epsilon(1e-3));
}
