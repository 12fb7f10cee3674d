#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sli/units.hpp"

using namespace sli;

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("default lattice is 10 E_R") {
  CHECK(make_default_config().depth_er() == 10.0);
}

TEST_CASE("recoil frequency of Rb-87 at 1064 nm") {
  // E_R / h = h / (2 m lambda^2)
  const double expected = 6.62607015e-34 / (2.0 * 1.44316060e-25 * 1064e-9 * 1064e-9);
  const LatticeConfig c = make_default_config();
  CHECK(c.recoil_frequency_hz() == doctest::Approx(expected).epsilon(1e-12));
  CHECK(c.recoil_frequency_hz() == doctest::Approx(2030).epsilon(0.01));
}

TEST_CASE("doubling the wavelength halves k_L and quarters E_R") {
  const LatticeConfig a = make_default_config();
  const LatticeConfig b = a.with_wavelength(2.0 * a.wavelength_m());
  CHECK(b.wavenumber() == doctest::Approx(a.wavenumber() / 2.0).epsilon(1e-14));
  CHECK(b.recoil_energy() == doctest::Approx(a.recoil_energy() / 4.0).epsilon(1e-14));
}

TEST_CASE("lattice config rejects unphysical values") {
  CHECK_THROWS_AS(LatticeConfig(-1.0, 1064e-9, 1e-25), DomainError);
  CHECK_THROWS_AS(LatticeConfig(10.0, 0.0, 1e-25), DomainError);
  CHECK_THROWS_AS(LatticeConfig(10.0, 1064e-9, -1.0), DomainError);
}

TEST_CASE("variation of identical one-hot bins is zero") {
  const auto p = MomentumPopulations::one_hot(5, 0);
  CHECK(variation(p, p) == 0.0);
}

TEST_CASE("variation of orthogonal bins is 100") {
  CHECK(variation(MomentumPopulations::one_hot(5, 1), MomentumPopulations::one_hot(5, -1)) == 100.0);
}

TEST_CASE("variation of the tabulated ground-state row with itself") {
  const std::vector<double> row{0.0026, 0.1345, 0.7259, 0.1345, 0.0026};
  const double expected = oracle::variation(row, row);
  CHECK(expected == doctest::Approx(43.69).epsilon(1e-4));
  const Eigen::VectorXd p = to_eigen(row);
  CHECK(variation(p, p) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("variation rejects mismatched truncation") {
  CHECK_THROWS_AS(variation(MomentumPopulations::one_hot(5, 0), MomentumPopulations::one_hot(4, 0)),
                  DimensionError);
}

TEST_CASE("variation properties on random probability vectors") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t size = 1 + 2 * (trial % 7);
    const auto pv = oracle::random_probabilities(rng, size);
    const auto qv = oracle::random_probabilities(rng, size);
    const Eigen::VectorXd p = to_eigen(pv);
    const Eigen::VectorXd q = to_eigen(qv);
    CHECK(variation(p, p) == doctest::Approx((1.0 - p.squaredNorm()) * 100.0).epsilon(1e-14));
    CHECK(variation(p, q) == variation(q, p));
    CHECK(variation(p, q) >= 0.0);
    CHECK(variation(p, q) <= 100.0);
    CHECK(normalized_variation(p, p) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("self-variation vanishes only for one-hot vectors") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd p = to_eigen(oracle::random_probabilities(rng, 11));
    CHECK(variation(p, p) > 0.0);
  }
  for (int n = -5; n <= 5; ++n) {
    const auto p = MomentumPopulations::one_hot(5, n);
    CHECK(variation(p, p) == 0.0);
  }
}

TEST_CASE("signal velocity change matches numerical quadrature") {
  const SignalSpec s = SignalSpec::sinusoid(0.115, 2.0 * M_PI * 7000.0, 0.3, 0.05);
  const double t0 = 1e-4;
  const double t1 = 2.3e-3;
  const int steps = 200000;
  double sum = 0.0;
  const double h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) sum += s.acceleration(t0 + (i + 0.5) * h) * h;
  CHECK(s.velocity_change(t0, t1) == doctest::Approx(sum).epsilon(1e-8));
  CHECK(SignalSpec::dc(0.76).velocity_change(0.0, 2.0) == doctest::Approx(1.52));
  CHECK(SignalSpec::none().is_zero());
}

TEST_CASE("signal validation") {
  SignalSpec bad = SignalSpec::none();
  bad.a_dc = 1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK_THROWS_AS(SignalSpec::sinusoid(1.0, -1.0).validate(), DomainError);
}
