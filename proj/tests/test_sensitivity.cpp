#include <doctest.h>

#include <algorithm>
#include <random>

#include "sli/sensitivity.hpp"

using namespace sli;

namespace {

const LatticeConfig kLattice = make_default_config();

// A short plan whose split is a random (asymmetric) protocol, so the final
// populations depend on the sign of the acceleration.
SequencePlan probe_plan() {
  const auto split = random_protocol(kDefaultLines, kDefaultBandwidthHz, 2e-4, kDefaultSigma, 4);
  return make_michelson({split, ShakingProtocol::flat(2e-4), ShakingProtocol::flat(1e-4), std::nullopt}, 1);
}

Eigen::VectorXd populations_at(const SequencePlan& plan, double a) {
  const auto signal = a == 0.0 ? SignalSpec::none() : SignalSpec::dc(a);
  return run_sequence(plan, kLattice, signal, PropagationSettings{}).values();
}

}  // namespace

TEST_CASE("synthetic power law is recovered exactly") {
  std::vector<double> t, y;
  for (double ti : {2e-3, 3e-3, 4.5e-3, 6e-3, 8e-3, 1e-2}) {
    t.push_back(ti);
    y.push_back(3.0 * std::pow(ti, -2.0));
  }
  const auto fit = fit_power_law(t, y);
  CHECK(std::abs(fit.exponent - 2.0) < 1e-6);
  CHECK(std::abs(fit.prefactor - 3.0) < 1e-6);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.exponent_stderr < 1e-8);
  CHECK(fit(5e-3) == doctest::Approx(3.0 / 25e-6));
  CHECK(fit.x_min == 2e-3);
  CHECK(fit.x_max == 1e-2);
}

TEST_CASE("two points determine the fit") {
  const auto fit = fit_power_law({1.0, 4.0}, {8.0, 1.0});
  CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fit.prefactor == doctest::Approx(8.0).epsilon(1e-12));
  CHECK_THROWS_AS(fit_power_law({1.0}, {1.0}), DomainError);
  CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {1.0}), DimensionError);
}

TEST_CASE("unusable points are excluded and reported") {
  const double inf = std::numeric_limits<double>::infinity();
  const auto fit = fit_power_law({1.0, 2.0, 3.0, 4.0, 5.0}, {1.0, 0.25, inf, 0.0625, -1.0});
  CHECK(fit.excluded == std::vector<std::size_t>{2, 4});
  CHECK(fit.exponent == doctest::Approx(2.0));
}

TEST_CASE("the fit does not depend on point order") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::vector<std::pair<double, double>> pts;
  for (int i = 1; i <= 9; ++i) {
    const double t = 1e-3 * i;
    pts.push_back({t, 0.2 * std::pow(t, -2.3) * std::exp(noise(rng))});
  }
  auto fit_of = [](const std::vector<std::pair<double, double>>& v) {
    std::vector<double> x, y;
    for (const auto& [a, b] : v) {
      x.push_back(a);
      y.push_back(b);
    }
    return fit_power_law(x, y);
  };
  const auto base = fit_of(pts);
  CHECK(base.exponent_stderr > 0.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto f = fit_of(pts);
    CHECK(f.exponent == doctest::Approx(base.exponent).epsilon(1e-12));
    CHECK(f.prefactor == doctest::Approx(base.prefactor).epsilon(1e-12));
  }
}

TEST_CASE("more interrogation time never loosens a decreasing power law") {
  const auto fit = fit_power_law({2e-3, 4e-3, 8e-3}, {1e-3, 2.5e-4, 6.25e-5});
  double prev = fit(1e-3);
  for (double t = 2e-3; t < 1.0; t *= 1.7) {
    CHECK(fit(t) < prev);
    prev = fit(t);
  }
}

TEST_CASE("projection scales with atom number and flags extrapolation") {
  const auto fit = fit_power_law({2e-3, 4e-3, 8e-3}, {1e-3, 2.5e-4, 6.25e-5});
  const auto one = project_sensitivity(fit, 4e-3, 1.0);
  const auto four = project_sensitivity(fit, 4e-3, 4.0);
  CHECK(four.min_detectable == doctest::Approx(one.min_detectable / 2.0));
  CHECK(one.relative_to_g == doctest::Approx(one.min_detectable / constants::kStandardGravity));
  CHECK(!one.extrapolated);
  const auto far = project_sensitivity(fit, 1.0, 1e6);
  CHECK(far.extrapolated);
  CHECK(far.far_extrapolated);
  const auto near = project_sensitivity(fit, 1e-2, 1.0);
  CHECK(near.extrapolated);
  CHECK(!near.far_extrapolated);
}

TEST_CASE("Cramer-Rao bound") {
  CHECK(cramer_rao_bound(4.0, 1.0) == doctest::Approx(0.5));
  CHECK(cramer_rao_bound(4.0, 4.0) == doctest::Approx(0.25));
  CHECK(std::isinf(cramer_rao_bound(0.0, 1.0)));
}

TEST_CASE("Fisher assembly from populations") {
  Eigen::VectorXd p0(3), plus(3), minus(3);
  p0 << 0.25, 0.5, 0.25;
  plus << 0.26, 0.5, 0.24;
  minus << 0.24, 0.5, 0.26;
  // Linear response: half steps move by half as much.
  const Eigen::VectorXd ph = (p0 + plus) / 2.0;
  const Eigen::VectorXd mh = (p0 + minus) / 2.0;
  const auto r = fisher_from_populations(p0, plus, minus, ph, mh, 0.0, 0.01, 1.0, 1e-9, 0.05);
  CHECK(r.derivatives(0) == doctest::Approx(1.0));
  CHECK(r.derivatives(1) == doctest::Approx(0.0));
  CHECK(r.derivatives(2) == doctest::Approx(-1.0));
  CHECK(r.information_per_atom == doctest::Approx(8.0));
  CHECK(r.terms.sum() == doctest::Approx(r.information_per_atom));
  CHECK((r.terms.array() >= 0.0).all());
  CHECK(r.min_detectable == doctest::Approx(1.0 / std::sqrt(8.0)));
  CHECK(r.converged);

  const auto many = fisher_from_populations(p0, plus, minus, ph, mh, 0.0, 0.01, 4.0, 1e-9, 0.05);
  CHECK(many.min_detectable == doctest::Approx(r.min_detectable / 2.0));

  const auto flat = fisher_from_populations(p0, p0, p0, p0, p0, 0.0, 0.01, 1.0, 1e-9, 0.05);
  CHECK(flat.zero_information);
  CHECK(std::isinf(flat.min_detectable));
  CHECK(!flat.warning.empty());
}

TEST_CASE("finite-difference derivatives agree with a five-point stencil") {
  const auto plan = probe_plan();
  const double h = 0.01;
  const auto r = fisher_at(plan, kLattice, 0.0, 1.0, PropagationSettings{});
  const Eigen::VectorXd stencil = (-populations_at(plan, 2 * h) + 8.0 * populations_at(plan, h) -
                                   8.0 * populations_at(plan, -h) + populations_at(plan, -2 * h)) /
                                  (12.0 * h);
  REQUIRE(r.derivatives.size() == stencil.size());
  const double scale = stencil.cwiseAbs().maxCoeff();
  REQUIRE(scale > 0.0);
  CHECK((r.derivatives - stencil).cwiseAbs().maxCoeff() <= FisherOptions{}.richardson_tolerance * scale);
  CHECK(r.converged);
  CHECK(r.information_per_atom > 0.0);
  CHECK(r.min_detectable == doctest::Approx(1.0 / std::sqrt(r.information_per_atom)));
  CHECK(r.populations.isApprox(populations_at(plan, 0.0)));
}

TEST_CASE("Fisher options are validated") {
  FisherOptions o;
  o.delta_a = 0.0;
  CHECK_THROWS_AS(fisher_at(probe_plan(), kLattice, 0.0, 1.0, PropagationSettings{}, o), DomainError);
}

TEST_CASE("scaling fit needs four finite points") {
  std::vector<ScalingPoint> pts;
  for (int k = 1; k <= 3; ++k) {
    ScalingPoint p;
    p.repeats = k;
    p.interrogation_time_s = 1e-3 * k;
    p.total_time_s = 2e-3 * k;
    p.fisher.min_detectable = 1e-3 / (k * k);
    pts.push_back(p);
  }
  CHECK_THROWS_AS(fit_scaling(pts), DomainError);
  ScalingPoint bad = pts.back();
  bad.fisher.min_detectable = std::numeric_limits<double>::infinity();
  pts.push_back(bad);
  CHECK_THROWS_AS(fit_scaling(pts), DomainError);
  ScalingPoint fourth = pts.front();
  fourth.repeats = 4;
  fourth.interrogation_time_s = 4e-3;
  fourth.total_time_s = 8e-3;
  fourth.fisher.min_detectable = 1e-3 / 16.0;
  pts.push_back(fourth);
  const auto study = fit_scaling(pts);
  CHECK(study.fit.exponent == doctest::Approx(2.0));
  CHECK(study.fit_total.exponent == doctest::Approx(2.0));
  CHECK(!study.points[3].included);
}
