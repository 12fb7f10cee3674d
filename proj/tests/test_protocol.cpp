#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "sli/errors.hpp"
#include "sli/protocol.hpp"

using namespace sli;

namespace {

ShakingProtocol sample(std::uint64_t seed) {
  return random_protocol(kDefaultLines, kDefaultBandwidthHz, kDefaultStageDuration, kDefaultSigma, seed);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sli_test_" + name);
}

}  // namespace

TEST_CASE("random protocol shape and reproducibility") {
  const auto a = random_protocol(100, 35000.0, 5e-4, 100.0, 42);
  CHECK(a.amplitudes().size() == 200);
  CHECK(a.lines() == 100);
  CHECK(a.line_frequency(1) == doctest::Approx(350.0));
  CHECK(a.line_frequency(100) == doctest::Approx(35000.0));
  CHECK(a == random_protocol(100, 35000.0, 5e-4, 100.0, 42));
  CHECK(!(a == random_protocol(100, 35000.0, 5e-4, 100.0, 43)));
}

TEST_CASE("sigma zero gives a flat protocol") {
  const auto p = random_protocol(100, 35000.0, 5e-4, 0.0, 1);
  for (double t : {0.0, 1e-4, 2.5e-4, 4.9e-4}) CHECK(realize(p, t) == 0.0);
}

TEST_CASE("phase vanishes at both ends") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = sample(seed);
    CHECK(realize(p, 0.0) == 0.0);
    CHECK(std::abs(realize(p, p.duration_s())) < 1e-12);
  }
}

TEST_CASE("unit cosine line at the envelope peak") {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(200);
  a(0) = 1.0;
  const ShakingProtocol p(a, 35000.0, 1.0 / 350.0, 0.37);
  // f_1 T = 1, so cos(2 pi f_1 T / 2) = -1 at the midpoint; use T = 2 / f_1 for +1.
  const ShakingProtocol q(a, 35000.0, 2.0 / 350.0, 0.37);
  CHECK(realize(q, q.duration_s() / 2.0) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK(realize(p, p.duration_s() / 2.0) == doctest::Approx(-0.37).epsilon(1e-12));
}

TEST_CASE("realize rejects times outside the protocol") {
  const auto p = sample(1);
  CHECK_THROWS_AS(realize(p, -1e-9), DomainError);
  CHECK_THROWS_AS(realize(p, p.duration_s() * 1.001), DomainError);
}

TEST_CASE("realize is linear in the coefficients") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, kDefaultStageDuration);
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const auto p = sample(s);
    const auto q = sample(100 + s);
    const double alpha = 0.3 * s - 1.0;
    const auto combo = p.with_amplitudes(p.amplitudes() + alpha * q.amplitudes());
    for (int k = 0; k < 5; ++k) {
      const double t = u(rng);
      CHECK(realize(combo, t) ==
            doctest::Approx(realize(p, t) + alpha * realize(q, t)).epsilon(1e-10));
    }
  }
}

TEST_CASE("midpoint sampler agrees with direct evaluation") {
  const auto p = sample(9);
  const int steps = 5020;
  const Eigen::VectorXd s = sample_midpoints(p, steps);
  for (int k : {0, 1, 7, 8, 2500, 5019}) {
    const double t = (k + 0.5) * p.duration_s() / steps;
    CHECK(s(k) == doctest::Approx(realize(p, t)).epsilon(1e-9));
  }
}

TEST_CASE("gain calibration keeps the RMS phase within the intended band") {
  int inside = 0;
  const int seeds = 200;
  for (int s = 1; s <= seeds; ++s) {
    const auto p = sample(static_cast<std::uint64_t>(s));
    const Eigen::VectorXd phi = sample_midpoints(p, 5020);
    const double rms = std::sqrt(phi.squaredNorm() / phi.size());
    if (rms >= M_PI / 2.0 && rms <= 2.0 * M_PI) ++inside;
  }
  CHECK(inside >= 0.95 * seeds);
}

TEST_CASE("time reversal mirrors the phase") {
  const auto p = sample(5);
  const auto r = time_reversed(p);
  for (double t : {0.0, 1e-5, 1.3e-4, 2.51e-4, 4.4e-4}) {
    CHECK(realize(r, t) == doctest::Approx(realize(p, p.duration_s() - t)).epsilon(1e-9));
  }
}

TEST_CASE("concatenation adds durations and joins at zero phase") {
  const auto p = sample(1);
  const auto single = concatenate({p});
  CHECK(single.duration_s() == p.duration_s());
  const auto pair = concatenate({p, sample(2)});
  CHECK(pair.duration_s() == doctest::Approx(2.0 * p.duration_s()));
  CHECK(std::abs(pair.phase_at(p.duration_s())) < 1e-12);
  CHECK(std::abs(pair.phase_at(p.duration_s() - 1e-9)) < 1e-6);
  CHECK(std::abs(pair.phase_at(p.duration_s() + 1e-9)) < 1e-6);
  CHECK(pair.stage_start(1) == p.duration_s());
}

TEST_CASE("protocol file round trip") {
  auto p = sample(77);
  p.metadata().fitness = 0.0123;
  p.metadata().stage_label = "split";
  p.metadata().lattice = make_default_config();
  const auto path = temp_file("roundtrip.json");
  save_protocol(p, path);
  CHECK(load_protocol(path) == p);
  std::filesystem::remove(path);
}

TEST_CASE("protocol file with a missing field names it") {
  const auto p = sample(1);
  std::string text = to_text(p);
  const auto pos = text.find("\"l\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 3, "\"x\"");
  try {
    protocol_from_text(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("`l`") != std::string::npos);
  }
}

TEST_CASE("protocol file from a newer version is refused") {
  std::string text = to_text(sample(1));
  const auto pos = text.find("\"version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "\"version\": 2");
  CHECK_THROWS_AS(protocol_from_text(text), UnsupportedVersionError);
}

TEST_CASE("malformed protocol file reports the line") {
  try {
    protocol_from_text("{\n  \"version\": 1,\n  oops\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
