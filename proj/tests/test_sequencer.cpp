#include <doctest.h>

#include <filesystem>

#include "sli/errors.hpp"
#include "sli/sequencer.hpp"

using namespace sli;

namespace {

const LatticeConfig kLattice = make_default_config();

ShakingProtocol stage(std::uint64_t seed, double duration = kDefaultStageDuration) {
  return random_protocol(kDefaultLines, kDefaultBandwidthHz, duration, kDefaultSigma, seed);
}

StageSet stages() {
  return {stage(1), stage(2), stage(3), std::nullopt};
}

// Short flat stages keep whole-sequence runs cheap.
StageSet quick_stages() {
  const double t = 5e-5;
  return {ShakingProtocol::flat(t), ShakingProtocol::flat(t), ShakingProtocol::flat(t),
          ShakingProtocol::flat(t)};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sli_seq_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("Michelson plan ordering and timing") {
  const auto plan = make_michelson(stages());
  const auto& s = plan.stages();
  REQUIRE(s.size() == 4);
  CHECK(s[0].kind == StageKind::split);
  CHECK(s[1].kind == StageKind::propagate);
  CHECK(s[1].repeat == 2);
  CHECK(s[2].kind == StageKind::reflect);
  CHECK(s[3].kind == StageKind::propagate);
  CHECK(s[3].repeat == 2);
  CHECK(plan.interrogation_time_s() == doctest::Approx(2.008e-3).epsilon(1e-12));
  CHECK(plan.total_duration_s() == doctest::Approx(6 * 5.02e-4).epsilon(1e-12));
  CHECK(!plan.has_recombine());
}

TEST_CASE("reciprocal plan ordering and timing") {
  const auto plan = make_reciprocal(stages());
  const auto& s = plan.stages();
  REQUIRE(s.size() == 6);
  const StageKind kinds[] = {StageKind::split, StageKind::propagate, StageKind::reflect,
                             StageKind::propagate, StageKind::reflect, StageKind::propagate};
  const int repeats[] = {1, 1, 1, 2, 1, 1};
  for (int i = 0; i < 6; ++i) {
    CHECK(s[i].kind == kinds[i]);
    CHECK(s[i].repeat == repeats[i]);
  }
  CHECK(plan.interrogation_time_s() == doctest::Approx(2.008e-3).epsilon(1e-12));
  CHECK(make_reciprocal(stages(), 3).interrogation_time_s() == doctest::Approx(12 * 5.02e-4));
}

TEST_CASE("recombination stage is appended and stripped") {
  const auto plan = make_michelson(stages());
  const auto full = plan.with_recombine(stage(4));
  CHECK(full.has_recombine());
  CHECK(full.stages().size() == 5);
  CHECK(full.arms().stages().size() == 4);
  CHECK(full.with_recombine(stage(5)).stages().back().protocol == stage(5));
  CHECK_THROWS_AS(make_michelson(stages(), 0), DomainError);
}

TEST_CASE("stage names parse") {
  CHECK(parse_stage_kind("split") == StageKind::split);
  CHECK(parse_stage_kind("prop") == StageKind::propagate);
  CHECK(parse_topology("reciprocal") == Topology::reciprocal);
  CHECK_THROWS_AS(parse_stage_kind("bounce"), ParseError);
  CHECK_THROWS_AS(parse_topology("mach-zehnder"), ParseError);
}

TEST_CASE("flat stages leave the ground state in place") {
  const auto plan = make_michelson(quick_stages());
  const auto p = run_sequence(plan, kLattice, SignalSpec::none(), PropagationSettings{});
  CHECK(normalized_variation(p, populations_of(ground_state(kLattice))) < 1e-6);
}

TEST_CASE("zero AC amplitude gives zero response") {
  const auto plan = make_reciprocal(quick_stages());
  const auto scan = scan_ac_response(plan, kLattice, 0.0, {0.0, 1000.0, 7000.0}, PropagationSettings{});
  REQUIRE(scan.size() == 3);
  for (const auto& pt : scan) CHECK(pt.variation_percent == 0.0);
  CHECK(scan[2].x == 7000.0);
}

TEST_CASE("a sine signal at zero frequency is no signal") {
  const auto plan = make_reciprocal(quick_stages());
  const auto scan = scan_ac_response(plan, kLattice, 0.115, {0.0}, PropagationSettings{});
  CHECK(scan[0].variation_percent == 0.0);
}

TEST_CASE("DC response approaches the zero-signal result continuously") {
  const auto plan = make_michelson({stage(1, 2e-4), ShakingProtocol::flat(2e-4), ShakingProtocol::flat(2e-4), std::nullopt});
  const auto ref = run_sequence(plan, kLattice, SignalSpec::none(), PropagationSettings{});
  const auto scan = scan_dc_response(plan, kLattice, {1e-1, 1e-2, 1e-3, 0.0}, ref, PropagationSettings{});
  CHECK(scan[3].variation_percent == 0.0);
  CHECK(scan[0].variation_percent > scan[1].variation_percent);
  CHECK(scan[1].variation_percent > scan[2].variation_percent);
  CHECK(scan[2].variation_percent < 1e-2);
  CHECK_THROWS_AS(scan_dc_response(plan, kLattice, {}, ref, PropagationSettings{}), DomainError);
}

TEST_CASE("failures name the stage they happened in") {
  const auto plan = make_michelson(stages());
  PropagationSettings s;
  s.edge_tolerance = 0.0;
  try {
    run_sequence(plan, kLattice, SignalSpec::none(), s, 11);
    FAIL("expected a basis overflow");
  } catch (const BasisOverflowError& e) {
    CHECK(std::string(e.what()).rfind("stage 1 (split): ", 0) == 0);
  }
}

TEST_CASE("sequence manifest round trip") {
  const auto dir = scratch_dir("manifest");
  const auto set = stages();
  save_protocol(set.split, dir / "split.json");
  save_protocol(set.propagate, dir / "propagate.json");
  save_protocol(set.reflect, dir / "reflect.json");
  save_protocol(stage(9), dir / "recombine.json");
  SequenceManifest m;
  m.topology = Topology::reciprocal;
  m.repeats = 2;
  m.split = "split.json";
  m.propagate = "propagate.json";
  m.reflect = "reflect.json";
  m.recombine = "recombine.json";
  save_manifest(m, dir / "sequence.json");

  const auto loaded = load_manifest(dir / "sequence.json");
  CHECK(loaded.topology == Topology::reciprocal);
  CHECK(loaded.repeats == 2);
  CHECK(loaded.recombine == "recombine.json");
  const auto plan = plan_from_manifest(loaded, dir);
  CHECK(plan.topology() == Topology::reciprocal);
  CHECK(plan.has_recombine());
  CHECK(plan.stages()[0].protocol == set.split);
  CHECK(plan.interrogation_time_s() == doctest::Approx(8 * 5.02e-4));

  std::filesystem::remove(dir / "reflect.json");
  try {
    plan_from_manifest(loaded, dir);
    FAIL("expected a missing-file error");
  } catch (const Error& e) {
    const std::string what = e.what();
    CHECK(what.find("stage reflect") != std::string::npos);
    CHECK(what.find("not found") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
