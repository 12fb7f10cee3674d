#pragma once

// Settings shared by every subcommand: lattice, integrator, GA, seeding.
// Loaded from an optional JSON file, then overridden by command-line flags.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sli/ga.hpp"
#include "sli/propagator.hpp"
#include "sli/units.hpp"

namespace sli::cli {

struct RunConfig {
  double depth_er = constants::kDefaultDepth;
  double wavelength_m = constants::kDefaultWavelength;
  double atom_mass_kg = constants::kRubidium87Mass;

  PropagationSettings propagation;
  GAConfig ga;

  std::optional<std::uint64_t> seed;
  int threads = 1;

  LatticeConfig lattice() const { return LatticeConfig(depth_er, wavelength_m, atom_mass_kg); }
};

/// Fields absent from the document keep their current values.
void apply_json(RunConfig& config, const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

Backend parse_backend(const std::string& name);
std::string to_string(Backend backend);

}  // namespace sli::cli
