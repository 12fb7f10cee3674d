#include "run_config.hpp"

#include <fstream>

#include "sli/errors.hpp"

namespace sli::cli {

namespace {

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& into) {
  if (obj.contains(key)) into = obj.at(key).get<T>();
}

}  // namespace

Backend parse_backend(const std::string& name) {
  if (name == "ladder") return Backend::ladder;
  if (name == "split-step" || name == "split_step") return Backend::split_step;
  throw ParseError("unknown backend `" + name + "`");
}

std::string to_string(Backend backend) {
  return backend == Backend::ladder ? "ladder" : "split-step";
}

void apply_json(RunConfig& c, const nlohmann::json& doc) {
  try {
    if (doc.contains("lattice")) {
      const auto& l = doc.at("lattice");
      read(l, "depth_er", c.depth_er);
      read(l, "wavelength_m", c.wavelength_m);
      read(l, "atom_mass_kg", c.atom_mass_kg);
    }
    if (doc.contains("propagation")) {
      const auto& p = doc.at("propagation");
      read(p, "dt_s", c.propagation.dt_s);
      read(p, "grid_points", c.propagation.grid_points);
      read(p, "unitarity_tolerance", c.propagation.unitarity_tolerance);
      read(p, "edge_tolerance", c.propagation.edge_tolerance);
      if (p.contains("backend")) c.propagation.backend = parse_backend(p.at("backend").get<std::string>());
    }
    if (doc.contains("ga")) {
      const auto& g = doc.at("ga");
      read(g, "population", c.ga.population);
      read(g, "elites", c.ga.elites);
      read(g, "culled", c.ga.culled);
      read(g, "mutation_limit", c.ga.mutation_limit);
      read(g, "creep_rate", c.ga.creep_rate);
      read(g, "sigma", c.ga.sigma);
      read(g, "max_generations", c.ga.max_generations);
      read(g, "fitness_target", c.ga.fitness_target);
      read(g, "lines", c.ga.lines);
      read(g, "bandwidth_hz", c.ga.bandwidth_hz);
      read(g, "duration_s", c.ga.duration_s);
      if (g.contains("mix")) {
        const auto& m = g.at("mix");
        read(m, "one_point", c.ga.mix.one_point);
        read(m, "two_point", c.ga.mix.two_point);
        read(m, "mutation", c.ga.mix.mutation);
        read(m, "creep", c.ga.mix.creep);
      }
    }
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    read(doc, "threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config " + path.string() + ": " + e.what());
  }
  RunConfig c;
  apply_json(c, doc);
  return c;
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json doc;
  doc["lattice"] = {{"depth_er", c.depth_er},
                    {"wavelength_m", c.wavelength_m},
                    {"atom_mass_kg", c.atom_mass_kg}};
  doc["propagation"] = {{"dt_s", c.propagation.dt_s},
                        {"backend", to_string(c.propagation.backend)},
                        {"grid_points", c.propagation.grid_points},
                        {"unitarity_tolerance", c.propagation.unitarity_tolerance},
                        {"edge_tolerance", c.propagation.edge_tolerance}};
  doc["ga"] = {{"population", c.ga.population},
               {"elites", c.ga.elites},
               {"culled", c.ga.culled},
               {"mutation_limit", c.ga.mutation_limit},
               {"creep_rate", c.ga.creep_rate},
               {"sigma", c.ga.sigma},
               {"max_generations", c.ga.max_generations},
               {"fitness_target", c.ga.fitness_target},
               {"lines", c.ga.lines},
               {"bandwidth_hz", c.ga.bandwidth_hz},
               {"duration_s", c.ga.duration_s},
               {"mix",
                {{"one_point", c.ga.mix.one_point},
                 {"two_point", c.ga.mix.two_point},
                 {"mutation", c.ga.mix.mutation},
                 {"creep", c.ga.mix.creep}}}};
  if (c.seed) doc["seed"] = *c.seed;
  doc["threads"] = c.threads;
  return doc;
}

}  // namespace sli::cli
