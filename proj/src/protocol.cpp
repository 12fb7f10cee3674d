#include "sli/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace sli {

namespace {

constexpr double kPi = std::numbers::pi;

double envelope(double t, double duration) {
  const double s = std::sin(kPi * t / duration);
  return s * s;
}

std::string number(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep floats recognizable as floats in the document.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) { return nlohmann::json(s).dump(); }

}  // namespace

double calibrated_gain(int lines, double sigma) {
  if (lines < 1 || !(sigma > 0.0)) throw DomainError("calibrated_gain: need l >= 1 and sigma > 0");
  // The sin^2 envelope scales the time-averaged power by 3/8; undo that so
  // the enveloped phase, not the bare sum, has RMS near pi.
  return kPi / (sigma * std::sqrt(static_cast<double>(lines) * 3.0 / 8.0));
}

ShakingProtocol::ShakingProtocol(Eigen::VectorXd amplitudes, double bandwidth_hz,
                                 double duration_s, double gain, ProtocolMetadata meta)
    : amplitudes_(std::move(amplitudes)),
      bandwidth_hz_(bandwidth_hz),
      duration_s_(duration_s),
      gain_(gain),
      meta_(std::move(meta)) {
  if (amplitudes_.size() < 2 || amplitudes_.size() % 2 != 0) {
    throw DimensionError("ShakingProtocol: amplitudes must hold 2l >= 2 entries");
  }
  if (!(duration_s_ > 0.0)) throw DomainError("ShakingProtocol: duration must be positive");
  if (!(bandwidth_hz_ > 0.0)) throw DomainError("ShakingProtocol: bandwidth must be positive");
  if (!std::isfinite(gain_)) throw DomainError("ShakingProtocol: gain must be finite");
}

ShakingProtocol ShakingProtocol::flat(double duration_s, int lines, double bandwidth_hz) {
  return {Eigen::VectorXd::Zero(2 * lines), bandwidth_hz, duration_s, calibrated_gain(lines)};
}

ShakingProtocol ShakingProtocol::with_amplitudes(Eigen::VectorXd amplitudes) const {
  if (amplitudes.size() != amplitudes_.size()) {
    throw DimensionError("with_amplitudes: genome length mismatch");
  }
  ShakingProtocol out = *this;
  out.amplitudes_ = std::move(amplitudes);
  return out;
}

ShakingProtocol random_protocol(int lines, double bandwidth_hz, double duration_s, double sigma,
                                std::uint64_t seed) {
  if (lines < 1) throw DomainError("random_protocol: l must be >= 1");
  if (sigma < 0.0) throw DomainError("random_protocol: sigma must be non-negative");
  Eigen::VectorXd amps = Eigen::VectorXd::Zero(2 * lines);
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < amps.size(); ++i) amps(i) = normal(rng);
  }
  const double gain = calibrated_gain(lines, sigma > 0.0 ? sigma : kDefaultSigma);
  ProtocolMetadata meta;
  meta.seed = seed;
  return {std::move(amps), bandwidth_hz, duration_s, gain, std::move(meta)};
}

double realize(const ShakingProtocol& protocol, double t) {
  const double duration = protocol.duration_s();
  if (!(t >= 0.0 && t <= duration)) {
    throw DomainError("realize: t = " + number(t) + " outside [0, " + number(duration) + "]");
  }
  const int l = protocol.lines();
  double sum = 0.0;
  for (int i = 1; i <= l; ++i) {
    const double arg = 2.0 * kPi * protocol.line_frequency(i) * t;
    sum += protocol.cosine()(i - 1) * std::cos(arg) + protocol.sine()(i - 1) * std::sin(arg);
  }
  return protocol.gain() * sum * envelope(t, duration);
}

Eigen::VectorXd sample_midpoints(const ShakingProtocol& protocol, int steps) {
  if (steps < 1) throw DomainError("sample_midpoints: steps must be >= 1");
  const int l = protocol.lines();
  const double duration = protocol.duration_s();
  const double spacing = protocol.line_spacing_hz();

  // a cos + b sin = Re[(a - i b) z^i]; the polynomial in z is evaluated by
  // Horner's rule in real arithmetic, several time samples at once.
  constexpr int kLanes = 8;
  const Eigen::VectorXd& a = protocol.amplitudes();
  Eigen::VectorXd out(steps);
  for (int k0 = 0; k0 < steps; k0 += kLanes) {
    const int lanes = std::min(kLanes, steps - k0);
    double zr[kLanes] = {}, zi[kLanes] = {}, accr[kLanes], acci[kLanes];
    for (int j = 0; j < lanes; ++j) {
      const double w = 2.0 * kPi * spacing * ((k0 + j + 0.5) * duration / steps);
      zr[j] = std::cos(w);
      zi[j] = std::sin(w);
    }
    for (int j = 0; j < kLanes; ++j) {
      accr[j] = a(l - 1);
      acci[j] = -a(2 * l - 1);
    }
    for (int i = l - 2; i >= 0; --i) {
      const double ar = a(i);
      const double ai = -a(l + i);
      for (int j = 0; j < kLanes; ++j) {
        const double r = accr[j] * zr[j] - acci[j] * zi[j] + ar;
        acci[j] = accr[j] * zi[j] + acci[j] * zr[j] + ai;
        accr[j] = r;
      }
    }
    for (int j = 0; j < lanes; ++j) {
      const double t = (k0 + j + 0.5) * duration / steps;
      out(k0 + j) = protocol.gain() * (accr[j] * zr[j] - acci[j] * zi[j]) * envelope(t, duration);
    }
  }
  return out;
}

ShakingProtocol time_reversed(const ShakingProtocol& protocol) {
  const int l = protocol.lines();
  const double duration = protocol.duration_s();
  Eigen::VectorXd amps(2 * l);
  for (int i = 1; i <= l; ++i) {
    const double wt = 2.0 * kPi * protocol.line_frequency(i) * duration;
    const double a = protocol.cosine()(i - 1);
    const double b = protocol.sine()(i - 1);
    amps(i - 1) = a * std::cos(wt) + b * std::sin(wt);
    amps(l + i - 1) = a * std::sin(wt) - b * std::cos(wt);
  }
  return protocol.with_amplitudes(std::move(amps));
}

ProtocolSequence::ProtocolSequence(std::vector<ShakingProtocol> stages)
    : stages_(std::move(stages)) {}

double ProtocolSequence::duration_s() const {
  double total = 0.0;
  for (const auto& s : stages_) total += s.duration_s();
  return total;
}

double ProtocolSequence::stage_start(std::size_t i) const {
  double t = 0.0;
  for (std::size_t k = 0; k < i && k < stages_.size(); ++k) t += stages_[k].duration_s();
  return t;
}

double ProtocolSequence::phase_at(double t) const {
  if (stages_.empty() || t < 0.0 || t > duration_s()) {
    throw DomainError("ProtocolSequence::phase_at: t outside sequence");
  }
  double start = 0.0;
  for (const auto& s : stages_) {
    if (t <= start + s.duration_s()) return realize(s, std::clamp(t - start, 0.0, s.duration_s()));
    start += s.duration_s();
  }
  return 0.0;
}

ProtocolSequence concatenate(std::vector<ShakingProtocol> protocols) {
  return ProtocolSequence(std::move(protocols));
}

std::string to_text(const ShakingProtocol& p) {
  const auto& m = p.metadata();
  std::ostringstream out;
  out << "{\n";
  out << "  \"version\": " << kProtocolFileVersion << ",\n";
  out << "  \"meta\": {\n";
  if (m.lattice) {
    out << "    \"depth_Er\": " << number(m.lattice->depth_er()) << ",\n";
    out << "    \"wavelength_m\": " << number(m.lattice->wavelength_m()) << ",\n";
    out << "    \"atom_mass_kg\": " << number(m.lattice->atom_mass_kg()) << ",\n";
  } else {
    out << "    \"depth_Er\": null,\n    \"wavelength_m\": null,\n    \"atom_mass_kg\": null,\n";
  }
  out << "    \"seed\": " << m.seed << ",\n";
  out << "    \"fitness\": " << number(m.fitness) << ",\n";
  out << "    \"stage_label\": " << quoted(m.stage_label) << "\n";
  out << "  },\n";
  out << "  \"l\": " << p.lines() << ",\n";
  out << "  \"bandwidth_hz\": " << number(p.bandwidth_hz()) << ",\n";
  out << "  \"duration_s\": " << number(p.duration_s()) << ",\n";
  out << "  \"gain\": " << number(p.gain()) << ",\n";
  out << "  \"amplitudes\": [";
  for (Eigen::Index i = 0; i < p.amplitudes().size(); ++i) {
    out << (i % 4 == 0 ? "\n    " : " ") << number(p.amplitudes()(i));
    if (i + 1 < p.amplitudes().size()) out << ",";
  }
  out << "\n  ]\n}\n";
  return out.str();
}

namespace {

using nlohmann::json;

std::size_t line_of(const std::string& text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

const json& field(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(std::string("protocol file: missing field `") + where + key + "`");
  }
  return *it;
}

double number_field(const json& obj, const char* key, const char* where = "") {
  const json& v = field(obj, key, where);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) {
    throw ParseError(std::string("protocol file: field `") + where + key + "` is not a number");
  }
  return v.get<double>();
}

}  // namespace

ShakingProtocol protocol_from_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("protocol file: syntax error at line " + std::to_string(line_of(text, e.byte)) +
                     ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("protocol file: top level must be an object");

  const json& version = field(doc, "version", "");
  if (!version.is_number_integer()) throw ParseError("protocol file: field `version` must be an integer");
  if (version.get<int>() != kProtocolFileVersion) {
    throw UnsupportedVersionError("protocol file: unsupported version " +
                                  std::to_string(version.get<int>()) + " (expected " +
                                  std::to_string(kProtocolFileVersion) + ")");
  }

  const json& l_field = field(doc, "l", "");
  if (!l_field.is_number_integer() || l_field.get<long long>() < 1) {
    throw ParseError("protocol file: field `l` must be a positive integer");
  }
  const auto l = l_field.get<int>();

  const json& amps_field = field(doc, "amplitudes", "");
  if (!amps_field.is_array()) throw ParseError("protocol file: field `amplitudes` must be a list");
  if (amps_field.size() != static_cast<std::size_t>(2 * l)) {
    throw ParseError("protocol file: field `amplitudes` has " + std::to_string(amps_field.size()) +
                     " entries, expected 2l = " + std::to_string(2 * l));
  }
  Eigen::VectorXd amps(2 * l);
  for (int i = 0; i < 2 * l; ++i) {
    if (!amps_field[i].is_number()) {
      throw ParseError("protocol file: `amplitudes[" + std::to_string(i) + "]` is not a number");
    }
    amps(i) = amps_field[i].get<double>();
  }

  ProtocolMetadata meta;
  const json& m = field(doc, "meta", "");
  if (!m.is_object()) throw ParseError("protocol file: field `meta` must be an object");
  const double depth = number_field(m, "depth_Er", "meta.");
  const double wavelength = number_field(m, "wavelength_m", "meta.");
  const double mass = number_field(m, "atom_mass_kg", "meta.");
  if (std::isfinite(depth) && std::isfinite(wavelength) && std::isfinite(mass)) {
    meta.lattice = LatticeConfig(depth, wavelength, mass);
  }
  const json& seed = field(m, "seed", "meta.");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError("protocol file: field `meta.seed` must be an integer");
  }
  meta.seed = seed.get<std::uint64_t>();
  meta.fitness = number_field(m, "fitness", "meta.");
  const json& label = field(m, "stage_label", "meta.");
  if (!label.is_string()) throw ParseError("protocol file: field `meta.stage_label` must be a string");
  meta.stage_label = label.get<std::string>();

  try {
    return {std::move(amps), number_field(doc, "bandwidth_hz"), number_field(doc, "duration_s"),
            number_field(doc, "gain"), std::move(meta)};
  } catch (const DomainError& e) {
    throw ParseError(std::string("protocol file: ") + e.what());
  }
}

void save_protocol(const ShakingProtocol& protocol, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("save_protocol: cannot open " + path.string());
  out << to_text(protocol);
  if (!out) throw Error("save_protocol: write failed for " + path.string());
}

ShakingProtocol load_protocol(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("load_protocol: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return protocol_from_text(buf.str());
  } catch (const ParseError& e) {
    if (dynamic_cast<const UnsupportedVersionError*>(&e)) {
      throw UnsupportedVersionError(path.string() + ": " + e.what());
    }
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace sli
