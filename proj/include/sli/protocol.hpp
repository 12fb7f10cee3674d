#pragma once

// Band-limited shaking functions.
//
// A protocol is a genome of l cosine and l sine coefficients at the lines
// f_i = i * bandwidth / l (i = 1..l), realized as
//
//   phi(t) = gain * sum_i (a_i cos(2 pi f_i t) + b_i sin(2 pi f_i t)) * sin^2(pi t / T).

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sli/units.hpp"

namespace sli {

inline constexpr int kDefaultLines = 100;
inline constexpr double kDefaultBandwidthHz = 35000.0;
inline constexpr double kDefaultStageDuration = 5.02e-4;
inline constexpr double kDefaultSigma = 100.0;
/// Largest |phi| a usable protocol may reach, in radians.
inline constexpr double kMaxPhase = 4.0 * std::numbers::pi;
inline constexpr int kProtocolFileVersion = 1;

/// Raw-unit to radian conversion that puts the RMS of the enveloped phase of a
/// random genome at pi: gain = pi / (sigma sqrt(3 l / 8)).
double calibrated_gain(int lines, double sigma = kDefaultSigma);

struct ProtocolMetadata {
  std::uint64_t seed = 0;
  double fitness = 0.0;
  std::string stage_label;
  std::optional<LatticeConfig> lattice;

  friend bool operator==(const ProtocolMetadata&, const ProtocolMetadata&) = default;
};

class ShakingProtocol {
 public:
  ShakingProtocol(Eigen::VectorXd amplitudes, double bandwidth_hz, double duration_s, double gain,
                  ProtocolMetadata meta = {});

  /// Zero genome: phi(t) = 0 for the given duration.
  static ShakingProtocol flat(double duration_s, int lines = kDefaultLines,
                              double bandwidth_hz = kDefaultBandwidthHz);

  int lines() const { return static_cast<int>(amplitudes_.size() / 2); }
  double bandwidth_hz() const { return bandwidth_hz_; }
  double duration_s() const { return duration_s_; }
  double gain() const { return gain_; }
  double line_spacing_hz() const { return bandwidth_hz_ / lines(); }
  /// Frequency of line i in 1..l.
  double line_frequency(int i) const { return i * line_spacing_hz(); }

  /// Cosine coefficients followed by sine coefficients.
  const Eigen::VectorXd& amplitudes() const { return amplitudes_; }
  auto cosine() const { return amplitudes_.head(lines()); }
  auto sine() const { return amplitudes_.tail(lines()); }

  const ProtocolMetadata& metadata() const { return meta_; }
  ProtocolMetadata& metadata() { return meta_; }

  ShakingProtocol with_amplitudes(Eigen::VectorXd amplitudes) const;

  friend bool operator==(const ShakingProtocol&, const ShakingProtocol&) = default;

 private:
  Eigen::VectorXd amplitudes_;
  double bandwidth_hz_;
  double duration_s_;
  double gain_;
  ProtocolMetadata meta_;
};

/// I.i.d. normal(0, sigma^2) coefficients; reproducible per seed.
ShakingProtocol random_protocol(int lines, double bandwidth_hz, double duration_s, double sigma,
                                std::uint64_t seed);

/// phi(t) in radians by direct evaluation of the trigonometric sum. Throws
/// DomainError outside [0, T].
double realize(const ShakingProtocol& protocol, double t);

/// phi sampled at the midpoints (k + 1/2) T / steps, k = 0..steps-1.
Eigen::VectorXd sample_midpoints(const ShakingProtocol& protocol, int steps);

/// The protocol run backwards in time: phi'(t) = phi(T - t).
ShakingProtocol time_reversed(const ShakingProtocol& protocol);

/// Stages played back to back; every joint sits at phi = 0.
class ProtocolSequence {
 public:
  ProtocolSequence() = default;
  explicit ProtocolSequence(std::vector<ShakingProtocol> stages);

  const std::vector<ShakingProtocol>& stages() const { return stages_; }
  double duration_s() const;
  /// Start time of stage i.
  double stage_start(std::size_t i) const;
  double phase_at(double t) const;

 private:
  std::vector<ShakingProtocol> stages_;
};

ProtocolSequence concatenate(std::vector<ShakingProtocol> protocols);

/// Versioned JSON document; numbers written with 17 significant digits.
std::string to_text(const ShakingProtocol& protocol);
ShakingProtocol protocol_from_text(const std::string& text);

void save_protocol(const ShakingProtocol& protocol, const std::filesystem::path& path);
ShakingProtocol load_protocol(const std::filesystem::path& path);

}  // namespace sli
