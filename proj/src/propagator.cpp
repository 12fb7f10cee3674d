#include "sli/propagator.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <string>

namespace sli {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr int kCheckInterval = 512;

// integral over [a, b] of (2n + q)^2 dt = h (4 n^2 + 4 n q1 + q2)
struct KineticIntegral {
  double h;
  double q1;
  double q2;
};

// exp(-i omega_R * integral (2n + q)^2) for a fixed list of ladder indices.
class KineticPhases {
 public:
  KineticPhases(Eigen::VectorXd modes, double omega_r, bool contiguous)
      : modes_(std::move(modes)), omega_r_(omega_r), contiguous_(contiguous),
        factor_(modes_.size()) {}

  const Eigen::VectorXcd& factors(const KineticIntegral& k) {
    const Eigen::VectorXcd& base = base_for(k.h);
    if (k.q1 == 0.0 && k.q2 == 0.0) return base;
    const double scale = -omega_r_ * k.h;
    if (contiguous_) {
      cd p = std::polar(1.0, scale * (4.0 * modes_(0) * k.q1 + k.q2));
      const cd r = std::polar(1.0, scale * 4.0 * k.q1);
      for (Eigen::Index i = 0; i < modes_.size(); ++i) {
        factor_(i) = base(i) * p;
        p *= r;
      }
    } else {
      for (Eigen::Index i = 0; i < modes_.size(); ++i) {
        factor_(i) = base(i) * std::polar(1.0, scale * (4.0 * modes_(i) * k.q1 + k.q2));
      }
    }
    return factor_;
  }

 private:
  const Eigen::VectorXcd& base_for(double h) {
    for (auto& [key, value] : cache_) {
      if (key == h) return value;
    }
    Eigen::VectorXcd v(modes_.size());
    for (Eigen::Index i = 0; i < modes_.size(); ++i) {
      v(i) = std::polar(1.0, -omega_r_ * h * 4.0 * modes_(i) * modes_(i));
    }
    if (cache_.size() >= 8) cache_.erase(cache_.begin());
    cache_.emplace_back(h, std::move(v));
    return cache_.back().second;
  }

  Eigen::VectorXd modes_;
  double omega_r_;
  bool contiguous_;
  Eigen::VectorXcd factor_;
  std::vector<std::pair<double, Eigen::VectorXcd>> cache_;
};

// Effective lattice amplitude z = e^{i phi} + eps e^{i delta}; the total
// lattice is -(V0 |z| / 2) cos(2 k x + arg z).
cd lattice_amplitude(double phi, const LatticePerturbation& p) {
  cd z = std::polar(1.0, phi);
  if (!p.is_zero()) z += std::polar(p.parasitic_amplitude, p.parasitic_phase);
  return z;
}

// Lattice operator exponentiated exactly on the truncated ladder:
// exp(-i W dt) = D(theta) U exp(i s V0/4 Lambda w_R dt) U^T D(theta)^dagger
// with C = U Lambda U^T the unit nearest-neighbour coupling.
// Real and imaginary parts are stored apart so the dense products are real
// matrix-vector products.
class LadderKernel {
 public:

  LadderKernel(const QuantumState& state, const LatticeConfig& lattice,
               const LatticePerturbation& perturbation)
      : half_width_(state.half_width()),
        omega_r_(lattice.recoil_angular_frequency()),
        depth_(lattice.depth_er()),
        perturbation_(perturbation),
        kinetic_(Eigen::VectorXd::LinSpaced(state.amplitudes.size(), -half_width_, half_width_),
                 omega_r_, true) {
    const Eigen::Index size = state.amplitudes.size();
    re_ = state.amplitudes.real();
    im_ = state.amplitudes.imag();
    work_re_.resize(size);
    work_im_.resize(size);
    shift_re_.resize(size);
    shift_im_.resize(size);
    phase_re_.resize(size);
    phase_im_.resize(size);

    Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index i = 0; i + 1 < size; ++i) coupling(i, i + 1) = coupling(i + 1, i) = 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(coupling);
    if (solver.info() != Eigen::Success) throw NumericalError("ladder kernel: eigensolve failed");
    u_ = solver.eigenvectors();
    ut_ = u_.transpose();
    lambda_ = solver.eigenvalues();
  }

  void kinetic(const KineticIntegral& k) {
    const Eigen::VectorXcd& f = kinetic_.factors(k);
    for (Eigen::Index i = 0; i < re_.size(); ++i) {
      const double r = re_(i);
      re_(i) = r * f(i).real() - im_(i) * f(i).imag();
      im_(i) = r * f(i).imag() + im_(i) * f(i).real();
    }
  }

  void potential(double phi, double dt) {
    const cd z = lattice_amplitude(phi, perturbation_);
    const double s = std::abs(z);
    const double theta = std::arg(z);

    const double sc = std::cos(theta);
    const double ss = std::sin(theta);
    double pr = std::cos(half_width_ * theta);
    double pi = -std::sin(half_width_ * theta);
    for (Eigen::Index i = 0; i < shift_re_.size(); ++i) {
      shift_re_(i) = pr;
      shift_im_(i) = pi;
      const double nr = pr * sc - pi * ss;
      pi = pr * ss + pi * sc;
      pr = nr;
    }

    update_lattice_phases(s, dt);
    multiply(re_, im_, shift_re_, -shift_im_);
    work_re_.noalias() = ut_ * re_;
    work_im_.noalias() = ut_ * im_;
    multiply(work_re_, work_im_, phase_re_, phase_im_);
    re_.noalias() = u_ * work_re_;
    im_.noalias() = u_ * work_im_;
    multiply(re_, im_, shift_re_, shift_im_);
  }

  double edge_probability() const {
    const auto last = re_.size() - 1;
    return std::max(re_(0) * re_(0) + im_(0) * im_(0),
                    re_(last) * re_(last) + im_(last) * im_(last));
  }
  double outside_probability(int) const { return 0.0; }

  QuantumState result(const QuantumState& like) const {
    QuantumState out = like;
    out.amplitudes.real() = re_;
    out.amplitudes.imag() = im_;
    return out;
  }

 private:
  template <typename Fr, typename Fi>
  static void multiply(Eigen::VectorXd& re, Eigen::VectorXd& im, const Fr& fr, const Fi& fi) {
    for (Eigen::Index i = 0; i < re.size(); ++i) {
      const double r = re(i);
      re(i) = r * fr(i) - im(i) * fi(i);
      im(i) = r * fi(i) + im(i) * fr(i);
    }
  }

  void update_lattice_phases(double s, double dt) {
    if (s == cached_s_ && dt == cached_dt_) return;
    const double rate = s * depth_ / 4.0 * omega_r_ * dt;
    for (Eigen::Index j = 0; j < lambda_.size(); ++j) {
      phase_re_(j) = std::cos(rate * lambda_(j));
      phase_im_(j) = std::sin(rate * lambda_(j));
    }
    cached_s_ = s;
    cached_dt_ = dt;
  }

  int half_width_;
  double omega_r_;
  double depth_;
  LatticePerturbation perturbation_;
  KineticPhases kinetic_;
  Eigen::VectorXd re_, im_;
  Eigen::VectorXd work_re_, work_im_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd ut_;
  Eigen::VectorXd lambda_;
  Eigen::VectorXd shift_re_, shift_im_;
  Eigen::VectorXd phase_re_, phase_im_;
  double cached_s_ = -1.0;
  double cached_dt_ = -1.0;
};

Eigen::VectorXd fft_modes(int points) {
  Eigen::VectorXd m(points);
  for (int i = 0; i < points; ++i) m(i) = i < points / 2 ? i : i - points;
  return m;
}

// Split-step Fourier on one lattice period sampled at `points` positions.
// Momentum coefficients are kept in FFT order; x_j = j lambda / (2 points).
class GridKernel {
 public:
  GridKernel(const QuantumState& state, const LatticeConfig& lattice,
             const LatticePerturbation& perturbation, int points)
      : points_(points),
        half_width_(state.half_width()),
        omega_r_(lattice.recoil_angular_frequency()),
        depth_(lattice.depth_er()),
        perturbation_(perturbation),
        modes_(fft_modes(points)),
        kinetic_(modes_, omega_r_, false),
        c_(Eigen::VectorXcd::Zero(points)),
        x_(points) {
    if (points < 8 || points % 2 != 0) {
      throw DomainError("split-step grid needs an even number of points >= 8");
    }
    if (2 * half_width_ + 1 >= points) {
      throw DomainError("split-step grid too small for ladder half-width " +
                        std::to_string(half_width_));
    }
    for (int n = -half_width_; n <= half_width_; ++n) c_(index_of(n)) = state.at(n);
  }

  void kinetic(const KineticIntegral& k) { c_.array() *= kinetic_.factors(k).array(); }

  void potential(double phi, double dt) {
    const cd z = lattice_amplitude(phi, perturbation_);
    const double s = std::abs(z);
    const double theta = std::arg(z);
    fft_.inv(x_, c_);
    for (int j = 0; j < points_; ++j) {
      const double v = -0.5 * depth_ * s * std::cos(2.0 * kPi * j / points_ + theta);
      x_(j) *= std::polar(1.0, -omega_r_ * dt * v);
    }
    fft_.fwd(c_, x_);
  }

  double edge_probability() const {
    double edge = 0.0;
    for (int n : {-half_width_, half_width_}) edge = std::max(edge, std::norm(c_(index_of(n))));
    return edge;
  }

  double outside_probability(int) const {
    double outside = 0.0;
    for (int i = 0; i < points_; ++i) {
      if (std::abs(modes_(i)) > half_width_) outside += std::norm(c_(i));
    }
    return outside;
  }

  QuantumState result(const QuantumState& like) const {
    QuantumState out = like;
    for (int n = -half_width_; n <= half_width_; ++n) out.at(n) = c_(index_of(n));
    return out;
  }

 private:
  int index_of(int n) const { return n >= 0 ? n : n + points_; }

  int points_;
  int half_width_;
  double omega_r_;
  double depth_;
  LatticePerturbation perturbation_;
  Eigen::VectorXd modes_;
  KineticPhases kinetic_;
  Eigen::VectorXcd c_;
  Eigen::VectorXcd x_;
  Eigen::FFT<double> fft_;
};

class QuasimomentumPath {
 public:
  QuasimomentumPath(const LatticeConfig& lattice, const SignalSpec& signal, double q0, double t0)
      : lattice_(lattice), signal_(signal), q0_(q0), t0_(t0), trivial_(signal.is_zero()) {}

  double at(double t) const {
    if (trivial_) return q0_;
    return quasimomentum_at(lattice_, signal_, q0_, t0_, t);
  }

  // Simpson's rule over [a, b]; exact while q is at most linear in t.
  KineticIntegral integral(double a, double qa, double b, double& qb_out) const {
    const double h = b - a;
    if (trivial_ && q0_ == 0.0) {
      qb_out = 0.0;
      return {h, 0.0, 0.0};
    }
    const double qm = at(0.5 * (a + b));
    const double qb = at(b);
    qb_out = qb;
    return {h, (qa + 4.0 * qm + qb) / 6.0, (qa * qa + 4.0 * qm * qm + qb * qb) / 6.0};
  }

 private:
  const LatticeConfig& lattice_;
  const SignalSpec& signal_;
  double q0_;
  double t0_;
  bool trivial_;
};

template <typename Kernel>
QuantumState integrate(Kernel& kernel, const QuantumState& initial, const PhaseSchedule& schedule,
                       const LatticeConfig& lattice, const SignalSpec& signal,
                       const PropagationSettings& settings) {
  const double t_start = initial.time_s;
  const QuasimomentumPath path(lattice, signal, initial.quasimomentum_offset, t_start);

  auto check_edge = [&](double t) {
    const double edge = std::max(kernel.edge_probability(), kernel.outside_probability(0));
    if (edge > settings.edge_tolerance) {
      throw BasisOverflowError("propagate: probability " + std::to_string(edge) +
                               " at ladder edge (|n| = " + std::to_string(initial.half_width()) +
                               ") at t = " + std::to_string(t) + " s");
    }
  };

  double prev = t_start;
  double q_prev = path.at(t_start);
  double seg_start = t_start;
  int k = 0;
  const auto& phases = schedule.samples();
  for (const auto& seg : schedule.segments()) {
    for (int i = 0; i < seg.steps; ++i, ++k) {
      const double mid = seg_start + (i + 0.5) * seg.dt;
      double q_mid = 0.0;
      kernel.kinetic(path.integral(prev, q_prev, mid, q_mid));
      kernel.potential(phases(k), seg.dt);
      prev = mid;
      q_prev = q_mid;
      if ((k + 1) % kCheckInterval == 0) check_edge(mid);
    }
    seg_start += seg.steps * seg.dt;
  }
  const double t_end = seg_start;
  double q_end = 0.0;
  kernel.kinetic(path.integral(prev, q_prev, t_end, q_end));
  check_edge(t_end);

  QuantumState out = kernel.result(initial);
  out.time_s = t_end;
  out.quasimomentum_offset = path.at(t_end);

  const double drift = std::abs(out.norm_squared() - initial.norm_squared());
  if (drift > settings.unitarity_tolerance) {
    throw NumericalError("propagate: norm drifted by " + std::to_string(drift));
  }
  return out;
}

}  // namespace

int steps_for(double duration, double max_dt) {
  if (!(duration > 0.0) || !(max_dt > 0.0)) {
    throw DomainError("steps_for: duration and dt must be positive");
  }
  const double ratio = duration / max_dt;
  const double rounded = std::round(ratio);
  const double n = std::abs(ratio - rounded) < 1e-9 * std::max(1.0, ratio) ? rounded : std::ceil(ratio);
  return std::max(1, static_cast<int>(n));
}

PhaseSchedule PhaseSchedule::of(const ShakingProtocol& protocol, double max_dt) {
  PhaseSchedule s;
  const int steps = steps_for(protocol.duration_s(), max_dt);
  s.segments_.push_back({steps, protocol.duration_s() / steps});
  s.samples_ = sample_midpoints(protocol, steps);
  return s;
}

PhaseSchedule PhaseSchedule::of(const ProtocolSequence& sequence, double max_dt) {
  PhaseSchedule s;
  for (const auto& stage : sequence.stages()) s.append(of(stage, max_dt));
  return s;
}

PhaseSchedule PhaseSchedule::flat(double duration, double max_dt) {
  PhaseSchedule s;
  const int steps = steps_for(duration, max_dt);
  s.segments_.push_back({steps, duration / steps});
  s.samples_ = Eigen::VectorXd::Zero(steps);
  return s;
}

void PhaseSchedule::append(const PhaseSchedule& other) {
  segments_.insert(segments_.end(), other.segments_.begin(), other.segments_.end());
  Eigen::VectorXd joined(samples_.size() + other.samples_.size());
  joined << samples_, other.samples_;
  samples_ = std::move(joined);
}

PhaseSchedule PhaseSchedule::reversed() const {
  PhaseSchedule s;
  s.segments_.assign(segments_.rbegin(), segments_.rend());
  s.samples_ = samples_.reverse();
  return s;
}

double PhaseSchedule::duration_s() const {
  double t = 0.0;
  for (const auto& seg : segments_) t += seg.steps * seg.dt;
  return t;
}

double quasimomentum_at(const LatticeConfig& lattice, const SignalSpec& signal, double q0,
                        double t0, double t1) {
  return q0 - lattice.quasimomentum_per_velocity() * signal.velocity_change(t0, t1);
}

QuantumState propagate(const QuantumState& state, const PhaseSchedule& schedule,
                       const LatticeConfig& lattice, const SignalSpec& signal,
                       const PropagationSettings& settings,
                       const LatticePerturbation& perturbation) {
  if (std::abs(state.norm_squared() - 1.0) > settings.unitarity_tolerance) {
    throw DomainError("propagate: initial state is not normalized");
  }
  if (schedule.steps() == 0) throw DomainError("propagate: empty schedule");
  signal.validate();

  if (settings.backend == Backend::ladder) {
    LadderKernel kernel(state, lattice, perturbation);
    return integrate(kernel, state, schedule, lattice, signal, settings);
  }
  GridKernel kernel(state, lattice, perturbation, settings.grid_points);
  return integrate(kernel, state, schedule, lattice, signal, settings);
}

QuantumState propagate(const QuantumState& state, const ShakingProtocol& protocol,
                       const LatticeConfig& lattice, const SignalSpec& signal,
                       const PropagationSettings& settings,
                       const LatticePerturbation& perturbation) {
  return propagate(state, PhaseSchedule::of(protocol, settings.dt_s), lattice, signal, settings,
                   perturbation);
}

std::pair<QuantumState, QuantumState> propagate_dual(const QuantumState& state_plus,
                                                     const QuantumState& state_minus,
                                                     const ShakingProtocol& protocol,
                                                     const LatticeConfig& lattice,
                                                     const SignalSpec& signal,
                                                     const PropagationSettings& settings) {
  const PhaseSchedule schedule = PhaseSchedule::of(protocol, settings.dt_s);
  return {propagate(state_plus, schedule, lattice, signal, settings),
          propagate(state_minus, schedule, lattice, signal, settings)};
}

}  // namespace sli
