#pragma once

#include <utility>

namespace transim {

/// Flat-top Gaussian drive. Amplitudes and frequencies are stored the way they
/// are quoted (MHz / GHz, i.e. f = omega / 2pi); the evaluators return rad/ns.
struct PulseSpec {
  double amp_mhz = 0.0;       // plateau amplitude Omega_d / 2pi
  double duration_ns = 0.0;   // full length including both edges
  double sigma_ns = 10.0;     // Gaussian edge width; each edge lasts 2 sigma
  double carrier_ghz = 0.0;   // f_d
  double phase = 0.0;         // phi_d, rad
  double drag = 0.0;          // DRAG coefficient lambda, dimensionless

  /// Throws ArgumentError on duration < 4 sigma, amp < 0 or sigma <= 0.
  void validate() const;

  double edge_ns() const { return 2.0 * sigma_ns; }
  /// Interval on which the envelope is constant.
  std::pair<double, double> plateau() const { return {edge_ns(), duration_ns - edge_ns()}; }
};

/// Real envelope Omega_d(t) in rad/ns; zero outside [0, duration].
double envelope(const PulseSpec& spec, double t);

/// d envelope / dt in rad/ns^2.
double envelope_derivative(const PulseSpec& spec, double t);

/// DRAG quadrature lambda * envelope'(t) / alpha. `anchor_anharmonicity` in rad/ns.
double drag_quadrature(const PulseSpec& spec, double t, double anchor_anharmonicity);

/// envelope(t) * cos(omega_d t + phi_d), the lab-frame drive waveform.
double carrier_waveform(const PulseSpec& spec, double t);

}  // namespace transim
