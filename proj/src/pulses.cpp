#include "transim/pulses.hpp"

#include <cmath>

#include "transim/errors.hpp"
#include "transim/operators.hpp"

namespace transim {

void PulseSpec::validate() const {
  if (!(sigma_ns > 0.0)) throw ArgumentError("pulse.sigma must be positive");
  if (amp_mhz < 0.0) throw ArgumentError("pulse.amp must be non-negative");
  if (duration_ns < 4.0 * sigma_ns) throw ArgumentError("pulse.duration must be at least 4 sigma");
}

namespace {

// Gaussian edge centred at 2 sigma, shifted and rescaled so it runs 0 -> 1 on [0, 2 sigma].
double unit_edge(double x, double sigma) {
  const auto g = [sigma](double u) { return std::exp(-0.5 * (u - 2.0 * sigma) * (u - 2.0 * sigma) / (sigma * sigma)); };
  const double g0 = g(0.0);
  return (g(x) - g0) / (1.0 - g0);
}

double unit_edge_derivative(double x, double sigma) {
  const double g0 = std::exp(-2.0);
  const double u = x - 2.0 * sigma;
  return -u / (sigma * sigma) * std::exp(-0.5 * u * u / (sigma * sigma)) / (1.0 - g0);
}

}  // namespace

double envelope(const PulseSpec& spec, double t) {
  const double tau = spec.duration_ns;
  if (t <= 0.0 || t >= tau) return 0.0;
  const double amp = angular_from_mhz(spec.amp_mhz);
  const double edge = spec.edge_ns();
  if (t < edge) return amp * unit_edge(t, spec.sigma_ns);
  if (t > tau - edge) return amp * unit_edge(tau - t, spec.sigma_ns);
  return amp;
}

double envelope_derivative(const PulseSpec& spec, double t) {
  const double tau = spec.duration_ns;
  if (t <= 0.0 || t >= tau) return 0.0;
  const double amp = angular_from_mhz(spec.amp_mhz);
  const double edge = spec.edge_ns();
  if (t < edge) return amp * unit_edge_derivative(t, spec.sigma_ns);
  if (t > tau - edge) return -amp * unit_edge_derivative(tau - t, spec.sigma_ns);
  return 0.0;
}

double drag_quadrature(const PulseSpec& spec, double t, double anchor_anharmonicity) {
  if (anchor_anharmonicity == 0.0) throw ArgumentError("drag_quadrature: anharmonicity must be nonzero");
  if (spec.drag == 0.0) return 0.0;
  return spec.drag * envelope_derivative(spec, t) / anchor_anharmonicity;
}

double carrier_waveform(const PulseSpec& spec, double t) {
  return envelope(spec, t) * std::cos(angular_from_ghz(spec.carrier_ghz) * t + spec.phase);
}

}  // namespace transim
