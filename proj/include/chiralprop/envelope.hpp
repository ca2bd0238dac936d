#pragma once

#include <cstddef>
#include <vector>

#include "chiralprop/medium_params.hpp"

namespace chiralprop {

/// Probe and control envelopes on a uniform retarded-time grid tau = t - z/c
/// at depth z. Rabi frequencies in gamma, tau in 1/gamma, z in c/gamma.
/// omegaC holds the control envelope without the scheduled closed-loop phase.
struct EnvelopeGrid {
    double tau_start = 0.0;
    double dtau = 0.05;
    double z = 0.0;
    std::vector<complex> omegaE;
    std::vector<complex> omegaB;
    std::vector<complex> omegaC;

    std::size_t size() const { return omegaE.size(); }
    double tau(std::size_t i) const { return tau_start + dtau * static_cast<double>(i); }

    /// Throws NumericalError naming the first non-finite sample.
    void require_finite() const;
};

/// Gaussian envelope exp(-(tau - center)^2 / (2 sigma^2)); sigma is the
/// standard deviation of the amplitude.
struct PulseShape {
    double sigma = 50.0;
    double amplitude = 1e-9;
    double center = 300.0;
};

/// Input pulse in vacuum: OmegaB = -+ i alpha OmegaE (upper sign left), and a
/// constant real control envelope |OmegaC|.
EnvelopeGrid gaussian_pulse(std::size_t n, double dtau, const PulseShape& shape, const MediumParams& params);

struct PulseMetrics {
    double peak = 0.0;      ///< max |OmegaE|
    double peak_tau = 0.0;  ///< tau of the peak sample
    double centroid = 0.0;  ///< |OmegaE|^2-weighted mean tau
    double phase = 0.0;     ///< arg OmegaE at the centroid, unwrapped from the peak
    double energy = 0.0;    ///< sum |OmegaE|^2 dtau
};

/// Throws NumericalError for an all-zero envelope.
PulseMetrics pulse_metrics(const EnvelopeGrid& grid);

/// phase + 2 pi k closest to reference.
double unwrap_near(double phase, double reference);

/// max_tau |OmegaB +- i alpha OmegaE| / (alpha max_tau |OmegaE|).
double chirality_error(const EnvelopeGrid& grid, Handedness pol, double alpha);

}  // namespace chiralprop
