#include "chiralprop/envelope.hpp"

#include <algorithm>
#include <cmath>

namespace chiralprop {

void EnvelopeGrid::require_finite() const
{
    const auto check = [&](const std::vector<complex>& v, const char* name) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag()))
                throw NumericalError(std::string("non-finite ") + name + " at z = " + std::to_string(z) +
                                     ", tau index " + std::to_string(i));
        }
    };
    check(omegaE, "OmegaE");
    check(omegaB, "OmegaB");
    check(omegaC, "OmegaC");
}

EnvelopeGrid gaussian_pulse(std::size_t n, double dtau, const PulseShape& shape, const MediumParams& params)
{
    if (!(shape.sigma > 0.0)) throw ParameterError("pulse.sigma", "must be positive");
    if (!(dtau > 0.0)) throw ParameterError("grid.dtau", "must be positive");
    EnvelopeGrid g;
    g.dtau = dtau;
    g.omegaE.resize(n);
    g.omegaB.resize(n);
    g.omegaC.assign(n, complex(params.omegaC_mag, 0.0));
    const complex vacuum = complex(0.0, -sign(params.polarization) * params.alpha_fs);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = (g.tau(i) - shape.center) / shape.sigma;
        g.omegaE[i] = shape.amplitude * std::exp(-0.5 * x * x);
        g.omegaB[i] = vacuum * g.omegaE[i];
    }
    return g;
}

double unwrap_near(double phase, double reference)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return phase + two_pi * std::round((reference - phase) / two_pi);
}

PulseMetrics pulse_metrics(const EnvelopeGrid& grid)
{
    const std::size_t n = grid.size();
    PulseMetrics m;
    std::size_t ipeak = 0;
    double weight = 0.0;
    double first_moment = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::abs(grid.omegaE[i]);
        if (a > m.peak) {
            m.peak = a;
            ipeak = i;
        }
        weight += a * a;
        first_moment += a * a * grid.tau(i);
    }
    if (!(m.peak > 0.0)) throw NumericalError("pulse_metrics: envelope is identically zero");
    m.peak_tau = grid.tau(ipeak);
    m.centroid = first_moment / weight;
    m.energy = weight * grid.dtau;

    // Unwrap arg(OmegaE) from the peak towards the centroid.
    const double pos = (m.centroid - grid.tau_start) / grid.dtau;
    const auto ic = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 1)));
    double phase = std::arg(grid.omegaE[ipeak]);
    const auto walk = [&](std::size_t to) {
        while (ipeak != to) {
            ipeak = ipeak < to ? ipeak + 1 : ipeak - 1;
            phase = unwrap_near(std::arg(grid.omegaE[ipeak]), phase);
        }
    };
    walk(ic);
    if (ic + 1 < n) {
        const double next = unwrap_near(std::arg(grid.omegaE[ic + 1]), phase);
        const double frac = pos - static_cast<double>(ic);
        phase += std::clamp(frac, 0.0, 1.0) * (next - phase);
    }
    m.phase = phase;
    return m;
}

double chirality_error(const EnvelopeGrid& grid, Handedness pol, double alpha)
{
    const complex vacuum = complex(0.0, -sign(pol) * alpha);
    double worst = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        worst = std::max(worst, std::abs(grid.omegaB[i] - vacuum * grid.omegaE[i]));
        peak = std::max(peak, std::abs(grid.omegaE[i]));
    }
    if (!(peak > 0.0) || !(alpha > 0.0)) return 0.0;
    return worst / (alpha * peak);
}

}  // namespace chiralprop
