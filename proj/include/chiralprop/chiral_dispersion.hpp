#pragma once

#include "chiralprop/envelope.hpp"
#include "chiralprop/linear_response.hpp"
#include "chiralprop/spectral.hpp"

namespace chiralprop {

/// Medium part of the SVEA eigenvalue, eta - dp/omega0:
///   (1/2mu) [chiE mu + chiH - xiEH xiHE -+ i (xiEH - xiHE)].
/// Throws NumericalError when mu == 0.
complex eta_medium(const ResponseCoefficients& resp, Handedness pol);

/// eta = dp/omega0 + eta_medium, with dp taken from resp.
complex eta(const ResponseCoefficients& resp, double omega0, Handedness pol);

/// sqrt(eps mu - (xiEH + xiHE)^2 / 4) -+ (i/2)(xiEH - xiHE), principal root.
complex n_exact(const ResponseCoefficients& resp, Handedness pol);

/// 1 + (chiE + chiH)/2 -+ (i/2)(xiEH - xiHE).
complex n_linear(const ResponseCoefficients& resp, Handedness pol);

struct GroupIndex {
    double ng = 0.0;
    double vg = 0.0;  ///< m/s
};

/// ng = 3 L omega0 gamma34 rho44 / |OmegaC|^2, vg = c / (1 + ng).
/// Throws ParameterError when OmegaC vanishes.
GroupIndex group_index(const MediumParams& params, const DarkState& dark);

/// Resonant value of eta_medium with gamma21 neglected:
///   +- i alpha ng rho41 |OmegaC| / (2 omega0 rho44)
///      * (e^{i phi0} - |OmegaC|^2 e^{-i phi0} / (2 gdec + 8 gdec^2 + |OmegaC|^2)).
/// The phase of the dark-state coherence is carried by phi0, so rho41 enters
/// as -|rho41|.
complex beta(const MediumParams& params, const DarkState& dark, double phi0, Handedness pol);

enum class DispersionModel {
    Full,                 ///< every coefficient at its own detuning
    FrozenCrossCoupling,  ///< xiEH, xiHE held at their resonant values
    DelayPhase,           ///< group delay ng z and constant factor exp(i beta k0 z)
};

/// Spectral solution F(z, dp) = exp(i k0 (eta - dp/omega0) z) F(0, dp) in the
/// retarded frame. The input must be a vacuum eigenvector, OmegaB = -+ i alpha
/// OmegaE to 1e-9 relative, and its length a power of two.
EnvelopeGrid propagate_analytic(const EnvelopeGrid& input, const MediumParams& params, double phi0, double z,
                                DispersionModel model = DispersionModel::Full);

/// OmegaE, OmegaB delayed by `delay` (band-limited shift) and multiplied by `factor`.
EnvelopeGrid delay_and_scale(const EnvelopeGrid& input, double delay, complex factor);

/// Transfer factors exp(i k0 eta_medium(dp) z) on the FFT detuning grid.
std::vector<complex> transfer_function(const MediumParams& params, double phi0, double z,
                                       const std::vector<double>& dp, DispersionModel model);

}  // namespace chiralprop
