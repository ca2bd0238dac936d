#include "chiralprop/chiral_dispersion.hpp"

#include <algorithm>
#include <cmath>

namespace chiralprop {

namespace {
constexpr complex I{0.0, 1.0};
constexpr double kSpeedOfLight = 299792458.0;
}  // namespace

complex eta_medium(const ResponseCoefficients& r, Handedness pol)
{
    const complex mu = r.mu();
    if (mu == 0.0) throw NumericalError("eta: mu = 0");
    const double s = sign(pol);
    return (r.chiE * mu + r.chiH - r.xiEH * r.xiHE - s * I * (r.xiEH - r.xiHE)) / (2.0 * mu);
}

complex eta(const ResponseCoefficients& r, double omega0, Handedness pol)
{
    return r.dp / omega0 + eta_medium(r, pol);
}

complex n_exact(const ResponseCoefficients& r, Handedness pol)
{
    const complex sum = r.xiEH + r.xiHE;
    return std::sqrt(r.epsilon() * r.mu() - sum * sum / 4.0) - sign(pol) * (I / 2.0) * (r.xiEH - r.xiHE);
}

complex n_linear(const ResponseCoefficients& r, Handedness pol)
{
    return 1.0 + (r.chiE + r.chiH) / 2.0 - sign(pol) * (I / 2.0) * (r.xiEH - r.xiHE);
}

GroupIndex group_index(const MediumParams& p, const DarkState& dark)
{
    if (!(p.omegaC_mag > 0.0)) throw ParameterError("omegaC", "group index needs a nonzero control field");
    GroupIndex g;
    g.ng = 3.0 * p.density_L * p.carrier_frequency() * p.gamma34 * dark.rho44 / (p.omegaC_mag * p.omegaC_mag);
    g.vg = kSpeedOfLight / (1.0 + g.ng);
    return g;
}

complex beta(const MediumParams& p, const DarkState& dark, double phi0, Handedness pol)
{
    const double c2 = p.omegaC_mag * p.omegaC_mag;
    if (c2 == 0.0) return 0.0;
    // ng / (omega0 rho44) written out so rho44 = 0 stays finite.
    const double ng_over_omega_rho44 = 3.0 * p.density_L * p.gamma34 / c2;
    const double g = p.gamma_total();
    const double den = 2.0 * p.gamma_dec * g + 8.0 * p.gamma_dec * p.gamma_dec + c2;
    const complex bracket = std::polar(1.0, phi0) - c2 * std::polar(1.0, -phi0) / den;
    const double rho41 = -std::abs(dark.rho41);
    return sign(pol) * I * p.alpha_fs * ng_over_omega_rho44 * rho41 * p.omegaC_mag / 2.0 * bracket;
}

std::vector<complex> transfer_function(const MediumParams& params, double phi0, double z,
                                       const std::vector<double>& dp, DispersionModel model)
{
    const DarkState dark = dark_state(params);
    const double k0 = params.carrier_frequency();
    const Handedness pol = params.polarization;
    std::vector<complex> h(dp.size());

    if (model == DispersionModel::DelayPhase) {
        const double ng = group_index(params, dark).ng;
        const complex b = beta(params, dark, phi0, pol);
        for (std::size_t k = 0; k < dp.size(); ++k) h[k] = std::exp(I * (dp[k] * ng * z + b * k0 * z));
        return h;
    }

    const ResponseCoefficients resonant = response_coefficients(params, dark, 0.0, phi0);
    for (std::size_t k = 0; k < dp.size(); ++k) {
        ResponseCoefficients r = response_coefficients(params, dark, dp[k], phi0);
        if (model == DispersionModel::FrozenCrossCoupling) {
            r.xiEH = resonant.xiEH;
            r.xiHE = resonant.xiHE;
        }
        h[k] = std::exp(I * k0 * eta_medium(r, pol) * z);
    }
    return h;
}

namespace {

EnvelopeGrid apply_filter(const EnvelopeGrid& in, const std::vector<complex>& h)
{
    Fft fft(in.size());
    std::vector<complex> fe = fft.to_spectrum(in.omegaE);
    std::vector<complex> fb = fft.to_spectrum(in.omegaB);
    for (std::size_t k = 0; k < h.size(); ++k) {
        fe[k] *= h[k];
        fb[k] *= h[k];
    }
    EnvelopeGrid out = in;
    out.omegaE = fft.to_envelope(fe);
    out.omegaB = fft.to_envelope(fb);
    return out;
}

void require_power_of_two(const EnvelopeGrid& g)
{
    if (!is_power_of_two(g.size()))
        throw ParameterError("grid.n_tau", "spectral propagation needs a power-of-two grid, got " +
                                               std::to_string(g.size()));
}

}  // namespace

EnvelopeGrid propagate_analytic(const EnvelopeGrid& input, const MediumParams& params, double phi0, double z,
                                DispersionModel model)
{
    require_power_of_two(input);
    if (input.omegaB.size() != input.size()) throw ParameterError("input", "OmegaB length differs from OmegaE");
    if (chirality_error(input, params.polarization, params.alpha_fs) > 1e-9)
        throw ParameterError("input", "probe is not a vacuum eigenvector (OmegaB != -+ i alpha OmegaE)");
    const std::vector<double> dp = detuning_grid(input.size(), input.dtau);
    EnvelopeGrid out = apply_filter(input, transfer_function(params, phi0, z, dp, model));
    out.z = input.z + z;
    return out;
}

EnvelopeGrid delay_and_scale(const EnvelopeGrid& input, double delay, complex factor)
{
    require_power_of_two(input);
    const std::vector<double> dp = detuning_grid(input.size(), input.dtau);
    std::vector<complex> h(dp.size());
    for (std::size_t k = 0; k < dp.size(); ++k) h[k] = factor * std::exp(I * dp[k] * delay);
    return apply_filter(input, h);
}

}  // namespace chiralprop
