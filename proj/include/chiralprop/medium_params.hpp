#pragma once

#include <complex>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chiralprop {

using complex = std::complex<double>;

/// Probe polarization. Left selects the upper sign in every dispersion
/// relation, right the lower one.
enum class Handedness { Left, Right };

/// +1 for left, -1 for right circular polarization.
constexpr double sign(Handedness h) { return h == Handedness::Left ? 1.0 : -1.0; }

std::string_view to_string(Handedness h);
std::optional<Handedness> parse_handedness(std::string_view text);

/// Thrown by validate() and the derived-quantity helpers. field() names the
/// offending parameter.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Failure of a numerical procedure (singular system, NaN, drift bound).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Physical parameters of the five-level chiral medium.
 *
 * Internal units: rates and Rabi frequencies in units of the total decay rate
 * gamma of state |3>, times in 1/gamma, lengths in c/gamma. Only
 * gamma_total_si and lambda0 carry SI units; they bridge to the carrier
 * frequency.
 *
 * Level labels follow the model: |1>,|4> ground states (dark-state pair),
 * |5> excited state of the Lambda preparation, |3> upper level of the electric
 * probe transition |4>-|3>, |2> upper level of the magnetic probe transition
 * |1>-|2>; the control field couples |2>-|3>.
 */
struct MediumParams {
    double gamma31 = 1.0 / 3.0;
    double gamma32 = 1.0 / 3.0;
    double gamma34 = 1.0 / 3.0;
    /// Magnetic-dipole linewidth; radiative M1 rates are suppressed by ~alpha^2.
    double gamma21 = 7.2973525693e-3 * 7.2973525693e-3;
    double gamma51 = 0.5;
    double gamma54 = 0.5;
    double gamma_dec = 0.5;
    double gamma_total_si = 2.0 * std::numbers::pi * 6.0e6;  // rad/s
    double lambda0 = 795.0e-9;                                // m
    double density_L = 0.01;                                  // N lambda^3 / 4 pi^2
    double alpha_fs = 7.2973525693e-3;
    double omega1_mag = 1.0;
    double omega2_mag = 1.0;
    double omegaC_mag = 2.0;
    double phi1 = 0.0;
    double phi2 = 0.0;
    double phiC = std::numbers::pi / 2.0;
    Handedness polarization = Handedness::Left;
    bool lfc_enabled = false;
    /// Keep Omega1, Omega2 on while the probe propagates. Off: they only
    /// prepare the dark state, whose populations and coherence rho41 (and so
    /// the closed-loop phase) are imprinted before the probe arrives.
    bool prep_fields = false;

    /// gamma31 + gamma32 + gamma34 (1 after validation).
    double gamma_total() const { return gamma31 + gamma32 + gamma34; }

    complex omega1() const { return std::polar(omega1_mag, phi1); }
    complex omega2() const { return std::polar(omega2_mag, phi2); }
    complex omegaC() const { return std::polar(omegaC_mag, phiC); }

    /// phi2 - phi1 + phiC wrapped into (-pi, pi].
    double closed_loop_phase() const;

    /// Carrier angular frequency omega0 in units of gamma. Numerically equal to
    /// the carrier wavenumber k0 in units of gamma/c.
    double carrier_frequency() const;

    /// Sets phiC so that closed_loop_phase() == phi0.
    MediumParams with_closed_loop_phase(double phi0) const;

    bool operator==(const MediumParams&) const = default;
};

/// Checks signs and ranges and rescales every rate so gamma_total() == 1.
/// Throws ParameterError naming the first offending field.
MediumParams validate(MediumParams params);

/// Number density N = 4 pi^2 L / lambda^3 in m^-3.
double number_density(double density_L, double lambda0);

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

/// Negates Omega1, Omega2 and OmegaC (all control fields belong to the medium),
/// which shifts the closed-loop phase by pi.
MediumParams invert_medium(const MediumParams& params);

/// Zeroth-order dark state prepared by Omega1 and Omega2.
struct DarkState {
    double rho11 = 1.0;
    double rho44 = 0.0;
    complex rho41{};
};

DarkState dark_state(complex omega1, complex omega2);
inline DarkState dark_state(const MediumParams& p) { return dark_state(p.omega1(), p.omega2()); }

}  // namespace chiralprop
