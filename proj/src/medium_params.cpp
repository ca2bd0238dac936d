#include "chiralprop/medium_params.hpp"

#include <cmath>
#include <utility>

namespace chiralprop {

std::string_view to_string(Handedness h) { return h == Handedness::Left ? "left" : "right"; }

std::optional<Handedness> parse_handedness(std::string_view text)
{
    if (text == "left") return Handedness::Left;
    if (text == "right") return Handedness::Right;
    return std::nullopt;
}

double wrap_phase(double phi)
{
    constexpr double pi = std::numbers::pi;
    double w = std::remainder(phi, 2.0 * pi);  // [-pi, pi]
    if (w <= -pi) w += 2.0 * pi;
    return w;
}

double MediumParams::closed_loop_phase() const { return wrap_phase(phi2 - phi1 + phiC); }

double MediumParams::carrier_frequency() const
{
    constexpr double c = 299792458.0;
    return 2.0 * std::numbers::pi * c / lambda0 / (gamma_total_si / gamma_total());
}

MediumParams MediumParams::with_closed_loop_phase(double phi0) const
{
    MediumParams out = *this;
    out.phiC = wrap_phase(phi0 - phi2 + phi1);
    return out;
}

namespace {

void require_finite(double v, const char* name)
{
    if (!std::isfinite(v)) throw ParameterError(name, "must be finite");
}

void require_non_negative(double v, const char* name)
{
    require_finite(v, name);
    if (v < 0.0) throw ParameterError(name, "must be non-negative, got " + std::to_string(v));
}

void require_positive(double v, const char* name)
{
    require_finite(v, name);
    if (v <= 0.0) throw ParameterError(name, "must be positive, got " + std::to_string(v));
}

}  // namespace

MediumParams validate(MediumParams p)
{
    require_non_negative(p.gamma31, "gamma31");
    require_non_negative(p.gamma32, "gamma32");
    require_non_negative(p.gamma34, "gamma34");
    require_non_negative(p.gamma21, "gamma21");
    require_non_negative(p.gamma51, "gamma51");
    require_non_negative(p.gamma54, "gamma54");
    require_non_negative(p.gamma_dec, "gamma_dec");
    require_positive(p.gamma_total_si, "gamma_total_si");
    require_positive(p.lambda0, "lambda0");
    require_non_negative(p.density_L, "L");
    require_non_negative(p.alpha_fs, "alpha_fs");
    require_non_negative(p.omega1_mag, "omega1");
    require_non_negative(p.omega2_mag, "omega2");
    require_non_negative(p.omegaC_mag, "omegaC");
    require_finite(p.phi1, "phi1");
    require_finite(p.phi2, "phi2");
    require_finite(p.phiC, "phiC");
    if (p.polarization != Handedness::Left && p.polarization != Handedness::Right)
        throw ParameterError("polarization", "must be left or right");

    const double total = p.gamma_total();
    if (total <= 0.0) throw ParameterError("gamma31", "gamma31 + gamma32 + gamma34 must be positive");

    // Express every rate in units of the total decay rate of |3>.
    for (double* rate : {&p.gamma31, &p.gamma32, &p.gamma34, &p.gamma21, &p.gamma51, &p.gamma54,
                         &p.gamma_dec, &p.omega1_mag, &p.omega2_mag, &p.omegaC_mag})
        *rate /= total;
    return p;
}

double number_density(double density_L, double lambda0)
{
    if (!(lambda0 > 0.0)) throw ParameterError("lambda0", "must be positive");
    if (density_L < 0.0) throw ParameterError("L", "must be non-negative");
    constexpr double pi = std::numbers::pi;
    return 4.0 * pi * pi * density_L / (lambda0 * lambda0 * lambda0);
}

MediumParams invert_medium(const MediumParams& params)
{
    constexpr double pi = std::numbers::pi;
    MediumParams out = params;
    out.phi1 = wrap_phase(params.phi1 + pi);
    out.phi2 = wrap_phase(params.phi2 + pi);
    out.phiC = wrap_phase(params.phiC + pi);
    return out;
}

DarkState dark_state(complex omega1, complex omega2)
{
    const double n1 = std::norm(omega1);
    const double n2 = std::norm(omega2);
    const double total = n1 + n2;
    if (!(total > 0.0)) throw ParameterError("omega1", "Omega1 and Omega2 cannot both vanish");
    DarkState d;
    d.rho11 = n2 / total;
    d.rho44 = n1 / total;
    d.rho41 = -omega1 * std::conj(omega2) / total;
    return d;
}

}  // namespace chiralprop
