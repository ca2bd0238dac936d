#pragma once

#include "chiralprop/atom_model.hpp"
#include "chiralprop/medium_params.hpp"

namespace chiralprop {

/// Linear response of the chiral medium at one probe detuning.
///
/// Constitutive relations in Rabi-normalized units (e = OmegaE, b = OmegaB/alpha,
/// i.e. b is c*B in units of the electric Rabi frequency):
///   p = chiE e + xiEH b,     m = chiH b + xiHE e.
struct ResponseCoefficients {
    complex chiE{};
    complex chiH{};
    complex xiEH{};
    complex xiHE{};
    double dp = 0.0;    ///< probe detuning [gamma]
    double phi0 = 0.0;  ///< closed-loop phase [rad]

    complex epsilon() const { return 1.0 + chiE; }
    complex mu() const { return 1.0 + chiH; }
};

/// Complex coherence decay rates including the detuning.
struct DecoherenceSet {
    complex gamma34{};
    complex gamma21{};
    complex gamma24{};
    complex gamma31{};
};

DecoherenceSet decoherence_rates(const MediumParams& params, const DarkState& dark, double dp);

/// Closed-form chiE, chiH, xiEH, xiHE. With lfc_enabled the Lorenz-Lorentz terms
/// (Gamma34 shift, the (1 + chiE/3) factor in xiHE and the phase-dependent
/// correction to chiH) are included; without it they are dropped.
/// Throws NumericalError when a resonance denominator vanishes.
ResponseCoefficients response_coefficients(const MediumParams& params, const DarkState& dark,
                                           double dp, double phi0);

/// Normalized source terms p (polarization) and m (magnetization) of one atom,
/// as produced by the coherences rho_34 and rho_21.
struct InducedSources {
    complex p{};
    complex m{};
};

/// p = 3 L gamma34 rho_34, m = 3 L gamma34 alpha rho_21.
InducedSources induced_sources(const DensityMatrix& rho, const MediumParams& params);

/// Complex probe Rabi frequencies of one drive configuration.
struct ProbeDrive {
    complex omegaE{};
    complex omegaB{};
};

struct OracleOptions {
    double condition_limit = 1e8;
    double nonlinearity_limit = 1e-3;
    bool check_linearity = true;
};

struct OracleResult {
    ResponseCoefficients coefficients;
    double drive_condition = 0.0;  ///< condition number of the 2x2 drive matrix
    double nonlinearity = 0.0;     ///< relative quadratic residual of the full solve
    bool nonlinear_warning = false;
};

/// Steady state of the unperturbed master equation, found as the null vector of
/// the numerically assembled 25x25 Liouvillian (no closed forms involved).
DensityMatrix zeroth_order_state(const MediumParams& params, double phi0);

/// First-order steady-state density matrix for a given probe drive.
DensityMatrix first_order_response(const MediumParams& params, double dp, double phi0,
                                   const ProbeDrive& drive);

/// Induced p and m for one drive configuration.
InducedSources induced_response(const MediumParams& params, double dp, double phi0,
                                const ProbeDrive& drive);

/**
 * Independent route to the response coefficients: assembles the full
 * Liouvillian from AtomModel, linearizes it in the probe (local fields
 * substituted when lfc_enabled), solves the first-order steady state and
 * extracts the 2x2 response matrix from the drives (probe.omegaE, 0) and
 * (0, probe.omegaB). The full (all-order) steady state at probe and 2*probe
 * is used to estimate the nonlinearity of the chosen amplitude.
 */
OracleResult steady_state_oracle(const MediumParams& params, double dp, double phi0,
                                 const ProbeDrive& probe = {1e-6, 1e-6},
                                 const OracleOptions& options = {});

/// Complex rates recovered from the first-order coherences of the oracle with
/// OmegaC = 0, where each coherence is a driven two-level response:
/// rho_34 = (i/2) OmegaE rho_44 / G34, rho_31 = (i/2) OmegaE rho_41 / G31,
/// rho_21 = (i/2) OmegaB rho_11 / G21, rho_24 = (i/2) OmegaB rho_14 / G24.
DecoherenceSet extract_decoherence(const MediumParams& params, double dp);

}  // namespace chiralprop
