#pragma once

#include <array>

#include <Eigen/Core>

#include "chiralprop/medium_params.hpp"

namespace chiralprop {

inline constexpr int kLevels = 5;

/// 5x5 density matrix over {|1>,...,|5>} (zero-based indices 0..4).
using DensityMatrix = Eigen::Matrix<complex, kLevels, kLevels>;

/// Zero-based index of level |n>.
constexpr int lvl(int n) { return n - 1; }

/// Instantaneous Rabi frequencies seen by one atom, in units of gamma.
struct AtomFields {
    complex omegaE{};  ///< electric probe, |4> -> |3>
    complex omegaB{};  ///< magnetic probe, |1> -> |2>
    complex omegaC{};  ///< control, |2> -> |3>
    complex omega1{};  ///< |1> -> |5>
    complex omega2{};  ///< |4> -> |5>
};

/// Fields acting on the atoms during probe propagation, with the closed-loop
/// phase carried by OmegaC. Omega1, Omega2 are zero unless params.prep_fields.
AtomFields control_fields(const MediumParams& params, double phi0);

/// OmegaC, Omega1 and Omega2 all on (the dark-state preparation stage).
AtomFields preparation_fields(const MediumParams& params, double phi0);

/// Pure-state projector onto the dark state.
DensityMatrix dark_state_matrix(const MediumParams& params);

/**
 * Master equation of the five-level medium,
 *
 *   d rho / dt = -i [H, rho] + D(rho),
 *
 * with H the interaction-picture Hamiltonian (hbar = 1) and D built from
 *  - spontaneous decay |3> -> |1>,|2>,|4>, |2> -> |1>, |5> -> |1>,|4>;
 *  - collisional dephasing of the probe coherences: levels |1> and |3> carry
 *    independent phase noise of rate gamma_dec each, |2> and |4> none. The
 *    ground-state coherence rho_14 is exempt so the dark state is stationary.
 *
 * The resulting coherence damping reproduces
 *   Re G34 = gamma/2 + gamma_dec, Re G21 = gamma21/2 + gamma_dec,
 *   Re G24 = gamma21/2,           Re G31 = gamma/2 + 2 gamma_dec.
 */
class AtomModel {
public:
    explicit AtomModel(const MediumParams& params);

    /// Right-hand side for probe detuning dp. Linear in rho.
    DensityMatrix rhs(const DensityMatrix& rho, const AtomFields& fields, double dp) const;

    /// Damping rate of coherence (j, k), zero-based, j != k.
    double coherence_damping(int j, int k) const { return damping_(j, k); }

private:
    struct Feed {
        int to;
        int from;
        double rate;
    };

    Eigen::Matrix<double, kLevels, kLevels> damping_;
    std::array<Feed, 6> feeds_{};
};

/// Convenience wrapper around AtomModel::rhs.
DensityMatrix bloch_rhs(const DensityMatrix& rho, const AtomFields& fields, double dp,
                        const MediumParams& params);

}  // namespace chiralprop
