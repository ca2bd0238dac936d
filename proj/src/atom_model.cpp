#include "chiralprop/atom_model.hpp"

namespace chiralprop {

AtomFields preparation_fields(const MediumParams& params, double phi0)
{
    const MediumParams p = params.with_closed_loop_phase(phi0);
    AtomFields f;
    f.omegaC = p.omegaC();
    f.omega1 = p.omega1();
    f.omega2 = p.omega2();
    return f;
}

AtomFields control_fields(const MediumParams& params, double phi0)
{
    AtomFields f = preparation_fields(params, phi0);
    if (!params.prep_fields) f.omega1 = f.omega2 = 0.0;
    return f;
}

DensityMatrix dark_state_matrix(const MediumParams& params)
{
    const DarkState d = dark_state(params);
    DensityMatrix rho = DensityMatrix::Zero();
    rho(lvl(1), lvl(1)) = d.rho11;
    rho(lvl(4), lvl(4)) = d.rho44;
    rho(lvl(4), lvl(1)) = d.rho41;
    rho(lvl(1), lvl(4)) = std::conj(d.rho41);
    return rho;
}

AtomModel::AtomModel(const MediumParams& p)
{
    const double gamma3 = p.gamma31 + p.gamma32 + p.gamma34;
    const double gamma2 = p.gamma21;
    const double gamma5 = p.gamma51 + p.gamma54;
    const std::array<double, kLevels> out{0.0, gamma2, gamma3, 0.0, gamma5};
    const std::array<double, kLevels> noisy{1.0, 0.0, 1.0, 0.0, 0.0};

    for (int j = 0; j < kLevels; ++j) {
        for (int k = 0; k < kLevels; ++k) {
            if (j == k) {
                damping_(j, k) = out[j];
                continue;
            }
            damping_(j, k) = 0.5 * (out[j] + out[k]) + p.gamma_dec * (noisy[j] + noisy[k]);
        }
    }
    damping_(lvl(1), lvl(4)) = damping_(lvl(4), lvl(1)) = 0.0;

    feeds_ = {Feed{lvl(1), lvl(3), p.gamma31}, Feed{lvl(2), lvl(3), p.gamma32},
              Feed{lvl(4), lvl(3), p.gamma34}, Feed{lvl(1), lvl(2), p.gamma21},
              Feed{lvl(1), lvl(5), p.gamma51}, Feed{lvl(4), lvl(5), p.gamma54}};
}

DensityMatrix AtomModel::rhs(const DensityMatrix& rho, const AtomFields& f, double dp) const
{
    struct Entry {
        int row;
        int col;
        complex value;
    };
    // Nonzero elements of H = -dp (A22 + A33) - 1/2 (OmegaB A21 + OmegaE A34
    //   + OmegaC A32 + Omega1 A51 + Omega2 A54 + h.c.)
    const std::array<Entry, 12> h{{
        {lvl(2), lvl(2), -dp},
        {lvl(3), lvl(3), -dp},
        {lvl(2), lvl(1), -0.5 * f.omegaB},
        {lvl(1), lvl(2), -0.5 * std::conj(f.omegaB)},
        {lvl(3), lvl(4), -0.5 * f.omegaE},
        {lvl(4), lvl(3), -0.5 * std::conj(f.omegaE)},
        {lvl(3), lvl(2), -0.5 * f.omegaC},
        {lvl(2), lvl(3), -0.5 * std::conj(f.omegaC)},
        {lvl(5), lvl(1), -0.5 * f.omega1},
        {lvl(1), lvl(5), -0.5 * std::conj(f.omega1)},
        {lvl(5), lvl(4), -0.5 * f.omega2},
        {lvl(4), lvl(5), -0.5 * std::conj(f.omega2)},
    }};

    // commutator [H, rho]
    DensityMatrix comm = DensityMatrix::Zero();
    for (const Entry& e : h) {
        comm.row(e.row) += e.value * rho.row(e.col);
        comm.col(e.col) -= e.value * rho.col(e.row);
    }

    DensityMatrix d = complex(0.0, -1.0) * comm;
    d.array() -= damping_.array().cast<complex>() * rho.array();
    for (const Feed& fd : feeds_) d(fd.to, fd.to) += fd.rate * rho(fd.from, fd.from);
    return d;
}

DensityMatrix bloch_rhs(const DensityMatrix& rho, const AtomFields& fields, double dp,
                        const MediumParams& params)
{
    return AtomModel(params).rhs(rho, fields, dp);
}

}  // namespace chiralprop
