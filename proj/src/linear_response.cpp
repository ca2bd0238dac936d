#include "chiralprop/linear_response.hpp"

#include <algorithm>
#include <array>
#include <vector>
#include <cmath>

#include <Eigen/Dense>

namespace chiralprop {

namespace {

constexpr int kDim = kLevels * kLevels;
using Superop = Eigen::Matrix<complex, kDim, kDim>;
using StateVector = Eigen::Matrix<complex, kDim, 1>;
constexpr complex I{0.0, 1.0};

// Column-major flattening, matching Eigen's storage of DensityMatrix.
constexpr int vec_index(int row, int col) { return row + kLevels * col; }

StateVector flatten(const DensityMatrix& rho) { return Eigen::Map<const StateVector>(rho.data()); }

DensityMatrix unflatten(const StateVector& v) { return Eigen::Map<const DensityMatrix>(v.data()); }

Superop liouvillian(const AtomModel& model, const AtomFields& fields, double dp)
{
    Superop s;
    for (int col = 0; col < kLevels; ++col) {
        for (int row = 0; row < kLevels; ++row) {
            DensityMatrix basis = DensityMatrix::Zero();
            basis(row, col) = 1.0;
            s.col(vec_index(row, col)) = flatten(model.rhs(basis, fields, dp));
        }
    }
    return s;
}

// Extra linear condition sum_k row_k x_k = value appended to the system.
struct Constraint {
    StateVector row;
    complex value;
};

Constraint trace_is(complex value)
{
    Constraint c{StateVector::Zero(), value};
    for (int k = 0; k < kLevels; ++k) c.row(vec_index(k, k)) = 1.0;
    return c;
}

Constraint element_is(int row, int col, complex value)
{
    Constraint c{StateVector::Zero(), value};
    c.row(vec_index(row, col)) = 1.0;
    return c;
}

// Ground-state block {|1>,|4>}: stationary without probe when the
// preparation fields are off.
constexpr std::array<std::pair<int, int>, 4> kGroundBlock{
    {{lvl(1), lvl(1)}, {lvl(4), lvl(4)}, {lvl(1), lvl(4)}, {lvl(4), lvl(1)}}};

bool in_ground_block(int index)
{
    for (auto [r, c] : kGroundBlock)
        if (vec_index(r, c) == index) return true;
    return false;
}

// Least-squares solve of the equations A x = b (rows of the ground block
// dropped if requested) together with the constraints; insists on a unique,
// consistent solution.
StateVector solve_constrained(const Superop& a, const StateVector& b, const std::vector<Constraint>& extra,
                              bool drop_ground_rows, const char* what)
{
    std::vector<int> rows;
    for (int r = 0; r < kDim; ++r)
        if (!drop_ground_rows || !in_ground_block(r)) rows.push_back(r);
    const auto m_rows = static_cast<Eigen::Index>(rows.size() + extra.size());
    Eigen::MatrixXcd m(m_rows, kDim);
    Eigen::VectorXcd rhs(m_rows);
    Eigen::Index k = 0;
    for (int r : rows) {
        m.row(k) = a.row(r);
        rhs(k++) = b(r);
    }
    for (const Constraint& c : extra) {
        m.row(k) = c.row.transpose();
        rhs(k++) = c.value;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(m);
    qr.setThreshold(1e-12);
    if (qr.rank() < kDim)
        throw NumericalError(std::string(what) + ": singular steady-state system (rank " +
                             std::to_string(qr.rank()) + " < 25)");
    const Eigen::VectorXcd x = qr.solve(rhs);
    const double scale = std::max({rhs.norm(), m.norm() * x.norm(), 1e-300});
    const double residual = (m * x - rhs).norm();
    if (!(residual <= 1e-9 * scale))
        throw NumericalError(std::string(what) + ": inconsistent steady-state system, residual " +
                             std::to_string(residual));
    return x;
}

DensityMatrix hermitize(const DensityMatrix& rho) { return 0.5 * (rho + rho.adjoint()); }

// Holomorphic (A_jk) and anti-holomorphic (A_kj) parts of the change of
// rhs(rho0) under a unit probe on one transition.
struct DriveResponse {
    StateVector plus;
    StateVector minus;
};

DriveResponse drive_response(const AtomModel& model, const AtomFields& base, const DensityMatrix& rho0,
                             double dp, complex AtomFields::*probe)
{
    const StateVector r0 = flatten(model.rhs(rho0, base, dp));
    AtomFields real_drive = base;
    real_drive.*probe += 1.0;
    AtomFields imag_drive = base;
    imag_drive.*probe += I;
    const StateVector ur = flatten(model.rhs(rho0, real_drive, dp)) - r0;
    const StateVector ui = flatten(model.rhs(rho0, imag_drive, dp)) - r0;
    return {0.5 * (ur - I * ui), 0.5 * (ur + I * ui)};
}

struct LinearizedSystem {
    bool prep_fields = false;
    Superop a;
    DriveResponse e;
    DriveResponse b;
    DensityMatrix rho0;
};

LinearizedSystem linearize(const MediumParams& params, double dp, double phi0)
{
    const AtomModel model(params);
    const AtomFields base = control_fields(params, phi0);
    LinearizedSystem sys;
    sys.prep_fields = params.prep_fields;
    sys.rho0 = zeroth_order_state(params, phi0);
    sys.a = liouvillian(model, base, dp);
    sys.e = drive_response(model, base, sys.rho0, dp, &AtomFields::omegaE);
    sys.b = drive_response(model, base, sys.rho0, dp, &AtomFields::omegaB);
    if (params.lfc_enabled) {
        // Local fields: OmegaE_loc = OmegaE + L g34 rho_34,
        //               OmegaB_loc = OmegaB + alpha^2 L g34 rho_21.
        const double ke = params.density_L * params.gamma34;
        const double kb = params.alpha_fs * params.alpha_fs * ke;
        sys.a.col(vec_index(lvl(3), lvl(4))) += ke * sys.e.plus;
        sys.a.col(vec_index(lvl(4), lvl(3))) += ke * sys.e.minus;
        sys.a.col(vec_index(lvl(2), lvl(1))) += kb * sys.b.plus;
        sys.a.col(vec_index(lvl(1), lvl(2))) += kb * sys.b.minus;
    }
    return sys;
}

DensityMatrix solve_first_order(const LinearizedSystem& sys, const ProbeDrive& d)
{
    const StateVector source = d.omegaE * sys.e.plus + std::conj(d.omegaE) * sys.e.minus +
                               d.omegaB * sys.b.plus + std::conj(d.omegaB) * sys.b.minus;
    // The probe couples ground to excited states only, so the first-order
    // ground block vanishes; it is also what fixes the solution when the
    // ground block is free (preparation fields off).
    std::vector<Constraint> extra{trace_is(0.0)};
    for (auto [r, c] : kGroundBlock) extra.push_back(element_is(r, c, 0.0));
    return unflatten(solve_constrained(sys.a, -source, extra, false, "first-order response"));
}

// All-order steady state with the probe switched on. Local fields are iterated
// to self-consistency when LFC is enabled. Without preparation fields the
// ground block is held at its prepared value (undepleted dark state).
DensityMatrix full_steady_state(const MediumParams& params, double dp, double phi0, const ProbeDrive& d,
                                const DensityMatrix& rho0)
{
    const AtomModel model(params);
    AtomFields fields = control_fields(params, phi0);
    const double ke = params.density_L * params.gamma34;
    const double kb = params.alpha_fs * params.alpha_fs * ke;
    std::vector<Constraint> extra;
    if (params.prep_fields) {
        extra.push_back(trace_is(1.0));
    } else {
        for (auto [r, c] : kGroundBlock) extra.push_back(element_is(r, c, rho0(r, c)));
    }
    DensityMatrix rho = rho0;
    const int iterations = params.lfc_enabled ? 200 : 1;
    for (int it = 0; it < iterations; ++it) {
        fields.omegaE = d.omegaE;
        fields.omegaB = d.omegaB;
        if (params.lfc_enabled) {
            fields.omegaE += ke * rho(lvl(3), lvl(4));
            fields.omegaB += kb * rho(lvl(2), lvl(1));
        }
        const DensityMatrix next = unflatten(solve_constrained(liouvillian(model, fields, dp), StateVector::Zero(),
                                                               extra, !params.prep_fields, "full steady state"));
        const double change = (next - rho).norm();
        rho = next;
        if (change <= 1e-16 * std::max(1e-300, std::abs(d.omegaE) + std::abs(d.omegaB))) break;
    }
    return hermitize(rho);
}

}  // namespace

DecoherenceSet decoherence_rates(const MediumParams& p, const DarkState& dark, double dp)
{
    const double g = p.gamma_total();
    const double lfc_shift = p.lfc_enabled ? dark.rho44 * p.density_L * p.gamma34 / 2.0 : 0.0;
    DecoherenceSet s;
    s.gamma34 = complex(g / 2.0 + p.gamma_dec, -(dp + lfc_shift));
    s.gamma21 = complex(p.gamma21 / 2.0 + p.gamma_dec, -dp);
    s.gamma24 = complex(p.gamma21 / 2.0, -dp);
    s.gamma31 = complex(g / 2.0 + 2.0 * p.gamma_dec, -dp);
    return s;
}

ResponseCoefficients response_coefficients(const MediumParams& p, const DarkState& dark, double dp,
                                           double phi0)
{
    const DecoherenceSet g = decoherence_rates(p, dark, dp);
    const double c_quarter = p.omegaC_mag * p.omegaC_mag / 4.0;
    const complex den_e = g.gamma34 * g.gamma24 + c_quarter;
    const complex den_h = g.gamma21 * g.gamma31 + c_quarter;
    if (std::abs(den_e) == 0.0 || std::abs(den_h) == 0.0)
        throw NumericalError("response_coefficients: resonance denominator vanishes at dp = " +
                             std::to_string(dp));

    const double k = 3.0 * p.density_L * p.gamma34;
    const double alpha = p.alpha_fs;
    const double cross = k * alpha * std::abs(dark.rho41) * p.omegaC_mag / 4.0;

    ResponseCoefficients r;
    r.dp = dp;
    r.phi0 = phi0;
    r.chiE = k * dark.rho44 * (I / 2.0) * g.gamma24 / den_e;
    r.xiEH = cross * std::polar(1.0, phi0) / den_e;
    const complex xi_he_bare = cross * std::polar(1.0, -phi0) / den_h;
    const complex chi_h_bare = k * alpha * alpha * dark.rho11 * (I / 2.0) * g.gamma31 / den_h;
    if (p.lfc_enabled) {
        r.xiHE = xi_he_bare * (1.0 + r.chiE / 3.0);
        // chiH_bare * (1 - xiEH |rho41| |OmegaC|/4 e^{-i phi0} / (3 alpha rho11 (i/2) G31)),
        // multiplied out so rho11 = 0 or alpha = 0 stay finite.
        r.chiH = chi_h_bare - r.xiEH * xi_he_bare / 3.0;
    } else {
        r.xiHE = xi_he_bare;
        r.chiH = chi_h_bare;
    }
    return r;
}

InducedSources induced_sources(const DensityMatrix& rho, const MediumParams& p)
{
    const double k = 3.0 * p.density_L * p.gamma34;
    return {k * rho(lvl(3), lvl(4)), k * p.alpha_fs * rho(lvl(2), lvl(1))};
}

DensityMatrix zeroth_order_state(const MediumParams& params, double phi0)
{
    // Steady state of the preparation stage; with the preparation fields off
    // it stays stationary during propagation.
    const AtomModel model(params);
    const Superop s = liouvillian(model, preparation_fields(params, phi0), 0.0);
    return hermitize(
        unflatten(solve_constrained(s, StateVector::Zero(), {trace_is(1.0)}, false, "zeroth-order state")));
}

DensityMatrix first_order_response(const MediumParams& params, double dp, double phi0, const ProbeDrive& drive)
{
    return solve_first_order(linearize(params, dp, phi0), drive);
}

InducedSources induced_response(const MediumParams& params, double dp, double phi0, const ProbeDrive& drive)
{
    return induced_sources(first_order_response(params, dp, phi0, drive), params);
}

OracleResult steady_state_oracle(const MediumParams& params, double dp, double phi0, const ProbeDrive& probe,
                                 const OracleOptions& options)
{
    if (!(params.alpha_fs > 0.0))
        throw NumericalError("steady_state_oracle: alpha_fs must be positive to normalize OmegaB");

    const double alpha = params.alpha_fs;
    const ProbeDrive d1{probe.omegaE, 0.0};
    const ProbeDrive d2{0.0, probe.omegaB};

    // Field matrix columns: (e, b) of each drive, b = OmegaB / alpha.
    Eigen::Matrix2cd f;
    f << d1.omegaE, d2.omegaE, d1.omegaB / alpha, d2.omegaB / alpha;
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(f);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    OracleResult out;
    out.drive_condition = smin > 0.0 ? smax / smin : INFINITY;
    if (!(out.drive_condition < options.condition_limit))
        throw NumericalError("steady_state_oracle: probe drives are degenerate (condition " +
                             std::to_string(out.drive_condition) + ")");

    const LinearizedSystem sys = linearize(params, dp, phi0);
    const InducedSources s1 = induced_sources(solve_first_order(sys, d1), params);
    const InducedSources s2 = induced_sources(solve_first_order(sys, d2), params);
    Eigen::Matrix2cd resp;
    resp << s1.p, s2.p, s1.m, s2.m;
    const Eigen::Matrix2cd k = resp * f.inverse();

    out.coefficients.chiE = k(0, 0);
    out.coefficients.xiEH = k(0, 1);
    out.coefficients.xiHE = k(1, 0);
    out.coefficients.chiH = k(1, 1);
    out.coefficients.dp = dp;
    out.coefficients.phi0 = phi0;

    if (options.check_linearity) {
        const ProbeDrive both{probe.omegaE, probe.omegaB};
        const ProbeDrive twice{2.0 * probe.omegaE, 2.0 * probe.omegaB};
        const DensityMatrix delta1 = full_steady_state(params, dp, phi0, both, sys.rho0) - sys.rho0;
        const DensityMatrix delta2 = full_steady_state(params, dp, phi0, twice, sys.rho0) - sys.rho0;
        const double scale = (2.0 * delta1).norm();
        out.nonlinearity = scale > 0.0 ? (delta2 - 2.0 * delta1).norm() / scale : 0.0;
        out.nonlinear_warning = out.nonlinearity > options.nonlinearity_limit;
    }
    return out;
}

DecoherenceSet extract_decoherence(const MediumParams& params, double dp)
{
    MediumParams p = params;
    p.omegaC_mag = 0.0;
    const double phi0 = p.closed_loop_phase();
    const LinearizedSystem sys = linearize(p, dp, phi0);
    const DensityMatrix& r0 = sys.rho0;
    const DensityMatrix re = solve_first_order(sys, {1.0, 0.0});
    const DensityMatrix rb = solve_first_order(sys, {0.0, 1.0});

    DecoherenceSet g;
    g.gamma34 = (I / 2.0) * r0(lvl(4), lvl(4)) / re(lvl(3), lvl(4));
    g.gamma31 = (I / 2.0) * r0(lvl(4), lvl(1)) / re(lvl(3), lvl(1));
    g.gamma21 = (I / 2.0) * r0(lvl(1), lvl(1)) / rb(lvl(2), lvl(1));
    g.gamma24 = (I / 2.0) * r0(lvl(1), lvl(4)) / rb(lvl(2), lvl(4));
    return g;
}

}  // namespace chiralprop
