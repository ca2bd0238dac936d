#include "chiralprop/maxwell_bloch.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace chiralprop {

namespace {
constexpr complex I{0.0, 1.0};

double smoothstep(double x)
{
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}
}  // namespace

PhaseSchedule::PhaseSchedule(std::vector<Segment> segments, double ramp)
    : segments_(std::move(segments)), ramp_(ramp)
{
    if (segments_.empty()) throw ParameterError("schedule", "needs at least one segment");
    if (!(ramp_ >= 0.0) || !std::isfinite(ramp_)) throw ParameterError("schedule.ramp", "must be >= 0");
    constexpr double pi = std::numbers::pi;
    for (std::size_t k = 0; k < segments_.size(); ++k) {
        const Segment& s = segments_[k];
        if (!std::isfinite(s.t_start) || !std::isfinite(s.phi0))
            throw ParameterError("schedule.segments", "non-finite entry");
        if (!(s.phi0 > -pi && s.phi0 <= pi))
            throw ParameterError("schedule.segments", "phi0 must lie in (-pi, pi]");
        if (k >= 2 && s.t_start < segments_[k - 1].t_start + ramp_)
            throw ParameterError("schedule.segments", "segments must be time-ordered and not overlap");
    }
}

double PhaseSchedule::operator()(double t) const
{
    double phi = segments_.front().phi0;
    for (std::size_t k = 1; k < segments_.size(); ++k) {
        const Segment& s = segments_[k];
        if (t <= s.t_start) break;
        const double w = ramp_ > 0.0 ? smoothstep((t - s.t_start) / ramp_) : 1.0;
        phi += w * (s.phi0 - phi);
    }
    return phi;
}

FieldSources field_sources(const DensityMatrix& rho, const MediumParams& p, bool couple_control,
                           complex control_phase)
{
    const double k0 = p.carrier_frequency();
    const double s = sign(p.polarization);
    const double a = p.alpha_fs;
    const double k = 3.0 * p.density_L * p.gamma34;
    const complex pe = k * rho(lvl(3), lvl(4));
    const complex m = k * a * rho(lvl(2), lvl(1));
    FieldSources f;
    f.omegaE = 0.5 * k0 * (I * pe - s * m);
    f.omegaB = 0.5 * k0 * a * (I * m + s * pe);
    if (couple_control)
        f.omegaC = 0.5 * k0 * I * 3.0 * p.density_L * p.gamma32 * rho(lvl(3), lvl(2)) * std::conj(control_phase);
    return f;
}

MaxwellBlochSolver::MaxwellBlochSolver(const MediumParams& params, PhaseSchedule schedule, SolverSettings settings)
    : params_(params),
      schedule_(std::move(schedule)),
      settings_(std::move(settings)),
      model_(params),
      dark_(dark_state_matrix(params))
{
}

AtomFields MaxwellBlochSolver::fields_at(const EnvelopeGrid& g, std::size_t i, double w, double t) const
{
    const std::size_t j = std::min(i + 1, g.size() - 1);
    AtomFields f;
    f.omegaE = (1.0 - w) * g.omegaE[i] + w * g.omegaE[j];
    f.omegaB = (1.0 - w) * g.omegaB[i] + w * g.omegaB[j];
    const complex c = (1.0 - w) * g.omegaC[i] + w * g.omegaC[j];
    f.omegaC = c * std::polar(1.0, schedule_(t) - params_.phi2 + params_.phi1);
    if (params_.prep_fields) {
        f.omega1 = params_.omega1();
        f.omega2 = params_.omega2();
    }
    return f;
}

void MaxwellBlochSolver::check_state(const DensityMatrix& rho, const EnvelopeGrid& g, std::size_t i)
{
    diag_.max_trace_error = std::max(diag_.max_trace_error, std::abs(rho.trace() - 1.0));
    diag_.max_hermiticity_error = std::max(diag_.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());

    const DensityMatrix herm = 0.5 * (rho + rho.adjoint());
    const bool sampled = settings_.eigen_stride > 0 && i % settings_.eigen_stride == 0;
    bool positive = true;
    if (!sampled) {
        const DensityMatrix shifted = herm + settings_.positivity_tol * DensityMatrix::Identity();
        positive = Eigen::LLT<DensityMatrix>(shifted).info() == Eigen::Success;
    }
    if (sampled || !positive) {
        const double lmin = Eigen::SelfAdjointEigenSolver<DensityMatrix>(herm, Eigen::EigenvaluesOnly).eigenvalues()(0);
        diag_.min_eigenvalue = std::min(diag_.min_eigenvalue, lmin);
        if (lmin < -settings_.positivity_tol)
            throw NumericalError("positivity drift: eigenvalue " + std::to_string(lmin) + " at z = " +
                                 std::to_string(g.z) + ", tau index " + std::to_string(i));
    }
}

SweepSources MaxwellBlochSolver::sweep(const EnvelopeGrid& g)
{
    const std::size_t n = g.size();
    SweepSources out;
    out.values.resize(n);
    if (n == 0) return out;

    const double ke = params_.lfc_enabled ? params_.density_L * params_.gamma34 : 0.0;
    const double kb = params_.alpha_fs * params_.alpha_fs * ke;
    const double h = g.dtau;
    const double phase_offset = params_.phi1 - params_.phi2;

    const auto deriv = [&](const DensityMatrix& rho, AtomFields f) {
        if (ke != 0.0) {
            f.omegaE += ke * rho(lvl(3), lvl(4));
            f.omegaB += kb * rho(lvl(2), lvl(1));
        }
        return model_.rhs(rho, f, 0.0);
    };
    const auto control_phase = [&](std::size_t i) { return std::polar(1.0, schedule_(g.tau(i) + g.z) + phase_offset); };

    DensityMatrix rho = dark_;
    for (std::size_t i = 0;; ++i) {
        check_state(rho, g, i);
        out.values[i] = field_sources(rho, params_, settings_.couple_control, control_phase(i));
        if (i + 1 == n) break;

        const double t = g.tau(i) + g.z;
        const AtomFields f0 = fields_at(g, i, 0.0, t);
        const AtomFields fh = fields_at(g, i, 0.5, t + 0.5 * h);
        const AtomFields f1 = fields_at(g, i, 1.0, t + h);
        const DensityMatrix k1 = deriv(rho, f0);
        const DensityMatrix k2 = deriv(rho + (0.5 * h) * k1, fh);
        const DensityMatrix k3 = deriv(rho + (0.5 * h) * k2, fh);
        const DensityMatrix k4 = deriv(rho + h * k3, f1);
        rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!rho.allFinite())
            throw NumericalError("non-finite density matrix at z = " + std::to_string(g.z) + ", tau index " +
                                 std::to_string(i + 1));
    }
    ++diag_.sweeps;
    return out;
}

EnvelopeGrid field_step(const EnvelopeGrid& grid, const SweepSources& s, double dz)
{
    EnvelopeGrid out = grid;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.omegaE[i] += dz * s.values[i].omegaE;
        out.omegaB[i] += dz * s.values[i].omegaB;
        out.omegaC[i] += dz * s.values[i].omegaC;
    }
    out.z = grid.z + dz;
    out.require_finite();
    return out;
}

EnvelopeGrid MaxwellBlochSolver::step(const EnvelopeGrid& grid, double dz)
{
    const SweepSources s0 = sweep(grid);

    double max_src = 0.0;
    double max_e = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        max_src = std::max(max_src, std::abs(s0.values[i].omegaE));
        max_e = std::max(max_e, std::abs(grid.omegaE[i]));
    }
    if (max_e > 0.0) {
        const double cfl = dz * max_src / max_e;
        diag_.max_cfl = std::max(diag_.max_cfl, cfl);
        if (cfl > settings_.cfl_limit)
            throw NumericalError("step too large: dz max|source| / max|OmegaE| = " + std::to_string(cfl) +
                                 " at z = " + std::to_string(grid.z));
    }

    const EnvelopeGrid half = field_step(grid, s0, 0.5 * dz);
    const SweepSources s1 = sweep(half);
    EnvelopeGrid next = field_step(grid, s1, dz);
    ++diag_.z_steps;
    return next;
}

RunResult MaxwellBlochSolver::run(const EnvelopeGrid& input)
{
    if (input.omegaB.size() != input.size() || input.omegaC.size() != input.size())
        throw ParameterError("input", "envelope components differ in length");
    if (input.size() < 2) throw ParameterError("grid.n_tau", "needs at least two samples");
    if (!(settings_.depth >= 0.0)) throw ParameterError("grid.depth", "must be >= 0");
    if (!(settings_.dz > 0.0)) throw ParameterError("grid.dz", "must be positive");
    input.require_finite();

    RunResult result;
    const auto steps = settings_.depth > 0.0
                           ? static_cast<std::size_t>(std::ceil(settings_.depth / settings_.dz - 1e-9))
                           : std::size_t{0};
    const double dz = steps > 0 ? settings_.depth / static_cast<double>(steps) : 0.0;
    result.dz = dz;

    std::vector<std::size_t> snap_steps;
    for (double d : settings_.snapshot_depths) {
        if (!(d >= 0.0) || d > settings_.depth * (1.0 + 1e-12))
            throw ParameterError("grid.snapshots", "snapshot depth outside [0, depth]");
        snap_steps.push_back(steps > 0 ? static_cast<std::size_t>(std::llround(d / dz)) : 0);
    }

    const std::size_t every = std::max<std::size_t>(1, settings_.metrics_every);
    double last_phase = 0.0;
    bool have_phase = false;
    const Handedness pol = params_.polarization;

    EnvelopeGrid grid = input;
    for (std::size_t k = 0;; ++k) {
        const bool snap = std::find(snap_steps.begin(), snap_steps.end(), k) != snap_steps.end();
        if (snap || k % every == 0 || k == steps) {
            PulseMetrics m = pulse_metrics(grid);
            if (have_phase) m.phase = unwrap_near(m.phase, last_phase);
            last_phase = m.phase;
            have_phase = true;
            result.track.push_back({grid.z, m});
            diag_.max_chirality_error =
                std::max(diag_.max_chirality_error, chirality_error(grid, pol, params_.alpha_fs));
            for (std::size_t s = 0; s < snap_steps.size(); ++s)
                if (snap_steps[s] == k) result.snapshots.push_back({grid.z, grid, m});
        }
        if (k == steps) break;
        grid = step(grid, dz);
    }
    // Keep snapshots in the requested order.
    std::vector<Snapshot> ordered;
    for (std::size_t s = 0; s < snap_steps.size(); ++s) {
        for (const Snapshot& sn : result.snapshots) {
            if (std::abs(sn.z - input.z - static_cast<double>(snap_steps[s]) * dz) <= 1e-12 * (1.0 + sn.z)) {
                ordered.push_back(sn);
                break;
            }
        }
    }
    result.snapshots = std::move(ordered);
    result.diagnostics = diag_;
    return result;
}

}  // namespace chiralprop
