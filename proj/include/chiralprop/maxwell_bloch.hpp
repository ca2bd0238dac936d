#pragma once

#include <cstddef>
#include <vector>

#include "chiralprop/atom_model.hpp"
#include "chiralprop/envelope.hpp"

namespace chiralprop {

/**
 * Closed-loop phase against lab time t = tau + z (c = 1). Each segment starts
 * at t_start; the change from the previous value follows a smoothstep over
 * `ramp`. The first segment's t_start is ignored.
 */
class PhaseSchedule {
public:
    struct Segment {
        double t_start = 0.0;
        double phi0 = 0.0;
        bool operator==(const Segment&) const = default;
    };

    PhaseSchedule() = default;
    explicit PhaseSchedule(double phi0) : segments_{{0.0, phi0}} {}
    /// Throws ParameterError for unordered or overlapping segments or phases
    /// outside (-pi, pi].
    PhaseSchedule(std::vector<Segment> segments, double ramp);

    double operator()(double t) const;
    bool is_constant() const { return segments_.size() <= 1; }
    const std::vector<Segment>& segments() const { return segments_; }
    double ramp() const { return ramp_; }

    bool operator==(const PhaseSchedule&) const = default;

private:
    std::vector<Segment> segments_{{0.0, std::numbers::pi / 2.0}};
    double ramp_ = 5.0;
};

/// z-derivatives of the envelopes at one tau sample.
struct FieldSources {
    complex omegaE{};
    complex omegaB{};
    complex omegaC{};
};

/**
 * Right-hand sides of the first-order field equations in the retarded frame,
 * with p = 3 L gamma34 rho_34 and m = 3 L gamma34 alpha rho_21:
 *   dOmegaE/dz = (i k0/2) p -+ (k0/2) m,
 *   dOmegaB/dz = alpha [(i k0/2) m +- (k0/2) p],
 * and, when couple_control is set, dOmegaC/dz = (i k0/2) 3 L gamma32 rho_32
 * (returned without the scheduled control phase, see control_phase).
 */
FieldSources field_sources(const DensityMatrix& rho, const MediumParams& params, bool couple_control,
                           complex control_phase = 1.0);

struct SolverSettings {
    double dz = 2e-7;
    double depth = 0.0;
    std::vector<double> snapshot_depths;
    std::size_t metrics_every = 1;   ///< record metrics every k z-steps
    bool couple_control = false;     ///< propagate OmegaC with its medium source
    double positivity_tol = 1e-8;    ///< abort below -tol
    double cfl_limit = 0.1;          ///< abort when dz max|dOmegaE/dz| / max|OmegaE| exceeds it
    std::size_t eigen_stride = 64;   ///< full eigenvalue check every k tau samples
};

struct Diagnostics {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0;
    double min_eigenvalue = 0.0;
    double max_chirality_error = 0.0;
    double max_cfl = 0.0;
    std::size_t z_steps = 0;
    std::size_t sweeps = 0;
};

struct Snapshot {
    double z = 0.0;
    EnvelopeGrid grid;
    PulseMetrics metrics;
};

struct TrackPoint {
    double z = 0.0;
    PulseMetrics metrics;
};

struct RunResult {
    std::vector<Snapshot> snapshots;
    std::vector<TrackPoint> track;
    Diagnostics diagnostics;
    double dz = 0.0;  ///< step actually used (depth / number of steps)
};

/// Per-sample sources of one tau sweep.
struct SweepSources {
    std::vector<FieldSources> values;
};

class MaxwellBlochSolver {
public:
    MaxwellBlochSolver(const MediumParams& params, PhaseSchedule schedule, SolverSettings settings);

    /// Integrates the atoms along tau (RK4, starting from the dark state) at
    /// depth grid.z and returns the field sources at every sample.
    SweepSources sweep(const EnvelopeGrid& grid);

    /// Explicit midpoint step in z.
    EnvelopeGrid step(const EnvelopeGrid& grid, double dz);

    RunResult run(const EnvelopeGrid& input);

    const Diagnostics& diagnostics() const { return diag_; }

private:
    AtomFields fields_at(const EnvelopeGrid& g, std::size_t i, double weight_next, double t) const;
    void check_state(const DensityMatrix& rho, const EnvelopeGrid& g, std::size_t i);

    MediumParams params_;
    PhaseSchedule schedule_;
    SolverSettings settings_;
    AtomModel model_;
    DensityMatrix dark_;
    Diagnostics diag_;
};

/// grid + dz * sources, sample by sample; z advanced by dz.
EnvelopeGrid field_step(const EnvelopeGrid& grid, const SweepSources& sources, double dz);

}  // namespace chiralprop
