#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chiralprop/envelope.hpp"
#include "chiralprop/maxwell_bloch.hpp"
#include "chiralprop/medium_params.hpp"

namespace chiralprop {

/// Malformed or invalid scenario configuration (exit code 2 in the CLI).
/// path() is the dotted key path, line() the 1-based source line or 0.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, int line, const std::string& what);
    const std::string& path() const noexcept { return path_; }
    int line() const noexcept { return line_; }

private:
    std::string path_;
    int line_;
};

enum class Mode { ResponseSweep, BetaSweep, Propagate };

std::string_view to_string(Mode m);

/// Inclusive uniform range; points == 1 means just `min`.
struct Range {
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 1;

    std::vector<double> values() const;
    bool operator==(const Range&) const = default;
};

struct GridConfig {
    std::size_t n_tau = 2048;
    std::optional<double> dtau;  ///< default: 16 sigma / n_tau
    double dz = 2e-7;
    double depth = 0.0;
    std::vector<double> snapshots;
    std::size_t metrics_every = 1;
    bool couple_control = false;

    bool operator==(const GridConfig&) const = default;
};

struct ScenarioConfig {
    Mode mode = Mode::Propagate;
    MediumParams medium;  ///< as written in the config; validate() is applied when running
    PulseShape pulse;
    std::optional<PhaseSchedule> schedule;  ///< default: constant medium.closed_loop_phase()
    GridConfig grid;
    Range dp{-3.0, 3.0, 601};                                        ///< response sweep
    std::optional<Range> phi0;                                       ///< response sweep (default: medium phase)
    Range beta_phi0{-std::numbers::pi, std::numbers::pi, 361};       ///< beta sweep
    std::string out_dir = ".";

    double dtau() const { return grid.dtau.value_or(16.0 * pulse.sigma / static_cast<double>(grid.n_tau)); }
    PhaseSchedule resolved_schedule() const;

    bool operator==(const ScenarioConfig&) const;
};

bool operator==(const PulseShape& a, const PulseShape& b);

/// YAML document -> validated config. Unknown keys, missing required keys and
/// invalid values throw ConfigError with the key path and line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Inverse of parse_config (round-trips exactly).
std::string serialize_config(const ScenarioConfig& cfg);

struct OutputFile {
    std::string path;
    std::uintmax_t bytes = 0;
};

struct ScenarioOutcome {
    std::vector<OutputFile> files;
    std::string manifest;
    std::optional<Diagnostics> diagnostics;
};

struct RunOptions {
    std::optional<std::string> out_dir;  ///< overrides cfg.out_dir
    std::uint64_t seed = 0;
    std::size_t threads = 0;             ///< 0: CHIRALPROP_THREADS or hardware concurrency
};

/// Runs one scenario and writes its CSV files and manifest.json. Solver
/// failures are written to diagnostics.txt in the output directory and
/// rethrown as NumericalError.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Thread budget: CHIRALPROP_THREADS if set and positive, else hardware concurrency.
std::size_t thread_budget();

/// Reference curves for a propagation run, starting from the z = 0 metrics:
/// centroid delayed by ng z, phase advanced by the integral of Re(beta) k0 and
/// peak amplified by exp(-integral of Im(beta) k0), where beta follows the
/// phase the pulse centre sees at lab time centroid + z.
struct ReferenceTrack {
    std::vector<double> z;
    std::vector<double> centroid;
    std::vector<double> phase;
    std::vector<double> log_gain;
    std::vector<double> phi0;
};

ReferenceTrack reference_track(const MediumParams& params, const PhaseSchedule& schedule, const PulseMetrics& start,
                               const std::vector<double>& z);

/// Quick built-in checks (oracle equivalence on random media, dark-state
/// stationarity, FFT round trip). Prints one line per check; true if all pass.
bool run_selftest(std::uint64_t seed, std::ostream& out);

}  // namespace chiralprop
