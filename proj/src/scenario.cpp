#include "chiralprop/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include "chiralprop/chiral_dispersion.hpp"
#include "chiralprop/csv.hpp"
#include "chiralprop/linear_response.hpp"
#include "chiralprop/spectral.hpp"

#ifndef CHIRALPROP_VERSION
#define CHIRALPROP_VERSION "unknown"
#endif

namespace chiralprop {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::string path, int line, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (path.empty() ? std::string() : path + ": ") + what),
      path_(std::move(path)),
      line_(line)
{
}

std::string_view to_string(Mode m)
{
    switch (m) {
    case Mode::ResponseSweep: return "response-sweep";
    case Mode::BetaSweep: return "beta-sweep";
    case Mode::Propagate: return "propagate";
    }
    return "?";
}

std::vector<double> Range::values() const
{
    std::vector<double> v(points);
    for (std::size_t k = 0; k < points; ++k)
        v[k] = points == 1 ? min : min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
    return v;
}

bool operator==(const PulseShape& a, const PulseShape& b)
{
    return a.sigma == b.sigma && a.amplitude == b.amplitude && a.center == b.center;
}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const
{
    return mode == o.mode && medium == o.medium && pulse == o.pulse && schedule == o.schedule && grid == o.grid &&
           dp == o.dp && phi0 == o.phi0 && beta_phi0 == o.beta_phi0 && out_dir == o.out_dir;
}

PhaseSchedule ScenarioConfig::resolved_schedule() const
{
    if (schedule) return *schedule;
    return PhaseSchedule(medium.closed_loop_phase());
}

// ---------------------------------------------------------------- parsing

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

std::string join(const std::string& parent, const std::string& key)
{
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& path)
{
    if (!node.IsMap()) throw ConfigError(path, line_of(node), "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            throw ConfigError(join(path, key), line_of(kv.first), "unknown key (allowed: " + list + ")");
        }
    }
}

// Numbers, optionally written as multiples of pi: "pi", "-pi/2", "0.25*pi", "3pi/4".
double parse_number(const YAML::Node& n, const std::string& path)
{
    if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected a number");
    const std::string text = n.Scalar();
    static const std::regex pi_expr(R"(^\s*([+-])?\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, pi_expr)) {
        double v = std::numbers::pi;
        if (m[2].matched) v *= std::stod(m[2].str());
        if (m[3].matched) v /= std::stod(m[3].str());
        if (m[1].matched && m[1].str() == "-") v = -v;
        return v;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (text.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(path, line_of(n), "not a number: '" + text + "'");
    }
}

std::size_t parse_count(const YAML::Node& n, const std::string& path)
{
    const double v = parse_number(n, path);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) throw ConfigError(path, line_of(n), "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

bool parse_bool(const YAML::Node& n, const std::string& path)
{
    if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected true or false");
    const std::string t = n.Scalar();
    if (t == "true") return true;
    if (t == "false") return false;
    throw ConfigError(path, line_of(n), "expected true or false, got '" + t + "'");
}

std::string parse_string(const YAML::Node& n, const std::string& path)
{
    if (!n.IsScalar()) throw ConfigError(path, line_of(n), "expected a string");
    return n.Scalar();
}

struct MediumKey {
    const char* name;
    double MediumParams::*field;
};

constexpr MediumKey kMediumKeys[] = {
    {"gamma31", &MediumParams::gamma31},       {"gamma32", &MediumParams::gamma32},
    {"gamma34", &MediumParams::gamma34},       {"gamma21", &MediumParams::gamma21},
    {"gamma51", &MediumParams::gamma51},       {"gamma54", &MediumParams::gamma54},
    {"gamma_dec", &MediumParams::gamma_dec},   {"gamma_total_si", &MediumParams::gamma_total_si},
    {"lambda0", &MediumParams::lambda0},       {"L", &MediumParams::density_L},
    {"alpha_fs", &MediumParams::alpha_fs},     {"omega1", &MediumParams::omega1_mag},
    {"omega2", &MediumParams::omega2_mag},     {"omegaC", &MediumParams::omegaC_mag},
    {"phi1", &MediumParams::phi1},             {"phi2", &MediumParams::phi2},
    {"phiC", &MediumParams::phiC},
};

MediumParams parse_medium(const YAML::Node& node)
{
    std::set<std::string> allowed{"polarization", "lfc", "prep_fields"};
    for (const MediumKey& k : kMediumKeys) allowed.insert(k.name);
    check_keys(node, allowed, "medium");

    MediumParams p;
    for (const MediumKey& k : kMediumKeys)
        if (node[k.name]) p.*k.field = parse_number(node[k.name], join("medium", k.name));
    if (node["polarization"]) {
        const std::string tag = parse_string(node["polarization"], "medium.polarization");
        const auto h = parse_handedness(tag);
        if (!h)
            throw ConfigError("medium.polarization", line_of(node["polarization"]),
                              "must be 'left' or 'right', got '" + tag + "'");
        p.polarization = *h;
    }
    if (node["lfc"]) p.lfc_enabled = parse_bool(node["lfc"], "medium.lfc");
    if (node["prep_fields"]) p.prep_fields = parse_bool(node["prep_fields"], "medium.prep_fields");

    try {
        (void)validate(p);
    } catch (const ParameterError& e) {
        const YAML::Node offending = node[e.field()];
        throw ConfigError(join("medium", e.field()), offending ? line_of(offending) : line_of(node), e.what());
    }
    return p;
}

Range parse_range(const YAML::Node& node, const std::string& path, Range r)
{
    check_keys(node, {"min", "max", "points"}, path);
    if (node["min"]) r.min = parse_number(node["min"], join(path, "min"));
    if (node["max"]) r.max = parse_number(node["max"], join(path, "max"));
    if (node["points"]) r.points = parse_count(node["points"], join(path, "points"));
    if (r.points < 1) throw ConfigError(join(path, "points"), line_of(node), "must be at least 1");
    if (!(r.max >= r.min)) throw ConfigError(path, line_of(node), "max must be >= min");
    return r;
}

PhaseSchedule parse_schedule(const YAML::Node& node)
{
    check_keys(node, {"ramp", "segments"}, "schedule");
    double ramp = 5.0;
    if (node["ramp"]) ramp = parse_number(node["ramp"], "schedule.ramp");
    const YAML::Node segs = node["segments"];
    if (!segs) throw ConfigError("schedule.segments", line_of(node), "required key missing");
    if (!segs.IsSequence() || segs.size() == 0)
        throw ConfigError("schedule.segments", line_of(segs), "expected a non-empty list");
    std::vector<PhaseSchedule::Segment> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string path = "schedule.segments[" + std::to_string(i) + "]";
        check_keys(segs[i], {"t", "phi0"}, path);
        if (!segs[i]["phi0"]) throw ConfigError(join(path, "phi0"), line_of(segs[i]), "required key missing");
        PhaseSchedule::Segment s;
        if (segs[i]["t"]) s.t_start = parse_number(segs[i]["t"], join(path, "t"));
        s.phi0 = parse_number(segs[i]["phi0"], join(path, "phi0"));
        out.push_back(s);
    }
    try {
        return PhaseSchedule(std::move(out), ramp);
    } catch (const ParameterError& e) {
        throw ConfigError(e.field(), line_of(node), e.what());
    }
}

GridConfig parse_grid(const YAML::Node& node)
{
    check_keys(node, {"n_tau", "dtau", "dz", "depth", "snapshots", "metrics_every", "couple_control"}, "grid");
    GridConfig g;
    if (node["n_tau"]) g.n_tau = parse_count(node["n_tau"], "grid.n_tau");
    if (node["dtau"]) g.dtau = parse_number(node["dtau"], "grid.dtau");
    if (node["dz"]) g.dz = parse_number(node["dz"], "grid.dz");
    if (!node["depth"]) throw ConfigError("grid.depth", line_of(node), "required key missing");
    g.depth = parse_number(node["depth"], "grid.depth");
    if (node["snapshots"]) {
        const YAML::Node s = node["snapshots"];
        if (!s.IsSequence()) throw ConfigError("grid.snapshots", line_of(s), "expected a list of depths");
        for (std::size_t i = 0; i < s.size(); ++i)
            g.snapshots.push_back(parse_number(s[i], "grid.snapshots[" + std::to_string(i) + "]"));
    }
    if (node["metrics_every"]) g.metrics_every = parse_count(node["metrics_every"], "grid.metrics_every");
    if (node["couple_control"]) g.couple_control = parse_bool(node["couple_control"], "grid.couple_control");

    const int line = line_of(node);
    if (!is_power_of_two(g.n_tau) || g.n_tau < 2)
        throw ConfigError("grid.n_tau", line, "must be a power of two >= 2");
    if (g.dtau && !(*g.dtau > 0.0)) throw ConfigError("grid.dtau", line, "must be positive");
    if (!(g.dz > 0.0)) throw ConfigError("grid.dz", line, "must be positive");
    if (!(g.depth >= 0.0) || !std::isfinite(g.depth)) throw ConfigError("grid.depth", line, "must be >= 0");
    if (g.metrics_every < 1) throw ConfigError("grid.metrics_every", line, "must be >= 1");
    for (double d : g.snapshots)
        if (!(d >= 0.0 && d <= g.depth)) throw ConfigError("grid.snapshots", line, "depths must lie in [0, depth]");
    return g;
}

PulseShape parse_pulse(const YAML::Node& node)
{
    check_keys(node, {"sigma", "amplitude", "center"}, "pulse");
    PulseShape p;
    if (!node["sigma"]) throw ConfigError("pulse.sigma", line_of(node), "required key missing");
    p.sigma = parse_number(node["sigma"], "pulse.sigma");
    if (!(p.sigma > 0.0)) throw ConfigError("pulse.sigma", line_of(node["sigma"]), "must be positive");
    p.center = 6.0 * p.sigma;
    if (node["amplitude"]) p.amplitude = parse_number(node["amplitude"], "pulse.amplitude");
    if (node["center"]) p.center = parse_number(node["center"], "pulse.center");
    if (!(p.amplitude > 0.0)) throw ConfigError("pulse.amplitude", line_of(node), "must be positive");
    return p;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line >= 0 ? e.mark.line + 1 : 0, "syntax error: " + e.msg);
    }
    const char* required = "required keys: mode, medium; propagate also needs pulse and grid";
    if (!root || root.IsNull()) throw ConfigError("", 0, std::string("empty document; ") + required);
    check_keys(root, {"mode", "medium", "pulse", "schedule", "grid", "sweep", "beta", "output"}, "");
    if (!root["mode"]) throw ConfigError("mode", 0, std::string("required key missing; ") + required);
    if (!root["medium"]) throw ConfigError("medium", 0, std::string("required key missing; ") + required);

    ScenarioConfig cfg;
    const std::string mode = parse_string(root["mode"], "mode");
    if (mode == "response-sweep")
        cfg.mode = Mode::ResponseSweep;
    else if (mode == "beta-sweep")
        cfg.mode = Mode::BetaSweep;
    else if (mode == "propagate")
        cfg.mode = Mode::Propagate;
    else
        throw ConfigError("mode", line_of(root["mode"]),
                          "unknown mode '" + mode + "' (response-sweep, beta-sweep, propagate)");

    cfg.medium = parse_medium(root["medium"]);
    if (root["pulse"]) cfg.pulse = parse_pulse(root["pulse"]);
    if (root["schedule"]) cfg.schedule = parse_schedule(root["schedule"]);
    if (root["grid"]) cfg.grid = parse_grid(root["grid"]);
    if (root["sweep"]) {
        const YAML::Node s = root["sweep"];
        check_keys(s, {"dp", "phi0"}, "sweep");
        if (s["dp"]) cfg.dp = parse_range(s["dp"], "sweep.dp", cfg.dp);
        if (s["phi0"]) cfg.phi0 = parse_range(s["phi0"], "sweep.phi0", Range{});
    }
    if (root["beta"]) {
        check_keys(root["beta"], {"phi0"}, "beta");
        if (root["beta"]["phi0"]) cfg.beta_phi0 = parse_range(root["beta"]["phi0"], "beta.phi0", cfg.beta_phi0);
    }
    if (root["output"]) {
        check_keys(root["output"], {"dir"}, "output");
        if (root["output"]["dir"]) cfg.out_dir = parse_string(root["output"]["dir"], "output.dir");
    }

    if (cfg.mode == Mode::Propagate) {
        if (!root["pulse"]) throw ConfigError("pulse", 0, "required for mode propagate");
        if (!root["grid"]) throw ConfigError("grid", 0, "required for mode propagate");
        const double window = cfg.dtau() * static_cast<double>(cfg.grid.n_tau - 1);
        if (!(cfg.pulse.center >= 0.0 && cfg.pulse.center <= window))
            throw ConfigError("pulse.center", line_of(root["pulse"]),
                              "must lie inside the time window [0, " + std::to_string(window) + "]");
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::string num(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string range_yaml(const Range& r)
{
    return "{min: " + num(r.min) + ", max: " + num(r.max) + ", points: " + std::to_string(r.points) + "}";
}

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg)
{
    std::ostringstream o;
    o << "mode: " << to_string(cfg.mode) << "\n";
    o << "medium:\n";
    for (const MediumKey& k : kMediumKeys) o << "  " << k.name << ": " << num(cfg.medium.*k.field) << "\n";
    o << "  polarization: " << to_string(cfg.medium.polarization) << "\n";
    o << "  lfc: " << (cfg.medium.lfc_enabled ? "true" : "false") << "\n";
    o << "  prep_fields: " << (cfg.medium.prep_fields ? "true" : "false") << "\n";
    o << "pulse:\n  sigma: " << num(cfg.pulse.sigma) << "\n  amplitude: " << num(cfg.pulse.amplitude)
      << "\n  center: " << num(cfg.pulse.center) << "\n";
    if (cfg.schedule) {
        o << "schedule:\n  ramp: " << num(cfg.schedule->ramp()) << "\n  segments:\n";
        for (const auto& s : cfg.schedule->segments())
            o << "    - {t: " << num(s.t_start) << ", phi0: " << num(s.phi0) << "}\n";
    }
    const GridConfig& g = cfg.grid;
    o << "grid:\n  n_tau: " << g.n_tau << "\n";
    if (g.dtau) o << "  dtau: " << num(*g.dtau) << "\n";
    o << "  dz: " << num(g.dz) << "\n  depth: " << num(g.depth) << "\n  snapshots: [";
    for (std::size_t i = 0; i < g.snapshots.size(); ++i) o << (i ? ", " : "") << num(g.snapshots[i]);
    o << "]\n  metrics_every: " << g.metrics_every << "\n  couple_control: " << (g.couple_control ? "true" : "false")
      << "\n";
    o << "sweep:\n  dp: " << range_yaml(cfg.dp) << "\n";
    if (cfg.phi0) o << "  phi0: " << range_yaml(*cfg.phi0) << "\n";
    o << "beta:\n  phi0: " << range_yaml(cfg.beta_phi0) << "\n";
    o << "output:\n  dir: " << quoted(cfg.out_dir) << "\n";
    return o.str();
}

// ---------------------------------------------------------------- running

std::size_t thread_budget()
{
    if (const char* env = std::getenv("CHIRALPROP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Calls body(i) for i in [0, n) on up to `threads` workers (contiguous chunks).
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body)
{
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) body(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

OutputFile finish(CsvWriter& w)
{
    w.close();
    return {w.path(), fs::file_size(w.path())};
}

std::vector<OutputFile> run_response_sweep(const ScenarioConfig& cfg, const MediumParams& p, const fs::path& dir,
                                           std::size_t threads)
{
    const DarkState dark = dark_state(p);
    const std::vector<double> dps = cfg.dp.values();
    const std::vector<double> phis = cfg.phi0 ? cfg.phi0->values() : std::vector<double>{p.closed_loop_phase()};
    const double omega0 = p.carrier_frequency();

    struct Row {
        ResponseCoefficients r;
        complex n;
        complex eta;
    };
    std::vector<Row> rows(dps.size() * phis.size());
    parallel_for(rows.size(), threads, [&](std::size_t idx) {
        const double phi = phis[idx / dps.size()];
        const double dp = dps[idx % dps.size()];
        Row& row = rows[idx];
        row.r = response_coefficients(p, dark, dp, phi);
        row.n = n_exact(row.r, p.polarization);
        row.eta = eta(row.r, omega0, p.polarization);
    });

    CsvWriter resp((dir / "response.csv").string(),
                   {"dp", "phi0", "Re_chiE", "Im_chiE", "Re_chiH", "Im_chiH", "Re_xiEH", "Im_xiEH", "Re_xiHE",
                    "Im_xiHE"});
    CsvWriter index((dir / "index.csv").string(), {"dp", "Re_n", "Im_n", "Re_eta", "Im_eta", "phi0"});
    for (const Row& row : rows) {
        const ResponseCoefficients& r = row.r;
        resp.row({r.dp, r.phi0, r.chiE.real(), r.chiE.imag(), r.chiH.real(), r.chiH.imag(), r.xiEH.real(),
                  r.xiEH.imag(), r.xiHE.real(), r.xiHE.imag()});
        index.row({r.dp, row.n.real(), row.n.imag(), row.eta.real(), row.eta.imag(), r.phi0});
    }
    return {finish(resp), finish(index)};
}

std::vector<OutputFile> run_beta_sweep(const ScenarioConfig& cfg, const MediumParams& p, const fs::path& dir)
{
    const DarkState dark = dark_state(p);
    CsvWriter w((dir / "beta.csv").string(), {"phi0", "Re_beta", "Im_beta"});
    for (double phi : cfg.beta_phi0.values()) {
        const complex b = beta(p, dark, phi, p.polarization);
        w.row({phi, b.real(), b.imag()});
    }
    return {finish(w)};
}

// arg(OmegaE) unwrapped along tau outward from the peak and aligned with `anchor`.
std::vector<double> unwrapped_phase(const EnvelopeGrid& g, double anchor)
{
    const std::size_t n = g.size();
    std::vector<double> ph(n);
    std::size_t ipeak = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (std::abs(g.omegaE[i]) > std::abs(g.omegaE[ipeak])) ipeak = i;
    ph[ipeak] = unwrap_near(std::arg(g.omegaE[ipeak]), anchor);
    for (std::size_t i = ipeak + 1; i < n; ++i) ph[i] = unwrap_near(std::arg(g.omegaE[i]), ph[i - 1]);
    for (std::size_t i = ipeak; i-- > 0;) ph[i] = unwrap_near(std::arg(g.omegaE[i]), ph[i + 1]);
    return ph;
}

nlohmann::json diagnostics_json(const Diagnostics& d)
{
    return {{"max_trace_error", d.max_trace_error},
            {"max_hermiticity_error", d.max_hermiticity_error},
            {"min_eigenvalue", d.min_eigenvalue},
            {"max_chirality_error", d.max_chirality_error},
            {"max_cfl", d.max_cfl},
            {"z_steps", d.z_steps},
            {"sweeps", d.sweeps}};
}

}  // namespace

ReferenceTrack reference_track(const MediumParams& params, const PhaseSchedule& schedule, const PulseMetrics& start,
                               const std::vector<double>& z)
{
    const DarkState dark = dark_state(params);
    const double ng = group_index(params, dark).ng;
    const double k0 = params.carrier_frequency();
    const auto phase_at = [&](double zz) { return schedule(start.centroid + ng * zz + zz); };
    const auto rate = [&](double zz) { return k0 * beta(params, dark, phase_at(zz), params.polarization); };

    ReferenceTrack ref;
    complex integral = 0.0;
    double prev = 0.0;
    constexpr int sub = 32;
    for (double zz : z) {
        const double h = (zz - prev) / sub;
        for (int s = 0; s < sub; ++s) {
            const double a = prev + h * s;
            integral += 0.5 * h * (rate(a) + rate(a + h));
        }
        prev = zz;
        ref.z.push_back(zz);
        ref.centroid.push_back(start.centroid + ng * zz);
        ref.phase.push_back(start.phase + integral.real());
        ref.log_gain.push_back(-integral.imag());
        ref.phi0.push_back(phase_at(zz));
    }
    return ref;
}

namespace {

std::vector<OutputFile> run_propagation(const ScenarioConfig& cfg, const MediumParams& p, const fs::path& dir,
                                        std::optional<Diagnostics>& diag_out, double& dz_used)
{
    const EnvelopeGrid input = gaussian_pulse(cfg.grid.n_tau, cfg.dtau(), cfg.pulse, p);
    const PhaseSchedule schedule = cfg.resolved_schedule();
    SolverSettings settings;
    settings.dz = cfg.grid.dz;
    settings.depth = cfg.grid.depth;
    settings.snapshot_depths = cfg.grid.snapshots.empty() ? std::vector<double>{0.0, cfg.grid.depth} : cfg.grid.snapshots;
    settings.metrics_every = cfg.grid.metrics_every;
    settings.couple_control = cfg.grid.couple_control;

    MaxwellBlochSolver solver(p, schedule, settings);
    RunResult result;
    try {
        result = solver.run(input);
    } catch (const std::exception& e) {
        std::ofstream diag(dir / "diagnostics.txt");
        diag << "propagation failed: " << e.what() << "\n";
        const Diagnostics& d = solver.diagnostics();
        diag << diagnostics_json(d).dump(2) << "\n";
        throw NumericalError(e.what());
    }
    diag_out = result.diagnostics;
    dz_used = result.dz;

    std::vector<double> zs;
    for (const TrackPoint& tp : result.track) zs.push_back(tp.z);
    const ReferenceTrack ref = reference_track(p, schedule, result.track.front().metrics, zs);
    const double peak0 = result.track.front().metrics.peak;

    std::vector<OutputFile> files;
    CsvWriter metrics((dir / "metrics.csv").string(), {"z", "peak", "centroid", "phase", "energy", "peak_ref",
                                                      "centroid_ref", "phase_ref", "phi0_ref"});
    for (std::size_t k = 0; k < result.track.size(); ++k) {
        const PulseMetrics& m = result.track[k].metrics;
        metrics.row({result.track[k].z, m.peak, m.centroid, m.phase, m.energy, peak0 * std::exp(ref.log_gain[k]),
                     ref.centroid[k], ref.phase[k], ref.phi0[k]});
    }
    files.push_back(finish(metrics));

    const DarkState dark = dark_state(p);
    const double ng = group_index(p, dark).ng;
    for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
        const Snapshot& snap = result.snapshots[s];
        EnvelopeGrid analytic;
        if (schedule.is_constant()) {
            analytic = propagate_analytic(input, p, schedule(0.0), snap.z);
        } else {
            const ReferenceTrack r = reference_track(p, schedule, result.track.front().metrics, {snap.z});
            const complex factor = std::exp(complex(r.log_gain[0], r.phase[0] - result.track.front().metrics.phase));
            analytic = delay_and_scale(input, ng * snap.z, factor);
        }
        const std::vector<double> phase = unwrapped_phase(snap.grid, snap.metrics.phase);
        char name[64];
        std::snprintf(name, sizeof name, "snapshot_%03zu.csv", s);
        CsvWriter w((dir / name).string(), {"tau", "Re_OmegaE", "Im_OmegaE", "abs_OmegaE", "phase_OmegaE", "Re_OmegaB",
                                            "Im_OmegaB", "Re_OmegaE_ref", "Im_OmegaE_ref"});
        for (std::size_t i = 0; i < snap.grid.size(); ++i) {
            const complex e = snap.grid.omegaE[i];
            const complex b = snap.grid.omegaB[i];
            w.row({snap.grid.tau(i), e.real(), e.imag(), std::abs(e), phase[i], b.real(), b.imag(),
                   analytic.omegaE[i].real(), analytic.omegaE[i].imag()});
        }
        files.push_back(finish(w));
    }
    return files;
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& options)
{
    const fs::path dir = options.out_dir.value_or(cfg.out_dir);
    fs::create_directories(dir);
    MediumParams p;
    try {
        p = validate(cfg.medium);
    } catch (const ParameterError& e) {
        throw ConfigError("medium." + e.field(), 0, e.what());
    }
    const std::size_t threads = options.threads ? options.threads : thread_budget();

    ScenarioOutcome outcome;
    double dz_used = 0.0;
    nlohmann::json manifest;
    manifest["program"] = "chiralprop";
    manifest["version"] = CHIRALPROP_VERSION;
    manifest["mode"] = std::string(to_string(cfg.mode));
    manifest["seed"] = options.seed;
    manifest["threads"] = threads;
    manifest["config"] = serialize_config(cfg);
    manifest["started_utc"] = utc_now();

    const auto write_manifest = [&](const std::string& status) {
        manifest["status"] = status;
        manifest["finished_utc"] = utc_now();
        nlohmann::json files = nlohmann::json::array();
        for (const OutputFile& f : outcome.files) files.push_back({{"path", f.path}, {"bytes", f.bytes}});
        manifest["files"] = files;
        if (outcome.diagnostics) manifest["diagnostics"] = diagnostics_json(*outcome.diagnostics);
        if (dz_used > 0.0) manifest["dz_used"] = dz_used;
        outcome.manifest = (dir / "manifest.json").string();
        std::ofstream out(outcome.manifest);
        out << manifest.dump(2) << "\n";
    };

    try {
        switch (cfg.mode) {
        case Mode::ResponseSweep: outcome.files = run_response_sweep(cfg, p, dir, threads); break;
        case Mode::BetaSweep: outcome.files = run_beta_sweep(cfg, p, dir); break;
        case Mode::Propagate: outcome.files = run_propagation(cfg, p, dir, outcome.diagnostics, dz_used); break;
        }
    } catch (const NumericalError& e) {
        manifest["error"] = e.what();
        write_manifest("failed");
        throw;
    }
    write_manifest("ok");
    return outcome;
}

// ---------------------------------------------------------------- selftest

bool run_selftest(std::uint64_t seed, std::ostream& out)
{
    bool all = true;
    const auto report = [&](bool ok, const std::string& name, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
        all = all && ok;
    };
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double pi = std::numbers::pi;

    // Closed forms against the linearized steady-state oracle.
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        MediumParams m;
        m.gamma31 = 0.1 + u(rng);
        m.gamma32 = 0.1 + u(rng);
        m.gamma34 = 0.1 + u(rng);
        m.gamma21 = 1e-2 * u(rng);
        m.gamma_dec = u(rng);
        m.omega1_mag = 0.2 + 2.0 * u(rng);
        m.omega2_mag = 0.2 + 2.0 * u(rng);
        m.omegaC_mag = 0.2 + 3.0 * u(rng);
        m.phi1 = pi * (2.0 * u(rng) - 1.0);
        m.phi2 = pi * (2.0 * u(rng) - 1.0);
        m.phiC = pi * (2.0 * u(rng) - 1.0);
        m.density_L = 1e-3 + 0.05 * u(rng);
        m.polarization = u(rng) < 0.5 ? Handedness::Left : Handedness::Right;
        const MediumParams p = validate(m);
        const DarkState dark = dark_state(p);
        for (double dp : {-0.7, 0.0, 0.3}) {
            const ResponseCoefficients a = response_coefficients(p, dark, dp, p.closed_loop_phase());
            const ResponseCoefficients b =
                steady_state_oracle(p, dp, p.closed_loop_phase(), {1e-6, 1e-6}, {1e8, 1e-3, false}).coefficients;
            for (auto [x, y] : {std::pair{a.chiE, b.chiE}, {a.chiH, b.chiH}, {a.xiEH, b.xiEH}, {a.xiHE, b.xiHE}})
                worst = std::max(worst, std::abs(x - y) / std::abs(y));
        }
    }
    report(worst < 1e-8, "oracle-equivalence", "max relative error " + format_number(worst));

    // Dark state is stationary.
    const MediumParams def = validate(MediumParams{});
    const double drift =
        AtomModel(def).rhs(dark_state_matrix(def), control_fields(def, def.closed_loop_phase()), 0.0).cwiseAbs().maxCoeff();
    report(drift < 1e-14, "dark-state-stationary", "max |drho/dt| " + format_number(drift));

    // FFT round trip.
    Fft fft(1024);
    std::vector<complex> x(1024);
    for (auto& v : x) v = complex(u(rng) - 0.5, u(rng) - 0.5);
    const std::vector<complex> y = fft.to_envelope(fft.to_spectrum(x));
    double err = 0.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        err = std::max(err, std::abs(x[i] - y[i]));
        norm = std::max(norm, std::abs(x[i]));
    }
    report(err < 1e-12 * norm, "fft-round-trip", "max relative error " + format_number(err / norm));

    // Vacuum: one Maxwell-Bloch step leaves the envelopes untouched.
    MediumParams vac = def;
    vac.density_L = 0.0;
    const EnvelopeGrid in = gaussian_pulse(256, 0.5, PulseShape{10.0, 1e-9, 64.0}, vac);
    MaxwellBlochSolver solver(vac, PhaseSchedule(pi / 2.0), SolverSettings{});
    const EnvelopeGrid outg = solver.step(in, 1e-6);
    bool same = true;
    for (std::size_t i = 0; i < in.size(); ++i) same = same && outg.omegaE[i] == in.omegaE[i] && outg.omegaB[i] == in.omegaB[i];
    report(same, "vacuum-identity", same ? "exact" : "envelopes changed");
    return all;
}

}  // namespace chiralprop
