// chiralprop: command-line front end.
//
//   chiralprop response  --config sweep.yaml [--out-dir DIR] [--seed N]
//   chiralprop beta      --config fig4.yaml
//   chiralprop propagate --config fig2.yaml
//   chiralprop selftest  [--seed N]
//
// Exit codes: 0 success, 1 usage, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "chiralprop/scenario.hpp"

namespace {

using chiralprop::Mode;

int run_verb(const std::string& verb, const std::string& config, const std::string& out_dir, std::uint64_t seed)
{
    if (verb == "selftest") return chiralprop::run_selftest(seed, std::cout) ? 0 : 3;

    chiralprop::ScenarioConfig cfg = chiralprop::load_config(config);
    const Mode expected = verb == "response" ? Mode::ResponseSweep : verb == "beta" ? Mode::BetaSweep : Mode::Propagate;
    if (cfg.mode != expected)
        throw chiralprop::ConfigError("mode", 0,
                                      "config mode '" + std::string(to_string(cfg.mode)) + "' does not match verb '" +
                                          verb + "'");
    chiralprop::RunOptions opts;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    opts.seed = seed;
    const chiralprop::ScenarioOutcome out = chiralprop::run_scenario(cfg, opts);
    for (const auto& f : out.files) std::cout << f.path << " (" << f.bytes << " bytes)\n";
    std::cout << out.manifest << "\n";
    if (out.diagnostics) {
        const auto& d = *out.diagnostics;
        std::cout << "trace drift " << d.max_trace_error << ", hermiticity drift " << d.max_hermiticity_error
                  << ", min eigenvalue " << d.min_eigenvalue << ", chirality error " << d.max_chirality_error << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Probe-pulse propagation through chiral atomic media"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out_dir;
    std::uint64_t seed = 0;
    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* opt = sub->add_option("--config", config, "scenario file (YAML)");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        sub->add_option("--out-dir", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", seed, "random seed recorded in the manifest");
    };
    add_common(app.add_subcommand("response", "response coefficients over a detuning grid"), true);
    add_common(app.add_subcommand("beta", "beta against the closed-loop phase"), true);
    add_common(app.add_subcommand("propagate", "Maxwell-Bloch propagation with analytic overlay"), true);
    add_common(app.add_subcommand("selftest", "built-in consistency checks"), false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    const std::string verb = app.get_subcommands().front()->get_name();
    try {
        return run_verb(verb, config, out_dir, seed);
    } catch (const chiralprop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const chiralprop::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const chiralprop::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
