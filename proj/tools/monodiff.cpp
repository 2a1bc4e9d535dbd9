#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct FlagSpec {
    const char* flag;
    const char* key;
    const char* help;
};

constexpr FlagSpec kValueFlags[] = {
    {"--n", "n", "grid intervals N per side, comma separated"},
    {"--nodes", "nodes", "nodes per side (N + 1), comma separated"},
    {"--k", "k", "anisotropy ratio for exam4"},
    {"--m", "m", "fixed stencil half-width, or 'auto'"},
    {"--tol", "tol", "relative residual tolerance"},
    {"--max-iter", "max_iter", "iteration limit (0 = 10 x unknowns)"},
    {"--probe-step", "probe_step", "probe lattice pitch for the field constants"},
    {"--safety", "safety", "relative safety margin on the planning radius"},
    {"--out", "out", "output directory"},
    {"--a", "a", "inline tensor entry a(x,y)"},
    {"--b", "b", "inline tensor entry b(x,y)"},
    {"--c", "c", "inline tensor entry c(x,y)"},
    {"--f", "f", "inline source term f(x,y)"},
    {"--exact", "exact", "inline exact solution u(x,y); f and g are derived"},
    {"--g", "g", "inline boundary data g(x,y)"},
};

struct Command {
    CLI::App* app = nullptr;
    std::string problem;
    std::string config;
    bool force = false;
    std::map<std::string, std::string> values;
};

void add_command(CLI::App& root, Command& cmd, const std::string& name, const std::string& help) {
    cmd.app = root.add_subcommand(name, help);
    cmd.app->add_option("problem", cmd.problem, "exam1, exam2, exam3 or exam4");
    cmd.app->add_option("--config", cmd.config, "key=value config file; flags override it");
    cmd.app->add_flag("--force", cmd.force, "assemble and solve despite a failed mesh condition or audit");
    for (const FlagSpec& spec : kValueFlags) cmd.app->add_option(spec.flag, cmd.values[spec.key], spec.help);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace monodiff::cli;
    CLI::App app{"Monotone finite-difference solver for anisotropic diffusion"};
    app.set_version_flag("--version", MONODIFF_VERSION);
    app.require_subcommand(1);

    std::vector<Command> commands(5);
    const std::pair<const char*, const char*> names[] = {
        {"plan", "compute constants and per-node stencil plans"},
        {"solve", "plan, assemble, audit and solve; write solution grids"},
        {"dmp", "maximum-principle extrema table (f = 0 problems)"},
        {"converge", "error and fitted order against the exact solution"},
        {"export", "write the assembled matrix and right-hand side"},
    };
    for (std::size_t i = 0; i < commands.size(); ++i) add_command(app, commands[i], names[i].first, names[i].second);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    for (Command& cmd : commands) {
        if (!cmd.app->parsed()) continue;
        RunConfig cfg;
        try {
            if (!cmd.config.empty()) read_config_file(cmd.config, cfg);
            if (!cmd.problem.empty()) cfg.problem = cmd.problem;
            for (const FlagSpec& spec : kValueFlags) {
                if (cmd.app->get_option(spec.flag)->count() > 0) apply_setting(cfg, spec.key, cmd.values[spec.key]);
            }
            if (cmd.force) cfg.force = true;
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kConfigError;
        }
        return dispatch(cmd.app->get_name(), std::move(cfg), std::cout, std::cerr);
    }
    return kUnexpected;
}
