// Command-line front end: scenario-driven solves, guidance simulations,
// energy comparisons and constraint-line exports.
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mocam/errors.hpp"
#include "mocam/kpath.hpp"
#include "mocam/scenario.hpp"

namespace {

struct CommonOpts {
    std::vector<std::string> configs;
    std::string out_dir = ".";
    double dt_override = 0.0;
    bool batch = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.configs, "Scenario config file(s)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--dt", opts.dt_override, "Override the configured time step (s)");
    cmd->add_flag("--batch", opts.batch, "Run multiple scenario files concurrently");
}

int run_configs(const CommonOpts& opts,
                const std::vector<mocam::ScenarioConfig::Mode>& allowed) {
    const auto run_one = [&](const std::string& path) -> std::string {
        mocam::ScenarioConfig cfg = mocam::load_scenario_config(path);
        bool ok = allowed.empty();
        for (auto m : allowed) ok = ok || cfg.mode == m;
        if (!ok) {
            throw mocam::ValidationError("scenario '" + cfg.name +
                                         "': mode not supported by this subcommand");
        }
        std::optional<double> dt;
        if (opts.dt_override > 0.0) dt = opts.dt_override;
        return mocam::run_scenario(cfg, opts.out_dir, dt);
    };

    int failures = 0;
    if (opts.batch && opts.configs.size() > 1) {
        std::vector<std::future<std::string>> jobs;
        jobs.reserve(opts.configs.size());
        for (const auto& path : opts.configs) {
            jobs.push_back(std::async(std::launch::async, run_one, path));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            try {
                std::cout << opts.configs[i] << ":\n" << jobs[i].get();
            } catch (const std::exception& e) {
                std::cerr << opts.configs[i] << ": error: " << e.what() << "\n";
                ++failures;
            }
        }
    } else {
        for (const auto& path : opts.configs) {
            try {
                std::cout << path << ":\n" << run_one(path);
            } catch (const std::exception& e) {
                std::cerr << path << ": error: " << e.what() << "\n";
                ++failures;
            }
        }
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mocam: energy-optimal motion-camouflage trajectory engine"};
    app.require_subcommand(1);

    CommonOpts solve_opts, simulate_opts, energy_opts, ccls_opts;
    CLI::App* solve = app.add_subcommand(
        "solve", "Analytic or numeric ratio-path solve with shadower reconstruction");
    add_common(solve, solve_opts);
    CLI::App* simulate = app.add_subcommand("simulate", "Closed-loop guidance simulation");
    add_common(simulate, simulate_opts);
    CLI::App* energy = app.add_subcommand("energy", "Optimal vs straight-line energy comparison");
    add_common(energy, energy_opts);
    CLI::App* ccls = app.add_subcommand("ccls", "Constraint-line export only");
    add_common(ccls, ccls_opts);

    std::vector<std::string> validate_paths;
    CLI::App* validate = app.add_subcommand("validate", "Config lint; no outputs");
    validate->add_option("--config", validate_paths, "Scenario config file(s)")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    using Mode = mocam::ScenarioConfig::Mode;
    try {
        if (app.got_subcommand(solve)) {
            return run_configs(solve_opts, {Mode::analytic, Mode::ode, Mode::infinity});
        }
        if (app.got_subcommand(simulate)) {
            return run_configs(simulate_opts, {Mode::guidance});
        }
        if (app.got_subcommand(energy)) {
            return run_configs(energy_opts, {Mode::energy_compare});
        }
        if (app.got_subcommand(ccls)) {
            for (const auto& path : ccls_opts.configs) {
                const auto cfg = mocam::load_scenario_config(path);
                if (cfg.mode == Mode::infinity) {
                    std::cerr << path << ": error: infinity-mode constraint lines are parallel; "
                              << "plot the offset direction instead\n";
                    return 1;
                }
                if (!cfg.static_point) {
                    std::cerr << path << ": error: ccls export needs a static_point\n";
                    return 1;
                }
                const double interval = cfg.ccl_interval.value_or(cfg.dt);
                mocam::TargetModel target(mocam::ConstantVelocity{cfg.target_r0, cfg.target_v});
                const auto times = mocam::uniform_times(0.0, cfg.tf, interval);
                const std::string out =
                    (ccls_opts.out_dir == ".") ? cfg.outputs.ccl
                                               : ccls_opts.out_dir + "/" + cfg.outputs.ccl;
                mocam::export_ccls(*cfg.static_point, target, times, out);
                std::cout << path << ": wrote " << times.size() << " constraint lines to "
                          << out << "\n";
            }
            return 0;
        }
        if (app.got_subcommand(validate)) {
            int bad = 0;
            for (const auto& path : validate_paths) {
                try {
                    (void)mocam::load_scenario_config(path);
                    std::cout << path << ": ok\n";
                } catch (const std::exception& e) {
                    std::cerr << path << ": " << e.what() << "\n";
                    ++bad;
                }
            }
            return bad == 0 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
