#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>

#include "ted/errors.hpp"
#include "ted/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"tempered exponential dichotomy toolkit"};
    app.set_version_flag("--version", std::string("tedcli ") + ted::kToolVersion);

    std::string target;
    ted::RunOptions opts;
    std::uint64_t seed = 0;
    bool seed_set = false;

    CLI::App* run = app.add_subcommand("run", "run a scenario file or shipped scenario");
    run->add_option("scenario", target, "path to a scenario JSON, or a shipped name")
        ->required();
    run->add_option("--out", opts.out_dir, "output directory for report.json and CSVs");
    run->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seed_set = true; });
    run->add_option("--threads", opts.threads, "worker count for independent samples")
        ->check(CLI::Range(1, 256));

    CLI::App* list = app.add_subcommand("list", "list shipped scenarios");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        for (const auto& [name, desc] : ted::list_scenarios())
            std::printf("%-26s %s\n", name.c_str(), desc.c_str());
        return 0;
    }

    if (run->parsed()) {
        if (seed_set) opts.seed = seed;
        try {
            ted::Scenario sc = std::filesystem::exists(target)
                                   ? ted::load_scenario_file(target)
                                   : ted::builtin_scenario(target);
            const int code = ted::run_scenario(sc, opts);
            std::printf("%s: %s (report in %s/report.json)\n", sc.name.c_str(),
                        code == 0 ? "pass" : "FAIL", opts.out_dir.c_str());
            return code;
        } catch (const ted::ConfigError& e) {
            std::fprintf(stderr, "config error at %s\n", e.what());
            return 1;
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 1;
        }
    }

    std::puts(app.help().c_str());
    return 0;
}
