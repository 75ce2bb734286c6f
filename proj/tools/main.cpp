#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpslab/scenario.hpp"
#include "tpslab/types.hpp"

namespace {

using namespace tpslab;

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case errc::config_invalid:
        case errc::bad_factorization:
        case errc::odd_bath_dimension:
        case errc::dimension_overflow:
        case errc::index_out_of_range:
        case errc::io_error: return 1;
        default: return 2;
    }
}

scenario::ScenarioConfig load_with_overrides(const std::string& name_or_path,
                                             const std::string& out, long long seed,
                                             long long max_dim) {
    auto cfg = scenario::parse_config(scenario::load_scenario_text(name_or_path));
    if (!out.empty()) cfg.output_dir = out;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (max_dim > 0) cfg.max_dim = static_cast<int>(max_dim);
    return cfg;
}

std::vector<std::string> split_values(const std::string& csv) {
    std::vector<std::string> out;
    std::istringstream ss(csv);
    for (std::string token; std::getline(ss, token, ',');) out.push_back(token);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tpslab: bipartition laboratory for closed-system thermalization and "
                 "decoherence diagnostics"};
    app.require_subcommand(1);

    std::string config_arg, out_dir, axis, values_csv;
    long long seed = -1, max_dim = 0;
    int workers = 1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_arg, "config file path or bundled scenario name")
            ->required();
        cmd->add_option("--out", out_dir, "output directory (overrides config)");
        cmd->add_option("--seed", seed, "seed override");
        cmd->add_option("--max-dim", max_dim, "dimension cap override");
        cmd->add_option("--workers", workers, "worker thread count");
    };

    CLI::App* run = app.add_subcommand("run", "execute one scenario");
    add_common(run);

    CLI::App* swp = app.add_subcommand("sweep", "run a scenario over a parameter axis");
    add_common(swp);
    swp->add_option("--axis", axis, "dot path of the swept key, e.g. model.field")->required();
    swp->add_option("--values", values_csv, "comma-separated values")->required();

    CLI::App* val = app.add_subcommand("validate", "check a config without executing");
    add_common(val);

    app.add_subcommand("list-scenarios", "list bundled scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("list-scenarios")) {
            for (const auto& name : scenario::bundled_scenario_names()) {
                const auto cfg = scenario::parse_config(scenario::load_scenario_text(name));
                std::printf("%-28s %s\n", name.c_str(), cfg.description.c_str());
            }
            return 0;
        }

        if (app.got_subcommand("validate")) {
            const auto cfg = load_with_overrides(config_arg, out_dir, seed, max_dim);
            const auto findings = scenario::validate(cfg);
            bool blocking = false;
            for (const auto& f : findings) {
                std::printf("%s %s: %s\n", errc_name(f.code), f.field.c_str(),
                            f.message.c_str());
                blocking = blocking || f.blocking();
            }
            if (findings.empty()) std::printf("ok\n");
            return blocking ? 1 : 0;
        }

        if (app.got_subcommand("run")) {
            const auto cfg = load_with_overrides(config_arg, out_dir, seed, max_dim);
            const auto record = scenario::run_scenario(cfg, workers);
            std::printf("%s: %zu result(s) -> %s (%.0f ms)\n", cfg.name.c_str(),
                        record.report.entries.size(), cfg.output_dir.c_str(), record.wall_ms);
            for (const auto& e : record.report.entries)
                std::printf("  %-32s %.15g\n", e.name.c_str(), e.value);
            return 0;
        }

        if (app.got_subcommand("sweep")) {
            const std::string text = scenario::load_scenario_text(config_arg);
            std::string dir = out_dir;
            if (dir.empty()) dir = scenario::parse_config(text).output_dir;
            const auto values = split_values(values_csv);
            const auto records = scenario::sweep(text, axis, values, dir, workers);
            int failures = 0;
            for (std::size_t i = 0; i < records.size(); ++i) {
                if (records[i].ok) {
                    std::printf("%s=%s ok\n", axis.c_str(), values[i].c_str());
                } else {
                    ++failures;
                    std::printf("%s=%s error: %s\n", axis.c_str(), values[i].c_str(),
                                records[i].error.c_str());
                }
            }
            std::printf("summary: %s/summary.csv\n", dir.c_str());
            return failures == static_cast<int>(records.size()) && !records.empty() ? 2 : 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
