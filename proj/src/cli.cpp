#include "tqdsim/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace tqdsim {

namespace {

Json load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return Json::parse(buffer.str());
    } catch (const Json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void print_scalar_results(const Json& summary) {
    if (!summary.contains("results")) return;
    for (const auto& [key, value] : summary["results"].items()) {
        if (value.is_number()) {
            std::cout << "  " << key << " = " << format_double(value.get<double>()) << '\n';
        }
    }
}

void print_sweep(const SweepTable& table) {
    std::cout << "  ";
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i > 0) std::cout << "  ";
        std::cout << table.columns[i];
    }
    std::cout << '\n';
    for (const auto& row : table.rows) {
        std::cout << "  ";
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) std::cout << "  ";
            std::cout << format_double(row[i]);
        }
        std::cout << '\n';
    }
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Intra-cavity quantum state transfer simulator"};
    app.require_subcommand(0, 1);

    std::string scenario_flag;
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;

    app.add_option("--scenario", scenario_flag,
                   "Scenario to run (see `simulate list-scenarios`); wins over the config file");
    app.add_option("--config", config_path, "JSON config file layered over scenario defaults");
    app.add_option("--out", out_dir, "Output directory (default: out)");
    app.add_option("--set", overrides,
                   "Override a config entry, e.g. --set delta_prime=90 or --set rates.n_th=400; "
                   "arrays are replaced wholesale (--set window=[0,8])");

    CLI::App* list_cmd =
        app.add_subcommand("list-scenarios", "List available scenarios and exit");

    if (argc <= 1) {
        std::cout << app.help();
        return 2;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (list_cmd->parsed()) {
            for (const auto& [name, description] : scenario_catalog()) {
                std::cout << name << "\n    " << description << '\n';
            }
            return 0;
        }

        Json doc = Json::object();
        if (!config_path.empty()) {
            doc = load_config_file(config_path);
        }
        for (const auto& kv : overrides) {
            apply_override(doc, kv);
        }

        std::string scenario = scenario_flag;
        if (scenario.empty()) {
            if (doc.contains("scenario") && doc["scenario"].is_string()) {
                scenario = doc["scenario"].get<std::string>();
            } else {
                throw ConfigError("no scenario selected; pass --scenario or provide a config "
                                  "file with a \"scenario\" key");
            }
        }

        ScenarioConfig cfg = make_default_config(scenario);
        apply_json(cfg, doc, /*ignore_scenario_key=*/!scenario_flag.empty());
        validate_config(cfg);

        const ScenarioResult result = run_scenario(cfg);
        write_outputs(result, out_dir);

        std::cout << "scenario: " << cfg.scenario << '\n';
        std::cout << "config_hash: " << config_hash(cfg) << '\n';
        print_scalar_results(result.summary);
        if (result.sweep) {
            print_sweep(*result.sweep);
        }
        std::cout << "outputs written to " << out_dir << '\n';
        return 0;
    } catch (const TruncationError& e) {
        std::cerr << "truncation error: " << e.what() << '\n';
        return 4;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace tqdsim
