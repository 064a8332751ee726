#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memlstm/commands.hpp"
#include "memlstm/config.hpp"
#include "memlstm/errors.hpp"

namespace {

memlstm::RunConfig resolve_config(const std::string& config_path,
                                  const memlstm::ConfigOverrides& overrides) {
    if (!config_path.empty()) return memlstm::load_config(config_path, overrides);
    return memlstm::default_config(overrides);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator of a memristive-crossbar LSTM forecasting pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool no_timestamp = false;
    app.add_option("--config", config_path, "JSON config file (schema v1)");
    app.add_option("--seed", seed, "global seed overriding the config")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_dir, "output directory overriding the config");
    app.add_flag("--no-timestamp", no_timestamp, "omit timestamps so reports are reproducible");

    auto* train = app.add_subcommand("train", "train the network and write the weight file");

    std::string weights_path;
    int seeds = 1;
    auto* simulate = app.add_subcommand("simulate", "run the analog pipeline over the test rows");
    simulate->add_option("--weights", weights_path, "weight file (default <out>/weights.json)");
    simulate->add_option("--seeds", seeds, "number of Monte Carlo variation seeds");

    std::string software_csv, analog_csv;
    auto* compare = app.add_subcommand("compare", "join two prediction files into a comparison");
    compare->add_option("--software", software_csv, "software predictions CSV")->required();
    compare->add_option("--analog", analog_csv, "analog predictions CSV")->required();

    std::string parameter;
    std::vector<std::string> values;
    int trials = 10;
    std::string sweep_weights;
    auto* sweep = app.add_subcommand("sweep", "sweep one non-ideality knob over values");
    sweep->add_option("--parameter", parameter,
                      "one of sigma_rel, levels, droop_rate, gain_error_rel")
        ->required();
    sweep->add_option("--values", values, "sweep values (space separated)")->required();
    sweep->add_option("--trials", trials, "seeded trials per value");
    sweep->add_option("--weights", sweep_weights, "weight file (default <out>/weights.json)");

    auto* dump_curves =
        app.add_subcommand("dump-curves", "write transfer-curve sweeps of the analog blocks");

    std::string xbar_weights;
    auto* dump_crossbar =
        app.add_subcommand("dump-crossbar", "write the programmed conductance grids");
    dump_crossbar->add_option("--weights", xbar_weights, "weight file (default <out>/weights.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: Usage: " << e.what() << '\n';
        return 2;
    }

    try {
        memlstm::ConfigOverrides overrides;
        if (seed_set) overrides.seed = seed;
        if (!out_dir.empty()) overrides.out_dir = out_dir;
        const memlstm::RunConfig cfg = resolve_config(config_path, overrides);
        const memlstm::ReportOptions opt{no_timestamp};

        auto default_weights = [&](const std::string& given) {
            return given.empty() ? (cfg.out_dir / "weights.json").string() : given;
        };

        if (train->parsed()) return memlstm::cmd_train(cfg, opt, std::cout);
        if (simulate->parsed()) {
            return memlstm::cmd_simulate(cfg, default_weights(weights_path), seeds, opt,
                                         std::cout);
        }
        if (compare->parsed()) {
            return memlstm::cmd_compare(cfg, software_csv, analog_csv, opt, std::cout);
        }
        if (sweep->parsed()) {
            return memlstm::cmd_sweep(cfg, default_weights(sweep_weights), parameter, values,
                                      trials, opt, std::cout);
        }
        if (dump_curves->parsed()) return memlstm::cmd_dump_curves(cfg, std::cout);
        if (dump_crossbar->parsed()) {
            return memlstm::cmd_dump_crossbar(cfg, default_weights(xbar_weights), std::cout);
        }
        std::cerr << "error: Usage: no subcommand given\n";
        return 2;
    } catch (const memlstm::SimError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: Internal: " << e.what() << '\n';
        return 1;
    }
}
