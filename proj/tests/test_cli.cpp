#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "memlstm/commands.hpp"
#include "memlstm/dataset.hpp"
#include "memlstm/lstm.hpp"

using namespace memlstm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

const fs::path kCanonical = fs::path(MEMLSTM_DATA_DIR) / "international-airline-passengers.csv";

fs::path sandbox() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "memlstm_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args) {
    static int call = 0;
    const fs::path out_file = sandbox() / ("stdout_" + std::to_string(call) + ".txt");
    const fs::path err_file = sandbox() / ("stderr_" + std::to_string(call) + ".txt");
    ++call;
    const std::string cmd = std::string("'") + MEMLSTM_CLI_PATH + "' " + args + " > '" +
                            out_file.string() + "' 2> '" + err_file.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

// Minimal config pointing at the canonical dataset, everything else default.
fs::path write_config(const std::string& name, const fs::path& out_dir,
                      const std::string& extra = "") {
    fs::path p = sandbox() / name;
    std::ofstream f(p, std::ios::trunc);
    f << "{\n  \"version\": \"v1\",\n  \"dataset\": \"" << kCanonical.string()
      << "\",\n  \"out_dir\": \"" << out_dir.string() << "\"" << (extra.empty() ? "" : ",\n  ")
      << extra << "\n}\n";
    return p;
}

json read_report(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    return json::parse(in);
}

int data_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = -1; // discount the header
    while (std::getline(in, line))
        if (!line.empty()) ++n;
    return n;
}

// Shared trained workspace, created once on first use.
struct Trained {
    fs::path out_dir;
    fs::path config;
    fs::path weights;
};

const Trained& trained() {
    static const Trained t = [] {
        Trained w;
        w.out_dir = sandbox() / "base_out";
        w.config = write_config("base.json", w.out_dir);
        w.weights = w.out_dir / "weights.json";
        RunResult r = run_cli("--config '" + w.config.string() + "' --no-timestamp train");
        REQUIRE(r.code == 0);
        REQUIRE(fs::exists(w.weights));
        return w;
    }();
    return t;
}

} // namespace

TEST_CASE("train writes weights and a reproducible report") {
    const Trained& t = trained();

    json report = read_report(t.out_dir / "train_report.json");
    CHECK(report["version"] == "v1");
    CHECK(report["rows"]["train"] == 97);
    CHECK(report["rows"]["test"] == 45);
    CHECK(report["scale"] == "normalized");
    CHECK(report["hyperparams"]["epochs"] == 500);
    CHECK(report["hyperparams"]["seed"] == 42);
    CHECK(report["test"]["rmse"].get<double>() <= 0.15);
    CHECK(!report.contains("generated_at")); // --no-timestamp

    // published figures ride along, clearly labeled, for side-by-side reading
    const json& ref = report["paper_reference"];
    CHECK(ref["label"].get<std::string>().find("not measured") != std::string::npos);
    CHECK(ref["software"]["rmse"] == 0.1059);
    CHECK(ref["analog"]["rmse"] == 0.1004);
    CHECK(ref["cycle_time_us"] == 88.0);
    CHECK(ref["test_prediction_time_ms"] == 3.96);
    CHECK(ref["peak_cell_power_mw"] == 210.67);
    CHECK(ref["cell_area_um2"] == 58569.0);

    WeightSet w = import_weights(t.weights); // parses and passes range checks
    bool nonzero = false;
    for_each_param(w, [&](const std::string&, const double& v) { nonzero |= v != 0.0; });
    CHECK(nonzero);
}

TEST_CASE("train stdout reports the final metrics") {
    const Trained& t = trained();
    RunResult r = run_cli("--config '" + t.config.string() + "' --no-timestamp train");
    CHECK(r.code == 0);
    CHECK(r.out.find("train mse=") != std::string::npos);
    CHECK(r.out.find("test mse=") != std::string::npos);
    CHECK(r.out.find("wrote ") != std::string::npos);
    CHECK(r.err.empty());
}

TEST_CASE("repeated runs are byte-identical; a new seed is not") {
    fs::path out_dir = sandbox() / "det_out";
    fs::path cfg = write_config("det.json", out_dir);
    const std::string base = "--config '" + cfg.string() + "' --no-timestamp train";

    REQUIRE(run_cli(base).code == 0);
    const std::string weights_a = slurp(out_dir / "weights.json");
    const std::string report_a = slurp(out_dir / "train_report.json");
    REQUIRE(run_cli(base).code == 0);
    CHECK(slurp(out_dir / "weights.json") == weights_a);
    CHECK(slurp(out_dir / "train_report.json") == report_a);

    REQUIRE(run_cli("--config '" + cfg.string() + "' --no-timestamp --seed 43 train").code == 0);
    CHECK(slurp(out_dir / "weights.json") != weights_a);

    SUBCASE("timestamps are the one permitted difference") {
        REQUIRE(run_cli("--config '" + cfg.string() + "' train").code == 0);
        json stamped = read_report(out_dir / "train_report.json");
        CHECK(stamped.contains("generated_at"));
    }
}

TEST_CASE("simulate in ideal mode matches the software path") {
    const Trained& t = trained();
    RunResult r = run_cli("--config '" + t.config.string() + "' --no-timestamp simulate");
    CHECK(r.code == 0);
    CHECK(r.out.find("software mse=") != std::string::npos);
    CHECK(r.out.find("analog mse=") != std::string::npos);
    CHECK(r.out.find("total_time_ms=3.96 ") != std::string::npos);

    std::vector<PredictionRow> sw = read_predictions_csv(t.out_dir / "software_predictions.csv");
    std::vector<PredictionRow> an = read_predictions_csv(t.out_dir / "analog_predictions.csv");
    REQUIRE(sw.size() == 45);
    REQUIRE(an.size() == 45);
    for (std::size_t i = 0; i < 45; ++i) {
        CHECK(std::abs(sw[i].prediction_norm - an[i].prediction_norm) < 1e-6);
        CHECK(sw[i].target_norm == an[i].target_norm);
        // denormalized columns are consistent with the normalized ones
        CHECK(sw[i].target == doctest::Approx(104.0 + 518.0 * sw[i].target_norm).epsilon(1e-9));
    }
    CHECK(data_lines(t.out_dir / "software_predictions.csv") == 45);
    CHECK(data_lines(t.out_dir / "trace.csv") == 13);

    json report = read_report(t.out_dir / "simulate_report.json");
    CHECK(report["rows"] == 45);
    CHECK(report["seeds"] == 1);
    CHECK(report["levels"] == "continuous");
    CHECK(report["cycle_time_us"] == 88.0);
    CHECK(report["total_time_ms"] == 3.96);
    CHECK(report["energy_uj"].get<double>() ==
          doctest::Approx(45 * 16.8536).epsilon(1e-9)); // whole test set
    CHECK(report["software"]["rmse"].get<double>() ==
          doctest::Approx(report["analog"]["rmse"].get<double>()).epsilon(1e-9));
    CHECK(report["trial_rmse"].size() == 1);
}

TEST_CASE("simulate runs a seeded Monte Carlo over device variation") {
    const Trained& t = trained();
    fs::path out_dir = sandbox() / "mc_out";
    fs::path cfg = write_config("mc.json", out_dir, R"("variation": {"sigma_rel": 0.02})");
    const std::string tail = " simulate --weights '" + t.weights.string() + "' --seeds 5";
    const std::string cmd = "--config '" + cfg.string() + "' --no-timestamp" + tail;

    RunResult r = run_cli(cmd);
    CHECK(r.code == 0);
    CHECK(r.out.find("seeds=5 mean_rmse=") != std::string::npos);

    json report = read_report(out_dir / "simulate_report.json");
    REQUIRE(report["trial_rmse"].size() == 5);
    double mean = 0.0;
    for (const auto& v : report["trial_rmse"]) mean += v.get<double>();
    mean /= 5.0;
    CHECK(report["mean_rmse"].get<double>() == doctest::Approx(mean).epsilon(1e-12));
    CHECK(report["std_rmse"].get<double>() > 0.0);
    CHECK(report["variation"]["sigma_rel"] == 0.02);

    SUBCASE("the Monte Carlo is reproducible") {
        json again;
        REQUIRE(run_cli(cmd).code == 0);
        again = read_report(out_dir / "simulate_report.json");
        CHECK(again["trial_rmse"] == report["trial_rmse"]);
    }
    SUBCASE("a different global seed moves the trials") {
        REQUIRE(run_cli("--config '" + cfg.string() + "' --no-timestamp --seed 7" + tail).code ==
                0);
        json other = read_report(out_dir / "simulate_report.json");
        CHECK(other["trial_rmse"] != report["trial_rmse"]);
    }
}

TEST_CASE("compare joins prediction files") {
    const Trained& t = trained();
    fs::path out_dir = sandbox() / "cmp_out";
    fs::path cfg = write_config("cmp.json", out_dir);
    const fs::path sw_csv = t.out_dir / "software_predictions.csv";
    const fs::path an_csv = t.out_dir / "analog_predictions.csv";

    RunResult r = run_cli("--config '" + cfg.string() + "' --no-timestamp compare --software '" +
                          sw_csv.string() + "' --analog '" + an_csv.string() + "'");
    CHECK(r.code == 0);
    CHECK(r.out.find("max_abs_delta=") != std::string::npos);

    std::ifstream tbl(out_dir / "comparison.csv");
    std::string header;
    std::getline(tbl, header);
    CHECK(header == "index,target,software,analog");
    CHECK(data_lines(out_dir / "comparison.csv") == 45);

    json report = read_report(out_dir / "compare_report.json");
    CHECK(report["rows"] == 45);
    CHECK(report["max_abs_delta"].get<double>() < 1e-6); // ideal pipeline

    SUBCASE("a file compared against itself has zero delta") {
        REQUIRE(run_cli("--config '" + cfg.string() +
                        "' --no-timestamp compare --software '" + sw_csv.string() +
                        "' --analog '" + sw_csv.string() + "'")
                    .code == 0);
        json self = read_report(out_dir / "compare_report.json");
        CHECK(self["max_abs_delta"].get<double>() == 0.0);
        CHECK(self["software"]["rmse"] == self["analog"]["rmse"]);
    }
    SUBCASE("row-count mismatch is rejected") {
        // truncate a copy to 10 rows
        fs::path cut = sandbox() / "cut.csv";
        {
            std::ifstream in(sw_csv);
            std::ofstream out(cut, std::ios::trunc);
            std::string line;
            for (int i = 0; i < 11 && std::getline(in, line); ++i) out << line << '\n';
        }
        RunResult bad = run_cli("--config '" + cfg.string() + "' compare --software '" +
                                sw_csv.string() + "' --analog '" + cut.string() + "'");
        CHECK(bad.code == 1);
        CHECK(bad.err.find("error: LengthMismatch:") == 0);
    }
}

TEST_CASE("sweep at zero spread collapses onto the deterministic run") {
    const Trained& t = trained();
    fs::path out_dir = sandbox() / "sweep0_out";
    fs::path cfg = write_config("sweep0.json", out_dir);

    RunResult r = run_cli("--config '" + cfg.string() + "' --no-timestamp sweep --weights '" +
                          t.weights.string() + "' --parameter sigma_rel --values 0.0 --trials 3");
    CHECK(r.code == 0);

    std::ifstream csv(out_dir / "sweep.csv");
    std::string header, row;
    std::getline(csv, header);
    CHECK(header == "parameter,value,mean_rmse,std_rmse,trials");
    REQUIRE(static_cast<bool>(std::getline(csv, row)));
    std::istringstream rs(row);
    std::string par, value, mean_s, std_s, trials_s;
    std::getline(rs, par, ',');
    std::getline(rs, value, ',');
    std::getline(rs, mean_s, ',');
    std::getline(rs, std_s, ',');
    std::getline(rs, trials_s, ',');
    CHECK(par == "sigma_rel");
    CHECK(value == "0.0");
    CHECK(std::stoi(trials_s) == 3);
    CHECK(std::stod(std_s) == 0.0);

    // all trials are the ideal pipeline, so the mean equals the software rmse
    json sim = read_report(t.out_dir / "simulate_report.json");
    CHECK(std::stod(mean_s) ==
          doctest::Approx(sim["analog"]["rmse"].get<double>()).epsilon(1e-9));
}

TEST_CASE("sweep over programming resolution on a self-generated series") {
    // A series the continuous network reproduces exactly: the first two
    // values pin the normalizer, every later value is the network's own
    // two-step prediction. Quantization error is then the only error source,
    // so the mean RMSE must fall as the level count grows.
    WeightSet w;
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> wd(-0.6, 0.6);
    for_each_param(w, [&](const std::string&, double& v) { v = wd(rng); });

    std::vector<double> norm = {0.0, 1.0};
    for (int k = 2; k < 60; ++k) {
        double v = forward(w, norm[k - 2], norm[k - 1]);
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        norm.push_back(v);
    }
    std::vector<double> raw;
    for (double v : norm) raw.push_back(104.0 + 518.0 * v);

    fs::path series = sandbox() / "self_series.csv";
    write_series_csv(series, raw);
    fs::path weights = sandbox() / "self_weights.json";
    export_weights(w, weights);

    fs::path out_dir = sandbox() / "sweep_levels_out";
    fs::path cfg = sandbox() / "sweep_levels.json";
    {
        std::ofstream f(cfg, std::ios::trunc);
        f << R"({"version":"v1","dataset":")" << series.string() << R"(","out_dir":")"
          << out_dir.string() << R"("})";
    }

    RunResult r = run_cli("--config '" + cfg.string() + "' --no-timestamp sweep --weights '" +
                          weights.string() +
                          "' --parameter levels --values 2 4 8 16 32 continuous --trials 1");
    CHECK(r.code == 0);

    std::ifstream csv(out_dir / "sweep.csv");
    std::string line;
    std::getline(csv, line); // header
    std::vector<double> means;
    std::vector<std::string> tokens;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string par, value, mean_s;
        std::getline(ls, par, ',');
        std::getline(ls, value, ',');
        std::getline(ls, mean_s, ',');
        tokens.push_back(value);
        means.push_back(std::stod(mean_s));
    }
    REQUIRE(means.size() == 6);
    CHECK(tokens.front() == "2");
    CHECK(tokens.back() == "continuous");

    int inversions = 0;
    for (std::size_t i = 1; i < means.size(); ++i)
        if (means[i] > means[i - 1] + 1e-12) ++inversions;
    CHECK(inversions <= 1);
    CHECK(means.back() < 1e-6);            // continuous reproduces the series
    CHECK(means.front() > 10 * means[3]);  // 2 levels are far worse than 16
}

TEST_CASE("sweep argument validation") {
    const Trained& t = trained();
    const std::string base = "--config '" + t.config.string() + "' sweep --weights '" +
                             t.weights.string() + "' ";

    RunResult r = run_cli(base + "--parameter resistance --values 1 2");
    CHECK(r.code == 1);
    CHECK(r.err.find("error: UnknownParameter:") == 0);

    r = run_cli(base + "--parameter sigma_rel --values 0.1 --trials 0");
    CHECK(r.code == 1);
    CHECK(r.err.find("error: InvalidArgument:") == 0);

    r = run_cli(base + "--parameter levels --values seven");
    CHECK(r.code == 1);
    CHECK(r.err.find("error: BadValue:") == 0);

    r = run_cli(base + "--parameter droop_rate --values 1.5");
    CHECK(r.code == 1);
    CHECK(r.err.find("error: BadValue:") == 0);

    r = run_cli("--config '" + t.config.string() + "' sweep --values 0.1");
    CHECK(r.code == 2); // missing required --parameter is a usage error
    CHECK(r.err.find("error: Usage:") == 0);
}

TEST_CASE("curve and crossbar dumps") {
    const Trained& t = trained();
    fs::path out_dir = sandbox() / "dump_out";
    fs::path cfg = write_config("dump.json", out_dir);

    RunResult r = run_cli("--config '" + cfg.string() + "' dump-curves");
    CHECK(r.code == 0);
    for (const char* name : {"sigmoid.csv", "tanh.csv", "multiplier.csv"}) {
        fs::path p = out_dir / "curves" / name;
        REQUIRE(fs::exists(p));
        std::ifstream in(p);
        std::string header;
        std::getline(in, header);
        CHECK(header == "v_in,v_out");
        CHECK(data_lines(p) == 2001); // -1 V to 1 V at 1 mV
    }

    r = run_cli("--config '" + cfg.string() + "' dump-crossbar --weights '" +
                t.weights.string() + "'");
    CHECK(r.code == 0);
    CHECK(data_lines(out_dir / "lstm_crossbar.csv") == 96); // 6 x 16 cells
    CHECK(data_lines(out_dir / "dense_crossbar.csv") == 5); // 5 x 1 cells
}

TEST_CASE("failures map to documented exit codes and one-line errors") {
    SUBCASE("missing dataset file") {
        fs::path cfg = write_config("bad_data.json", sandbox() / "never_out");
        std::string text = slurp(cfg);
        const std::string from = kCanonical.string();
        text.replace(text.find(from), from.size(), "/nonexistent/series.csv");
        {
            std::ofstream f(cfg, std::ios::trunc);
            f << text;
        }
        RunResult r = run_cli("--config '" + cfg.string() + "' train");
        CHECK(r.code == 1);
        CHECK(r.err.find("error: MissingFile:") == 0);
        CHECK(r.err.find("/nonexistent/series.csv") != std::string::npos);
        CHECK(r.err.find('\n') == r.err.size() - 1); // exactly one line
    }
    SUBCASE("missing config file") {
        RunResult r = run_cli("--config /nonexistent/cfg.json train");
        CHECK(r.code == 1);
        CHECK(r.err.find("error: MissingFile:") == 0);
    }
    SUBCASE("config with an unknown key") {
        fs::path p = sandbox() / "unknown_key.json";
        {
            std::ofstream f(p, std::ios::trunc);
            f << R"({"version":"v1","typo":true})";
        }
        RunResult r = run_cli("--config '" + p.string() + "' train");
        CHECK(r.code == 1);
        CHECK(r.err.find("error: UnknownKey:") == 0);
    }
    SUBCASE("simulate without a weight file") {
        fs::path cfg = write_config("no_weights.json", sandbox() / "no_weights_out");
        RunResult r = run_cli("--config '" + cfg.string() + "' simulate");
        CHECK(r.code == 1);
        CHECK(r.err.find("error: MissingFile:") == 0);
    }
    SUBCASE("unknown subcommand") {
        RunResult r = run_cli("teach");
        CHECK(r.code == 2);
        CHECK(r.err.find("error: Usage:") == 0);
    }
    SUBCASE("no subcommand") {
        RunResult r = run_cli("");
        CHECK(r.code == 2);
        CHECK(r.err.find("error: Usage:") == 0);
    }
}

TEST_CASE("the out flag overrides the configured directory") {
    const Trained& t = trained();
    fs::path moved = sandbox() / "moved_out";
    RunResult r = run_cli("--config '" + t.config.string() + "' --out '" + moved.string() +
                          "' --no-timestamp simulate --weights '" + t.weights.string() + "'");
    CHECK(r.code == 0);
    CHECK(fs::exists(moved / "simulate_report.json"));
    CHECK(fs::exists(moved / "analog_predictions.csv"));
}
