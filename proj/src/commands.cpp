#include "memlstm/commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memlstm/analog.hpp"
#include "memlstm/crossbar.hpp"
#include "memlstm/dataset.hpp"
#include "memlstm/errors.hpp"
#include "memlstm/lstm.hpp"
#include "memlstm/rng.hpp"
#include "memlstm/scheduler.hpp"

namespace memlstm {

namespace {

using nlohmann::json;

struct PreparedData {
    SupervisedSet train;
    SupervisedSet test;
    Normalizer norm;
};

PreparedData prepare_data(const RunConfig& cfg) {
    const RawSeries series = load_series(cfg.dataset_path);
    const Normalizer norm = fit_normalizer(series);
    const std::vector<double> normalized = normalize(norm, series);
    const SupervisedSet all = window(normalized);
    auto [train, test] = split(all, cfg.test_count);
    return PreparedData{std::move(train), std::move(test), norm};
}

std::vector<double> targets_of(const SupervisedSet& set) {
    std::vector<double> t;
    t.reserve(set.rows.size());
    for (const auto& r : set.rows) t.push_back(r.target);
    return t;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Published figures carried in every report purely for side-by-side display.
json reference_block() {
    return json{{"label", "literature reference values, not measured output"},
                {"software", json{{"mse", 0.0112}, {"rmse", 0.1059}}},
                {"analog", json{{"mse", 0.0101}, {"rmse", 0.1004}}},
                {"cycle_time_us", 88.0},
                {"test_prediction_time_ms", 3.96},
                {"peak_cell_power_mw", 210.67},
                {"cell_area_um2", 58569.0}};
}

void write_json_report(const json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

void ensure_out_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw SimError("IoFailure", "cannot create directory " + dir.string());
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

double parse_number_token(const std::string& token, const std::string& what) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw SimError("BadValue", what + ": cannot parse number '" + token + "'");
    }
    return v;
}

struct TrialOutcome {
    double rmse = 0.0;
    TestRunResult run;
};

// One seeded analog pass over the test set (programming variation plus
// per-read noise when configured).
TrialOutcome run_trial(const RunConfig& cfg, const WeightSet& w, const PreparedData& data,
                       const CycleTimeline& timeline, std::uint64_t trial_seed) {
    ProgrammedNetwork net = program_network(w, cfg.memristor);
    if (cfg.variation.sigma_rel > 0.0) {
        VariationModel vm = cfg.variation;
        vm.seed = trial_seed;
        net.lstm = apply_variation(net.lstm, vm);
        VariationModel vm_dense = vm;
        vm_dense.seed = mix_seed(trial_seed, 3);
        net.dense = apply_variation(net.dense, vm_dense);
    }
    std::mt19937_64 noise_rng(mix_seed(trial_seed, 2));
    ReadNoise noise;
    if (cfg.variation.read_noise_rel > 0.0) {
        noise.rel = cfg.variation.read_noise_rel;
        noise.rng = &noise_rng;
    }
    TrialOutcome outcome;
    outcome.run = run_test_set(timeline, net, cfg.analog, data.test, noise);
    const std::vector<double> targets = targets_of(data.test);
    outcome.rmse = metrics(outcome.run.predictions, targets).rmse;
    return outcome;
}

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

Aggregate aggregate(const std::vector<double>& values) {
    Aggregate a;
    for (double v : values) a.mean += v;
    a.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(var / static_cast<double>(values.size()));
    return a;
}

std::vector<double> parallel_trial_rmse(const RunConfig& cfg, const WeightSet& w,
                                        const PreparedData& data, const CycleTimeline& timeline,
                                        const std::vector<std::uint64_t>& seeds) {
    std::vector<std::future<double>> futures;
    futures.reserve(seeds.size());
    for (std::uint64_t s : seeds) {
        futures.push_back(std::async(std::launch::async, [&, s] {
            return run_trial(cfg, w, data, timeline, s).rmse;
        }));
    }
    std::vector<double> rmse;
    rmse.reserve(seeds.size());
    for (auto& f : futures) rmse.push_back(f.get());
    return rmse;
}

} // namespace

void write_predictions_csv(const std::vector<PredictionRow>& rows,
                           const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << "index,target_norm,prediction_norm,target,prediction\n";
    out << std::setprecision(12);
    for (const auto& r : rows) {
        out << r.index << ',' << r.target_norm << ',' << r.prediction_norm << ',' << r.target
            << ',' << r.prediction << '\n';
    }
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("MissingFile", "cannot open " + path.string());
    std::vector<PredictionRow> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 5) {
            throw SimError("ParseFailure",
                           path.string() + ": bad row on line " + std::to_string(line_no));
        }
        PredictionRow r;
        try {
            r.index = std::stoi(fields[0]);
            r.target_norm = std::stod(fields[1]);
            r.prediction_norm = std::stod(fields[2]);
            r.target = std::stod(fields[3]);
            r.prediction = std::stod(fields[4]);
        } catch (const std::exception&) {
            throw SimError("ParseFailure",
                           path.string() + ": bad number on line " + std::to_string(line_no));
        }
        rows.push_back(r);
    }
    return rows;
}

int cmd_train(const RunConfig& cfg, const ReportOptions& opt, std::ostream& out) {
    const PreparedData data = prepare_data(cfg);
    const WeightSet w = train(data.train, cfg.trainer);

    std::vector<double> train_preds, test_preds;
    for (const auto& r : data.train.rows) train_preds.push_back(forward(w, r.x_prev, r.x_curr));
    for (const auto& r : data.test.rows) test_preds.push_back(forward(w, r.x_prev, r.x_curr));
    const Metrics m_train = metrics(train_preds, targets_of(data.train));
    const Metrics m_test = metrics(test_preds, targets_of(data.test));

    ensure_out_dir(cfg.out_dir);
    const auto weights_path = cfg.out_dir / "weights.json";
    export_weights(w, weights_path);

    json report{{"version", "v1"},
                {"dataset", cfg.dataset_path.string()},
                {"rows", json{{"train", data.train.rows.size()}, {"test", data.test.rows.size()}}},
                {"hyperparams", json{{"learning_rate", cfg.trainer.learning_rate},
                                     {"epochs", cfg.trainer.epochs},
                                     {"seed", cfg.trainer.seed},
                                     {"clip_norm", cfg.trainer.clip_norm}}},
                {"train", json{{"mse", m_train.mse}, {"rmse", m_train.rmse}}},
                {"test", json{{"mse", m_test.mse}, {"rmse", m_test.rmse}}},
                {"scale", "normalized"},
                {"weights_file", weights_path.string()},
                {"paper_reference", reference_block()}};
    if (!opt.no_timestamp) report["generated_at"] = utc_timestamp();
    write_json_report(report, cfg.out_dir / "train_report.json");

    out << "train mse=" << fmt(m_train.mse) << " rmse=" << fmt(m_train.rmse) << '\n';
    out << "test mse=" << fmt(m_test.mse) << " rmse=" << fmt(m_test.rmse) << '\n';
    out << "wrote " << weights_path.string() << '\n';
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::filesystem::path& weights_path, int n_seeds,
                 const ReportOptions& opt, std::ostream& out) {
    if (n_seeds < 1) throw SimError("InvalidArgument", "seed count must be >= 1");
    const PreparedData data = prepare_data(cfg);
    const WeightSet w = import_weights(weights_path);
    const CycleTimeline timeline = build_cycle_timeline(cfg.timeline, cfg.power);

    std::vector<double> software_preds;
    for (const auto& r : data.test.rows) software_preds.push_back(forward(w, r.x_prev, r.x_curr));
    const std::vector<double> targets = targets_of(data.test);
    const Metrics m_sw = metrics(software_preds, targets);

    // The nominal run (first seed) provides the emitted predictions; extra
    // seeds only contribute to the aggregate statistics.
    const TrialOutcome nominal = run_trial(cfg, w, data, timeline, cfg.variation.seed);
    const Metrics m_an = metrics(nominal.run.predictions, targets);

    std::vector<double> trial_rmse{nominal.rmse};
    if (n_seeds > 1) {
        std::vector<std::uint64_t> seeds;
        for (int t = 1; t < n_seeds; ++t) seeds.push_back(mix_seed(cfg.variation.seed, t));
        const std::vector<double> extra = parallel_trial_rmse(cfg, w, data, timeline, seeds);
        trial_rmse.insert(trial_rmse.end(), extra.begin(), extra.end());
    }
    const Aggregate agg = aggregate(trial_rmse);

    ensure_out_dir(cfg.out_dir);
    std::vector<PredictionRow> sw_rows, an_rows;
    for (std::size_t i = 0; i < data.test.rows.size(); ++i) {
        const double target_n = data.test.rows[i].target;
        PredictionRow r;
        r.index = static_cast<int>(i);
        r.target_norm = target_n;
        r.target = denormalize(data.norm, target_n);
        r.prediction_norm = software_preds[i];
        r.prediction = denormalize(data.norm, software_preds[i]);
        sw_rows.push_back(r);
        r.prediction_norm = nominal.run.predictions[i];
        r.prediction = denormalize(data.norm, nominal.run.predictions[i]);
        an_rows.push_back(r);
    }
    write_predictions_csv(sw_rows, cfg.out_dir / "software_predictions.csv");
    write_predictions_csv(an_rows, cfg.out_dir / "analog_predictions.csv");

    // One full cycle trace for the first test row, as a schedule artifact.
    const auto first = data.test.rows.front();
    std::mt19937_64 trace_rng(mix_seed(cfg.variation.seed, 4));
    ReadNoise trace_noise;
    if (cfg.variation.read_noise_rel > 0.0) {
        trace_noise.rel = cfg.variation.read_noise_rel;
        trace_noise.rng = &trace_rng;
    }
    ProgrammedNetwork trace_net = program_network(w, cfg.memristor);
    if (cfg.variation.sigma_rel > 0.0) {
        VariationModel vm = cfg.variation;
        trace_net.lstm = apply_variation(trace_net.lstm, vm);
        VariationModel vm_dense = vm;
        vm_dense.seed = mix_seed(vm.seed, 3);
        trace_net.dense = apply_variation(trace_net.dense, vm_dense);
    }
    const auto traced =
        run_prediction(timeline, trace_net, cfg.analog, first.x_prev, first.x_curr, trace_noise);
    dump_trace_csv(traced.second, cfg.out_dir / "trace.csv");

    json report{{"version", "v1"},
                {"weights_file", weights_path.string()},
                {"software", json{{"mse", m_sw.mse}, {"rmse", m_sw.rmse}}},
                {"analog", json{{"mse", m_an.mse}, {"rmse", m_an.rmse}}},
                {"scale", "normalized"},
                {"seeds", n_seeds},
                {"trial_rmse", trial_rmse},
                {"mean_rmse", agg.mean},
                {"std_rmse", agg.stddev},
                {"rows", data.test.rows.size()},
                {"cycle_time_us", timeline.cycle_us()},
                {"total_time_ms", nominal.run.total_time_ms},
                {"energy_mj", nominal.run.energy_mj},
                {"energy_uj", nominal.run.energy_mj * 1000.0},
                {"variation", json{{"sigma_rel", cfg.variation.sigma_rel},
                                   {"read_noise_rel", cfg.variation.read_noise_rel},
                                   {"seed", cfg.variation.seed}}},
                {"levels", cfg.memristor.levels == 0 ? json("continuous")
                                                     : json(cfg.memristor.levels)},
                {"paper_reference", reference_block()}};
    if (!opt.no_timestamp) report["generated_at"] = utc_timestamp();
    write_json_report(report, cfg.out_dir / "simulate_report.json");

    out << "software mse=" << fmt(m_sw.mse) << " rmse=" << fmt(m_sw.rmse) << '\n';
    out << "analog mse=" << fmt(m_an.mse) << " rmse=" << fmt(m_an.rmse) << '\n';
    if (n_seeds > 1) {
        out << "seeds=" << n_seeds << " mean_rmse=" << fmt(agg.mean)
            << " std_rmse=" << fmt(agg.stddev) << '\n';
    }
    out << "total_time_ms=" << fmt(nominal.run.total_time_ms)
        << " energy_uj=" << fmt(nominal.run.energy_mj * 1000.0) << '\n';
    return 0;
}

int cmd_compare(const RunConfig& cfg, const std::filesystem::path& software_csv,
                const std::filesystem::path& analog_csv, const ReportOptions& opt,
                std::ostream& out) {
    const std::vector<PredictionRow> sw = read_predictions_csv(software_csv);
    const std::vector<PredictionRow> an = read_predictions_csv(analog_csv);
    if (sw.size() != an.size()) {
        throw SimError("LengthMismatch", std::to_string(sw.size()) + " software rows vs " +
                                             std::to_string(an.size()) + " analog rows");
    }
    if (sw.empty()) throw SimError("EmptyInput", "prediction files have no rows");

    std::vector<double> sw_preds, an_preds, targets;
    double max_delta = 0.0;
    for (std::size_t i = 0; i < sw.size(); ++i) {
        if (std::abs(sw[i].target_norm - an[i].target_norm) > 1e-9) {
            throw SimError("BadValue", "target mismatch at row " + std::to_string(i) +
                                           "; the files describe different test sets");
        }
        sw_preds.push_back(sw[i].prediction_norm);
        an_preds.push_back(an[i].prediction_norm);
        targets.push_back(sw[i].target_norm);
        max_delta = std::max(max_delta, std::abs(sw[i].prediction_norm - an[i].prediction_norm));
    }
    const Metrics m_sw = metrics(sw_preds, targets);
    const Metrics m_an = metrics(an_preds, targets);

    ensure_out_dir(cfg.out_dir);
    const auto table_path = cfg.out_dir / "comparison.csv";
    {
        std::ofstream tbl(table_path);
        if (!tbl) throw SimError("IoFailure", "cannot write " + table_path.string());
        tbl << "index,target,software,analog\n";
        tbl << std::setprecision(12);
        for (std::size_t i = 0; i < sw.size(); ++i) {
            tbl << sw[i].index << ',' << sw[i].target_norm << ',' << sw[i].prediction_norm << ','
                << an[i].prediction_norm << '\n';
        }
        if (!tbl) throw SimError("IoFailure", "write failed for " + table_path.string());
    }

    json report{{"version", "v1"},
                {"software", json{{"mse", m_sw.mse}, {"rmse", m_sw.rmse}}},
                {"analog", json{{"mse", m_an.mse}, {"rmse", m_an.rmse}}},
                {"scale", "normalized"},
                {"rows", sw.size()},
                {"max_abs_delta", max_delta},
                {"table", table_path.string()},
                {"paper_reference", reference_block()}};
    if (!opt.no_timestamp) report["generated_at"] = utc_timestamp();
    write_json_report(report, cfg.out_dir / "compare_report.json");

    out << "software mse=" << fmt(m_sw.mse) << " rmse=" << fmt(m_sw.rmse) << '\n';
    out << "analog mse=" << fmt(m_an.mse) << " rmse=" << fmt(m_an.rmse) << '\n';
    out << "max_abs_delta=" << fmt(max_delta) << '\n';
    return 0;
}

int cmd_sweep(const RunConfig& cfg, const std::filesystem::path& weights_path,
              const std::string& parameter, const std::vector<std::string>& values, int trials,
              const ReportOptions& opt, std::ostream& out) {
    static const std::set<std::string> knobs = {"sigma_rel", "levels", "droop_rate",
                                                "gain_error_rel"};
    if (!knobs.count(parameter)) {
        throw SimError("UnknownParameter", "cannot sweep '" + parameter +
                                               "'; choose one of sigma_rel, levels, droop_rate, "
                                               "gain_error_rel");
    }
    if (trials < 1) throw SimError("InvalidArgument", "trials must be >= 1");
    if (values.empty()) throw SimError("InvalidArgument", "no sweep values given");

    const PreparedData data = prepare_data(cfg);
    const WeightSet w = import_weights(weights_path);
    const CycleTimeline timeline = build_cycle_timeline(cfg.timeline, cfg.power);

    struct SweepRow {
        std::string value;
        double mean = 0.0;
        double stddev = 0.0;
    };
    std::vector<SweepRow> rows;

    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        const std::string& token = values[vi];
        RunConfig swept = cfg;
        if (parameter == "sigma_rel") {
            swept.variation.sigma_rel = parse_number_token(token, "sigma_rel");
            if (swept.variation.sigma_rel < 0.0) throw SimError("BadValue", "sigma_rel >= 0");
        } else if (parameter == "levels") {
            if (token == "continuous") {
                swept.memristor.levels = 0;
            } else {
                const double lv = parse_number_token(token, "levels");
                swept.memristor.levels = static_cast<int>(lv);
                if (swept.memristor.levels < 2 || lv != std::floor(lv)) {
                    throw SimError("BadValue", "levels must be an integer >= 2 or 'continuous'");
                }
            }
        } else if (parameter == "droop_rate") {
            swept.analog.droop_rate = parse_number_token(token, "droop_rate");
            if (swept.analog.droop_rate < 0.0 || swept.analog.droop_rate >= 1.0) {
                throw SimError("BadValue", "droop_rate must lie in [0, 1)");
            }
        } else {
            swept.analog.gain_error_rel = parse_number_token(token, "gain_error_rel");
            if (!(swept.analog.gain_error_rel > -1.0)) {
                throw SimError("BadValue", "gain_error_rel must exceed -1");
            }
        }

        std::vector<std::uint64_t> seeds;
        const std::uint64_t value_seed = mix_seed(cfg.seed, 1000 + vi);
        for (int t = 0; t < trials; ++t) seeds.push_back(mix_seed(value_seed, t));
        const std::vector<double> rmse = parallel_trial_rmse(swept, w, data, timeline, seeds);
        const Aggregate agg = aggregate(rmse);
        rows.push_back(SweepRow{token, agg.mean, agg.stddev});
        out << parameter << '=' << token << " mean_rmse=" << fmt(agg.mean)
            << " std_rmse=" << fmt(agg.stddev) << " trials=" << trials << '\n';
    }

    ensure_out_dir(cfg.out_dir);
    const auto csv_path = cfg.out_dir / "sweep.csv";
    {
        std::ofstream csv(csv_path);
        if (!csv) throw SimError("IoFailure", "cannot write " + csv_path.string());
        csv << "parameter,value,mean_rmse,std_rmse,trials\n";
        csv << std::setprecision(12);
        for (const auto& r : rows) {
            csv << parameter << ',' << r.value << ',' << r.mean << ',' << r.stddev << ','
                << trials << '\n';
        }
        if (!csv) throw SimError("IoFailure", "write failed for " + csv_path.string());
    }

    json jrows = json::array();
    for (const auto& r : rows) {
        jrows.push_back(json{{"value", r.value}, {"mean_rmse", r.mean}, {"std_rmse", r.stddev}});
    }
    json report{{"version", "v1"},
                {"parameter", parameter},
                {"trials", trials},
                {"results", jrows},
                {"csv", csv_path.string()},
                {"paper_reference", reference_block()}};
    if (!opt.no_timestamp) report["generated_at"] = utc_timestamp();
    write_json_report(report, cfg.out_dir / "sweep_report.json");
    return 0;
}

int cmd_dump_curves(const RunConfig& cfg, std::ostream& out) {
    const auto dir = cfg.out_dir / "curves";
    ensure_out_dir(dir);
    dump_curve_csv(CurveKind::sigmoid, cfg.analog, dir / "sigmoid.csv");
    dump_curve_csv(CurveKind::tanh, cfg.analog, dir / "tanh.csv");
    dump_curve_csv(CurveKind::multiplier, cfg.analog, dir / "multiplier.csv");
    out << "wrote " << (dir / "sigmoid.csv").string() << '\n';
    out << "wrote " << (dir / "tanh.csv").string() << '\n';
    out << "wrote " << (dir / "multiplier.csv").string() << '\n';
    return 0;
}

int cmd_dump_crossbar(const RunConfig& cfg, const std::filesystem::path& weights_path,
                      std::ostream& out) {
    const WeightSet w = import_weights(weights_path);
    const ProgrammedNetwork net = program_network(w, cfg.memristor);
    ensure_out_dir(cfg.out_dir);
    dump_crossbar_csv(net.lstm, cfg.out_dir / "lstm_crossbar.csv");
    dump_crossbar_csv(net.dense, cfg.out_dir / "dense_crossbar.csv");
    out << "wrote " << (cfg.out_dir / "lstm_crossbar.csv").string() << '\n';
    out << "wrote " << (cfg.out_dir / "dense_crossbar.csv").string() << '\n';
    return 0;
}

std::vector<double> monte_carlo_rmse(const RunConfig& cfg, const WeightSet& w, int n_seeds) {
    if (n_seeds < 1) throw SimError("InvalidArgument", "seed count must be >= 1");
    const PreparedData data = prepare_data(cfg);
    const CycleTimeline timeline = build_cycle_timeline(cfg.timeline, cfg.power);
    std::vector<std::uint64_t> seeds;
    if (n_seeds == 1) {
        seeds.push_back(cfg.variation.seed);
    } else {
        for (int t = 0; t < n_seeds; ++t) seeds.push_back(mix_seed(cfg.variation.seed, t));
    }
    return parallel_trial_rmse(cfg, w, data, timeline, seeds);
}

} // namespace memlstm
