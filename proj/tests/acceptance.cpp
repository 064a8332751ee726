// Release gate: every shipped guarantee checked end to end, one verdict line
// each. Exits nonzero if any check fails.
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "memlstm/analog.hpp"
#include "memlstm/crossbar.hpp"
#include "memlstm/dataset.hpp"
#include "memlstm/lstm.hpp"
#include "memlstm/rng.hpp"
#include "memlstm/scheduler.hpp"

using namespace memlstm;

namespace {

int g_failures = 0;

void verdict(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

int main() {
    const std::filesystem::path csv =
        std::filesystem::path(MEMLSTM_DATA_DIR) / "international-airline-passengers.csv";

    // 1. Normalization reference values
    RawSeries series;
    Normalizer norm;
    std::vector<double> normalized;
    {
        series = load_series(csv);
        norm = fit_normalizer(series);
        normalized = normalize(norm, series);
        const double expected[6] = {0.015444, 0.027027, 0.054054,
                                    0.048263, 0.032819, 0.059846};
        double worst = 0.0;
        for (int i = 0; i < 6; ++i)
            worst = std::max(worst, std::abs(normalized[i] - expected[i]));
        verdict(1, "normalization reference values", worst <= 1e-6,
                "max deviation " + num(worst) + " over first six entries, bound 1e-06");
    }

    // 2. Software accuracy bound
    SupervisedSet train_set, test_set;
    WeightSet w;
    std::vector<double> sw_pred, targets;
    double sw_rmse = 0.0;
    {
        auto supervised = window(normalized);
        std::tie(train_set, test_set) = split(supervised);
        w = train(train_set, Hyperparams{});
        for (const SupervisedRow& row : test_set.rows) {
            sw_pred.push_back(forward(w, row.x_prev, row.x_curr));
            targets.push_back(row.target);
        }
        sw_rmse = metrics(sw_pred, targets).rmse;
        verdict(2, "software accuracy bound", sw_rmse <= 0.15,
                "test rmse " + num(sw_rmse) + " with default hyperparameters, bound 0.15");
    }

    // 3. Ideal analog equivalence
    const CycleTimeline timeline = build_cycle_timeline();
    TestRunResult ideal_run;
    {
        ProgrammedNetwork net = program_network(w, MemristorParams{});
        ideal_run = run_test_set(timeline, net, AnalogBlockParams{}, test_set);
        double worst = 0.0;
        for (std::size_t i = 0; i < sw_pred.size(); ++i)
            worst = std::max(worst, std::abs(ideal_run.predictions[i] - sw_pred[i]));
        verdict(3, "ideal analog equivalence",
                ideal_run.predictions.size() == 45 && worst <= 1e-6,
                "45 predictions, max |analog - software| " + num(worst) + ", bound 1e-06");
    }

    // 4. Analog accuracy under device variation
    {
        const std::uint64_t base = mix_seed(42, 1); // default programming seed
        const int n_trials = 30;
        double mean = 0.0;
        for (int t = 0; t < n_trials; ++t) {
            const std::uint64_t trial = t == 0 ? base : mix_seed(base, t);
            ProgrammedNetwork net = program_network(w, MemristorParams{});
            VariationModel vm;
            vm.sigma_rel = 0.02;
            vm.seed = trial;
            net.lstm = apply_variation(net.lstm, vm);
            vm.seed = mix_seed(trial, 3);
            net.dense = apply_variation(net.dense, vm);
            TestRunResult run = run_test_set(timeline, net, AnalogBlockParams{}, test_set);
            mean += metrics(run.predictions, targets).rmse;
        }
        mean /= n_trials;
        const double delta = std::abs(mean - sw_rmse);
        verdict(4, "analog accuracy under device variation", delta <= 0.05,
                "mean rmse " + num(mean) + " over 30 seeds at sigma_rel 0.02, software " +
                    num(sw_rmse) + ", |delta| " + num(delta) + ", bound 0.05");
    }

    // 5. Timing exactness
    {
        bool ok = timeline.phases.size() == 12;
        const double bounds_us[6] = {40.0, 42.0, 82.0, 84.0, 87.0, 88.0};
        const int at[5] = {4, 5, 9, 10, 11};
        for (int i = 0; ok && i < 5; ++i)
            ok = timeline.phases[at[i]].start_ns == static_cast<std::int64_t>(bounds_us[i] * 1000);
        ok = ok && timeline.cycle_ns == 88000;
        const bool total_exact = ideal_run.total_time_ms == 3.96;
        verdict(5, "timing exactness", ok && total_exact,
                std::string("phase boundaries 40/42/82/84/87/88 us ") +
                    (ok ? "exact" : "WRONG") + ", 45 rows " + num(ideal_run.total_time_ms) +
                    " ms " + (total_exact ? "==" : "!=") + " 3.96");
    }

    // 6. Crossbar oracle equivalence
    {
        std::mt19937_64 rng(2026);
        std::uniform_real_distribution<double> wd(-1.0, 1.0);
        std::uniform_int_distribution<int> dim(1, 8);
        double worst = 0.0;
        for (int n = 0; n < 100; ++n) {
            const int rows = dim(rng), cols = dim(rng);
            Matrix W(rows, std::vector<double>(cols));
            std::vector<double> v(rows);
            for (auto& r : W)
                for (double& x : r) x = wd(rng);
            for (double& x : v) x = wd(rng);
            CrossbarArray arr = program(W, MemristorParams{});
            std::vector<double> got = vmm(arr, v);
            for (int c = 0; c < cols; ++c) {
                double want = 0.0;
                for (int r = 0; r < rows; ++r) want += W[r][c] * v[r];
                worst = std::max(worst, std::abs(got[c] - want));
            }
        }
        bool quant_ok = true;
        double worst_q = 0.0;
        for (int levels : {2, 4, 16}) {
            const double bound = 1.0 / (levels - 1);
            for (int i = 0; i <= 1000; ++i) {
                const double x = -1.0 + 2.0 * i / 1000.0;
                const double err = std::abs(quantize_value(x, levels) - x);
                quant_ok = quant_ok && err <= bound + 1e-12;
                worst_q = std::max(worst_q, err / bound);
            }
        }
        verdict(6, "crossbar oracle equivalence", worst <= 1e-9 && quant_ok,
                "max |vmm - W^T v| " + num(worst) +
                    " over 100 random cases, bound 1e-09; quantization grid error <= " +
                    num(worst_q) + "x the 1/(levels-1) bound at levels 2/4/16");
    }

    // 7. Gradient check
    {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> wd(-1.0, 1.0);
        std::uniform_real_distribution<double> xd(0.0, 1.0);
        double worst = 0.0;
        for (int n = 0; n < 20; ++n) {
            WeightSet g;
            for_each_param(g, [&](const std::string&, double& v) { v = wd(rng); });
            SupervisedRow row{xd(rng), xd(rng), xd(rng)};
            worst = std::max(worst, gradient_check(g, row));
        }
        verdict(7, "gradient check", worst <= 1e-4,
                "worst relative error " + num(worst) + " over 20 random instances, bound 1e-04");
    }

    // 8. Energy accounting
    {
        PowerModel uniform;
        uniform.peak_cell_mw = 210.67;
        uniform.dense_mw = 210.67;
        uniform.idle_mw = 210.67;
        const double one_uj = estimate_energy_mj(timeline, uniform, 1) * 1000.0;
        bool linear = true;
        for (int n : {2, 7, 45, 1000})
            linear = linear &&
                     estimate_energy_mj(timeline, uniform, n) ==
                         n * estimate_energy_mj(timeline, uniform, 1);
        verdict(8, "energy accounting", std::abs(one_uj - 18.539) <= 0.001 && linear,
                "uniform 210.67 mW cycle " + num(one_uj) +
                    " uJ, target 18.539 +/- 0.001; scaling exactly linear: " +
                    (linear ? "yes" : "no"));
    }

    if (g_failures == 0) {
        std::printf("all 8 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria FAILED\n", g_failures);
    return 1;
}
