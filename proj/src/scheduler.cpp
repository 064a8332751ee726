#include "memlstm/scheduler.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "memlstm/errors.hpp"

namespace memlstm {

namespace {

std::int64_t to_ns(double us, const char* what) {
    if (!(us > 0.0)) {
        throw SimError("InvalidArgument", std::string(what) + " duration must be positive");
    }
    return std::llround(us * 1000.0);
}

double phase_power(PhaseKind kind, const PowerModel& pm) {
    switch (kind) {
    case PhaseKind::unit_subcycle: return pm.peak_cell_mw;
    case PhaseKind::dense: return pm.dense_mw;
    case PhaseKind::delay:
    case PhaseKind::end_delay: return pm.idle_mw;
    case PhaseKind::summary: break;
    }
    return 0.0;
}

} // namespace

std::string to_string(PhaseKind kind) {
    switch (kind) {
    case PhaseKind::unit_subcycle: return "unit_subcycle";
    case PhaseKind::delay: return "delay";
    case PhaseKind::dense: return "dense";
    case PhaseKind::end_delay: return "end_delay";
    case PhaseKind::summary: return "summary";
    }
    return "unknown";
}

CycleTimeline build_cycle_timeline(const TimelineConfig& config, const PowerModel& pm) {
    if (pm.peak_cell_mw < 0.0 || pm.dense_mw < 0.0 || pm.idle_mw < 0.0) {
        throw SimError("BadValue", "power levels must be >= 0");
    }
    const std::int64_t sub_ns = to_ns(config.subcycle_us, "sub-cycle");
    const std::int64_t delay_ns = to_ns(config.interstep_delay_us, "inter-step delay");
    const std::int64_t dense_ns = to_ns(config.dense_us, "dense");
    const std::int64_t end_ns = to_ns(config.end_delay_us, "end delay");

    CycleTimeline tl;
    std::int64_t t = 0;
    auto push = [&](std::string name, std::int64_t dur, PhaseKind kind, int step, int unit) {
        Phase ph;
        ph.name = std::move(name);
        ph.start_ns = t;
        ph.duration_ns = dur;
        ph.kind = kind;
        ph.step = step;
        ph.unit = unit;
        ph.power_mw = phase_power(kind, pm);
        tl.phases.push_back(std::move(ph));
        t += dur;
    };

    for (int step = 1; step <= kTimeSteps; ++step) {
        for (int unit = 0; unit < kHiddenUnits; ++unit) {
            push("step" + std::to_string(step) + "_unit" + std::to_string(unit + 1), sub_ns,
                 PhaseKind::unit_subcycle, step, unit);
        }
        push("delay" + std::to_string(step), delay_ns, PhaseKind::delay, 0, -1);
    }
    push("dense", dense_ns, PhaseKind::dense, 0, -1);
    push("end_delay", end_ns, PhaseKind::end_delay, 0, -1);
    tl.cycle_ns = t;
    return tl;
}

std::pair<double, PredictionTrace> run_prediction(const CycleTimeline& timeline,
                                                  const ProgrammedNetwork& net,
                                                  const AnalogBlockParams& p, double x_prev,
                                                  double x_curr, const ReadNoise& noise) {
    PredictionTrace trace;
    // Latched values per unit, per step, with the instant they were written.
    std::array<double, kHiddenUnits> h_held[2] = {{}, {}};
    std::array<double, kHiddenUnits> c_held[2] = {{}, {}};
    std::array<std::int64_t, kHiddenUnits> written_ns[2] = {{}, {}};

    auto droop_us = [](std::int64_t from_ns, std::int64_t to_ns) {
        return static_cast<double>(to_ns - from_ns) * 1e-3;
    };

    double prediction = 0.0;
    for (const Phase& ph : timeline.phases) {
        TraceEntry e;
        e.phase = ph.name;
        e.start_us = ph.start_us();
        e.duration_us = ph.duration_us();
        e.kind = ph.kind;
        e.power_mw = ph.power_mw;

        if (ph.kind == PhaseKind::unit_subcycle) {
            const int s = ph.step - 1; // 0-based step
            const double x_t = (ph.step == 1) ? x_prev : x_curr;
            Vec4 h_prev{};
            double c_prev = 0.0;
            if (s > 0) {
                // Held values droop from their write instant to this
                // sub-cycle's start.
                for (int k = 0; k < kHiddenUnits; ++k) {
                    h_prev[k] = memory_hold(h_held[s - 1][k],
                                            droop_us(written_ns[s - 1][k], ph.start_ns), p);
                }
                c_prev = memory_hold(c_held[s - 1][ph.unit],
                                     droop_us(written_ns[s - 1][ph.unit], ph.start_ns), p);
            }
            const UnitOutputs u =
                analog_unit_step(net.lstm, h_prev, c_prev, x_t, ph.unit, net.lstm_bias_input, p,
                                 noise, &trace.saturation_events);
            h_held[s][ph.unit] = u.h;
            c_held[s][ph.unit] = u.c;
            written_ns[s][ph.unit] = ph.start_ns + ph.duration_ns;
            e.has_values = true;
            e.held_h = u.h;
            e.held_c = u.c;
        } else if (ph.kind == PhaseKind::dense) {
            Vec4 h{};
            for (int k = 0; k < kHiddenUnits; ++k) {
                h[k] = memory_hold(h_held[kTimeSteps - 1][k],
                                   droop_us(written_ns[kTimeSteps - 1][k], ph.start_ns), p);
            }
            prediction = analog_dense(net.dense, h, net.dense_bias_input, p, noise);
            e.has_values = true;
            e.held_h = prediction;
            e.held_c = 0.0;
        }
        trace.entries.push_back(std::move(e));
    }

    TraceEntry total;
    total.phase = "cycle_total";
    total.start_us = 0.0;
    total.duration_us = timeline.cycle_us();
    total.kind = PhaseKind::summary;
    total.power_mw = 0.0;
    total.has_values = true;
    total.held_h = prediction;
    total.held_c = 0.0;
    trace.entries.push_back(std::move(total));

    return {prediction, trace};
}

TestRunResult run_test_set(const CycleTimeline& timeline, const ProgrammedNetwork& net,
                           const AnalogBlockParams& p, const SupervisedSet& test,
                           const ReadNoise& noise) {
    if (test.rows.empty()) throw SimError("EmptyInput", "test set has no rows");
    TestRunResult result;
    result.predictions.reserve(test.rows.size());
    for (const auto& row : test.rows) {
        result.predictions.push_back(
            run_prediction(timeline, net, p, row.x_prev, row.x_curr, noise).first);
    }
    const auto n = static_cast<std::int64_t>(test.rows.size());
    result.total_time_ms = static_cast<double>(timeline.cycle_ns * n) / 1e6;
    double per_cycle_mj = 0.0;
    for (const Phase& ph : timeline.phases) {
        per_cycle_mj += ph.power_mw * (static_cast<double>(ph.duration_ns) * 1e-9);
    }
    result.energy_mj = per_cycle_mj * static_cast<double>(n);
    return result;
}

ProgrammedNetwork program_network(const WeightSet& w, const MemristorParams& params) {
    return ProgrammedNetwork{program(lstm_weight_matrix(w), params),
                             program(dense_weight_matrix(w), params), w.lstm_bias_input,
                             w.dense_bias_input};
}

double estimate_energy_mj(const CycleTimeline& timeline, const PowerModel& pm, int n_cycles) {
    if (n_cycles < 1) throw SimError("InvalidArgument", "n_cycles must be >= 1");
    if (pm.peak_cell_mw < 0.0 || pm.dense_mw < 0.0 || pm.idle_mw < 0.0) {
        throw SimError("BadValue", "power levels must be >= 0");
    }
    double per_cycle_mj = 0.0;
    for (const Phase& ph : timeline.phases) {
        double power = 0.0;
        switch (ph.kind) {
        case PhaseKind::unit_subcycle: power = pm.peak_cell_mw; break;
        case PhaseKind::dense: power = pm.dense_mw; break;
        case PhaseKind::delay:
        case PhaseKind::end_delay: power = pm.idle_mw; break;
        case PhaseKind::summary: power = 0.0; break;
        }
        per_cycle_mj += power * (static_cast<double>(ph.duration_ns) * 1e-9);
    }
    return per_cycle_mj * static_cast<double>(n_cycles);
}

void dump_trace_csv(const PredictionTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << "phase,start_us,duration_us,kind,power_mw,held_h,held_c\n";
    out << std::setprecision(9);
    for (const TraceEntry& e : trace.entries) {
        out << e.phase << ',' << e.start_us << ',' << e.duration_us << ',' << to_string(e.kind)
            << ',' << e.power_mw << ',';
        if (e.has_values) {
            out << e.held_h << ',' << e.held_c;
        } else {
            out << ',';
        }
        out << '\n';
    }
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

} // namespace memlstm
