#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "memlstm/analog.hpp"
#include "memlstm/crossbar.hpp"
#include "memlstm/dataset.hpp"
#include "memlstm/lstm.hpp"

namespace memlstm {

enum class PhaseKind { unit_subcycle, delay, dense, end_delay, summary };

std::string to_string(PhaseKind kind);

// One contiguous slice of the prediction cycle. Time is integer nanoseconds
// so the boundary assertions are exact.
struct Phase {
    std::string name;
    std::int64_t start_ns = 0;
    std::int64_t duration_ns = 0;
    PhaseKind kind = PhaseKind::delay;
    int step = 0;  // 1 or 2 for unit sub-cycles
    int unit = -1; // 0-based unit index for unit sub-cycles
    double power_mw = 0.0;

    double start_us() const { return static_cast<double>(start_ns) * 1e-3; }
    double duration_us() const { return static_cast<double>(duration_ns) * 1e-3; }
};

// Durations of the schedule's building blocks. The 2 us settling delay inside
// each sub-cycle is part of the sub-cycle duration, not a separate phase.
struct TimelineConfig {
    double subcycle_us = 10.0;
    double interstep_delay_us = 2.0;
    double dense_us = 3.0;
    double end_delay_us = 1.0;
};

// Per-phase power attribution: sub-cycles draw the peak cell power (the only
// figure the hardware reports), the dense phase and the delays their own
// configurable levels.
struct PowerModel {
    double peak_cell_mw = 210.67;
    double dense_mw = 0.0;
    double idle_mw = 0.0;
};

struct CycleTimeline {
    std::vector<Phase> phases;
    std::int64_t cycle_ns = 0;

    double cycle_us() const { return static_cast<double>(cycle_ns) * 1e-3; }
};

// Default schedule: 4 sub-cycles for step 1, inter-step delay, 4 sub-cycles
// for step 2, delay, dense phase, end delay. Throws InvalidArgument on
// non-positive durations.
CycleTimeline build_cycle_timeline(const TimelineConfig& config = {}, const PowerModel& pm = {});

// One trace entry per phase plus a final cycle summary entry. Sub-cycle
// entries record the unit's computed h and c at write time; the dense entry
// records the prediction.
struct TraceEntry {
    std::string phase;
    double start_us = 0.0;
    double duration_us = 0.0;
    PhaseKind kind = PhaseKind::delay;
    double power_mw = 0.0;
    bool has_values = false;
    double held_h = 0.0;
    double held_c = 0.0;
};

struct PredictionTrace {
    std::vector<TraceEntry> entries;
    unsigned saturation_events = 0;
};

struct ProgrammedNetwork {
    CrossbarArray lstm;
    CrossbarArray dense;
    double lstm_bias_input = 1.5;
    double dense_bias_input = 0.0239;
};

ProgrammedNetwork program_network(const WeightSet& w, const MemristorParams& params);

// Drives the analog pipeline through the timeline: each unit sub-cycle
// computes one unit's (h, c) and latches them; held values droop from their
// sub-cycle's end to the start of the phase that reads them; the dense phase
// computes the weighted sum of the held h plus the bias path.
std::pair<double, PredictionTrace> run_prediction(const CycleTimeline& timeline,
                                                  const ProgrammedNetwork& net,
                                                  const AnalogBlockParams& p, double x_prev,
                                                  double x_curr, const ReadNoise& noise = {});

struct TestRunResult {
    std::vector<double> predictions;
    double total_time_ms = 0.0;
    double energy_mj = 0.0;
};

// Runs every test row through run_prediction. Total time is
// rows * cycle_time; energy is the per-cycle phase-tagged energy times the
// row count.
TestRunResult run_test_set(const CycleTimeline& timeline, const ProgrammedNetwork& net,
                           const AnalogBlockParams& p, const SupervisedSet& test,
                           const ReadNoise& noise = {});

// Energy in millijoules for n_cycles cycles, attributing pm's power levels by
// phase kind. Exactly linear in n_cycles.
double estimate_energy_mj(const CycleTimeline& timeline, const PowerModel& pm, int n_cycles);

// Trace dump: CSV "phase,start_us,duration_us,kind,power_mw,held_h,held_c",
// held values at 9 significant digits.
void dump_trace_csv(const PredictionTrace& trace, const std::filesystem::path& path);

} // namespace memlstm
