#pragma once

#include <random>

#include "memlstm/crossbar.hpp"
#include "memlstm/lstm.hpp"

namespace memlstm {

// Behavioral parameters of the analog blocks. act_scale/mult_scale are the
// magnitude of the circuits' scale-down factors (the inversion is explicit in
// the block formulas). gain_error_rel and offset_v model per-stage
// imperfection; both zero is ideal mode. lstm_bias_offset_v and
// dense_bias_offset_v raise the bias input drive when imperfections are
// enabled. droop_rate is the per-microsecond fractional decay of a held
// sample. When compensate_stage_offsets is set, the restoring gain stages
// subtract the configured offset_v before amplifying (calibrated readout).
struct AnalogBlockParams {
    double act_scale = 10.0;
    double mult_scale = 4.0;
    double gain_error_rel = 0.0;
    double offset_v = 0.0;
    double lstm_bias_offset_v = 0.3;
    double dense_bias_offset_v = 0.25;
    double droop_rate = 0.0; // fraction per microsecond
    bool compensate_stage_offsets = true;
};

inline bool imperfections_enabled(const AnalogBlockParams& p) {
    return p.gain_error_rel != 0.0 || p.offset_v != 0.0;
}

// Sigmoid circuit: consumes the scaled-down input, emits the inverted
// scaled-down sigmoid. v_out = -(1/s) sigmoid(s v_in) (1 + gain) + offset.
double sigmoid_block(double v_in, const AnalogBlockParams& p);

// Hyperbolic tangent circuit, same convention as sigmoid_block.
double tanh_block(double v_in, const AnalogBlockParams& p);

// Four-quadrant multiplier: v_out = -(v_a v_b)/m (1 + gain) + offset.
// Inputs outside +-1 V are a saturation event: the product term is clamped so
// the output magnitude stays at 1/m, and *saturation_count is bumped.
double multiplier_block(double v_a, double v_b, const AnalogBlockParams& p,
                        unsigned* saturation_count = nullptr);

// Plain gain stage, factor negative for inversion.
double restore_gain(double v_in, double factor);

// Sample-hold memory: v (1 - droop_rate)^hold_time_us.
double memory_hold(double v, double hold_time_us, const AnalogBlockParams& p);

// Optional per-read noise for crossbar evaluations inside the pipeline.
struct ReadNoise {
    double rel = 0.0;
    std::mt19937_64* rng = nullptr;
};

// LSTM layer crossbar image, 6x16: rows are [x, h1..h4, bias], columns are
// gate-major [f, i, c, o] with 4 units each.
Matrix lstm_weight_matrix(const WeightSet& w);

// Dense layer crossbar image, 5x1: rows are [h1..h4, bias].
Matrix dense_weight_matrix(const WeightSet& w);

// Number of LSTM crossbar rows/cols with the fixed 4-unit, 2-step topology.
inline constexpr int kLstmRows = kHiddenUnits + 2; // input + recurrent + bias
inline constexpr int kLstmCols = 4 * kHiddenUnits; // 4 gates x 4 units
inline constexpr int kDenseRows = kHiddenUnits + 1;

struct UnitOutputs {
    double f = 0, i = 0, c_tilde = 0, o = 0;
    double c = 0, h = 0;
};

// One hidden unit's datapath for one time step, entirely through crossbar
// reads and analog blocks: vmm for the four gate pre-sums, scale-down into
// the activation circuits, restore stages, multipliers for i*c_tilde,
// f*c_prev and o*tanh(c). h_prev carries the (possibly drooped) held values
// the sub-cycle actually sees. bias_input is the software drive level; the
// configured offset is added when imperfections are enabled.
UnitOutputs analog_unit_step(const CrossbarArray& lstm_arr, const Vec4& h_prev,
                             double c_prev_j, double x_t, int unit, double bias_input,
                             const AnalogBlockParams& p, const ReadNoise& noise = {},
                             unsigned* saturation_count = nullptr);

// Full cell step through the analog pipeline (all four units, shared h_prev).
// In ideal mode this equals cell_step to numerical precision.
CellState analog_cell_step(const CrossbarArray& lstm_arr, const CellState& prev, double x_t,
                           double bias_input, const AnalogBlockParams& p,
                           const ReadNoise& noise = {}, unsigned* saturation_count = nullptr);

// Dense layer readout: weighted sum of h plus the bias path. Linear, no
// activation block.
double analog_dense(const CrossbarArray& dense_arr, const Vec4& h, double bias_input,
                    const AnalogBlockParams& p, const ReadNoise& noise = {});

// Bias drive levels actually applied to the crossbar bias rows: the software
// values, raised by the configured offsets when imperfections are enabled.
double lstm_bias_drive(double bias_input, const AnalogBlockParams& p);
double dense_bias_drive(double bias_input, const AnalogBlockParams& p);

// Transfer-curve dump: CSV "v_in,v_out" swept from v_min to v_max.
enum class CurveKind { sigmoid, tanh, multiplier };
void dump_curve_csv(CurveKind kind, const AnalogBlockParams& p,
                    const std::filesystem::path& path, double v_min = -1.0, double v_max = 1.0,
                    double step = 1e-3, double mult_vb = 1.0);

} // namespace memlstm
