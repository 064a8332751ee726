#include "memlstm/analog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "memlstm/errors.hpp"

namespace memlstm {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Column read through the differential pairs, optionally with per-read
// conductance noise. Mirrors the crossbar vmm but touches a single column so
// a sub-cycle only evaluates the dot products it physically computes.
double read_column(const CrossbarArray& arr, std::span<const double> v_in, int col,
                   const ReadNoise& noise) {
    const double g_on = arr.params().g_on();
    const double g_off = arr.params().g_off();
    const double span = g_on - g_off;
    double i_sum = 0.0;
    if (noise.rel != 0.0 && noise.rng != nullptr) {
        std::normal_distribution<double> dist(0.0, noise.rel);
        for (int r = 0; r < arr.rows(); ++r) {
            const auto& pair = arr.at(r, col);
            const double gp = std::clamp(pair.g_plus * (1.0 + dist(*noise.rng)), g_off, g_on);
            const double gm = std::clamp(pair.g_minus * (1.0 + dist(*noise.rng)), g_off, g_on);
            i_sum += v_in[static_cast<std::size_t>(r)] * (gp - gm);
        }
    } else {
        for (int r = 0; r < arr.rows(); ++r) {
            const auto& pair = arr.at(r, col);
            i_sum += v_in[static_cast<std::size_t>(r)] * (pair.g_plus - pair.g_minus);
        }
    }
    return i_sum / span;
}

// Inverting restore stage behind every block: subtracts the configured
// stage offset when compensation is on, then amplifies by -factor so the
// block's scale-down and inversion cancel.
double restore_stage(double v, double factor_magnitude, const AnalogBlockParams& p) {
    const double comp = p.compensate_stage_offsets ? p.offset_v : 0.0;
    return restore_gain(v - comp, -factor_magnitude);
}

// Activation path: scale the crossbar sum down into the circuit's input
// range, run the block, restore. In ideal mode this is exactly the plain
// function of the unscaled sum.
double sigmoid_path(double sum, const AnalogBlockParams& p) {
    const double v_in = restore_gain(sum, 1.0 / p.act_scale);
    return restore_stage(sigmoid_block(v_in, p), p.act_scale, p);
}

double tanh_path(double sum, const AnalogBlockParams& p) {
    const double v_in = restore_gain(sum, 1.0 / p.act_scale);
    return restore_stage(tanh_block(v_in, p), p.act_scale, p);
}

double multiply_path(double a, double b, const AnalogBlockParams& p, unsigned* saturation_count) {
    return restore_stage(multiplier_block(a, b, p, saturation_count), p.mult_scale, p);
}

} // namespace

double sigmoid_block(double v_in, const AnalogBlockParams& p) {
    return -(1.0 / p.act_scale) * logistic(p.act_scale * v_in) * (1.0 + p.gain_error_rel) +
           p.offset_v;
}

double tanh_block(double v_in, const AnalogBlockParams& p) {
    return -(1.0 / p.act_scale) * std::tanh(p.act_scale * v_in) * (1.0 + p.gain_error_rel) +
           p.offset_v;
}

double multiplier_block(double v_a, double v_b, const AnalogBlockParams& p,
                        unsigned* saturation_count) {
    double product = v_a * v_b;
    if (std::abs(v_a) > 1.0 || std::abs(v_b) > 1.0) {
        if (saturation_count) ++(*saturation_count);
        product = std::clamp(product, -1.0, 1.0);
    }
    return -(product / p.mult_scale) * (1.0 + p.gain_error_rel) + p.offset_v;
}

double restore_gain(double v_in, double factor) { return factor * v_in; }

double memory_hold(double v, double hold_time_us, const AnalogBlockParams& p) {
    if (hold_time_us < 0.0) throw SimError("InvalidArgument", "hold time must be >= 0");
    if (p.droop_rate == 0.0) return v;
    return v * std::pow(1.0 - p.droop_rate, hold_time_us);
}

Matrix lstm_weight_matrix(const WeightSet& w) {
    Matrix m(kLstmRows, std::vector<double>(kLstmCols, 0.0));
    const std::array<const Vec4*, 4> wv = {&w.w_f, &w.w_i, &w.w_c, &w.w_o};
    const std::array<const Mat4*, 4> uv = {&w.u_f, &w.u_i, &w.u_c, &w.u_o};
    const std::array<const Vec4*, 4> bv = {&w.b_f, &w.b_i, &w.b_c, &w.b_o};
    for (int g = 0; g < 4; ++g) {
        for (int j = 0; j < kHiddenUnits; ++j) {
            const int col = g * kHiddenUnits + j;
            m[0][static_cast<std::size_t>(col)] = (*wv[g])[j];
            for (int k = 0; k < kHiddenUnits; ++k) {
                m[static_cast<std::size_t>(1 + k)][static_cast<std::size_t>(col)] = (*uv[g])[k][j];
            }
            m[kLstmRows - 1][static_cast<std::size_t>(col)] = (*bv[g])[j];
        }
    }
    return m;
}

Matrix dense_weight_matrix(const WeightSet& w) {
    Matrix m(kDenseRows, std::vector<double>(1, 0.0));
    for (int j = 0; j < kHiddenUnits; ++j) m[static_cast<std::size_t>(j)][0] = w.dense_w[j];
    m[kDenseRows - 1][0] = w.dense_bias_weight;
    return m;
}

double lstm_bias_drive(double bias_input, const AnalogBlockParams& p) {
    return imperfections_enabled(p) ? bias_input + p.lstm_bias_offset_v : bias_input;
}

double dense_bias_drive(double bias_input, const AnalogBlockParams& p) {
    return imperfections_enabled(p) ? bias_input + p.dense_bias_offset_v : bias_input;
}

UnitOutputs analog_unit_step(const CrossbarArray& lstm_arr, const Vec4& h_prev, double c_prev_j,
                             double x_t, int unit, double bias_input, const AnalogBlockParams& p,
                             const ReadNoise& noise, unsigned* saturation_count) {
    if (lstm_arr.rows() != kLstmRows || lstm_arr.cols() != kLstmCols) {
        throw SimError("InvalidArgument", "LSTM crossbar must be 6x16");
    }
    if (unit < 0 || unit >= kHiddenUnits) {
        throw SimError("InvalidArgument", "unit index out of range");
    }

    std::array<double, kLstmRows> drive{};
    drive[0] = x_t;
    for (int k = 0; k < kHiddenUnits; ++k) drive[static_cast<std::size_t>(1 + k)] = h_prev[k];
    drive[kLstmRows - 1] = lstm_bias_drive(bias_input, p);

    // Gate order f, i, c, o fixes the read-noise stream.
    std::array<double, 4> sums{};
    for (int g = 0; g < 4; ++g) {
        sums[static_cast<std::size_t>(g)] =
            read_column(lstm_arr, drive, g * kHiddenUnits + unit, noise);
    }

    UnitOutputs out;
    out.f = sigmoid_path(sums[0], p);
    out.i = sigmoid_path(sums[1], p);
    out.c_tilde = tanh_path(sums[2], p);
    out.o = sigmoid_path(sums[3], p);
    // C = i * c_tilde + f * C_prev through two multipliers and a summing node.
    const double ic = multiply_path(out.i, out.c_tilde, p, saturation_count);
    const double fc = multiply_path(out.f, c_prev_j, p, saturation_count);
    out.c = ic + fc;
    // h = o * tanh(C): the cell state re-enters a tanh circuit, then the
    // output multiplier.
    const double tc = tanh_path(out.c, p);
    out.h = multiply_path(out.o, tc, p, saturation_count);
    return out;
}

CellState analog_cell_step(const CrossbarArray& lstm_arr, const CellState& prev, double x_t,
                           double bias_input, const AnalogBlockParams& p, const ReadNoise& noise,
                           unsigned* saturation_count) {
    CellState next;
    for (int j = 0; j < kHiddenUnits; ++j) {
        const UnitOutputs u = analog_unit_step(lstm_arr, prev.h, prev.c[j], x_t, j, bias_input, p,
                                               noise, saturation_count);
        next.h[j] = u.h;
        next.c[j] = u.c;
    }
    return next;
}

double analog_dense(const CrossbarArray& dense_arr, const Vec4& h, double bias_input,
                    const AnalogBlockParams& p, const ReadNoise& noise) {
    if (dense_arr.rows() != kDenseRows || dense_arr.cols() != 1) {
        throw SimError("InvalidArgument", "dense crossbar must be 5x1");
    }
    std::array<double, kDenseRows> drive{};
    for (int k = 0; k < kHiddenUnits; ++k) drive[static_cast<std::size_t>(k)] = h[k];
    drive[kDenseRows - 1] = dense_bias_drive(bias_input, p);
    // Linear layer: the weighted sum is the output, no activation circuit.
    return read_column(dense_arr, drive, 0, noise);
}

void dump_curve_csv(CurveKind kind, const AnalogBlockParams& p, const std::filesystem::path& path,
                    double v_min, double v_max, double step, double mult_vb) {
    if (!(step > 0.0) || !(v_max > v_min)) {
        throw SimError("InvalidArgument", "curve sweep needs v_max > v_min and step > 0");
    }
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << "v_in,v_out\n";
    out << std::setprecision(9);
    const auto n_steps = static_cast<long>(std::llround((v_max - v_min) / step));
    for (long i = 0; i <= n_steps; ++i) {
        const double v = v_min + static_cast<double>(i) * step;
        double y = 0.0;
        switch (kind) {
        case CurveKind::sigmoid: y = sigmoid_block(v, p); break;
        case CurveKind::tanh: y = tanh_block(v, p); break;
        case CurveKind::multiplier: y = multiplier_block(v, mult_vb, p); break;
        }
        out << v << ',' << y << '\n';
    }
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

} // namespace memlstm
