#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>

#include "memlstm/dataset.hpp"

namespace memlstm {

inline constexpr int kHiddenUnits = 4;
inline constexpr int kTimeSteps = 2;

using Vec4 = std::array<double, kHiddenUnits>;
using Mat4 = std::array<Vec4, kHiddenUnits>; // [source unit][target unit]

// All trained parameters of the two-layer network. Gate biases are weights on
// a constant bias input (lstm_bias_input for the LSTM layer, dense_bias_input
// for the dense layer), so the effective additive bias of the forget gate is
// b_f[j] * lstm_bias_input. Every trainable entry lives in [-1, 1]; the bias
// input values are fixed drive levels, not weights, and are exempt.
struct WeightSet {
    Vec4 w_f{}, w_i{}, w_c{}, w_o{}; // input weights, one row per gate
    Mat4 u_f{}, u_i{}, u_c{}, u_o{}; // recurrent weights
    Vec4 b_f{}, b_i{}, b_c{}, b_o{}; // bias weights
    double lstm_bias_input = 1.5;

    Vec4 dense_w{};
    double dense_bias_weight = 0.0;
    double dense_bias_input = 0.0239;
};

struct CellState {
    Vec4 h{};
    Vec4 c{};
};

struct GateActivations {
    Vec4 f{};       // forget gate, in (0,1)
    Vec4 i{};       // input gate, in (0,1)
    Vec4 o{};       // output gate, in (0,1)
    Vec4 c_tilde{}; // candidate state, in (-1,1)
};

struct Hyperparams {
    double learning_rate = 0.05;
    int epochs = 500;
    std::uint64_t seed = 42;
    double clip_norm = 1.0;
};

struct Metrics {
    double mse = 0.0;
    double rmse = 0.0;
};

// One LSTM step:
//   f = sigmoid(w_f x + u_f^T h_prev + b_f B),  likewise i and o
//   c_tilde = tanh(w_c x + u_c^T h_prev + b_c B)
//   c = i (*) c_tilde + f (*) c_prev
//   h = o (*) tanh(c)
// with B the constant bias input.
std::pair<GateActivations, CellState> cell_step(const WeightSet& w, double x_t,
                                                const CellState& prev);

// Two steps from the zero state, then the linear dense layer.
double forward(const WeightSet& w, double x_prev, double x_curr);

// MSE and RMSE over equal-length prediction/target vectors.
Metrics metrics(std::span<const double> predictions, std::span<const double> targets);

// Gradient-descent trainer: one backpropagation-through-time update per row,
// rows in order, global-norm gradient clipping, then elementwise weight clip
// to [-1, 1]. Deterministic for a given seed. Throws Divergence when the loss
// stops being finite, NonFinite on bad training data.
WeightSet train(const SupervisedSet& train_set, const Hyperparams& hp);

// Worst relative error between the analytic gradient of the per-row squared
// error and central finite differences (step 1e-5), over every parameter.
double gradient_check(const WeightSet& w, const SupervisedRow& row);

// Weight file schema "v1": JSON object with keys W_f..W_o, U_f..U_o, b_f..b_o,
// lstm_bias_input, dense_w, dense_bias_weight, dense_bias_input, version.
// Serialization round-trips exactly.
void export_weights(const WeightSet& w, const std::filesystem::path& path);
WeightSet import_weights(const std::filesystem::path& path);

// Visits every trainable parameter in a fixed canonical order with its
// schema-style name ("W_f[2]", "U_o[1][3]", "dense_bias_weight"). The bias
// input levels are not parameters and are not visited.
void for_each_param(WeightSet& w, const std::function<void(const std::string&, double&)>& fn);
void for_each_param(const WeightSet& w,
                    const std::function<void(const std::string&, const double&)>& fn);

} // namespace memlstm
