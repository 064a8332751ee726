#include "memlstm/lstm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "memlstm/errors.hpp"

namespace memlstm {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Pre-activation sums for one gate: w x + u^T h_prev + b B.
Vec4 gate_preact(const Vec4& w, const Mat4& u, const Vec4& b, double bias_input, double x_t,
                 const Vec4& h_prev) {
    Vec4 z{};
    for (int j = 0; j < kHiddenUnits; ++j) {
        double s = w[j] * x_t + b[j] * bias_input;
        for (int k = 0; k < kHiddenUnits; ++k) s += u[k][j] * h_prev[k];
        z[j] = s;
    }
    return z;
}

// Everything the backward pass needs from one forward step.
struct StepRecord {
    double x = 0.0;
    CellState prev;
    GateActivations g;
    CellState next;
};

StepRecord record_step(const WeightSet& w, double x_t, const CellState& prev) {
    StepRecord r;
    r.x = x_t;
    r.prev = prev;
    auto [g, next] = cell_step(w, x_t, prev);
    r.g = g;
    r.next = next;
    return r;
}

template <typename WS, typename Fn>
void visit_params(WS& w, const Fn& fn) {
    static constexpr const char* gate[4] = {"f", "i", "c", "o"};
    auto wv = std::array{&w.w_f, &w.w_i, &w.w_c, &w.w_o};
    auto uv = std::array{&w.u_f, &w.u_i, &w.u_c, &w.u_o};
    auto bv = std::array{&w.b_f, &w.b_i, &w.b_c, &w.b_o};
    for (int g_i = 0; g_i < 4; ++g_i)
        for (int j = 0; j < kHiddenUnits; ++j)
            fn(std::string("W_") + gate[g_i] + "[" + std::to_string(j) + "]", (*wv[g_i])[j]);
    for (int g_i = 0; g_i < 4; ++g_i)
        for (int k = 0; k < kHiddenUnits; ++k)
            for (int j = 0; j < kHiddenUnits; ++j)
                fn(std::string("U_") + gate[g_i] + "[" + std::to_string(k) + "][" +
                       std::to_string(j) + "]",
                   (*uv[g_i])[k][j]);
    for (int g_i = 0; g_i < 4; ++g_i)
        for (int j = 0; j < kHiddenUnits; ++j)
            fn(std::string("b_") + gate[g_i] + "[" + std::to_string(j) + "]", (*bv[g_i])[j]);
    for (int j = 0; j < kHiddenUnits; ++j)
        fn("dense_w[" + std::to_string(j) + "]", w.dense_w[j]);
    fn("dense_bias_weight", w.dense_bias_weight);
}

// Flat view of the 101 trainable parameters, in the canonical visit order.
std::vector<double*> param_ptrs(WeightSet& w) {
    std::vector<double*> ptrs;
    ptrs.reserve(101);
    visit_params(w, [&](const std::string&, double& v) { ptrs.push_back(&v); });
    return ptrs;
}

// Gradient of the squared error (pred - target)^2 for one row, accumulated
// into a WeightSet used as a plain parameter container. Full unrolled
// backpropagation over both time steps.
WeightSet row_gradient(const WeightSet& w, const SupervisedRow& row, double* loss_out) {
    const StepRecord s1 = record_step(w, row.x_prev, CellState{});
    const StepRecord s2 = record_step(w, row.x_curr, s1.next);

    const double pred_bias = w.dense_bias_weight * w.dense_bias_input;
    double pred = pred_bias;
    for (int j = 0; j < kHiddenUnits; ++j) pred += w.dense_w[j] * s2.next.h[j];
    const double err = pred - row.target;
    if (loss_out) *loss_out = err * err;
    const double dpred = 2.0 * err;

    WeightSet grad{};
    grad.lstm_bias_input = 0.0;
    grad.dense_bias_input = 0.0;
    for (int j = 0; j < kHiddenUnits; ++j) grad.dense_w[j] = dpred * s2.next.h[j];
    grad.dense_bias_weight = dpred * w.dense_bias_input;

    Vec4 dh{};
    Vec4 dc{};
    for (int j = 0; j < kHiddenUnits; ++j) dh[j] = dpred * w.dense_w[j];

    const StepRecord* steps[2] = {&s2, &s1};
    auto gw = std::array{&grad.w_f, &grad.w_i, &grad.w_c, &grad.w_o};
    auto gu = std::array{&grad.u_f, &grad.u_i, &grad.u_c, &grad.u_o};
    auto gb = std::array{&grad.b_f, &grad.b_i, &grad.b_c, &grad.b_o};
    auto wu = std::array{&w.u_f, &w.u_i, &w.u_c, &w.u_o};

    for (const StepRecord* sp : steps) {
        const StepRecord& s = *sp;
        Vec4 dz[4]; // f, i, c, o pre-activation gradients
        for (int j = 0; j < kHiddenUnits; ++j) {
            const double tc = std::tanh(s.next.c[j]);
            const double dcj = dc[j] + dh[j] * s.g.o[j] * (1.0 - tc * tc);
            const double do_j = dh[j] * tc;
            const double df = dcj * s.prev.c[j];
            const double di = dcj * s.g.c_tilde[j];
            const double dct = dcj * s.g.i[j];
            dz[0][j] = df * s.g.f[j] * (1.0 - s.g.f[j]);
            dz[1][j] = di * s.g.i[j] * (1.0 - s.g.i[j]);
            dz[2][j] = dct * (1.0 - s.g.c_tilde[j] * s.g.c_tilde[j]);
            dz[3][j] = do_j * s.g.o[j] * (1.0 - s.g.o[j]);
            dc[j] = dcj * s.g.f[j]; // flows to the previous step's cell state
        }
        Vec4 dh_prev{};
        for (int g_i = 0; g_i < 4; ++g_i) {
            for (int j = 0; j < kHiddenUnits; ++j) {
                (*gw[g_i])[j] += dz[g_i][j] * s.x;
                (*gb[g_i])[j] += dz[g_i][j] * w.lstm_bias_input;
                for (int k = 0; k < kHiddenUnits; ++k) {
                    (*gu[g_i])[k][j] += dz[g_i][j] * s.prev.h[k];
                    dh_prev[k] += dz[g_i][j] * (*wu[g_i])[k][j];
                }
            }
        }
        dh = dh_prev;
    }
    return grad;
}

} // namespace

std::pair<GateActivations, CellState> cell_step(const WeightSet& w, double x_t,
                                                const CellState& prev) {
    GateActivations g;
    CellState next;
    const Vec4 zf = gate_preact(w.w_f, w.u_f, w.b_f, w.lstm_bias_input, x_t, prev.h);
    const Vec4 zi = gate_preact(w.w_i, w.u_i, w.b_i, w.lstm_bias_input, x_t, prev.h);
    const Vec4 zc = gate_preact(w.w_c, w.u_c, w.b_c, w.lstm_bias_input, x_t, prev.h);
    const Vec4 zo = gate_preact(w.w_o, w.u_o, w.b_o, w.lstm_bias_input, x_t, prev.h);
    for (int j = 0; j < kHiddenUnits; ++j) {
        g.f[j] = sigmoid(zf[j]);
        g.i[j] = sigmoid(zi[j]);
        g.o[j] = sigmoid(zo[j]);
        g.c_tilde[j] = std::tanh(zc[j]);
        next.c[j] = g.i[j] * g.c_tilde[j] + g.f[j] * prev.c[j];
        next.h[j] = g.o[j] * std::tanh(next.c[j]);
    }
    return {g, next};
}

double forward(const WeightSet& w, double x_prev, double x_curr) {
    CellState state;
    state = cell_step(w, x_prev, state).second;
    state = cell_step(w, x_curr, state).second;
    double pred = w.dense_bias_weight * w.dense_bias_input;
    for (int j = 0; j < kHiddenUnits; ++j) pred += w.dense_w[j] * state.h[j];
    return pred;
}

Metrics metrics(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw SimError("LengthMismatch", std::to_string(predictions.size()) +
                                             " predictions vs " + std::to_string(targets.size()) +
                                             " targets");
    }
    if (predictions.empty()) throw SimError("EmptyInput", "metrics need at least one sample");
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double d = predictions[i] - targets[i];
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(predictions.size());
    return Metrics{mse, std::sqrt(mse)};
}

WeightSet train(const SupervisedSet& train_set, const Hyperparams& hp) {
    if (train_set.rows.empty()) throw SimError("EmptyInput", "training set has no rows");
    if (!(hp.learning_rate > 0.0) || hp.epochs <= 0 || !(hp.clip_norm > 0.0)) {
        throw SimError("InvalidArgument", "hyperparameters must be positive");
    }
    for (const auto& r : train_set.rows) {
        if (!std::isfinite(r.x_prev) || !std::isfinite(r.x_curr) || !std::isfinite(r.target)) {
            throw SimError("NonFinite", "training data contains a non-finite value");
        }
    }

    WeightSet w;
    std::mt19937_64 rng(hp.seed);
    std::uniform_real_distribution<double> init(-0.5, 0.5);
    const std::vector<double*> wp = param_ptrs(w);
    for (double* v : wp) *v = init(rng);

    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        for (const auto& row : train_set.rows) {
            double loss = 0.0;
            WeightSet grad = row_gradient(w, row, &loss);
            if (!std::isfinite(loss)) {
                throw SimError("Divergence", "loss became non-finite at epoch " +
                                                 std::to_string(epoch));
            }
            const std::vector<double*> gp = param_ptrs(grad);
            double norm_sq = 0.0;
            for (double* g : gp) norm_sq += *g * *g;
            const double norm = std::sqrt(norm_sq);
            const double scale = (norm > hp.clip_norm) ? hp.clip_norm / norm : 1.0;
            for (std::size_t i = 0; i < wp.size(); ++i) {
                *wp[i] -= hp.learning_rate * scale * *gp[i];
                *wp[i] = std::clamp(*wp[i], -1.0, 1.0);
            }
        }
    }
    return w;
}

double gradient_check(const WeightSet& w, const SupervisedRow& row) {
    WeightSet analytic = row_gradient(w, row, nullptr);
    std::vector<double> ga;
    ga.reserve(101);
    for_each_param(analytic, [&](const std::string&, double& g) { ga.push_back(g); });

    const double step = 1e-5;
    double worst = 0.0;
    std::size_t idx = 0;
    WeightSet probe = w;
    for_each_param(probe, [&](const std::string&, double& v) {
        const double saved = v;
        v = saved + step;
        const double up = forward(probe, row.x_prev, row.x_curr) - row.target;
        v = saved - step;
        const double dn = forward(probe, row.x_prev, row.x_curr) - row.target;
        v = saved;
        const double numeric = (up * up - dn * dn) / (2.0 * step);
        const double a = ga[idx++];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, rel);
    });
    return worst;
}

void for_each_param(WeightSet& w, const std::function<void(const std::string&, double&)>& fn) {
    visit_params(w, fn);
}

void for_each_param(const WeightSet& w,
                    const std::function<void(const std::string&, const double&)>& fn) {
    visit_params(w, fn);
}

} // namespace memlstm
