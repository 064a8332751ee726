#include "memlstm/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <string>

#include "memlstm/errors.hpp"

namespace memlstm {

namespace {

void validate_params(const MemristorParams& p) {
    if (!(p.r_on_ohm > 0.0) || !(p.r_on_ohm < p.r_off_ohm)) {
        throw SimError("BadValue", "memristor resistances need 0 < R_on < R_off");
    }
    if (p.levels < 0 || p.levels == 1) {
        throw SimError("BadValue", "levels must be 0 (continuous) or >= 2");
    }
}

} // namespace

CrossbarArray::CrossbarArray(int rows, int cols, MemristorParams params)
    : rows_(rows), cols_(cols), params_(params) {
    if (rows <= 0 || cols <= 0) throw SimError("InvalidArgument", "crossbar needs positive dims");
    validate_params(params);
    pairs_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                  ConductancePair{params.g_off(), params.g_off()});
}

CrossbarArray program(const Matrix& weights, const MemristorParams& params) {
    validate_params(params);
    if (weights.empty() || weights.front().empty()) {
        throw SimError("InvalidArgument", "weight matrix is empty");
    }
    const std::size_t cols = weights.front().size();
    for (const auto& row : weights) {
        if (row.size() != cols) throw SimError("InvalidArgument", "weight matrix is ragged");
        for (double w : row) {
            if (!std::isfinite(w) || std::abs(w) > 1.0) {
                throw SimError("OutOfRange",
                               "weight " + std::to_string(w) + " outside [-1, 1]");
            }
        }
    }

    CrossbarArray arr(static_cast<int>(weights.size()), static_cast<int>(cols), params);
    const double g_on = params.g_on();
    const double g_off = params.g_off();
    const double span = g_on - g_off;
    for (int r = 0; r < arr.rows(); ++r) {
        for (int c = 0; c < arr.cols(); ++c) {
            double w = weights[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (!params.continuous()) w = quantize_value(w, params.levels);
            auto& pair = arr.at(r, c);
            pair.g_plus = g_off + std::max(w, 0.0) * span;
            pair.g_minus = g_off + std::max(-w, 0.0) * span;
        }
    }
    return arr;
}

Matrix read_effective_weights(const CrossbarArray& arr) {
    const double span = arr.params().g_on() - arr.params().g_off();
    Matrix w(static_cast<std::size_t>(arr.rows()),
             std::vector<double>(static_cast<std::size_t>(arr.cols()), 0.0));
    for (int r = 0; r < arr.rows(); ++r) {
        for (int c = 0; c < arr.cols(); ++c) {
            const auto& pair = arr.at(r, c);
            w[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                (pair.g_plus - pair.g_minus) / span;
        }
    }
    return w;
}

std::vector<double> vmm_currents(const CrossbarArray& arr, std::span<const double> v_in) {
    if (v_in.size() != static_cast<std::size_t>(arr.rows())) {
        throw SimError("LengthMismatch", "input has " + std::to_string(v_in.size()) +
                                             " entries for " + std::to_string(arr.rows()) +
                                             " rows");
    }
    std::vector<double> out(static_cast<std::size_t>(arr.cols()), 0.0);
    for (int c = 0; c < arr.cols(); ++c) {
        double i_sum = 0.0;
        for (int r = 0; r < arr.rows(); ++r) {
            const auto& pair = arr.at(r, c);
            i_sum += v_in[static_cast<std::size_t>(r)] * (pair.g_plus - pair.g_minus);
        }
        out[static_cast<std::size_t>(c)] = i_sum;
    }
    return out;
}

std::vector<double> vmm(const CrossbarArray& arr, std::span<const double> v_in) {
    std::vector<double> out = vmm_currents(arr, v_in);
    const double span = arr.params().g_on() - arr.params().g_off();
    for (double& v : out) v /= span;
    return out;
}

std::vector<double> vmm(const CrossbarArray& arr, std::span<const double> v_in,
                        double read_noise_rel, std::mt19937_64& rng) {
    if (read_noise_rel == 0.0) return vmm(arr, v_in);
    if (v_in.size() != static_cast<std::size_t>(arr.rows())) {
        throw SimError("LengthMismatch", "input has " + std::to_string(v_in.size()) +
                                             " entries for " + std::to_string(arr.rows()) +
                                             " rows");
    }
    const double g_on = arr.params().g_on();
    const double g_off = arr.params().g_off();
    const double span = g_on - g_off;
    std::normal_distribution<double> noise(0.0, read_noise_rel);
    std::vector<double> out(static_cast<std::size_t>(arr.cols()), 0.0);
    // Row-major perturbation order (g_plus then g_minus per cell) keeps the
    // stream deterministic for a given generator state.
    for (int r = 0; r < arr.rows(); ++r) {
        for (int c = 0; c < arr.cols(); ++c) {
            const auto& pair = arr.at(r, c);
            const double gp = std::clamp(pair.g_plus * (1.0 + noise(rng)), g_off, g_on);
            const double gm = std::clamp(pair.g_minus * (1.0 + noise(rng)), g_off, g_on);
            out[static_cast<std::size_t>(c)] += v_in[static_cast<std::size_t>(r)] * (gp - gm);
        }
    }
    for (double& v : out) v /= span;
    return out;
}

double quantize_value(double w, int levels) {
    if (levels < 2) throw SimError("InvalidArgument", "levels must be >= 2");
    if (!std::isfinite(w) || std::abs(w) > 1.0) {
        throw SimError("OutOfRange", "weight " + std::to_string(w) + " outside [-1, 1]");
    }
    const double spacing = 2.0 / static_cast<double>(levels - 1);
    const double t = (w + 1.0) / spacing;
    const int lo = std::clamp(static_cast<int>(std::floor(t)), 0, levels - 1);
    const int hi = std::clamp(lo + 1, 0, levels - 1);
    const double p_lo = -1.0 + static_cast<double>(lo) * spacing;
    const double p_hi = -1.0 + static_cast<double>(hi) * spacing;
    const double d_lo = std::abs(w - p_lo);
    const double d_hi = std::abs(w - p_hi);
    if (d_lo < d_hi) return p_lo;
    if (d_hi < d_lo) return p_hi;
    // Equidistant: prefer the point closer to zero; if symmetric around
    // zero, take the negative one for determinism.
    if (std::abs(p_lo) < std::abs(p_hi)) return p_lo;
    if (std::abs(p_hi) < std::abs(p_lo)) return p_hi;
    return std::min(p_lo, p_hi);
}

Matrix quantize(const Matrix& weights, int levels) {
    Matrix out = weights;
    for (auto& row : out)
        for (double& w : row) w = quantize_value(w, levels);
    return out;
}

CrossbarArray apply_variation(const CrossbarArray& arr, const VariationModel& model) {
    if (model.sigma_rel < 0.0) throw SimError("BadValue", "sigma_rel must be >= 0");
    CrossbarArray out = arr;
    if (model.sigma_rel == 0.0) return out;
    const double g_on = arr.params().g_on();
    const double g_off = arr.params().g_off();
    std::mt19937_64 rng(model.seed);
    // exp of a zero-mean normal: median 1 by construction.
    std::normal_distribution<double> log_factor(0.0, model.sigma_rel);
    for (int r = 0; r < out.rows(); ++r) {
        for (int c = 0; c < out.cols(); ++c) {
            auto& pair = out.at(r, c);
            pair.g_plus = std::clamp(pair.g_plus * std::exp(log_factor(rng)), g_off, g_on);
            pair.g_minus = std::clamp(pair.g_minus * std::exp(log_factor(rng)), g_off, g_on);
        }
    }
    return out;
}

void dump_crossbar_csv(const CrossbarArray& arr, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << "row,col,G_plus,G_minus\n";
    out << std::scientific << std::setprecision(8);
    for (int r = 0; r < arr.rows(); ++r) {
        for (int c = 0; c < arr.cols(); ++c) {
            const auto& pair = arr.at(r, c);
            out << r << ',' << c << ',' << pair.g_plus << ',' << pair.g_minus << '\n';
        }
    }
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

} // namespace memlstm
