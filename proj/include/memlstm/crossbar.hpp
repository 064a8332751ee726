#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace memlstm {

using Matrix = std::vector<std::vector<double>>; // row-major, [row][col]

// Device endpoints and programming resolution. levels == 0 means continuous
// (analog) programming; levels >= 2 snaps weights to that many uniform points
// over [-1, 1] before mapping.
struct MemristorParams {
    double r_on_ohm = 10e3;
    double r_off_ohm = 10e6;
    int levels = 0;

    bool continuous() const { return levels == 0; }
    double g_on() const { return 1.0 / r_on_ohm; }
    double g_off() const { return 1.0 / r_off_ohm; }
};

// Stochastic non-ideality knobs. sigma_rel is the lognormal spread of the
// programmed conductance (median 1); read_noise_rel is a per-evaluation
// Gaussian spread applied multiplicatively to each conductance.
struct VariationModel {
    double sigma_rel = 0.0;
    double read_noise_rel = 0.0;
    std::uint64_t seed = 1;
};

struct ConductancePair {
    double g_plus = 0.0;  // siemens
    double g_minus = 0.0; // siemens
};

// Grid of differential conductance pairs realizing one weight matrix.
// Immutable after construction.
class CrossbarArray {
public:
    CrossbarArray(int rows, int cols, MemristorParams params);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const MemristorParams& params() const { return params_; }

    const ConductancePair& at(int row, int col) const { return pairs_[index(row, col)]; }
    ConductancePair& at(int row, int col) { return pairs_[index(row, col)]; }

private:
    std::size_t index(int row, int col) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(col);
    }

    int rows_;
    int cols_;
    MemristorParams params_;
    std::vector<ConductancePair> pairs_;
};

// One-sided differential mapping: the device carrying the sign is programmed
// to G_off + |w| (G_on - G_off), the other rests at G_off, so
// (G_plus - G_minus) / (G_on - G_off) = w exactly. Weights are quantized
// first when params.levels >= 2. Throws OutOfRange for |w| > 1.
CrossbarArray program(const Matrix& weights, const MemristorParams& params);

// Exact inverse of the mapping: w = (G_plus - G_minus) / (G_on - G_off).
Matrix read_effective_weights(const CrossbarArray& arr);

// Differential column currents in amperes: I_j = sum_k v_k (G+[k,j] - G-[k,j]).
std::vector<double> vmm_currents(const CrossbarArray& arr, std::span<const double> v_in);

// Column currents normalized by the ideal transimpedance (G_on - G_off):
// in ideal conditions out = W^T v, unitless.
std::vector<double> vmm(const CrossbarArray& arr, std::span<const double> v_in);

// Same, with per-read multiplicative Gaussian perturbation of each
// conductance (clamped back to [G_off, G_on]). The caller owns the generator
// so parallel trials keep independent streams.
std::vector<double> vmm(const CrossbarArray& arr, std::span<const double> v_in,
                        double read_noise_rel, std::mt19937_64& rng);

// Snaps each weight to the nearest of `levels` uniform points over [-1, 1];
// equidistant ties resolve to the point closer to zero.
double quantize_value(double w, int levels);
Matrix quantize(const Matrix& weights, int levels);

// Multiplies every conductance by an independent lognormal factor (median 1,
// spread model.sigma_rel), then clamps to [G_off, G_on]. Deterministic for a
// given model.seed.
CrossbarArray apply_variation(const CrossbarArray& arr, const VariationModel& model);

// Dump format: header "row,col,G_plus,G_minus", siemens, scientific notation,
// 9 significant digits.
void dump_crossbar_csv(const CrossbarArray& arr, const std::filesystem::path& path);

} // namespace memlstm
