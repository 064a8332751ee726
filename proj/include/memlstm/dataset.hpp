#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace memlstm {

// Univariate observation series as read from disk. Labels (month strings) are
// carried for reporting only and never enter any computation.
struct RawSeries {
    std::vector<double> values;
    std::vector<std::string> labels; // empty when the file has no label column
};

// Min/max scaler fitted on a full series. max > min always holds after fit.
struct Normalizer {
    double min = 0.0;
    double max = 1.0;
};

// One supervised sample: two consecutive inputs and the value to predict.
struct SupervisedRow {
    double x_prev = 0.0;
    double x_curr = 0.0;
    double target = 0.0;
};

struct SupervisedSet {
    std::vector<SupervisedRow> rows;
};

// Reads a CSV with one observation per line. An optional header and an
// optional leading label column are auto-detected; the last field of each
// line is the observation. Throws SimError with categories MissingFile,
// EmptySeries, ParseFailure(line N) or NonPositiveValue(line N).
RawSeries load_series(const std::filesystem::path& path);

// Fits min/max on the full series. Throws ConstantSeries when max == min,
// EmptySeries when there is nothing to fit.
Normalizer fit_normalizer(const RawSeries& series);

double normalize_value(const Normalizer& n, double v);
double denormalize(const Normalizer& n, double v);

// Maps every value through (v - min) / (max - min). Values outside the fitted
// range are permitted and may fall outside [0, 1]; use
// count_outside_unit_range to flag them.
std::vector<double> normalize(const Normalizer& n, const RawSeries& series);

std::size_t count_outside_unit_range(const std::vector<double>& values);

// Slides a width-3 window: row k = (s[k], s[k+1], s[k+2]). Needs length >= 3,
// else throws TooShort.
SupervisedSet window(const std::vector<double>& normalized);

// Last `test_count` rows become the test partition, the untouched remainder
// (in order) the train partition. No shuffling.
std::pair<SupervisedSet, SupervisedSet> split(const SupervisedSet& set, int test_count = 45);

// Series dump format: header "index,value", 6-decimal fixed point.
void write_series_csv(const std::filesystem::path& path, const std::vector<double>& values);
std::vector<double> read_series_csv(const std::filesystem::path& path);

} // namespace memlstm
