#include "memlstm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "memlstm/errors.hpp"

namespace memlstm {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

// Strict full-string double parse; returns false on anything trailing.
bool parse_double(const std::string& field, double& out) {
    const std::string t = trim(field);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

} // namespace

RawSeries load_series(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("MissingFile", "cannot open dataset file " + path.string());

    RawSeries series;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;

        const auto fields = split_fields(text);
        double value = 0.0;
        if (!parse_double(fields.back(), value)) {
            // The first line may be a header; anything later must parse.
            if (line_no == 1 && series.values.empty()) continue;
            throw SimError("ParseFailure",
                           "non-numeric observation on line " + std::to_string(line_no));
        }
        if (!(value > 0.0)) {
            throw SimError("NonPositiveValue", "observation " + std::to_string(value) +
                                                   " on line " + std::to_string(line_no) +
                                                   " is not positive");
        }
        series.values.push_back(value);
        if (fields.size() >= 2) {
            series.labels.push_back(trim(fields.front()));
        }
    }
    if (series.values.empty()) throw SimError("EmptySeries", "no observations in " + path.string());
    if (!series.labels.empty() && series.labels.size() != series.values.size()) {
        // Mixed labeled/unlabeled lines; drop labels rather than misalign them.
        series.labels.clear();
    }
    return series;
}

Normalizer fit_normalizer(const RawSeries& series) {
    if (series.values.empty()) throw SimError("EmptySeries", "cannot fit normalizer on empty series");
    auto [min_it, max_it] = std::minmax_element(series.values.begin(), series.values.end());
    if (*max_it == *min_it) {
        throw SimError("ConstantSeries",
                       "all observations equal " + std::to_string(*min_it) + "; range is empty");
    }
    return Normalizer{*min_it, *max_it};
}

double normalize_value(const Normalizer& n, double v) { return (v - n.min) / (n.max - n.min); }

double denormalize(const Normalizer& n, double v) { return v * (n.max - n.min) + n.min; }

std::vector<double> normalize(const Normalizer& n, const RawSeries& series) {
    std::vector<double> out;
    out.reserve(series.values.size());
    for (double v : series.values) out.push_back(normalize_value(n, v));
    return out;
}

std::size_t count_outside_unit_range(const std::vector<double>& values) {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](double v) { return v < 0.0 || v > 1.0; }));
}

SupervisedSet window(const std::vector<double>& normalized) {
    if (normalized.size() < 3) {
        throw SimError("TooShort", "need at least 3 points to window, got " +
                                       std::to_string(normalized.size()));
    }
    SupervisedSet set;
    set.rows.reserve(normalized.size() - 2);
    for (std::size_t k = 0; k + 2 < normalized.size(); ++k) {
        set.rows.push_back({normalized[k], normalized[k + 1], normalized[k + 2]});
    }
    return set;
}

std::pair<SupervisedSet, SupervisedSet> split(const SupervisedSet& set, int test_count) {
    if (test_count <= 0) {
        throw SimError("InvalidArgument", "test_count must be positive, got " +
                                              std::to_string(test_count));
    }
    if (static_cast<std::size_t>(test_count) >= set.rows.size()) {
        throw SimError("InvalidArgument",
                       "test_count " + std::to_string(test_count) + " leaves no training rows (" +
                           std::to_string(set.rows.size()) + " total)");
    }
    const std::size_t train_count = set.rows.size() - static_cast<std::size_t>(test_count);
    SupervisedSet train, test;
    train.rows.assign(set.rows.begin(), set.rows.begin() + static_cast<std::ptrdiff_t>(train_count));
    test.rows.assign(set.rows.begin() + static_cast<std::ptrdiff_t>(train_count), set.rows.end());
    return {std::move(train), std::move(test)};
}

void write_series_csv(const std::filesystem::path& path, const std::vector<double>& values) {
    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << "index,value\n";
    out << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("MissingFile", "cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        if (line_no == 1) continue; // header
        const auto fields = split_fields(text);
        double v = 0.0;
        if (fields.size() != 2 || !parse_double(fields[1], v)) {
            throw SimError("ParseFailure", "bad series row on line " + std::to_string(line_no));
        }
        values.push_back(v);
    }
    return values;
}

} // namespace memlstm
