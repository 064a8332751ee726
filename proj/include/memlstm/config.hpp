#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "memlstm/analog.hpp"
#include "memlstm/crossbar.hpp"
#include "memlstm/lstm.hpp"
#include "memlstm/scheduler.hpp"

namespace memlstm {

// Everything a run needs, with defaults that reproduce the reference setup.
// Seeds resolve at load time: trainer.seed falls back to the global seed,
// variation.seed to a value derived from it, unless the file sets them.
struct RunConfig {
    std::filesystem::path dataset_path = "data/international-airline-passengers.csv";
    int test_count = 45;
    std::uint64_t seed = 42;
    std::filesystem::path out_dir = "out";
    Hyperparams trainer;
    MemristorParams memristor;
    VariationModel variation;
    AnalogBlockParams analog;
    TimelineConfig timeline;
    PowerModel power;
};

// Command-line values that take precedence over the file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
};

// Defaults with seed resolution applied (no file involved).
RunConfig default_config(const ConfigOverrides& overrides = {});

// Parses a JSON config document (schema version "v1"). Unknown keys anywhere
// are rejected. "levels" accepts an integer >= 2 or the string "continuous".
// Throws SimError with categories ConfigParse, UnsupportedVersion,
// UnknownKey, or BadValue.
RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides = {});

// File variant; MissingFile if the path does not exist.
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Validates cross-field invariants (positive durations, r_on < r_off, ...).
// Throws BadValue naming the offending field.
void validate_config(const RunConfig& cfg);

} // namespace memlstm
