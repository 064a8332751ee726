#include "memlstm/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "memlstm/errors.hpp"
#include "memlstm/rng.hpp"

namespace memlstm {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& known) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw SimError("UnknownKey", "unexpected key '" + it.key() + "' in " + where);
        }
    }
}

double get_number(const json& j, const char* key, double fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number()) throw SimError("BadValue", std::string(key) + " must be a number");
    return it->get<double>();
}

int get_int(const json& j, const char* key, int fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_number_integer()) {
        throw SimError("BadValue", std::string(key) + " must be an integer");
    }
    return it->get<int>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) throw SimError("BadValue", std::string(key) + " must be a boolean");
    return it->get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) throw SimError("BadValue", std::string(key) + " must be a string");
    return it->get<std::string>();
}

std::optional<std::uint64_t> get_seed(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_number_unsigned() && !it->is_number_integer()) {
        throw SimError("BadValue", std::string(key) + " must be a non-negative integer");
    }
    if (it->is_number_integer() && it->get<std::int64_t>() < 0) {
        throw SimError("BadValue", std::string(key) + " must be a non-negative integer");
    }
    return it->get<std::uint64_t>();
}

// levels: integer >= 2, or the string "continuous" (stored as 0).
int parse_levels(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "continuous") return 0;
        throw SimError("BadValue", "levels must be an integer >= 2 or \"continuous\"");
    }
    if (!j.is_number_integer()) {
        throw SimError("BadValue", "levels must be an integer >= 2 or \"continuous\"");
    }
    const int levels = j.get<int>();
    if (levels < 2) throw SimError("BadValue", "levels must be >= 2");
    return levels;
}

RunConfig from_json(const json& j, const ConfigOverrides& overrides) {
    if (!j.is_object()) throw SimError("ConfigParse", "config root must be a JSON object");
    reject_unknown(j, "config root",
                   {"version", "dataset", "test_count", "seed", "out_dir", "trainer", "memristor",
                    "variation", "analog", "timeline", "power"});
    const std::string version = get_string(j, "version", "");
    if (version != "v1") {
        throw SimError("UnsupportedVersion", "config version must be \"v1\", got \"" + version +
                                                 "\"");
    }

    RunConfig cfg;
    cfg.dataset_path = get_string(j, "dataset", cfg.dataset_path.string());
    cfg.test_count = get_int(j, "test_count", cfg.test_count);
    cfg.out_dir = get_string(j, "out_dir", cfg.out_dir.string());
    std::optional<std::uint64_t> global_seed = get_seed(j, "seed");
    std::optional<std::uint64_t> trainer_seed;
    std::optional<std::uint64_t> variation_seed;

    if (auto it = j.find("trainer"); it != j.end()) {
        reject_unknown(*it, "trainer", {"learning_rate", "epochs", "seed", "clip_norm"});
        cfg.trainer.learning_rate = get_number(*it, "learning_rate", cfg.trainer.learning_rate);
        cfg.trainer.epochs = get_int(*it, "epochs", cfg.trainer.epochs);
        cfg.trainer.clip_norm = get_number(*it, "clip_norm", cfg.trainer.clip_norm);
        trainer_seed = get_seed(*it, "seed");
    }
    if (auto it = j.find("memristor"); it != j.end()) {
        reject_unknown(*it, "memristor", {"r_on_ohm", "r_off_ohm", "levels"});
        cfg.memristor.r_on_ohm = get_number(*it, "r_on_ohm", cfg.memristor.r_on_ohm);
        cfg.memristor.r_off_ohm = get_number(*it, "r_off_ohm", cfg.memristor.r_off_ohm);
        if (auto lv = it->find("levels"); lv != it->end()) cfg.memristor.levels = parse_levels(*lv);
    }
    if (auto it = j.find("variation"); it != j.end()) {
        reject_unknown(*it, "variation", {"sigma_rel", "read_noise_rel", "seed"});
        cfg.variation.sigma_rel = get_number(*it, "sigma_rel", cfg.variation.sigma_rel);
        cfg.variation.read_noise_rel =
            get_number(*it, "read_noise_rel", cfg.variation.read_noise_rel);
        variation_seed = get_seed(*it, "seed");
    }
    if (auto it = j.find("analog"); it != j.end()) {
        reject_unknown(*it, "analog",
                       {"act_scale", "mult_scale", "gain_error_rel", "offset_v",
                        "lstm_bias_offset_v", "dense_bias_offset_v", "droop_rate",
                        "compensate_stage_offsets"});
        auto& a = cfg.analog;
        a.act_scale = get_number(*it, "act_scale", a.act_scale);
        a.mult_scale = get_number(*it, "mult_scale", a.mult_scale);
        a.gain_error_rel = get_number(*it, "gain_error_rel", a.gain_error_rel);
        a.offset_v = get_number(*it, "offset_v", a.offset_v);
        a.lstm_bias_offset_v = get_number(*it, "lstm_bias_offset_v", a.lstm_bias_offset_v);
        a.dense_bias_offset_v = get_number(*it, "dense_bias_offset_v", a.dense_bias_offset_v);
        a.droop_rate = get_number(*it, "droop_rate", a.droop_rate);
        a.compensate_stage_offsets =
            get_bool(*it, "compensate_stage_offsets", a.compensate_stage_offsets);
    }
    if (auto it = j.find("timeline"); it != j.end()) {
        reject_unknown(*it, "timeline",
                       {"subcycle_us", "interstep_delay_us", "dense_us", "end_delay_us"});
        auto& t = cfg.timeline;
        t.subcycle_us = get_number(*it, "subcycle_us", t.subcycle_us);
        t.interstep_delay_us = get_number(*it, "interstep_delay_us", t.interstep_delay_us);
        t.dense_us = get_number(*it, "dense_us", t.dense_us);
        t.end_delay_us = get_number(*it, "end_delay_us", t.end_delay_us);
    }
    if (auto it = j.find("power"); it != j.end()) {
        reject_unknown(*it, "power", {"peak_cell_mw", "dense_mw", "idle_mw"});
        auto& pm = cfg.power;
        pm.peak_cell_mw = get_number(*it, "peak_cell_mw", pm.peak_cell_mw);
        pm.dense_mw = get_number(*it, "dense_mw", pm.dense_mw);
        pm.idle_mw = get_number(*it, "idle_mw", pm.idle_mw);
    }

    // Precedence: command-line flag, then file value, then default. The
    // component seeds derive from the final global seed unless the file sets
    // them explicitly.
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
    } else if (global_seed) {
        cfg.seed = *global_seed;
    }
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
    cfg.trainer.seed = trainer_seed ? *trainer_seed : cfg.seed;
    cfg.variation.seed = variation_seed ? *variation_seed : mix_seed(cfg.seed, 1);

    validate_config(cfg);
    return cfg;
}

} // namespace

RunConfig default_config(const ConfigOverrides& overrides) {
    return from_json(json{{"version", "v1"}}, overrides);
}

RunConfig parse_config(const std::string& json_text, const ConfigOverrides& overrides) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw SimError("ConfigParse", e.what());
    }
    return from_json(j, overrides);
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw SimError("MissingFile", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

void validate_config(const RunConfig& cfg) {
    auto bad = [](const std::string& detail) { return SimError("BadValue", detail); };
    if (cfg.test_count <= 0) throw bad("test_count must be positive");
    if (!(cfg.trainer.learning_rate > 0.0)) throw bad("trainer.learning_rate must be positive");
    if (cfg.trainer.epochs <= 0) throw bad("trainer.epochs must be positive");
    if (!(cfg.trainer.clip_norm > 0.0)) throw bad("trainer.clip_norm must be positive");
    if (!(cfg.memristor.r_on_ohm > 0.0) || !(cfg.memristor.r_on_ohm < cfg.memristor.r_off_ohm)) {
        throw bad("memristor resistances need 0 < r_on_ohm < r_off_ohm");
    }
    if (cfg.memristor.levels < 0 || cfg.memristor.levels == 1) {
        throw bad("memristor.levels must be 0 (continuous) or >= 2");
    }
    if (cfg.variation.sigma_rel < 0.0) throw bad("variation.sigma_rel must be >= 0");
    if (cfg.variation.read_noise_rel < 0.0) throw bad("variation.read_noise_rel must be >= 0");
    if (!(cfg.analog.act_scale > 0.0)) throw bad("analog.act_scale must be positive");
    if (!(cfg.analog.mult_scale > 0.0)) throw bad("analog.mult_scale must be positive");
    if (!(cfg.analog.gain_error_rel > -1.0)) throw bad("analog.gain_error_rel must exceed -1");
    if (cfg.analog.droop_rate < 0.0 || cfg.analog.droop_rate >= 1.0) {
        throw bad("analog.droop_rate must lie in [0, 1)");
    }
    if (!(cfg.timeline.subcycle_us > 0.0) || !(cfg.timeline.interstep_delay_us > 0.0) ||
        !(cfg.timeline.dense_us > 0.0) || !(cfg.timeline.end_delay_us > 0.0)) {
        throw bad("timeline durations must be positive");
    }
    if (cfg.power.peak_cell_mw < 0.0 || cfg.power.dense_mw < 0.0 || cfg.power.idle_mw < 0.0) {
        throw bad("power levels must be >= 0");
    }
}

} // namespace memlstm
