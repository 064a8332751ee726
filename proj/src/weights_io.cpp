#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "memlstm/errors.hpp"
#include "memlstm/lstm.hpp"

namespace memlstm {

namespace {

using nlohmann::json;

json vec_to_json(const Vec4& v) { return json(std::vector<double>(v.begin(), v.end())); }

json mat_to_json(const Mat4& m) {
    json rows = json::array();
    for (const auto& r : m) rows.push_back(vec_to_json(r));
    return rows;
}

Vec4 vec_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != kHiddenUnits) {
        throw SimError("SchemaViolation", key + " must be an array of 4 numbers");
    }
    Vec4 v{};
    for (int i = 0; i < kHiddenUnits; ++i) {
        if (!j[i].is_number()) throw SimError("SchemaViolation", key + " entries must be numbers");
        v[i] = j[i].get<double>();
    }
    return v;
}

Mat4 mat_from_json(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != kHiddenUnits) {
        throw SimError("SchemaViolation", key + " must be a 4x4 array");
    }
    Mat4 m{};
    for (int k = 0; k < kHiddenUnits; ++k) {
        m[k] = vec_from_json(j[k], key + "[" + std::to_string(k) + "]");
    }
    return m;
}

double scalar_from_json(const json& j, const std::string& key) {
    if (!j.is_number()) throw SimError("SchemaViolation", key + " must be a number");
    return j.get<double>();
}

const json& require(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) throw SimError("MissingField", key);
    return *it;
}

} // namespace

void export_weights(const WeightSet& w, const std::filesystem::path& path) {
    json j;
    j["version"] = "v1";
    j["W_f"] = vec_to_json(w.w_f);
    j["W_i"] = vec_to_json(w.w_i);
    j["W_c"] = vec_to_json(w.w_c);
    j["W_o"] = vec_to_json(w.w_o);
    j["U_f"] = mat_to_json(w.u_f);
    j["U_i"] = mat_to_json(w.u_i);
    j["U_c"] = mat_to_json(w.u_c);
    j["U_o"] = mat_to_json(w.u_o);
    j["b_f"] = vec_to_json(w.b_f);
    j["b_i"] = vec_to_json(w.b_i);
    j["b_c"] = vec_to_json(w.b_c);
    j["b_o"] = vec_to_json(w.b_o);
    j["lstm_bias_input"] = w.lstm_bias_input;
    j["dense_w"] = vec_to_json(w.dense_w);
    j["dense_bias_weight"] = w.dense_bias_weight;
    j["dense_bias_input"] = w.dense_bias_input;

    std::ofstream out(path);
    if (!out) throw SimError("IoFailure", "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw SimError("IoFailure", "write failed for " + path.string());
}

WeightSet import_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SimError("MissingFile", "cannot open weights file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SimError("ParseFailure", std::string("weights file: ") + e.what());
    }
    if (!j.is_object()) throw SimError("SchemaViolation", "weights file must be a JSON object");

    static const std::set<std::string> known = {
        "version", "W_f", "W_i", "W_c", "W_o", "U_f", "U_i", "U_c", "U_o",
        "b_f",     "b_i", "b_c", "b_o", "lstm_bias_input", "dense_w",
        "dense_bias_weight", "dense_bias_input"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) throw SimError("UnknownKey", "weights file: " + it.key());
    }
    const std::string version = require(j, "version").is_string()
                                    ? require(j, "version").get<std::string>()
                                    : std::string();
    if (version != "v1") throw SimError("UnsupportedVersion", "weights schema must be v1");

    WeightSet w;
    w.w_f = vec_from_json(require(j, "W_f"), "W_f");
    w.w_i = vec_from_json(require(j, "W_i"), "W_i");
    w.w_c = vec_from_json(require(j, "W_c"), "W_c");
    w.w_o = vec_from_json(require(j, "W_o"), "W_o");
    w.u_f = mat_from_json(require(j, "U_f"), "U_f");
    w.u_i = mat_from_json(require(j, "U_i"), "U_i");
    w.u_c = mat_from_json(require(j, "U_c"), "U_c");
    w.u_o = mat_from_json(require(j, "U_o"), "U_o");
    w.b_f = vec_from_json(require(j, "b_f"), "b_f");
    w.b_i = vec_from_json(require(j, "b_i"), "b_i");
    w.b_c = vec_from_json(require(j, "b_c"), "b_c");
    w.b_o = vec_from_json(require(j, "b_o"), "b_o");
    w.lstm_bias_input = scalar_from_json(require(j, "lstm_bias_input"), "lstm_bias_input");
    w.dense_w = vec_from_json(require(j, "dense_w"), "dense_w");
    w.dense_bias_weight = scalar_from_json(require(j, "dense_bias_weight"), "dense_bias_weight");
    w.dense_bias_input = scalar_from_json(require(j, "dense_bias_input"), "dense_bias_input");

    for_each_param(w, [](const std::string& name, const double& v) {
        if (!std::isfinite(v)) throw SimError("SchemaViolation", name + " is not finite");
        if (v < -1.0 || v > 1.0) {
            throw SimError("OutOfRange", name + " = " + std::to_string(v) +
                                             " outside [-1, 1]");
        }
    });
    if (!std::isfinite(w.lstm_bias_input) || !std::isfinite(w.dense_bias_input)) {
        throw SimError("SchemaViolation", "bias input levels must be finite");
    }
    return w;
}

} // namespace memlstm
