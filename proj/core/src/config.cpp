#include "p2p/config.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "p2p/errors.hpp"

namespace p2p {

namespace {

using nlohmann::json;

Vector read_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw ValidationError("expected an array of numbers", path);
    Vector v;
    v.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (!e.is_number())
            throw ValidationError("expected a number", path + "[" + std::to_string(i) + "]");
        v.push_back(e.get<double>());
    }
    return v;
}

Matrix read_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty())
        throw ValidationError("expected an array of rows", path);
    const std::size_t n = j.size();
    Matrix m(n, j[0].is_array() ? j[0].size() : 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string row_path = path + "[" + std::to_string(i) + "]";
        const Vector row = read_vector(j[i], row_path);
        if (row.size() != m.cols())
            throw ValidationError("ragged matrix rows", row_path);
        for (std::size_t c = 0; c < row.size(); ++c) m(i, c) = row[c];
    }
    return m;
}

}  // namespace

LoadedConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object", "$");

    auto require = [&](const char* key) -> const json& {
        if (!j.contains(key)) throw ValidationError("missing required field", std::string("$.") + key);
        return j.at(key);
    };

    LoadedConfig cfg{
        j.value("schema_version", std::string("1")),
        MarketParams{},
        RunOptions{},
    };

    const Vector mu = read_vector(require("mu"), "$.mu");
    const Matrix sigma = read_matrix(require("sigma"), "$.sigma");
    const Vector gamma = read_vector(require("gamma"), "$.gamma");
    const json& jgr = require("gamma_r");
    if (!jgr.is_number()) throw ValidationError("expected a number", "$.gamma_r");

    if (gamma.size() != mu.size())
        throw ValidationError("gamma length differs from mu length", "$.gamma");
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size())
        throw ValidationError("sigma dimensions differ from mu length", "$.sigma");

    try {
        cfg.params = MarketParams::validated(mu, sigma, gamma, jgr.get<double>());
    } catch (const NotPositiveDefiniteError& e) {
        throw ValidationError(std::string("sigma is not positive definite: ") + e.what(),
                              "$.sigma");
    } catch (const NotSymmetricError& e) {
        throw ValidationError(std::string("sigma is not symmetric: ") + e.what(), "$.sigma");
    } catch (const Error& e) {
        throw ValidationError(e.what(), "$");
    }

    if (j.contains("jpo2_t")) {
        const json& t = j.at("jpo2_t");
        if (!t.is_number()) throw ValidationError("expected a number", "$.jpo2_t");
        if (t.get<double>() < 0.0)
            throw ValidationError("single loading must be nonnegative", "$.jpo2_t");
        cfg.options.jpo2_loading = t.get<double>();
    }

    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        if (!s.is_object()) throw ValidationError("expected an object", "$.sweep");
        SweepSpec spec;
        spec.parameter = s.value("param", std::string("gamma_r"));
        if (spec.parameter != "gamma_r")
            throw ValidationError("only gamma_r sweeps are supported", "$.sweep.param");
        if (!s.contains("from") || !s.contains("to") || !s.contains("steps"))
            throw ValidationError("sweep needs from, to and steps", "$.sweep");
        spec.from = s.at("from").get<double>();
        spec.to = s.at("to").get<double>();
        spec.steps = s.at("steps").get<std::size_t>();
        if (spec.from < 0.0) throw ValidationError("gamma_r cannot be negative", "$.sweep.from");
        if (!(spec.to >= spec.from)) throw ValidationError("need to >= from", "$.sweep.to");
        if (spec.steps < 1) throw ValidationError("need at least one step", "$.sweep.steps");
        cfg.options.sweep = spec;
    }

    return cfg;
}

LoadedConfig load_config(const std::string& path) {
    std::ostringstream buffer;
    if (path == "-") {
        buffer << std::cin.rdbuf();
    } else {
        std::ifstream in(path);
        if (!in) throw ParseError("cannot open config file: " + path);
        buffer << in.rdbuf();
    }
    return parse_config(buffer.str());
}

}  // namespace p2p
