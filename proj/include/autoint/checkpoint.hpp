#pragma once

#include <fstream>
#include <memory>
#include <string>

#include <json.hpp>

#include "autoint/gradnet.hpp"
#include "autoint/nets.hpp"

namespace autoint {

using json = nlohmann::json;

inline json spec_to_json(const MLPSpec& spec) {
    json slots = json::array();
    for (const auto& s : spec.slots) slots.push_back({{"name", s.name}, {"width", s.width}, {"var", s.is_var}});
    json blocks = json::array();
    for (const auto& b : spec.blocks)
        blocks.push_back({{"source", b.source}, {"L", b.L}, {"normalized", b.normalized}});
    return json{{"slots", slots},
                {"ray_point", spec.ray_point},
                {"blocks", blocks},
                {"hidden", spec.hidden},
                {"nonlinearity", nonlin_name(spec.nl.kind)},
                {"omega0", spec.nl.omega0},
                {"beta", spec.nl.beta},
                {"out_width", spec.out_width},
                {"final_bias", spec.final_bias}};
}

inline MLPSpec spec_from_json(const json& j) {
    MLPSpec spec;
    for (const auto& s : j.at("slots"))
        spec.slots.push_back({s.at("name").get<std::string>(), s.at("width").get<int>(), s.at("var").get<bool>()});
    spec.ray_point = j.at("ray_point").get<bool>();
    for (const auto& b : j.at("blocks"))
        spec.blocks.push_back(
            {b.at("source").get<std::string>(), b.at("L").get<int>(), b.at("normalized").get<bool>()});
    spec.hidden = j.at("hidden").get<std::vector<int>>();
    spec.nl.kind = nonlin_from_name(j.at("nonlinearity").get<std::string>());
    spec.nl.omega0 = j.at("omega0").get<double>();
    spec.nl.beta = j.at("beta").get<double>();
    spec.out_width = j.at("out_width").get<int>();
    spec.final_bias = j.at("final_bias").get<bool>();
    return spec;
}

// Lossless network checkpoint: {spec, seed, layers:[{W:[[f64]], b:[f64]}]}.
// nlohmann serializes doubles with shortest round-trip formatting, so values
// survive save/load bit-exactly.
inline json checkpoint_to_json(const MLPSpec& spec, uint64_t seed, const ParamStore& params) {
    json layers = json::array();
    auto dims = layer_dims(spec);
    ParamId next = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
        const bool last = k + 1 == dims.size();
        const Matrix& w = params.at(next++);
        json wj = json::array();
        for (int r = 0; r < w.rows; ++r) {
            json row = json::array();
            for (int c = 0; c < w.cols; ++c) row.push_back(w.at(r, c));
            wj.push_back(std::move(row));
        }
        json bj = json::array();
        if (!last || spec.final_bias) {
            const Matrix& b = params.at(next++);
            for (int r = 0; r < b.rows; ++r) bj.push_back(b.at(r, 0));
        }
        layers.push_back({{"W", std::move(wj)}, {"b", std::move(bj)}});
    }
    return json{{"spec", spec_to_json(spec)}, {"seed", seed}, {"layers", std::move(layers)}};
}

struct LoadedNetwork {
    MLPSpec spec;
    uint64_t seed = 0;
    std::shared_ptr<ParamStore> params;
};

inline LoadedNetwork checkpoint_from_json(const json& j) {
    LoadedNetwork net;
    net.spec = spec_from_json(j.at("spec"));
    net.seed = j.at("seed").get<uint64_t>();
    net.params = std::make_shared<ParamStore>();
    auto ids = allocate_params(net.spec, *net.params);
    const json& layers = j.at("layers");
    if (layers.size() != ids.size()) throw BuildError("checkpoint: layer count mismatch");
    for (size_t k = 0; k < ids.size(); ++k) {
        Matrix& w = net.params->at(ids[k].first);
        const json& wj = layers[k].at("W");
        if (static_cast<int>(wj.size()) != w.rows) throw BuildError("checkpoint: weight shape mismatch");
        for (int r = 0; r < w.rows; ++r) {
            const json& row = wj[static_cast<size_t>(r)];
            if (static_cast<int>(row.size()) != w.cols) throw BuildError("checkpoint: weight shape mismatch");
            for (int c = 0; c < w.cols; ++c) w.at(r, c) = row[static_cast<size_t>(c)].get<double>();
        }
        const json& bj = layers[k].at("b");
        if (ids[k].second >= 0) {
            Matrix& b = net.params->at(ids[k].second);
            if (static_cast<int>(bj.size()) != b.rows) throw BuildError("checkpoint: bias shape mismatch");
            for (int r = 0; r < b.rows; ++r) b.at(r, 0) = bj[static_cast<size_t>(r)].get<double>();
        } else if (!bj.empty()) {
            throw BuildError("checkpoint: unexpected bias entries");
        }
    }
    return net;
}

inline void save_checkpoint(const std::string& path, const MLPSpec& spec, uint64_t seed, const ParamStore& params) {
    std::ofstream f(path);
    if (!f) throw BuildError("cannot write checkpoint: " + path);
    f << checkpoint_to_json(spec, seed, params).dump(1) << "\n";
}

inline LoadedNetwork load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw BuildError("cannot read checkpoint: " + path);
    json j;
    f >> j;
    return checkpoint_from_json(j);
}

// Rebuilds the full pair from a loaded network.
inline AutoIntPair pair_from_network(const LoadedNetwork& net) {
    AutoIntPair pair;
    pair.params = net.params;
    pair.integral = build_integral_network(net.spec, *pair.params);
    for (const auto& s : net.spec.slots)
        if (s.is_var) pair.var = s.name;
    pair.grad = derive(pair.integral, pair.var, *pair.params);
    return pair;
}

}  // namespace autoint
