#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "autoint/encoding.hpp"
#include "autoint/executor.hpp"
#include "autoint/graph.hpp"
#include "autoint/nonlinearity.hpp"
#include "autoint/param_store.hpp"
#include "autoint/rng.hpp"

namespace autoint {

struct SlotSpec {
    std::string name;
    int width = 1;
    bool is_var = false;
};

// One concatenated input block: a named slot (or the ray point "point" when
// ray_point is set) with an optional positional encoding; L = 0 feeds the raw
// value.
struct InputBlockSpec {
    std::string source;
    int L = 0;
    bool normalized = true;
};

enum class InitScheme { Auto, SirenUniform, KaimingUniform };

struct MLPSpec {
    std::vector<SlotSpec> slots;
    bool ray_point = false;  // defines source "point" = o + t*d from slots o, t, d
    std::vector<InputBlockSpec> blocks;
    std::vector<int> hidden;
    Nonlinearity nl;
    int out_width = 1;
    bool final_bias = true;  // the integration constant; annihilated by derive()
    InitScheme init = InitScheme::Auto;
};

inline int block_width(const MLPSpec& spec, const InputBlockSpec& b) {
    int w = -1;
    if (b.source == "point" && spec.ray_point) {
        for (const auto& s : spec.slots)
            if (s.name == "o") w = s.width;
    } else {
        for (const auto& s : spec.slots)
            if (s.name == b.source) w = s.width;
    }
    if (w < 0) throw BuildError("input block references unknown source: " + b.source);
    return b.L > 0 ? 2 * b.L * w : w;
}

inline int input_width(const MLPSpec& spec) {
    int w = 0;
    for (const auto& b : spec.blocks) w += block_width(spec, b);
    return w;
}

inline void validate_spec(const MLPSpec& spec) {
    if (spec.hidden.empty() && spec.out_width < 1) throw BuildError("mlp spec: depth must be >= 1");
    for (int h : spec.hidden)
        if (h < 1) throw BuildError("mlp spec: widths must be >= 1");
    if (spec.out_width < 1) throw BuildError("mlp spec: output width must be >= 1");
    if (spec.blocks.empty()) throw BuildError("mlp spec: needs at least one input block");
    int vars = 0;
    for (const auto& s : spec.slots) vars += s.is_var ? 1 : 0;
    if (vars != 1) throw BuildError("mlp spec: exactly one integration-variable slot required");
    for (const auto& b : spec.blocks) block_width(spec, b);
    if (spec.ray_point) {
        bool has_o = false, has_d = false, has_t = false;
        for (const auto& s : spec.slots) {
            has_o |= (s.name == "o" && !s.is_var);
            has_d |= (s.name == "d" && !s.is_var);
            has_t |= (s.name == "t" && s.is_var);
        }
        if (!has_o || !has_d || !has_t) throw BuildError("ray_point spec needs slots o, t (var), d");
    }
}

// (in, out) width of every affine layer, input to output.
inline std::vector<std::pair<int, int>> layer_dims(const MLPSpec& spec) {
    std::vector<std::pair<int, int>> dims;
    int w = input_width(spec);
    for (int h : spec.hidden) {
        dims.emplace_back(w, h);
        w = h;
    }
    dims.emplace_back(w, spec.out_width);
    return dims;
}

// Allocates W_k (+ b_k) in a fixed order; values are zero until initialized.
inline std::vector<std::pair<ParamId, ParamId>> allocate_params(const MLPSpec& spec, ParamStore& store) {
    validate_spec(spec);
    std::vector<std::pair<ParamId, ParamId>> ids;
    auto dims = layer_dims(spec);
    for (size_t k = 0; k < dims.size(); ++k) {
        const bool last = k + 1 == dims.size();
        ParamId w = store.add_matrix(dims[k].second, dims[k].first, "W" + std::to_string(k));
        ParamId b = -1;
        if (!last || spec.final_bias) b = store.add_vector(dims[k].second, "b" + std::to_string(k));
        ids.emplace_back(w, b);
    }
    return ids;
}

// Deterministic initialization. Sine networks follow the SIREN convention
// (first layer U[-1/fan_in, 1/fan_in], deeper U[+-sqrt(6/fan_in)/omega0]);
// everything else gets Kaiming-style uniform bounds +-sqrt(6/fan_in).
inline std::shared_ptr<ParamStore> init_params(const MLPSpec& spec, uint64_t seed) {
    auto store = std::make_shared<ParamStore>();
    auto ids = allocate_params(spec, *store);
    Rng rng = Rng::substream(seed, "init");
    for (size_t k = 0; k < ids.size(); ++k) {
        Matrix& w = store->at(ids[k].first);
        const double fan_in = static_cast<double>(w.cols);
        double bound;
        if (spec.nl.kind == NonlinKind::Sine && spec.init != InitScheme::KaimingUniform) {
            bound = k == 0 ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / spec.nl.omega0;
        } else {
            bound = std::sqrt(6.0 / fan_in);
        }
        for (auto& v : w.data) v = Scalar(rng.uniform(-bound, bound));
        if (ids[k].second >= 0) {
            Matrix& b = store->at(ids[k].second);
            if (spec.nl.kind == NonlinKind::Sine && spec.init != InitScheme::KaimingUniform) {
                for (auto& v : b.data) v = Scalar(0);
            } else {
                const double bb = 1.0 / std::sqrt(fan_in);
                for (auto& v : b.data) v = Scalar(rng.uniform(-bb, bb));
            }
        }
    }
    return store;
}

// Builds the integral-network graph: encodings feeding an affine/activation
// chain with a final affine head. Parameter ids must come from
// allocate_params/init_params with the same spec.
inline ComputeGraph build_integral_network(const MLPSpec& spec, const ParamStore& params) {
    validate_spec(spec);
    ComputeGraph g;
    for (const auto& s : spec.slots) g.add_slot(s.name, s.width, s.is_var);

    // input nodes, created once per used source
    std::vector<NodeId> source_nodes(spec.slots.size() + 1, -1);
    auto source_node = [&](const std::string& name) -> NodeId {
        if (name == "point" && spec.ray_point) {
            size_t idx = spec.slots.size();
            if (source_nodes[idx] < 0) {
                NodeId o = g.input_const("o");
                NodeId t = g.input_var("t");
                NodeId d = g.input_const("d");
                source_nodes[idx] = g.affine_point(o, t, d);
            }
            return source_nodes[idx];
        }
        size_t idx = static_cast<size_t>(g.slot_index(name));
        if (source_nodes[idx] < 0)
            source_nodes[idx] = g.slots()[idx].is_var ? g.input_var(name) : g.input_const(name);
        return source_nodes[idx];
    };

    std::vector<NodeId> parts;
    for (const auto& b : spec.blocks) {
        NodeId src = source_node(b.source);
        parts.push_back(b.L > 0 ? g.encode_node(src, {b.L, b.normalized}, 0) : src);
    }
    NodeId x = parts.size() == 1 ? parts[0] : g.concat(parts);

    auto dims = layer_dims(spec);
    ParamId next = 0;
    for (size_t k = 0; k < dims.size(); ++k) {
        const bool last = k + 1 == dims.size();
        ParamId w = next++;
        ParamId b = (!last || spec.final_bias) ? next++ : -1;
        x = g.affine(x, w, b, params);
        if (!last) x = g.pointwise(x, spec.nl, 0);
    }
    g.set_outputs({x});
    return g;
}

}  // namespace autoint
