#pragma once

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "autoint/common.hpp"
#include "autoint/encoding.hpp"
#include "autoint/nonlinearity.hpp"
#include "autoint/param_store.hpp"

namespace autoint {

using NodeId = int;

enum class NodeOp {
    InputVar,    // the variable of integration (scalar slot)
    InputConst,  // any other network input (vector slot)
    ConstVec,    // fixed constant vector leaf
    Affine,      // y = W x (+ b)
    Pointwise,   // activation of given derivative order applied componentwise
    Hadamard,    // elementwise product, block-broadcast for narrower inputs
    Sum,         // elementwise sum
    ScaleConst,  // componentwise multiply by a fixed vector or scalar
    Encode,      // positional encoding of given derivative order
    Concat,
    AffinePoint  // x = o + t * d
};

struct Node {
    NodeOp op;
    std::vector<NodeId> inputs;
    int width = 0;
    int creation_index = 0;

    int slot = -1;           // InputVar / InputConst
    ParamId weight = -1;     // Affine
    ParamId bias = -1;       // Affine, -1 when absent
    Nonlinearity nl;         // Pointwise
    int order = 0;           // Pointwise (0..2), Encode (0..1)
    EncodingConfig enc;      // Encode
    Vec constant;            // ConstVec value / ScaleConst factor (size 1 = scalar factor)
};

struct Slot {
    std::string name;
    int width = 1;
    bool is_var = false;
};

// Append-only DAG of layer-level operations. Acyclicity holds by construction:
// a node may only reference ids created before it.
class ComputeGraph {
public:
    // --- signature -----------------------------------------------------
    int add_slot(const std::string& name, int width, bool is_var) {
        for (const auto& s : slots_)
            if (s.name == name) throw BuildError("duplicate input slot: " + name);
        if (is_var && width != 1) throw BuildError("integration variable must be scalar");
        slots_.push_back({name, width, is_var});
        return static_cast<int>(slots_.size() - 1);
    }

    const std::vector<Slot>& slots() const { return slots_; }

    int slot_index(const std::string& name) const {
        for (size_t i = 0; i < slots_.size(); ++i)
            if (slots_[i].name == name) return static_cast<int>(i);
        throw BuildError("unknown input slot: " + name);
    }

    // --- node constructors ----------------------------------------------
    NodeId input_var(const std::string& name) {
        int s = slot_index(name);
        if (!slots_[s].is_var) throw BuildError("slot is not the integration variable: " + name);
        Node n{NodeOp::InputVar, {}, 1};
        n.slot = s;
        return push(std::move(n));
    }

    NodeId input_const(const std::string& name) {
        int s = slot_index(name);
        if (slots_[s].is_var) throw BuildError("slot is the integration variable: " + name);
        Node n{NodeOp::InputConst, {}, slots_[s].width};
        n.slot = s;
        return push(std::move(n));
    }

    NodeId const_vec(Vec value) {
        Node n{NodeOp::ConstVec, {}, static_cast<int>(value.size())};
        n.constant = std::move(value);
        return push(std::move(n));
    }

    NodeId affine(NodeId in, ParamId weight, ParamId bias, const ParamStore& params) {
        const Matrix& w = params.at(weight);
        if (w.cols != width(in)) throw BuildError("affine: weight cols != input width");
        if (bias >= 0) {
            const Matrix& b = params.at(bias);
            if (b.rows != w.rows || b.cols != 1) throw BuildError("affine: bias shape mismatch");
        }
        Node n{NodeOp::Affine, {in}, w.rows};
        n.weight = weight;
        n.bias = bias;
        return push(std::move(n));
    }

    NodeId pointwise(NodeId in, const Nonlinearity& nl, int order) {
        if (order < 0 || order > 2) throw BuildError("pointwise: derivative order must be 0..2");
        Node n{NodeOp::Pointwise, {in}, width(in)};
        n.nl = nl;
        n.order = order;
        return push(std::move(n));
    }

    NodeId hadamard(std::vector<NodeId> ins) {
        if (ins.size() < 2) throw BuildError("hadamard: needs >= 2 inputs");
        int w = 0;
        for (NodeId i : ins) w = std::max(w, width(i));
        for (NodeId i : ins)
            if (w % width(i) != 0) throw BuildError("hadamard: width not block-compatible");
        Node n{NodeOp::Hadamard, std::move(ins), w};
        return push(std::move(n));
    }

    NodeId sum(std::vector<NodeId> ins) {
        if (ins.size() < 2) throw BuildError("sum: needs >= 2 inputs");
        for (NodeId i : ins)
            if (width(i) != width(ins[0])) throw BuildError("sum: width mismatch");
        const int w = width(ins[0]);
        Node n{NodeOp::Sum, std::move(ins), w};
        return push(std::move(n));
    }

    NodeId scale_const(NodeId in, Vec factor) {
        if (factor.size() != 1 && static_cast<int>(factor.size()) != width(in))
            throw BuildError("scale_const: factor size mismatch");
        Node n{NodeOp::ScaleConst, {in}, width(in)};
        n.constant = std::move(factor);
        return push(std::move(n));
    }

    NodeId encode_node(NodeId in, const EncodingConfig& cfg, int order) {
        if (cfg.L < 1) throw BuildError("encode: L must be >= 1");
        if (order < 0 || order > 1) throw BuildError("encode: node order must be 0 or 1");
        Node n{NodeOp::Encode, {in}, 2 * cfg.L * width(in)};
        n.enc = cfg;
        n.order = order;
        return push(std::move(n));
    }

    NodeId concat(std::vector<NodeId> ins) {
        if (ins.empty()) throw BuildError("concat: needs >= 1 input");
        int w = 0;
        for (NodeId i : ins) w += width(i);
        Node n{NodeOp::Concat, std::move(ins), w};
        return push(std::move(n));
    }

    NodeId affine_point(NodeId origin, NodeId t, NodeId dir) {
        if (width(t) != 1) throw BuildError("affine_point: ray parameter must be scalar");
        if (width(origin) != width(dir)) throw BuildError("affine_point: origin/direction width mismatch");
        Node n{NodeOp::AffinePoint, {origin, t, dir}, width(origin)};
        return push(std::move(n));
    }

    // --- access -----------------------------------------------------------
    const Node& node(NodeId id) const { return nodes_[check(id)]; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    int width(NodeId id) const { return nodes_[check(id)].width; }

    void set_outputs(std::vector<NodeId> outs) {
        for (NodeId o : outs) check(o);
        outputs_ = std::move(outs);
    }
    const std::vector<NodeId>& outputs() const { return outputs_; }

    NodeId find_input_var() const {
        for (int i = 0; i < node_count(); ++i)
            if (nodes_[i].op == NodeOp::InputVar) return i;
        return -1;
    }

    // Number of consumers per node; edges point toward dependencies, so this
    // is the in-degree under the dependency-arrow convention (outputs have 0).
    std::vector<int> consumer_counts() const {
        std::vector<int> deg(nodes_.size(), 0);
        for (const Node& n : nodes_)
            for (NodeId in : n.inputs) ++deg[static_cast<size_t>(in)];
        return deg;
    }

    std::vector<bool> reachable_from_outputs() const {
        std::vector<bool> seen(nodes_.size(), false);
        std::vector<NodeId> stack(outputs_.begin(), outputs_.end());
        while (!stack.empty()) {
            NodeId id = stack.back();
            stack.pop_back();
            if (seen[static_cast<size_t>(id)]) continue;
            seen[static_cast<size_t>(id)] = true;
            for (NodeId in : nodes_[static_cast<size_t>(id)].inputs) stack.push_back(in);
        }
        return seen;
    }

    // Drops nodes unreachable from the outputs, compacting ids while keeping
    // relative creation order (creation_index is reassigned densely).
    void prune_dead() {
        std::vector<bool> keep = reachable_from_outputs();
        std::vector<NodeId> remap(nodes_.size(), -1);
        std::vector<Node> compact;
        compact.reserve(nodes_.size());
        for (size_t i = 0; i < nodes_.size(); ++i) {
            if (!keep[i]) continue;
            remap[i] = static_cast<NodeId>(compact.size());
            compact.push_back(std::move(nodes_[i]));
            compact.back().creation_index = static_cast<int>(compact.size() - 1);
            for (NodeId& in : compact.back().inputs) in = remap[static_cast<size_t>(in)];
        }
        nodes_ = std::move(compact);
        for (NodeId& o : outputs_) o = remap[static_cast<size_t>(o)];
    }

    // Leaves-first order: every node after all nodes it depends on. Nodes of
    // equal depth are emitted in descending creation order.
    std::vector<NodeId> topo_order() const {
        std::vector<int> depth(nodes_.size(), 0);
        for (size_t i = 0; i < nodes_.size(); ++i)
            for (NodeId in : nodes_[i].inputs)
                depth[i] = std::max(depth[i], depth[static_cast<size_t>(in)] + 1);
        std::vector<NodeId> order(nodes_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
            if (depth[static_cast<size_t>(a)] != depth[static_cast<size_t>(b)])
                return depth[static_cast<size_t>(a)] < depth[static_cast<size_t>(b)];
            return nodes_[static_cast<size_t>(a)].creation_index > nodes_[static_cast<size_t>(b)].creation_index;
        });
        return order;
    }

    // Topological order where, among simultaneously ready nodes, the one
    // created last is scheduled first. In particular any two nodes of equal
    // in-degree that topology leaves unordered appear latest-created first,
    // which lets leg computations complete before their consumers branch.
    std::vector<NodeId> lex_topo_order() const {
        std::vector<int> remaining(nodes_.size(), 0);
        for (size_t i = 0; i < nodes_.size(); ++i) remaining[i] = static_cast<int>(nodes_[i].inputs.size());
        std::vector<std::vector<NodeId>> consumers(nodes_.size());
        for (size_t i = 0; i < nodes_.size(); ++i)
            for (NodeId in : nodes_[i].inputs) consumers[static_cast<size_t>(in)].push_back(static_cast<NodeId>(i));

        // ready set kept as a max-heap on creation_index
        std::vector<NodeId> ready;
        auto cmp = [&](NodeId a, NodeId b) {
            return nodes_[static_cast<size_t>(a)].creation_index < nodes_[static_cast<size_t>(b)].creation_index;
        };
        for (size_t i = 0; i < nodes_.size(); ++i)
            if (remaining[i] == 0) ready.push_back(static_cast<NodeId>(i));
        std::make_heap(ready.begin(), ready.end(), cmp);

        std::vector<NodeId> order;
        order.reserve(nodes_.size());
        while (!ready.empty()) {
            std::pop_heap(ready.begin(), ready.end(), cmp);
            NodeId id = ready.back();
            ready.pop_back();
            order.push_back(id);
            for (NodeId c : consumers[static_cast<size_t>(id)]) {
                if (--remaining[static_cast<size_t>(c)] == 0) {
                    ready.push_back(c);
                    std::push_heap(ready.begin(), ready.end(), cmp);
                }
            }
        }
        if (order.size() != nodes_.size()) throw GraphError("cycle detected in compute graph");
        return order;
    }

    std::string node_label(NodeId id) const {
        const Node& n = node(id);
        std::ostringstream os;
        switch (n.op) {
            case NodeOp::InputVar: os << "InputVar " << slots_[static_cast<size_t>(n.slot)].name; break;
            case NodeOp::InputConst: os << "InputConst " << slots_[static_cast<size_t>(n.slot)].name; break;
            case NodeOp::ConstVec: os << "ConstVec"; break;
            case NodeOp::Affine: os << "Affine W" << n.weight << (n.bias >= 0 ? "+b" : ""); break;
            case NodeOp::Pointwise: os << nonlin_name(n.nl.kind) << (n.order == 1 ? "'" : (n.order == 2 ? "''" : "")); break;
            case NodeOp::Hadamard: os << "Hadamard"; break;
            case NodeOp::Sum: os << "Sum"; break;
            case NodeOp::ScaleConst: os << "ScaleConst"; break;
            case NodeOp::Encode:
                os << (n.enc.normalized ? "EncodeNorm" : "Encode") << " L" << n.enc.L << (n.order == 1 ? "'" : "");
                break;
            case NodeOp::Concat: os << "Concat"; break;
            case NodeOp::AffinePoint: os << "AffinePoint"; break;
        }
        os << " [" << n.width << "]";
        return os.str();
    }

    // DOT listing; arrows point from a node to each of its dependencies.
    std::string to_dot(const std::string& graph_name) const {
        std::ostringstream os;
        os << "digraph " << graph_name << " {\n";
        for (int i = 0; i < node_count(); ++i)
            os << "  n" << i << " [label=\"" << i << ": " << node_label(i) << "\"];\n";
        for (int i = 0; i < node_count(); ++i)
            for (NodeId in : nodes_[static_cast<size_t>(i)].inputs) os << "  n" << i << " -> n" << in << ";\n";
        for (NodeId o : outputs_) os << "  out" << o << " [shape=plaintext,label=\"output\"];\n";
        for (NodeId o : outputs_) os << "  out" << o << " -> n" << o << ";\n";
        os << "}\n";
        return os.str();
    }

private:
    size_t check(NodeId id) const {
        if (id < 0 || id >= node_count()) throw GraphError("node id out of range");
        return static_cast<size_t>(id);
    }

    NodeId push(Node n) {
        for (NodeId in : n.inputs)
            if (in < 0 || in >= node_count()) throw GraphError("node references an id not yet created");
        n.creation_index = node_count();
        nodes_.push_back(std::move(n));
        return node_count() - 1;
    }

    std::vector<Node> nodes_;
    std::vector<NodeId> outputs_;
    std::vector<Slot> slots_;
};

}  // namespace autoint
