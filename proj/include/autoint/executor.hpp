#pragma once

#include <string>
#include <vector>

#include "autoint/graph.hpp"
#include "autoint/param_store.hpp"

namespace autoint {

// Input assignment aligned with a graph's slot signature.
class Inputs {
public:
    explicit Inputs(const ComputeGraph& g) : values_(g.slots().size()) {
        for (size_t i = 0; i < g.slots().size(); ++i) values_[i].assign(static_cast<size_t>(g.slots()[i].width), Scalar(0));
    }

    Inputs& set(const ComputeGraph& g, const std::string& name, Vec v) {
        int s = g.slot_index(name);
        if (static_cast<int>(v.size()) != g.slots()[static_cast<size_t>(s)].width)
            throw GraphError("input arity mismatch for slot " + name);
        values_[static_cast<size_t>(s)] = std::move(v);
        return *this;
    }

    Inputs& set_var(const ComputeGraph& g, Scalar t) {
        for (size_t i = 0; i < g.slots().size(); ++i)
            if (g.slots()[i].is_var) {
                values_[i][0] = t;
                return *this;
            }
        throw GraphError("graph has no integration variable slot");
    }

    const Vec& slot_value(int slot) const { return values_[static_cast<size_t>(slot)]; }
    Vec& slot_value(int slot) { return values_[static_cast<size_t>(slot)]; }
    size_t slot_count() const { return values_.size(); }

private:
    std::vector<Vec> values_;
};

struct EvalReport {
    std::vector<Vec> outputs;
    long long unique_node_evals = 0;
    long long total_node_refs = 0;
};

// Gradients of a scalar objective with respect to the graph's input slots.
struct InputGradients {
    std::vector<Vec> by_slot;
};

// Evaluation engine bound to one graph + parameter store. Buffers are
// allocated once and reused, so a persistent Executor is cheap to call in
// training loops. forward() doubles as record_tape: after it returns, value()
// exposes every unique node's output for backward().
class Executor {
public:
    Executor(const ComputeGraph& graph, const ParamStore& params)
        : graph_(&graph), params_(&params), schedule_(graph.lex_topo_order()) {
        values_.resize(static_cast<size_t>(graph.node_count()));
        adjoints_.resize(static_cast<size_t>(graph.node_count()));
        for (int i = 0; i < graph.node_count(); ++i) {
            values_[static_cast<size_t>(i)].assign(static_cast<size_t>(graph.width(i)), Scalar(0));
            adjoints_[static_cast<size_t>(i)].assign(static_cast<size_t>(graph.width(i)), Scalar(0));
        }
        long long edges = 0;
        for (int i = 0; i < graph.node_count(); ++i) edges += static_cast<long long>(graph.node(i).inputs.size());
        refs_per_pass_ = edges + static_cast<long long>(graph.outputs().size());
    }

    const ComputeGraph& graph() const { return *graph_; }

    // Cached forward pass over the lexicographic-topological schedule; every
    // unique node is computed exactly once per call.
    void forward(const Inputs& in) {
        ++forward_calls_;
        for (NodeId id : schedule_) eval_node(id, in, values_[static_cast<size_t>(id)]);
    }

    long long forward_calls() const { return forward_calls_; }

    const Vec& value(NodeId id) const { return values_[static_cast<size_t>(id)]; }

    const Vec& output(size_t i = 0) const { return values_[static_cast<size_t>(graph_->outputs()[i])]; }

    std::vector<Vec> outputs() const {
        std::vector<Vec> out;
        out.reserve(graph_->outputs().size());
        for (NodeId o : graph_->outputs()) out.push_back(values_[static_cast<size_t>(o)]);
        return out;
    }

    long long unique_evals_per_pass() const { return static_cast<long long>(schedule_.size()); }
    long long refs_per_pass() const { return refs_per_pass_; }

    // Reverse-mode pass over the recorded forward values. upstream holds one
    // cotangent per graph output. Parameter gradients accumulate into grads;
    // gradients w.r.t. the inputs accumulate into input_grads when given.
    void backward(const std::vector<Vec>& upstream, GradientSet& grads, InputGradients* input_grads = nullptr) {
        if (upstream.size() != graph_->outputs().size()) throw GraphError("backward: upstream arity mismatch");
        for (auto& a : adjoints_) std::fill(a.begin(), a.end(), Scalar(0));
        if (input_grads != nullptr && input_grads->by_slot.size() != graph_->slots().size()) {
            input_grads->by_slot.resize(graph_->slots().size());
            for (size_t i = 0; i < graph_->slots().size(); ++i)
                input_grads->by_slot[i].assign(static_cast<size_t>(graph_->slots()[i].width), Scalar(0));
        }
        for (size_t i = 0; i < upstream.size(); ++i) {
            NodeId o = graph_->outputs()[i];
            if (static_cast<int>(upstream[i].size()) != graph_->width(o))
                throw GraphError("backward: cotangent width mismatch");
            Vec& a = adjoints_[static_cast<size_t>(o)];
            for (size_t k = 0; k < a.size(); ++k) a[k] += upstream[i][k];
        }
        for (auto it = schedule_.rbegin(); it != schedule_.rend(); ++it) backprop_node(*it, grads, input_grads);
    }

    // Naive tree-walk evaluation: every reference recomputes its subtree.
    // Used for the reuse-soundness/effectiveness checks and benchmarks.
    EvalReport evaluate_naive(const Inputs& in) {
        EvalReport rep;
        std::vector<bool> visited(static_cast<size_t>(graph_->node_count()), false);
        long long unique = 0;
        for (NodeId o : graph_->outputs()) {
            Vec out;
            eval_tree(o, in, out, rep.total_node_refs, visited, unique);
            rep.outputs.push_back(std::move(out));
        }
        rep.unique_node_evals = unique;
        return rep;
    }

private:
    void eval_node(NodeId id, const Inputs& in, Vec& out) {
        const Node& n = graph_->node(id);
        auto val = [&](size_t i) -> const Vec& { return values_[static_cast<size_t>(n.inputs[i])]; };
        switch (n.op) {
            case NodeOp::InputVar:
            case NodeOp::InputConst: {
                const Vec& v = in.slot_value(n.slot);
                if (static_cast<int>(v.size()) != n.width) throw GraphError("input arity mismatch at evaluation");
                out = v;
                break;
            }
            case NodeOp::ConstVec:
                out = n.constant;
                break;
            case NodeOp::Affine: {
                const Matrix& w = params_->at(n.weight);
                const Vec& x = val(0);
                out.assign(static_cast<size_t>(w.rows), Scalar(0));
                const Scalar* wp = w.data.data();
                for (int r = 0; r < w.rows; ++r) {
                    Scalar acc = 0;
                    const Scalar* row = wp + static_cast<size_t>(r) * w.cols;
                    for (int c = 0; c < w.cols; ++c) acc += row[c] * x[static_cast<size_t>(c)];
                    out[static_cast<size_t>(r)] = acc;
                }
                if (n.bias >= 0) {
                    const Matrix& b = params_->at(n.bias);
                    for (int r = 0; r < w.rows; ++r) out[static_cast<size_t>(r)] += b.data[static_cast<size_t>(r)];
                }
                break;
            }
            case NodeOp::Pointwise: {
                const Vec& x = val(0);
                out.resize(x.size());
                for (size_t i = 0; i < x.size(); ++i) out[i] = nl_eval(n.nl, n.order, x[i]);
                break;
            }
            case NodeOp::Hadamard: {
                out.assign(static_cast<size_t>(n.width), Scalar(1));
                for (size_t j = 0; j < n.inputs.size(); ++j) {
                    const Vec& v = val(j);
                    const size_t f = static_cast<size_t>(n.width) / v.size();
                    for (size_t k = 0; k < out.size(); ++k) out[k] *= v[k / f];
                }
                break;
            }
            case NodeOp::Sum: {
                out.assign(static_cast<size_t>(n.width), Scalar(0));
                for (size_t j = 0; j < n.inputs.size(); ++j) {
                    const Vec& v = val(j);
                    for (size_t k = 0; k < out.size(); ++k) out[k] += v[k];
                }
                break;
            }
            case NodeOp::ScaleConst: {
                const Vec& x = val(0);
                out.resize(x.size());
                if (n.constant.size() == 1)
                    for (size_t k = 0; k < x.size(); ++k) out[k] = x[k] * n.constant[0];
                else
                    for (size_t k = 0; k < x.size(); ++k) out[k] = x[k] * n.constant[k];
                break;
            }
            case NodeOp::Encode: {
                const Vec& x = val(0);
                out.clear();
                out.reserve(static_cast<size_t>(n.width));
                for (Scalar p : x) encode_scalar(p, n.enc, n.order, out);
                break;
            }
            case NodeOp::Concat: {
                out.clear();
                out.reserve(static_cast<size_t>(n.width));
                for (size_t j = 0; j < n.inputs.size(); ++j) {
                    const Vec& v = val(j);
                    out.insert(out.end(), v.begin(), v.end());
                }
                break;
            }
            case NodeOp::AffinePoint: {
                const Vec& o = val(0);
                const Vec& t = val(1);
                const Vec& d = val(2);
                out.resize(o.size());
                for (size_t k = 0; k < o.size(); ++k) out[k] = o[k] + t[0] * d[k];
                break;
            }
        }
    }

    void backprop_node(NodeId id, GradientSet& grads, InputGradients* input_grads) {
        const Node& n = graph_->node(id);
        const Vec& ybar = adjoints_[static_cast<size_t>(id)];
        bool live = false;
        for (Scalar v : ybar)
            if (v != Scalar(0)) {
                live = true;
                break;
            }
        if (!live) return;
        auto adj = [&](size_t i) -> Vec& { return adjoints_[static_cast<size_t>(n.inputs[i])]; };
        auto val = [&](size_t i) -> const Vec& { return values_[static_cast<size_t>(n.inputs[i])]; };
        switch (n.op) {
            case NodeOp::InputVar:
            case NodeOp::InputConst:
                if (input_grads != nullptr) {
                    Vec& g = input_grads->by_slot[static_cast<size_t>(n.slot)];
                    for (size_t k = 0; k < g.size(); ++k) g[k] += ybar[k];
                }
                break;
            case NodeOp::ConstVec:
                break;
            case NodeOp::Affine: {
                const Matrix& w = params_->at(n.weight);
                const Vec& x = val(0);
                Matrix& gw = grads.at(n.weight);
                for (int r = 0; r < w.rows; ++r) {
                    const Scalar u = ybar[static_cast<size_t>(r)];
                    if (u == Scalar(0)) continue;
                    Scalar* grow = gw.data.data() + static_cast<size_t>(r) * w.cols;
                    for (int c = 0; c < w.cols; ++c) grow[c] += u * x[static_cast<size_t>(c)];
                }
                if (n.bias >= 0) {
                    Matrix& gb = grads.at(n.bias);
                    for (int r = 0; r < w.rows; ++r) gb.data[static_cast<size_t>(r)] += ybar[static_cast<size_t>(r)];
                }
                Vec& xbar = adj(0);
                const Scalar* wp = w.data.data();
                for (int r = 0; r < w.rows; ++r) {
                    const Scalar u = ybar[static_cast<size_t>(r)];
                    if (u == Scalar(0)) continue;
                    const Scalar* row = wp + static_cast<size_t>(r) * w.cols;
                    for (int c = 0; c < w.cols; ++c) xbar[static_cast<size_t>(c)] += row[c] * u;
                }
                break;
            }
            case NodeOp::Pointwise: {
                if (n.order >= 2)
                    throw GraphError("backprop through a second-derivative pointwise node needs order 3");
                const Vec& x = val(0);
                Vec& xbar = adj(0);
                for (size_t k = 0; k < x.size(); ++k) xbar[k] += ybar[k] * nl_eval(n.nl, n.order + 1, x[k]);
                break;
            }
            case NodeOp::Hadamard: {
                for (size_t i = 0; i < n.inputs.size(); ++i) {
                    const Vec& vi = val(i);
                    const size_t fi = static_cast<size_t>(n.width) / vi.size();
                    Vec& ibar = adj(i);
                    for (size_t k = 0; k < static_cast<size_t>(n.width); ++k) {
                        Scalar prod = ybar[k];
                        if (prod == Scalar(0)) continue;
                        for (size_t j = 0; j < n.inputs.size(); ++j) {
                            if (j == i) continue;
                            const Vec& vj = val(j);
                            prod *= vj[k / (static_cast<size_t>(n.width) / vj.size())];
                        }
                        ibar[k / fi] += prod;
                    }
                }
                break;
            }
            case NodeOp::Sum:
                for (size_t i = 0; i < n.inputs.size(); ++i) {
                    Vec& ibar = adj(i);
                    for (size_t k = 0; k < ibar.size(); ++k) ibar[k] += ybar[k];
                }
                break;
            case NodeOp::ScaleConst: {
                Vec& xbar = adj(0);
                if (n.constant.size() == 1)
                    for (size_t k = 0; k < xbar.size(); ++k) xbar[k] += ybar[k] * n.constant[0];
                else
                    for (size_t k = 0; k < xbar.size(); ++k) xbar[k] += ybar[k] * n.constant[k];
                break;
            }
            case NodeOp::Encode: {
                const Vec& x = val(0);
                Vec& xbar = adj(0);
                Vec dcomp;
                dcomp.reserve(static_cast<size_t>(2 * n.enc.L));
                for (size_t c = 0; c < x.size(); ++c) {
                    dcomp.clear();
                    encode_scalar(x[c], n.enc, n.order + 1, dcomp);
                    const size_t base = c * static_cast<size_t>(2 * n.enc.L);
                    Scalar acc = 0;
                    for (size_t k = 0; k < dcomp.size(); ++k) acc += ybar[base + k] * dcomp[k];
                    xbar[c] += acc;
                }
                break;
            }
            case NodeOp::Concat: {
                size_t off = 0;
                for (size_t i = 0; i < n.inputs.size(); ++i) {
                    Vec& ibar = adj(i);
                    for (size_t k = 0; k < ibar.size(); ++k) ibar[k] += ybar[off + k];
                    off += ibar.size();
                }
                break;
            }
            case NodeOp::AffinePoint: {
                const Vec& t = val(1);
                const Vec& d = val(2);
                Vec& obar = adj(0);
                Vec& tbar = adj(1);
                Vec& dbar = adj(2);
                Scalar td = 0;
                for (size_t k = 0; k < obar.size(); ++k) {
                    obar[k] += ybar[k];
                    td += ybar[k] * d[k];
                    dbar[k] += t[0] * ybar[k];
                }
                tbar[0] += td;
                break;
            }
        }
    }

    void eval_tree(NodeId id, const Inputs& in, Vec& out, long long& refs, std::vector<bool>& visited,
                   long long& unique) {
        ++refs;
        if (!visited[static_cast<size_t>(id)]) {
            visited[static_cast<size_t>(id)] = true;
            ++unique;
        }
        const Node& n = graph_->node(id);
        // recompute all dependencies into scratch, stash into values_, eval
        std::vector<Vec> dep_values(n.inputs.size());
        for (size_t i = 0; i < n.inputs.size(); ++i)
            eval_tree(n.inputs[i], in, dep_values[i], refs, visited, unique);
        for (size_t i = 0; i < n.inputs.size(); ++i)
            values_[static_cast<size_t>(n.inputs[i])] = std::move(dep_values[i]);
        eval_node(id, in, out);
    }

    const ComputeGraph* graph_;
    const ParamStore* params_;
    std::vector<NodeId> schedule_;
    std::vector<Vec> values_;
    std::vector<Vec> adjoints_;
    long long refs_per_pass_ = 0;
    long long forward_calls_ = 0;
};

// One-shot spec-level entry points.

inline EvalReport evaluate(const ComputeGraph& graph, const Inputs& in, const ParamStore& params, bool reuse) {
    Executor ex(graph, params);
    if (reuse) {
        ex.forward(in);
        EvalReport rep;
        rep.outputs = ex.outputs();
        rep.unique_node_evals = ex.unique_evals_per_pass();
        rep.total_node_refs = ex.refs_per_pass();
        return rep;
    }
    return ex.evaluate_naive(in);
}

}  // namespace autoint
