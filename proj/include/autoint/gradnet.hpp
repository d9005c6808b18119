#pragma once

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "autoint/executor.hpp"
#include "autoint/graph.hpp"
#include "autoint/nets.hpp"

namespace autoint {

namespace detail {

// Per-node chain rule over a compute graph. Forward subchains ("legs") are
// copied on demand and memoized, so a leg referenced by several derivative
// factors exists once in the grad graph. Nodes with no dependence on the
// variable differentiate to a symbolic zero and vanish from the result.
class Deriver {
public:
    Deriver(const ComputeGraph& src, NodeId var, const ParamStore& params)
        : src_(src), var_(var), params_(params) {
        for (const auto& s : src.slots()) out_.add_slot(s.name, s.width, s.is_var);
        copy_memo_.assign(static_cast<size_t>(src.node_count()), -1);
        d_memo_.assign(static_cast<size_t>(src.node_count()), -2);  // -2 unvisited, -1 zero
    }

    ComputeGraph run() {
        std::vector<NodeId> outs;
        for (NodeId o : src_.outputs()) {
            NodeId g = d(o);
            if (g < 0) g = out_.const_vec(Vec(static_cast<size_t>(src_.width(o)), Scalar(0)));
            outs.push_back(g);
        }
        out_.set_outputs(outs);
        out_.prune_dead();
        return std::move(out_);
    }

private:
    NodeId copy(NodeId s) {
        NodeId& memo = copy_memo_[static_cast<size_t>(s)];
        if (memo >= 0) return memo;
        const Node& n = src_.node(s);
        std::vector<NodeId> ins;
        ins.reserve(n.inputs.size());
        for (NodeId i : n.inputs) ins.push_back(copy(i));
        NodeId id = -1;
        switch (n.op) {
            case NodeOp::InputVar: id = out_.input_var(slot_name(n)); break;
            case NodeOp::InputConst: id = out_.input_const(slot_name(n)); break;
            case NodeOp::ConstVec: id = out_.const_vec(n.constant); break;
            case NodeOp::Affine: id = out_.affine(ins[0], n.weight, n.bias, params_); break;
            case NodeOp::Pointwise: id = out_.pointwise(ins[0], n.nl, n.order); break;
            case NodeOp::Hadamard: id = out_.hadamard(ins); break;
            case NodeOp::Sum: id = out_.sum(ins); break;
            case NodeOp::ScaleConst: id = out_.scale_const(ins[0], n.constant); break;
            case NodeOp::Encode: id = out_.encode_node(ins[0], n.enc, n.order); break;
            case NodeOp::Concat: id = out_.concat(ins); break;
            case NodeOp::AffinePoint: id = out_.affine_point(ins[0], ins[1], ins[2]); break;
        }
        memo = id;
        return id;
    }

    std::string slot_name(const Node& n) const { return src_.slots()[static_cast<size_t>(n.slot)].name; }

    NodeId one() {
        if (one_ < 0) one_ = out_.const_vec({Scalar(1)});
        return one_;
    }

    bool is_one(NodeId id) const {
        const Node& n = out_.node(id);
        return n.op == NodeOp::ConstVec && n.constant.size() == 1 && n.constant[0] == Scalar(1);
    }

    // Derivative of src node s with respect to the variable; -1 means zero.
    NodeId d(NodeId s) {
        NodeId& memo = d_memo_[static_cast<size_t>(s)];
        if (memo != -2) return memo;
        const Node& n = src_.node(s);
        NodeId r = -1;
        switch (n.op) {
            case NodeOp::InputVar:
                r = (s == var_) ? one() : -1;
                break;
            case NodeOp::InputConst:
            case NodeOp::ConstVec:
                r = -1;
                break;
            case NodeOp::Affine: {
                NodeId du = d(n.inputs[0]);
                r = du < 0 ? -1 : out_.affine(du, n.weight, -1, params_);
                break;
            }
            case NodeOp::Pointwise: {
                NodeId du = d(n.inputs[0]);
                if (du < 0) {
                    r = -1;
                    break;
                }
                if (n.order >= 2)
                    throw GraphError("derive: pointwise node already at second derivative order");
                NodeId f = out_.pointwise(copy(n.inputs[0]), n.nl, n.order + 1);
                r = is_one(du) ? f : out_.hadamard({f, du});
                break;
            }
            case NodeOp::Hadamard: {
                // product rule over the factors that depend on the variable
                std::vector<NodeId> terms;
                for (size_t i = 0; i < n.inputs.size(); ++i) {
                    NodeId di = d(n.inputs[i]);
                    if (di < 0) continue;
                    std::vector<NodeId> factors;
                    for (size_t j = 0; j < n.inputs.size(); ++j)
                        if (j != i) factors.push_back(copy(n.inputs[j]));
                    factors.push_back(di);
                    terms.push_back(factors.size() == 1 ? factors[0] : out_.hadamard(factors));
                }
                r = combine_sum(terms);
                break;
            }
            case NodeOp::Sum: {
                std::vector<NodeId> terms;
                for (NodeId i : n.inputs) {
                    NodeId di = d(i);
                    if (di >= 0) terms.push_back(di);
                }
                r = combine_sum(terms);
                break;
            }
            case NodeOp::ScaleConst: {
                NodeId du = d(n.inputs[0]);
                r = du < 0 ? -1 : out_.scale_const(du, n.constant);
                break;
            }
            case NodeOp::Encode: {
                NodeId du = d(n.inputs[0]);
                if (du < 0) {
                    r = -1;
                    break;
                }
                if (n.order >= 1) throw GraphError("derive: encode node already at first derivative order");
                NodeId e1 = out_.encode_node(copy(n.inputs[0]), n.enc, 1);
                r = is_one(du) && src_.width(n.inputs[0]) == 1 ? e1 : out_.hadamard({e1, du});
                break;
            }
            case NodeOp::Concat: {
                std::vector<NodeId> ds(n.inputs.size());
                bool any = false;
                for (size_t i = 0; i < n.inputs.size(); ++i) {
                    ds[i] = d(n.inputs[i]);
                    any |= ds[i] >= 0;
                }
                if (!any) {
                    r = -1;
                    break;
                }
                std::vector<NodeId> parts;
                for (size_t i = 0; i < n.inputs.size(); ++i)
                    parts.push_back(ds[i] >= 0
                                        ? ds[i]
                                        : out_.const_vec(Vec(static_cast<size_t>(src_.width(n.inputs[i])), Scalar(0))));
                r = out_.concat(parts);
                break;
            }
            case NodeOp::AffinePoint: {
                // x = o + t*d with o, d constant inputs: dx/dvar = (dt/dvar) * d
                NodeId dt = d(n.inputs[1]);
                if (d(n.inputs[0]) >= 0 || d(n.inputs[2]) >= 0)
                    throw GraphError("derive: ray origin/direction may not depend on the variable");
                if (dt < 0)
                    r = -1;
                else
                    r = is_one(dt) ? copy(n.inputs[2]) : out_.hadamard({copy(n.inputs[2]), dt});
                break;
            }
        }
        memo = r;
        return r;
    }

    NodeId combine_sum(const std::vector<NodeId>& terms) {
        if (terms.empty()) return -1;
        if (terms.size() == 1) return terms[0];
        return out_.sum(terms);
    }

    const ComputeGraph& src_;
    NodeId var_;
    const ParamStore& params_;
    ComputeGraph out_;
    std::vector<NodeId> copy_memo_;
    std::vector<NodeId> d_memo_;
    NodeId one_ = -1;
};

}  // namespace detail

// Instantiates the grad network d(outputs)/d(var) of an integral network.
// Parameters are shared by id with the source graph.
inline ComputeGraph derive(const ComputeGraph& integral, const std::string& var, const ParamStore& params) {
    NodeId v = -1;
    for (int i = 0; i < integral.node_count(); ++i) {
        const Node& n = integral.node(i);
        if (n.op == NodeOp::InputVar && integral.slots()[static_cast<size_t>(n.slot)].name == var) v = i;
    }
    if (v < 0) throw GraphError("derive: " + var + " is not an InputVar of the graph");
    return detail::Deriver(integral, v, params).run();
}

// An integral network, its grad network, and the parameters they share.
struct AutoIntPair {
    ComputeGraph integral;
    ComputeGraph grad;
    std::string var;
    std::shared_ptr<ParamStore> params;
};

inline AutoIntPair make_autoint_pair(const MLPSpec& spec, uint64_t seed) {
    AutoIntPair pair;
    pair.params = init_params(spec, seed);
    pair.integral = build_integral_network(spec, *pair.params);
    for (const auto& s : spec.slots)
        if (s.is_var) pair.var = s.name;
    pair.grad = derive(pair.integral, pair.var, *pair.params);
    return pair;
}

struct IntegralBounds {
    Inputs fixed;  // assignment for every non-variable input
    Scalar a = 0;
    Scalar b = 0;
};

inline Vec eval_antiderivative(Executor& integral_exec, const Inputs& in) {
    integral_exec.forward(in);
    return integral_exec.output();
}

// Phi(b-point) - Phi(a-point): exactly two integral-network evaluations.
inline Vec definite_integral(Executor& integral_exec, IntegralBounds& bounds) {
    bounds.fixed.set_var(integral_exec.graph(), bounds.b);
    integral_exec.forward(bounds.fixed);
    Vec hi = integral_exec.output();
    bounds.fixed.set_var(integral_exec.graph(), bounds.a);
    integral_exec.forward(bounds.fixed);
    const Vec& lo = integral_exec.output();
    for (size_t i = 0; i < hi.size(); ++i) hi[i] -= lo[i];
    return hi;
}

inline Vec eval_antiderivative(const AutoIntPair& pair, const Inputs& in) {
    Executor ex(pair.integral, *pair.params);
    return eval_antiderivative(ex, in);
}

inline Vec definite_integral(const AutoIntPair& pair, IntegralBounds& bounds) {
    Executor ex(pair.integral, *pair.params);
    return definite_integral(ex, bounds);
}

}  // namespace autoint
