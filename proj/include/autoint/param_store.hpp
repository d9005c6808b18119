#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autoint/common.hpp"

namespace autoint {

using ParamId = int;

// Single owner of every weight matrix and bias vector. Integral and grad
// graphs reference tensors here by id, so a mutation is visible to both
// without any copy. Bias vectors are stored as rows x 1 matrices.
class ParamStore {
public:
    ParamId add_matrix(int rows, int cols, const std::string& name) {
        tensors_.emplace_back(rows, cols);
        names_.push_back(name);
        return static_cast<ParamId>(tensors_.size() - 1);
    }

    ParamId add_vector(int rows, const std::string& name) { return add_matrix(rows, 1, name); }

    Matrix& at(ParamId id) { return tensors_[check(id)]; }
    const Matrix& at(ParamId id) const { return tensors_[check(id)]; }
    const std::string& name(ParamId id) const { return names_[check(id)]; }

    int count() const { return static_cast<int>(tensors_.size()); }

    size_t scalar_count() const {
        size_t n = 0;
        for (const auto& t : tensors_) n += t.size();
        return n;
    }

private:
    size_t check(ParamId id) const {
        if (id < 0 || id >= count()) throw GraphError("unresolved parameter id " + std::to_string(id));
        return static_cast<size_t>(id);
    }

    std::vector<Matrix> tensors_;
    std::vector<std::string> names_;
};

// Per-parameter gradients, shape-congruent with a ParamStore.
struct GradientSet {
    std::vector<Matrix> grads;

    explicit GradientSet(const ParamStore& params) {
        grads.reserve(params.count());
        for (ParamId id = 0; id < params.count(); ++id) {
            const Matrix& t = params.at(id);
            grads.emplace_back(t.rows, t.cols);
        }
    }

    void zero() {
        for (auto& g : grads) std::fill(g.data.begin(), g.data.end(), Scalar(0));
    }

    Matrix& at(ParamId id) { return grads[static_cast<size_t>(id)]; }
    const Matrix& at(ParamId id) const { return grads[static_cast<size_t>(id)]; }
};

}  // namespace autoint
