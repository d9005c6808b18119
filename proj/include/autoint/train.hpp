#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "autoint/executor.hpp"
#include "autoint/gradnet.hpp"
#include "autoint/param_store.hpp"
#include "autoint/rng.hpp"

namespace autoint {

struct TrainConfig {
    double learning_rate = 5e-4;
    double decay_factor = 0.2;
    long long decay_every = 100000;
    long long max_iters = 0;
    uint64_t seed = 0;
};

inline double lr_at(const TrainConfig& cfg, long long iter) {
    return cfg.learning_rate * std::pow(cfg.decay_factor, static_cast<double>(iter / cfg.decay_every));
}

struct LossAndCotangent {
    double loss = 0.0;
    Vec cotangent;
};

inline LossAndCotangent mse_loss(const Vec& pred, const Vec& target) {
    if (pred.size() != target.size()) throw GraphError("mse_loss: length mismatch");
    LossAndCotangent out;
    out.cotangent.resize(pred.size());
    const double inv_n = 1.0 / static_cast<double>(pred.size());
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        out.loss += d * d * inv_n;
        out.cotangent[i] = Scalar(2.0 * d * inv_n);
    }
    return out;
}

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    explicit AdamState(const ParamStore& params) {
        for (ParamId id = 0; id < params.count(); ++id) {
            const Matrix& t = params.at(id);
            m.emplace_back(t.rows, t.cols);
            v.emplace_back(t.rows, t.cols);
        }
    }
};

inline void adam_step(ParamStore& params, const GradientSet& grads, AdamState& state, double lr) {
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (ParamId id = 0; id < params.count(); ++id) {
        Matrix& t = params.at(id);
        const Matrix& g = grads.at(id);
        if (g.rows != t.rows || g.cols != t.cols) throw GraphError("adam_step: gradient shape mismatch");
        Matrix& mm = state.m[static_cast<size_t>(id)];
        Matrix& vv = state.v[static_cast<size_t>(id)];
        for (size_t i = 0; i < t.data.size(); ++i) {
            const double gi = g.data[i];
            mm.data[i] = Scalar(state.beta1 * mm.data[i] + (1.0 - state.beta1) * gi);
            vv.data[i] = Scalar(state.beta2 * vv.data[i] + (1.0 - state.beta2) * gi * gi);
            const double mhat = mm.data[i] / c1;
            const double vhat = vv.data[i] / c2;
            t.data[i] -= Scalar(lr * mhat / (std::sqrt(vhat) + state.epsilon));
        }
    }
}

struct TrainLogRow {
    long long iter;
    double loss;
    double lr;
};

struct TrainLog {
    std::vector<TrainLogRow> rows;

    void write_csv(const std::string& path) const {
        std::ofstream f(path);
        f << "iteration,loss,lr\n";
        char buf[96];
        for (const auto& r : rows) {
            std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n", r.iter, r.loss, r.lr);
            f << buf;
        }
    }
};

struct BatchSample {
    std::vector<Vec> slot_values;  // aligned with the grad graph's slots
    Vec target;
};

using BatchProvider = std::function<void(long long iter, std::vector<BatchSample>& batch)>;
using CheckpointHook = std::function<void(long long iter)>;

// Pointwise regression of the grad network on (inputs, target) batches.
// Parameters update in place; the loss history is returned per iteration.
// When checkpoint_every > 0, on_checkpoint fires after every K-th update.
inline TrainLog fit_grad_network(AutoIntPair& pair, const BatchProvider& next_batch, const TrainConfig& cfg,
                                 long long checkpoint_every = 0, const CheckpointHook& on_checkpoint = {}) {
    Executor exec(pair.grad, *pair.params);
    GradientSet grads(*pair.params);
    AdamState adam(*pair.params);
    TrainLog log;
    log.rows.reserve(static_cast<size_t>(cfg.max_iters));
    std::vector<BatchSample> batch;
    Inputs in(pair.grad);
    for (long long iter = 0; iter < cfg.max_iters; ++iter) {
        next_batch(iter, batch);
        if (batch.empty()) throw GraphError("fit_grad_network: empty batch");
        grads.zero();
        double loss = 0.0;
        const double inv_batch = 1.0 / static_cast<double>(batch.size());
        for (const auto& sample : batch) {
            for (size_t s = 0; s < sample.slot_values.size(); ++s) in.slot_value(static_cast<int>(s)) = sample.slot_values[s];
            exec.forward(in);
            LossAndCotangent lc = mse_loss(exec.output(), sample.target);
            loss += lc.loss * inv_batch;
            for (auto& c : lc.cotangent) c *= Scalar(inv_batch);
            exec.backward({lc.cotangent}, grads);
        }
        const double lr = lr_at(cfg, iter);
        if (!std::isfinite(loss)) throw NumericAbort("loss is not finite", iter, lr);
        adam_step(*pair.params, grads, adam, lr);
        log.rows.push_back({iter, loss, lr});
        if (checkpoint_every > 0 && on_checkpoint && (iter + 1) % checkpoint_every == 0) on_checkpoint(iter + 1);
    }
    return log;
}

}  // namespace autoint
