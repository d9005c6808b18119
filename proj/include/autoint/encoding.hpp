#pragma once

#include <cmath>

#include "autoint/common.hpp"

namespace autoint {

// Sinusoidal positional encoding gamma(p) -> R^{2L} with omega_i = 2^i * pi,
// interleaved (sin w0 p, cos w0 p, sin w1 p, cos w1 p, ...). The normalized
// variant rescales by omega_i^{-1} so the derivative components stay in
// [-1, 1]. order selects gamma, gamma' or gamma'' componentwise; order 2 is
// only used internally by backprop through derivative-encoding nodes.
struct EncodingConfig {
    int L = 0;
    bool normalized = true;
};

inline double encode_omega(int i) { return std::ldexp(3.14159265358979323846, i); }

// Appends the 2L components for one scalar input to out.
inline void encode_scalar(Scalar p, const EncodingConfig& cfg, int order, Vec& out) {
    for (int i = 0; i < cfg.L; ++i) {
        const double w = encode_omega(i);
        const double s = std::sin(w * p);
        const double c = std::cos(w * p);
        double a, b;
        switch (order) {
            case 0:
                a = s;
                b = c;
                break;
            case 1:
                a = w * c;
                b = -w * s;
                break;
            case 2:
                a = -w * w * s;
                b = -w * w * c;
                break;
            default:
                throw std::invalid_argument("encode: order must be 0, 1 or 2");
        }
        if (cfg.normalized) {
            a /= w;
            b /= w;
        }
        out.push_back(Scalar(a));
        out.push_back(Scalar(b));
    }
}

// Componentwise encoding of a vector input; component c fills block
// [c*2L, (c+1)*2L) of the result.
inline Vec encode(const Vec& p, const EncodingConfig& cfg, int order = 0) {
    Vec out;
    out.reserve(p.size() * 2 * cfg.L);
    for (Scalar v : p) encode_scalar(v, cfg, order, out);
    return out;
}

}  // namespace autoint
