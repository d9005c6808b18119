#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "autoint/common.hpp"

namespace autoint {

enum class NonlinKind { ReLU, Softplus, Swish, Sine };

// Activation with its parameters. Every kind supplies value, first and second
// derivative as total functions; ReLU'' is defined as 0 everywhere.
struct Nonlinearity {
    NonlinKind kind = NonlinKind::Swish;
    double omega0 = 30.0;  // Sine frequency
    double beta = 1.0;     // Swish slope

    bool operator==(const Nonlinearity&) const = default;
};

inline double sigmoid(double x) {
    if (x >= 0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    // max(x,0) + log1p(exp(-|x|)) avoids overflow on both tails
    return (x > 0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline Scalar nl_eval(const Nonlinearity& nl, int order, Scalar x) {
    switch (nl.kind) {
        case NonlinKind::ReLU:
            switch (order) {
                case 0: return x > 0 ? x : Scalar(0);
                case 1: return x > 0 ? Scalar(1) : Scalar(0);
                case 2: return Scalar(0);
            }
            break;
        case NonlinKind::Softplus:
            switch (order) {
                case 0: return Scalar(softplus(x));
                case 1: return Scalar(sigmoid(x));
                case 2: {
                    const double s = sigmoid(x);
                    return Scalar(s * (1.0 - s));
                }
            }
            break;
        case NonlinKind::Swish:
            switch (order) {
                case 0: return Scalar(x * sigmoid(nl.beta * x));
                case 1: {
                    const double s = sigmoid(nl.beta * x);
                    return Scalar(s + nl.beta * x * s * (1.0 - s));
                }
                case 2: {
                    const double b = nl.beta;
                    const double s = sigmoid(b * x);
                    return Scalar(2.0 * b * s * (1.0 - s) + b * b * x * s * (1.0 - s) * (1.0 - 2.0 * s));
                }
            }
            break;
        case NonlinKind::Sine:
            switch (order) {
                case 0: return Scalar(std::sin(nl.omega0 * x));
                case 1: return Scalar(nl.omega0 * std::cos(nl.omega0 * x));
                case 2: return Scalar(-nl.omega0 * nl.omega0 * std::sin(nl.omega0 * x));
            }
            break;
    }
    throw std::invalid_argument("nl_eval: derivative order must be 0, 1 or 2");
}

inline std::string nonlin_name(NonlinKind k) {
    switch (k) {
        case NonlinKind::ReLU: return "relu";
        case NonlinKind::Softplus: return "softplus";
        case NonlinKind::Swish: return "swish";
        case NonlinKind::Sine: return "sine";
    }
    return "?";
}

inline NonlinKind nonlin_from_name(const std::string& s) {
    if (s == "relu") return NonlinKind::ReLU;
    if (s == "softplus") return NonlinKind::Softplus;
    if (s == "swish") return NonlinKind::Swish;
    if (s == "sine") return NonlinKind::Sine;
    throw BuildError("unknown nonlinearity: " + s);
}

}  // namespace autoint
