#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace autoint {

#ifdef AUTOINT_SCALAR_FLOAT
using Scalar = float;
#else
using Scalar = double;
#endif

using Vec = std::vector<Scalar>;

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<Scalar> data;  // row-major

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, Scalar(0)) {}

    Scalar& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    Scalar at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return data.size(); }
};

// y = W x
inline void matvec(const Matrix& w, const Vec& x, Vec& y) {
    y.assign(static_cast<size_t>(w.rows), Scalar(0));
    const Scalar* wp = w.data.data();
    for (int r = 0; r < w.rows; ++r) {
        Scalar acc = 0;
        for (int c = 0; c < w.cols; ++c) acc += wp[static_cast<size_t>(r) * w.cols + c] * x[c];
        y[static_cast<size_t>(r)] = acc;
    }
}

// y += W^T x
inline void matvec_transposed_add(const Matrix& w, const Vec& x, Vec& y) {
    const Scalar* wp = w.data.data();
    for (int r = 0; r < w.rows; ++r) {
        const Scalar xr = x[static_cast<size_t>(r)];
        if (xr == Scalar(0)) continue;
        for (int c = 0; c < w.cols; ++c) y[static_cast<size_t>(c)] += wp[static_cast<size_t>(r) * w.cols + c] * xr;
    }
}

struct GraphError : std::runtime_error {
    explicit GraphError(const std::string& m) : std::runtime_error(m) {}
};

struct BuildError : std::runtime_error {
    explicit BuildError(const std::string& m) : std::runtime_error(m) {}
};

struct OracleError : std::runtime_error {
    explicit OracleError(const std::string& m) : std::runtime_error(m) {}
};

// Raised when a loss turns NaN; carries the diagnostic the CLI reports (exit code 4).
struct NumericAbort : std::runtime_error {
    long long iteration;
    double learning_rate;
    NumericAbort(const std::string& m, long long iter, double lr)
        : std::runtime_error(m), iteration(iter), learning_rate(lr) {}
};

}  // namespace autoint
