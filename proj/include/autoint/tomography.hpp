#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "autoint/executor.hpp"
#include "autoint/gradnet.hpp"
#include "autoint/nets.hpp"
#include "autoint/parallel.hpp"
#include "autoint/quadrature.hpp"
#include "autoint/rng.hpp"
#include "autoint/train.hpp"

namespace autoint {
namespace ct {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kRayNear = -1.0;
inline constexpr double kRayFar = 1.0;

struct Ellipse {
    double cx = 0, cy = 0;      // center
    double ax = 1, ay = 1;      // semi-axes
    double rot_deg = 0;         // counterclockwise rotation
    double intensity = 0;       // additive absorption
};

// Superposition of ellipses on the unit square; absorption clamps at zero.
class Phantom {
public:
    explicit Phantom(std::vector<Ellipse> ellipses) : ellipses_(std::move(ellipses)) {
        for (const auto& e : ellipses_) {
            const double r = e.rot_deg * kPi / 180.0;
            cos_.push_back(std::cos(r));
            sin_.push_back(std::sin(r));
        }
    }

    double density(double x, double y) const {
        double f = 0.0;
        for (size_t k = 0; k < ellipses_.size(); ++k) {
            const Ellipse& e = ellipses_[k];
            const double dx = x - e.cx, dy = y - e.cy;
            const double xr = cos_[k] * dx + sin_[k] * dy;
            const double yr = -sin_[k] * dx + cos_[k] * dy;
            const double q = (xr / e.ax) * (xr / e.ax) + (yr / e.ay) * (yr / e.ay);
            if (q <= 1.0) f += e.intensity;
        }
        return f < 0.0 ? 0.0 : f;
    }

    const std::vector<Ellipse>& ellipses() const { return ellipses_; }

private:
    std::vector<Ellipse> ellipses_;
    std::vector<double> cos_, sin_;
};

inline Phantom shepp_logan_phantom() {
    return Phantom({{0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
                    {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
                    {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},
                    {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
                    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
                    {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
                    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},
                    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
                    {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},
                    {0.06, -0.605, 0.023, 0.046, 0.0, 0.1}});
}

inline Phantom disk_phantom(double radius, double intensity, double cx = 0.0, double cy = 0.0) {
    return Phantom({{cx, cy, radius, radius, 0.0, intensity}});
}

// Rasterized absorption on [-1,1]^2, row-major with y running top-down.
inline std::vector<double> rasterize_phantom(const Phantom& phantom, int size) {
    std::vector<double> img(static_cast<size_t>(size) * size, 0.0);
    for (int py = 0; py < size; ++py)
        for (int px = 0; px < size; ++px) {
            const double x = -1.0 + 2.0 * (px + 0.5) / size;
            const double y = 1.0 - 2.0 * (py + 0.5) / size;
            img[static_cast<size_t>(py) * size + px] = phantom.density(x, y);
        }
    return img;
}

// Point on the ray (rho, alpha) at parameter t; satisfies
// x cos(alpha) + y sin(alpha) = rho identically.
inline std::pair<double, double> ray_point(double rho, double alpha, double t) {
    const double c = std::cos(alpha), s = std::sin(alpha);
    return {rho * c - t * s, rho * s + t * c};
}

// Ray parameters where the ray enters or leaves an ellipse. Bracketing the
// jumps keeps the quadrature from stepping over chords narrower than its
// initial sample spacing.
inline std::vector<double> ray_breakpoints(const Phantom& phantom, double rho, double alpha) {
    std::vector<double> pts = {kRayNear, kRayFar};
    const double c = std::cos(alpha), s = std::sin(alpha);
    for (const Ellipse& e : phantom.ellipses()) {
        const double r = e.rot_deg * kPi / 180.0;
        const double ce = std::cos(r), se = std::sin(r);
        // ray in the ellipse frame: (A1 t + B1, A2 t + B2)
        const double a1 = -ce * s + se * c;
        const double b1 = ce * (rho * c - e.cx) + se * (rho * s - e.cy);
        const double a2 = se * s + ce * c;
        const double b2 = -se * (rho * c - e.cx) + ce * (rho * s - e.cy);
        const double qa = a1 * a1 / (e.ax * e.ax) + a2 * a2 / (e.ay * e.ay);
        const double qb = 2.0 * (a1 * b1 / (e.ax * e.ax) + a2 * b2 / (e.ay * e.ay));
        const double qc = b1 * b1 / (e.ax * e.ax) + b2 * b2 / (e.ay * e.ay) - 1.0;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc <= 0.0 || qa == 0.0) continue;
        const double sq = std::sqrt(disc);
        for (double root : {(-qb - sq) / (2 * qa), (-qb + sq) / (2 * qa)})
            if (root > kRayNear && root < kRayFar) pts.push_back(root);
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

// Ground-truth line integral along the ray: adaptive quadrature on each
// segment between ellipse crossings.
inline double radon_oracle(const Phantom& phantom, double rho, double alpha, double tol = 1e-6) {
    if (tol <= 0) throw OracleError("radon_oracle: tolerance must be positive");
    const auto f = [&](double t) {
        auto [x, y] = ray_point(rho, alpha, t);
        return phantom.density(x, y);
    };
    const std::vector<double> pts = ray_breakpoints(phantom, rho, alpha);
    double acc = 0.0;
    for (size_t k = 0; k + 1 < pts.size(); ++k) {
        const double len = pts[k + 1] - pts[k];
        if (len <= 0) continue;
        acc += adaptive_simpson(f, pts[k], pts[k + 1], tol * len / (kRayFar - kRayNear));
    }
    return acc;
}

// R rows over eccentricity in [-1, 1], A columns over angle in [0, pi).
struct Sinogram {
    int rows = 0;  // rho samples
    int cols = 0;  // angle samples
    std::vector<double> values;       // row-major [rho][alpha]
    std::vector<bool> supervised;     // per column

    double& at(int i, int j) { return values[static_cast<size_t>(i) * cols + j]; }
    double at(int i, int j) const { return values[static_cast<size_t>(i) * cols + j]; }

    double rho_at(int i) const { return rows == 1 ? 0.0 : -1.0 + 2.0 * i / (rows - 1); }
    double alpha_at(int j) const { return kPi * j / cols; }

    int supervised_count() const {
        int n = 0;
        for (bool s : supervised) n += s ? 1 : 0;
        return n;
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "rho,alpha,value\n";
        char buf[128];
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", rho_at(i), alpha_at(j), at(i, j));
                os << buf;
            }
        return os.str();
    }
};

inline Sinogram make_sinogram(const Phantom& phantom, int rows, int cols, double tol = 1e-6, int threads = 1) {
    Sinogram s;
    s.rows = rows;
    s.cols = cols;
    s.values.assign(static_cast<size_t>(rows) * cols, 0.0);
    s.supervised.assign(static_cast<size_t>(cols), true);
    parallel_for(rows, threads, [&](int i) {
        for (int j = 0; j < cols; ++j) s.at(i, j) = radon_oracle(phantom, s.rho_at(i), s.alpha_at(j), tol);
    });
    return s;
}

// Keeps every factor-th angle supervised.
inline Sinogram subsample_angles(const Sinogram& sino, int factor) {
    if (factor < 1 || sino.cols % factor != 0)
        throw BuildError("subsample_angles: factor must divide the angle count");
    Sinogram out = sino;
    for (int j = 0; j < out.cols; ++j) out.supervised[static_cast<size_t>(j)] = (j % factor) == 0;
    return out;
}

inline double psnr(const std::vector<double>& a, const std::vector<double>& b, double peak) {
    if (a.size() != b.size()) throw BuildError("psnr: size mismatch");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) mse += (a[i] - b[i]) * (a[i] - b[i]) / static_cast<double>(a.size());
    if (mse <= 0.0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

// PSNR restricted to supervised or to masked columns.
inline double psnr_columns(const Sinogram& truth, const Sinogram& recon, bool supervised_cols, double peak) {
    std::vector<double> a, b;
    for (int j = 0; j < truth.cols; ++j) {
        if (truth.supervised[static_cast<size_t>(j)] != supervised_cols) continue;
        for (int i = 0; i < truth.rows; ++i) {
            a.push_back(truth.at(i, j));
            b.push_back(recon.at(i, j));
        }
    }
    if (a.empty()) throw BuildError("psnr_columns: no matching columns");
    return psnr(a, b, peak);
}

// The raw t block matters: every encoding component sin/cos(2^i pi t) is
// periodic with a period dividing 2, and the ray domain [-1, 1] spans exactly
// 2, so a network fed only encoded t has Phi(t_f) = Phi(t_n) identically and
// its definite integrals vanish for every parameter value. The unencoded
// passthrough restores a non-periodic direction.
inline MLPSpec default_ct_spec(NonlinKind kind, std::vector<int> hidden = {32, 32}) {
    MLPSpec spec;
    spec.slots = {{"rho", 1, false}, {"alpha", 1, false}, {"t", 1, true}};
    spec.blocks = {{"rho", 4, true}, {"alpha", 4, true}, {"t", 8, true}, {"t", 0, true}};
    spec.hidden = std::move(hidden);
    spec.nl.kind = kind;
    return spec;
}

struct CtTrainResult {
    AutoIntPair pair;
    TrainLog log;
    MLPSpec spec;
};

// Monte-Carlo training of the grad network on the supervised rays: the
// per-ray estimate is ((t_f - t_n)/T) * sum_j Psi(rho, alpha, t_j) with
// t_j ~ U([t_n, t_f]), matched against s(rho, alpha) by squared error.
// The (t_f - t_n) scale keeps the estimator consistent with the
// two-evaluation inference integral.
inline CtTrainResult train_ct(const Sinogram& sino, const MLPSpec& spec, const TrainConfig& cfg, int samples_per_ray,
                              int batch_rays,
                              std::vector<std::pair<int, int>>* batch_audit = nullptr) {
    CtTrainResult result{make_autoint_pair(spec, cfg.seed), {}, spec};
    AutoIntPair& pair = result.pair;
    Executor exec(pair.grad, *pair.params);
    GradientSet grads(*pair.params);
    AdamState adam(*pair.params);

    std::vector<int> sup_cols;
    for (int j = 0; j < sino.cols; ++j)
        if (sino.supervised[static_cast<size_t>(j)]) sup_cols.push_back(j);
    if (sup_cols.empty()) throw BuildError("train_ct: no supervised columns");

    const double len = kRayFar - kRayNear;
    const double scale = len / samples_per_ray;
    Inputs in(pair.grad);
    std::vector<double> ts(static_cast<size_t>(samples_per_ray));

    result.log.rows.reserve(static_cast<size_t>(cfg.max_iters));
    for (long long iter = 0; iter < cfg.max_iters; ++iter) {
        Rng rng = Rng::substream(cfg.seed, "ct.batch", static_cast<uint64_t>(iter));
        grads.zero();
        double loss = 0.0;
        for (int bray = 0; bray < batch_rays; ++bray) {
            const int i = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(sino.rows)));
            const int j = sup_cols[rng.uniform_index(sup_cols.size())];
            if (batch_audit != nullptr) batch_audit->emplace_back(i, j);
            const double rho = sino.rho_at(i), alpha = sino.alpha_at(j);
            in.set(pair.grad, "rho", {rho});
            in.set(pair.grad, "alpha", {alpha});

            double estimate = 0.0;
            for (int k = 0; k < samples_per_ray; ++k) {
                ts[static_cast<size_t>(k)] = rng.uniform(kRayNear, kRayFar);
                in.set_var(pair.grad, ts[static_cast<size_t>(k)]);
                exec.forward(in);
                estimate += scale * exec.output()[0];
            }
            const double err = estimate - sino.at(i, j);
            loss += err * err / batch_rays;
            const double upstream = 2.0 * err * scale / batch_rays;
            for (int k = 0; k < samples_per_ray; ++k) {
                in.set_var(pair.grad, ts[static_cast<size_t>(k)]);
                exec.forward(in);
                exec.backward({{Scalar(upstream)}}, grads);
            }
        }
        const double lr = lr_at(cfg, iter);
        if (!std::isfinite(loss)) throw NumericAbort("ct loss is not finite", iter, lr);
        adam_step(*pair.params, grads, adam, lr);
        result.log.rows.push_back({iter, loss, lr});
    }
    return result;
}

struct InpaintResult {
    Sinogram sino;
    long long integral_evaluations = 0;
};

// Fills the full grid with Phi(rho, alpha, t_f) - Phi(rho, alpha, t_n):
// exactly 2 integral-network evaluations per cell.
inline InpaintResult inpaint_sinogram(const AutoIntPair& pair, int rows, int cols, int threads = 1) {
    InpaintResult out;
    out.sino.rows = rows;
    out.sino.cols = cols;
    out.sino.values.assign(static_cast<size_t>(rows) * cols, 0.0);
    out.sino.supervised.assign(static_cast<size_t>(cols), true);
    const int workers = std::max(1, std::min(threads, rows));
    std::vector<long long> eval_counts(static_cast<size_t>(workers), 0);
    parallel_workers(workers, [&](int w) {
        Executor exec(pair.integral, *pair.params);
        IntegralBounds bounds{Inputs(pair.integral), kRayNear, kRayFar};
        for (int i = w; i < rows; i += workers) {
            for (int j = 0; j < cols; ++j) {
                bounds.fixed.set(pair.integral, "rho", {out.sino.rho_at(i)});
                bounds.fixed.set(pair.integral, "alpha", {out.sino.alpha_at(j)});
                out.sino.at(i, j) = definite_integral(exec, bounds)[0];
            }
        }
        eval_counts[static_cast<size_t>(w)] = exec.forward_calls();
    });
    for (long long c : eval_counts) out.integral_evaluations += c;
    return out;
}

}  // namespace ct
}  // namespace autoint
