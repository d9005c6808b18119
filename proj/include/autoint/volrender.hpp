#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "autoint/executor.hpp"
#include "autoint/gradnet.hpp"
#include "autoint/nets.hpp"
#include "autoint/nonlinearity.hpp"
#include "autoint/parallel.hpp"
#include "autoint/quadrature.hpp"
#include "autoint/rng.hpp"
#include "autoint/train.hpp"

namespace autoint {
namespace nvr {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(Vec3 a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) {
    const double n = norm(a);
    return {a[0] / n, a[1] / n, a[2] / n};
}

struct Ray {
    Vec3 o;
    Vec3 d;  // unit
    double tn = 0, tf = 1;

    Vec3 at(double t) const { return o + t * d; }
};

// Gaussian density blob with a direction-dependent emission tint. Colors are
// kept inside [0,1] by construction (|base +- tint| bounded), so no clamping
// is needed along the smooth paths.
struct Blob {
    Vec3 center{0, 0, 0};
    double amplitude = 1.0;
    double radius = 0.4;
    Vec3 base_color{0.5, 0.5, 0.5};
    Vec3 tint{0, 0, 0};
    Vec3 tint_dir{0, 0, 1};
};

struct AnalyticScene {
    std::vector<Blob> blobs;

    double density(const Vec3& x) const {
        double s = 0.0;
        for (const auto& b : blobs) {
            const Vec3 r = x - b.center;
            s += b.amplitude * std::exp(-dot(r, r) / (2.0 * b.radius * b.radius));
        }
        return s;
    }

    Vec3 color(const Vec3& x, const Vec3& d) const {
        Vec3 c{0, 0, 0};
        double wsum = 1e-6;
        for (const auto& b : blobs) {
            const Vec3 r = x - b.center;
            const double w = b.amplitude * std::exp(-dot(r, r) / (2.0 * b.radius * b.radius));
            const double a = dot(d, b.tint_dir);
            for (int k = 0; k < 3; ++k) c[static_cast<size_t>(k)] += w * (b.base_color[static_cast<size_t>(k)] +
                                                                          a * b.tint[static_cast<size_t>(k)]);
            wsum += w;
        }
        return {c[0] / wsum, c[1] / wsum, c[2] / wsum};
    }
};

inline AnalyticScene make_scene(const std::string& name) {
    if (name == "blob")
        return {{{{0.0, 0.0, 0.0}, 3.0, 0.45, {0.75, 0.45, 0.2}, {0.15, 0.1, -0.1}, normalized({1, 1, 0})}}};
    if (name == "blobs3")
        return {{{{0.35, 0.0, 0.1}, 4.0, 0.28, {0.8, 0.25, 0.2}, {0.1, 0.05, 0.05}, normalized({1, 0, 1})},
                 {{-0.3, 0.25, -0.1}, 3.0, 0.33, {0.2, 0.65, 0.3}, {-0.08, 0.1, 0.08}, normalized({0, 1, 1})},
                 {{0.0, -0.35, 0.0}, 3.5, 0.25, {0.25, 0.3, 0.8}, {0.05, -0.05, 0.12}, normalized({1, 1, 1})}}};
    throw BuildError("unknown scene: " + name);
}

// --- reference renderer -----------------------------------------------------

// Full volume rendering equation C = int T sigma c dt, T = exp(-int sigma),
// on a uniform grid refined until the result moves less than tol. This is the
// ground-truth oracle; it never touches the networks.
template <typename SceneT>
Vec3 reference_render(const SceneT& scene, const Ray& ray, double tol = 1e-6) {
    if (tol <= 0) throw OracleError("reference_render: tolerance must be positive");
    Vec3 prev{0, 0, 0};
    bool have_prev = false;
    for (int n = 64; n <= (1 << 16); n *= 2) {
        std::vector<double> sigma(static_cast<size_t>(n) + 1);
        std::vector<std::array<double, 3>> emit(static_cast<size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            const double t = ray.tn + (ray.tf - ray.tn) * i / n;
            const Vec3 x = ray.at(t);
            sigma[static_cast<size_t>(i)] = scene.density(x);
            const Vec3 c = scene.color(x, ray.d);
            emit[static_cast<size_t>(i)] = {c[0], c[1], c[2]};
        }
        const std::vector<double> prefix = cumulative_integral(sigma, ray.tn, ray.tf);
        Vec3 out{0, 0, 0};
        for (int ch = 0; ch < 3; ++ch) {
            std::vector<double> g(static_cast<size_t>(n) + 1);
            for (int i = 0; i <= n; ++i)
                g[static_cast<size_t>(i)] = std::exp(-prefix[static_cast<size_t>(i)]) * sigma[static_cast<size_t>(i)] *
                                            emit[static_cast<size_t>(i)][static_cast<size_t>(ch)];
            out[static_cast<size_t>(ch)] = composite_simpson(g, ray.tn, ray.tf);
        }
        if (have_prev) {
            const double delta = std::max({std::fabs(out[0] - prev[0]), std::fabs(out[1] - prev[1]),
                                           std::fabs(out[2] - prev[2])});
            if (delta <= tol) return out;
        }
        prev = out;
        have_prev = true;
    }
    throw OracleError("reference_render did not converge");
}

// --- piecewise approximation -------------------------------------------------

struct PiecewiseEstimates {
    std::vector<double> sigma_bar;               // per-interval mean density
    std::vector<std::array<double, 3>> c_bar;    // per-interval mean color
};

// Max quadrature combine:
// C = sum_i Tbar_i (1 - exp(-sigma_bar_i delta_i)) c_bar_i,
// Tbar_i = exp(-sum_{j<i} sigma_bar_j delta_j).
inline Vec3 max_quadrature_combine(const PiecewiseEstimates& est, const std::vector<double>& delta) {
    Vec3 out{0, 0, 0};
    double accum = 0.0;
    for (size_t i = 0; i < delta.size(); ++i) {
        const double tbar = std::exp(-accum);
        const double alpha = 1.0 - std::exp(-est.sigma_bar[i] * delta[i]);
        for (int ch = 0; ch < 3; ++ch) out[static_cast<size_t>(ch)] += tbar * alpha * est.c_bar[i][static_cast<size_t>(ch)];
        accum += est.sigma_bar[i] * delta[i];
    }
    return out;
}

struct MaxQuadratureBackward {
    std::vector<double> dsigma_bar;
    std::vector<std::array<double, 3>> dc_bar;
    std::vector<double> ddelta;
};

// Analytic adjoint of max_quadrature_combine for a channelwise upstream.
inline MaxQuadratureBackward max_quadrature_backward(const PiecewiseEstimates& est, const std::vector<double>& delta,
                                                     const Vec3& upstream) {
    const size_t n = delta.size();
    MaxQuadratureBackward g;
    g.dsigma_bar.assign(n, 0.0);
    g.dc_bar.assign(n, {0.0, 0.0, 0.0});
    g.ddelta.assign(n, 0.0);

    std::vector<double> tbar(n), alpha(n);
    double accum = 0.0;
    for (size_t i = 0; i < n; ++i) {
        tbar[i] = std::exp(-accum);
        alpha[i] = 1.0 - std::exp(-est.sigma_bar[i] * delta[i]);
        accum += est.sigma_bar[i] * delta[i];
    }
    // suffix_k = sum_{k > i} upstream . (tbar_k alpha_k c_bar_k)
    std::vector<double> term(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (int ch = 0; ch < 3; ++ch)
            term[i] += upstream[static_cast<size_t>(ch)] * tbar[i] * alpha[i] * est.c_bar[i][static_cast<size_t>(ch)];
    std::vector<double> suffix(n + 1, 0.0);
    for (size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + term[i];

    for (size_t i = 0; i < n; ++i) {
        double up_c = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
            g.dc_bar[i][static_cast<size_t>(ch)] = upstream[static_cast<size_t>(ch)] * tbar[i] * alpha[i];
            up_c += upstream[static_cast<size_t>(ch)] * est.c_bar[i][static_cast<size_t>(ch)];
        }
        const double dalpha = tbar[i] * std::exp(-est.sigma_bar[i] * delta[i]) * up_c;
        g.dsigma_bar[i] = delta[i] * dalpha - delta[i] * suffix[i + 1];
        g.ddelta[i] = est.sigma_bar[i] * dalpha - est.sigma_bar[i] * suffix[i + 1];
    }
    return g;
}

// Interval partition of [tn, tf]: boundaries t_0 .. t_N from lengths delta.
inline std::vector<double> partition_points(const Ray& ray, const std::vector<double>& delta) {
    std::vector<double> ts(delta.size() + 1);
    ts[0] = ray.tn;
    for (size_t i = 0; i < delta.size(); ++i) ts[i + 1] = ts[i] + delta[i];
    return ts;
}

inline std::vector<double> uniform_delta(const Ray& ray, int sections) {
    return std::vector<double>(static_cast<size_t>(sections), (ray.tf - ray.tn) / sections);
}

// Stratified sample positions: each interval subdivides into M bins with one
// uniform draw per bin. Returns N*M sorted positions.
inline std::vector<double> stratified_samples(const Ray& ray, const std::vector<double>& delta, int m, Rng& rng) {
    std::vector<double> ts;
    ts.reserve(delta.size() * static_cast<size_t>(m));
    double t0 = ray.tn;
    for (double di : delta) {
        for (int j = 0; j < m; ++j) ts.push_back(t0 + (j + rng.uniform()) / m * di);
        t0 += di;
    }
    return ts;
}

// Per-interval exact averages of the analytic scene (quadrature path).
template <typename SceneT>
PiecewiseEstimates scene_interval_averages(const SceneT& scene, const Ray& ray,
                                           const std::vector<double>& delta, double tol = 1e-9) {
    PiecewiseEstimates est;
    auto ts = partition_points(ray, delta);
    for (size_t i = 0; i < delta.size(); ++i) {
        const double len = delta[i];
        est.sigma_bar.push_back(
            adaptive_simpson([&](double t) { return scene.density(ray.at(t)); }, ts[i], ts[i + 1], tol) / len);
        std::array<double, 3> c{};
        for (int ch = 0; ch < 3; ++ch)
            c[static_cast<size_t>(ch)] = adaptive_simpson(
                                             [&](double t) {
                                                 return scene.color(ray.at(t), ray.d)[static_cast<size_t>(ch)];
                                             },
                                             ts[i], ts[i + 1], tol) /
                                         len;
        est.c_bar.push_back(c);
    }
    return est;
}

template <typename SceneT>
Vec3 piecewise_render_quadrature(const SceneT& scene, const Ray& ray, const std::vector<double>& delta,
                                 double tol = 1e-9) {
    return max_quadrature_combine(scene_interval_averages(scene, ray, delta, tol), delta);
}

// --- networks ---------------------------------------------------------------

inline MLPSpec default_sigma_spec(std::vector<int> hidden = {24, 24}, int point_L = 4) {
    MLPSpec spec;
    spec.slots = {{"o", 3, false}, {"t", 1, true}, {"d", 3, false}};
    spec.ray_point = true;
    spec.blocks = {{"point", point_L, true}};
    spec.hidden = std::move(hidden);
    spec.nl.kind = NonlinKind::Swish;
    spec.out_width = 1;
    return spec;
}

inline MLPSpec default_color_spec(std::vector<int> hidden = {24, 24}, int point_L = 4, int dir_L = 2) {
    MLPSpec spec = default_sigma_spec(std::move(hidden), point_L);
    spec.blocks = {{"point", point_L, true}, {"d", dir_L, true}};
    spec.out_width = 3;
    return spec;
}

// Sampling network S(o, d) -> N logits; a plain MLP, not an AutoInt pair.
inline MLPSpec sampler_spec(int sections, std::vector<int> hidden = {16}) {
    MLPSpec spec;
    spec.slots = {{"o", 3, false}, {"t", 1, true}, {"d", 3, false}};
    spec.blocks = {{"o", 0, true}, {"d", 0, true}};
    spec.hidden = std::move(hidden);
    spec.nl.kind = NonlinKind::Swish;
    spec.out_width = sections;
    return spec;
}

inline constexpr double kDeltaFloorFraction = 1e-4;

// softmax with a floor: delta_i = len * ((1 - N f) p_i + f), so every
// interval keeps at least f * len length and the sum is exactly len.
inline std::vector<double> delta_from_logits(const Vec& logits, double tn, double tf,
                                             std::vector<double>* softmax_out = nullptr) {
    const size_t n = logits.size();
    const double len = tf - tn;
    double mx = logits[0];
    for (double v : logits) mx = std::max(mx, v);
    std::vector<double> p(n);
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (auto& v : p) v /= z;
    if (softmax_out != nullptr) *softmax_out = p;
    std::vector<double> delta(n);
    const double f = kDeltaFloorFraction;
    for (size_t i = 0; i < n; ++i) delta[i] = len * ((1.0 - static_cast<double>(n) * f) * p[i] + f);
    return delta;
}

// d(loss)/d(logits) given d(loss)/d(delta).
inline Vec delta_backward_to_logits(const std::vector<double>& softmax, const std::vector<double>& ddelta, double tn,
                                    double tf) {
    const size_t n = softmax.size();
    const double len = tf - tn;
    const double scale = len * (1.0 - static_cast<double>(n) * kDeltaFloorFraction);
    std::vector<double> dp(n);
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
        dp[i] = scale * ddelta[i];
        mean += softmax[i] * dp[i];
    }
    Vec dlogits(n);
    for (size_t i = 0; i < n; ++i) dlogits[i] = Scalar(softmax[i] * (dp[i] - mean));
    return dlogits;
}

// Bundled state of one scene model.
struct NvrModel {
    MLPSpec sigma_spec, color_spec, sampler_mlp_spec;
    AutoIntPair sigma, color;
    ComputeGraph sampler_graph;
    std::shared_ptr<ParamStore> sampler_params;
    bool use_sampler = true;
    int sections = 8;
};

inline NvrModel make_nvr_model(const MLPSpec& sigma_spec, const MLPSpec& color_spec, int sections, bool use_sampler,
                               uint64_t seed) {
    NvrModel m;
    m.sigma_spec = sigma_spec;
    m.color_spec = color_spec;
    m.sampler_mlp_spec = sampler_spec(sections);
    m.sections = sections;
    m.use_sampler = use_sampler;
    m.sigma = make_autoint_pair(sigma_spec, splitmix64(seed ^ 0x5157a1));
    m.color = make_autoint_pair(color_spec, splitmix64(seed ^ 0xc0105));
    m.sampler_params = init_params(m.sampler_mlp_spec, splitmix64(seed ^ 0x5a3b1e));
    m.sampler_graph = build_integral_network(m.sampler_mlp_spec, *m.sampler_params);
    return m;
}

inline std::vector<double> model_delta(const NvrModel& m, Executor& sampler_exec, const Ray& ray,
                                       std::vector<double>* softmax_out = nullptr) {
    if (!m.use_sampler) {
        if (softmax_out != nullptr)
            softmax_out->assign(static_cast<size_t>(m.sections), 1.0 / m.sections);
        return uniform_delta(ray, m.sections);
    }
    Inputs in(m.sampler_graph);
    in.set(m.sampler_graph, "o", {ray.o[0], ray.o[1], ray.o[2]});
    in.set(m.sampler_graph, "d", {ray.d[0], ray.d[1], ray.d[2]});
    sampler_exec.forward(in);
    return delta_from_logits(sampler_exec.output(), ray.tn, ray.tf, softmax_out);
}

// Density/color heads act on per-interval averages of the raw grad outputs:
// training averages stratified Monte-Carlo samples of Psi, inference averages
// by the exact Newton-Leibniz difference of Phi. Both routes estimate the
// same raw integral, so Phi stays an exact antiderivative and the two paths
// agree up to Monte-Carlo error.
inline double density_head(double raw_mean) { return softplus(raw_mean); }
inline double color_head(double raw_mean) { return sigmoid(raw_mean); }

struct AutoIntRenderCounts {
    long long distinct_points = 0;   // N+1 per network
    long long logical_evals = 0;     // 2N per network
};

// Two-evaluations-per-interval inference; adjacent intervals share endpoints,
// so each integral network is evaluated at N+1 distinct points per ray.
inline Vec3 autoint_render(const NvrModel& m, Executor& sigma_phi, Executor& color_phi, Executor& sampler_exec,
                           const Ray& ray, AutoIntRenderCounts* counts = nullptr) {
    const std::vector<double> delta = model_delta(m, sampler_exec, ray);
    const auto ts = partition_points(ray, delta);
    const size_t n = delta.size();

    Inputs sin_(m.sigma.integral);
    sin_.set(m.sigma.integral, "o", {ray.o[0], ray.o[1], ray.o[2]});
    sin_.set(m.sigma.integral, "d", {ray.d[0], ray.d[1], ray.d[2]});
    Inputs cin(m.color.integral);
    cin.set(m.color.integral, "o", {ray.o[0], ray.o[1], ray.o[2]});
    cin.set(m.color.integral, "d", {ray.d[0], ray.d[1], ray.d[2]});

    std::vector<double> phi_sigma(n + 1);
    std::vector<std::array<double, 3>> phi_color(n + 1);
    for (size_t k = 0; k <= n; ++k) {
        sin_.set_var(m.sigma.integral, ts[k]);
        sigma_phi.forward(sin_);
        phi_sigma[k] = sigma_phi.output()[0];
        cin.set_var(m.color.integral, ts[k]);
        color_phi.forward(cin);
        for (int ch = 0; ch < 3; ++ch) phi_color[k][static_cast<size_t>(ch)] = color_phi.output()[static_cast<size_t>(ch)];
    }
    if (counts != nullptr) {
        counts->distinct_points += static_cast<long long>(n) + 1;
        counts->logical_evals += 2 * static_cast<long long>(n);
    }

    PiecewiseEstimates est;
    est.sigma_bar.resize(n);
    est.c_bar.resize(n);
    for (size_t i = 0; i < n; ++i) {
        est.sigma_bar[i] = density_head((phi_sigma[i + 1] - phi_sigma[i]) / delta[i]);
        for (int ch = 0; ch < 3; ++ch)
            est.c_bar[i][static_cast<size_t>(ch)] =
                color_head((phi_color[i + 1][static_cast<size_t>(ch)] - phi_color[i][static_cast<size_t>(ch)]) / delta[i]);
    }
    return max_quadrature_combine(est, delta);
}

// Monte-Carlo estimates of the same per-interval integrals from the grad
// networks (the training-time path).
inline Vec3 network_mc_render(const NvrModel& m, Executor& sigma_psi, Executor& color_psi, Executor& sampler_exec,
                              const Ray& ray, int samples_per_section, Rng& rng) {
    const std::vector<double> delta = model_delta(m, sampler_exec, ray);
    const size_t n = delta.size();
    const auto samples = stratified_samples(ray, delta, samples_per_section, rng);

    Inputs sin_(m.sigma.grad);
    sin_.set(m.sigma.grad, "o", {ray.o[0], ray.o[1], ray.o[2]});
    sin_.set(m.sigma.grad, "d", {ray.d[0], ray.d[1], ray.d[2]});
    Inputs cin(m.color.grad);
    cin.set(m.color.grad, "o", {ray.o[0], ray.o[1], ray.o[2]});
    cin.set(m.color.grad, "d", {ray.d[0], ray.d[1], ray.d[2]});

    PiecewiseEstimates est;
    est.sigma_bar.assign(n, 0.0);
    est.c_bar.assign(n, {0.0, 0.0, 0.0});
    for (size_t i = 0; i < n; ++i) {
        double ms = 0.0;
        std::array<double, 3> mc{};
        for (int j = 0; j < samples_per_section; ++j) {
            const double t = samples[i * static_cast<size_t>(samples_per_section) + static_cast<size_t>(j)];
            sin_.set_var(m.sigma.grad, t);
            sigma_psi.forward(sin_);
            ms += sigma_psi.output()[0] / samples_per_section;
            cin.set_var(m.color.grad, t);
            color_psi.forward(cin);
            for (int ch = 0; ch < 3; ++ch)
                mc[static_cast<size_t>(ch)] += color_psi.output()[static_cast<size_t>(ch)] / samples_per_section;
        }
        est.sigma_bar[i] = density_head(ms);
        for (int ch = 0; ch < 3; ++ch) est.c_bar[i][static_cast<size_t>(ch)] = color_head(mc[static_cast<size_t>(ch)]);
    }
    return max_quadrature_combine(est, delta);
}

// --- cameras and images -------------------------------------------------------

struct Camera {
    Vec3 position{0, 0, 3};
    Vec3 look_at{0, 0, 0};
    Vec3 up{0, 0, 1};
    double fov_deg = 45.0;
};

inline Ray camera_ray(const Camera& cam, int px, int py, int width, int height, double tn, double tf) {
    const Vec3 fwd = normalized(cam.look_at - cam.position);
    const Vec3 right = normalized(cross(fwd, cam.up));
    const Vec3 up = cross(right, fwd);
    const double tanf = std::tan(cam.fov_deg * 3.14159265358979323846 / 360.0);
    const double aspect = static_cast<double>(width) / height;
    const double u = ((px + 0.5) / width * 2.0 - 1.0) * tanf * aspect;
    const double v = (1.0 - (py + 0.5) / height * 2.0) * tanf;
    Ray ray;
    ray.o = cam.position;
    ray.d = normalized(fwd + u * right + v * up);
    ray.tn = tn;
    ray.tf = tf;
    return ray;
}

// Deterministic poses on a sphere around the origin (golden-angle spiral over
// a band of elevations).
inline std::vector<Camera> sphere_poses(int count, double radius, double fov_deg) {
    std::vector<Camera> cams;
    const double golden = 2.39996322972865332;
    for (int i = 0; i < count; ++i) {
        const double elev = -0.35 + 1.0 * (count == 1 ? 0.5 : static_cast<double>(i) / (count - 1));
        const double azim = golden * i;
        Camera cam;
        cam.position = {radius * std::cos(azim) * std::cos(elev), radius * std::sin(azim) * std::cos(elev),
                        radius * std::sin(elev)};
        cam.fov_deg = fov_deg;
        cams.push_back(cam);
    }
    return cams;
}

struct Image {
    int width = 0, height = 0;
    std::vector<double> rgb;  // row-major, [0,1] at write-out

    double& at(int x, int y, int ch) { return rgb[(static_cast<size_t>(y) * width + x) * 3 + ch]; }
    double at(int x, int y, int ch) const { return rgb[(static_cast<size_t>(y) * width + x) * 3 + ch]; }
};

inline Image render_image_with(const std::function<Vec3(const Ray&)>& shader, const Camera& cam, int width,
                               int height, double tn, double tf, long long* ray_count = nullptr) {
    Image img;
    img.width = width;
    img.height = height;
    img.rgb.assign(static_cast<size_t>(width) * height * 3, 0.0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Ray ray = camera_ray(cam, x, y, width, height, tn, tf);
            const Vec3 c = shader(ray);
            for (int ch = 0; ch < 3; ++ch) img.at(x, y, ch) = c[static_cast<size_t>(ch)];
            if (ray_count != nullptr) ++(*ray_count);
        }
    return img;
}

inline Image render_image(const NvrModel& m, const Camera& cam, int width, int height, double tn, double tf,
                          AutoIntRenderCounts* counts = nullptr) {
    Executor sigma_phi(m.sigma.integral, *m.sigma.params);
    Executor color_phi(m.color.integral, *m.color.params);
    Executor sampler_exec(m.sampler_graph, *m.sampler_params);
    return render_image_with(
        [&](const Ray& ray) { return autoint_render(m, sigma_phi, color_phi, sampler_exec, ray, counts); }, cam,
        width, height, tn, tf);
}

inline double image_psnr(const Image& a, const Image& b) {
    double mse = 0.0;
    for (size_t i = 0; i < a.rgb.size(); ++i) {
        const double va = std::clamp(a.rgb[i], 0.0, 1.0);
        const double vb = std::clamp(b.rgb[i], 0.0, 1.0);
        mse += (va - vb) * (va - vb) / static_cast<double>(a.rgb.size());
    }
    if (mse <= 0) return 99.0;
    return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

// --- training -----------------------------------------------------------------

struct NvrConfig {
    std::string scene = "blob";
    int sections = 8;
    int samples_per_section = 16;  // M; the reference schedule uses 128/N
    double tn = 1.2, tf = 4.8;
    int image_width = 16, image_height = 16;
    int train_poses = 12, test_poses = 4;
    double camera_radius = 3.0;
    double fov_deg = 40.0;
    int batch_rays = 16;
    bool use_sampler = true;
    double oracle_tol = 1e-5;
    TrainConfig train;
};

struct NvrDataset {
    std::vector<Camera> cameras;
    std::vector<Image> images;
};

inline NvrDataset render_dataset(const AnalyticScene& scene, const std::vector<Camera>& cams, const NvrConfig& cfg,
                                 int threads = 1) {
    NvrDataset ds;
    ds.cameras = cams;
    ds.images.resize(cams.size());
    parallel_for(static_cast<int>(cams.size()), threads, [&](int i) {
        ds.images[static_cast<size_t>(i)] =
            render_image_with([&](const Ray& r) { return reference_render(scene, r, cfg.oracle_tol); },
                              cams[static_cast<size_t>(i)], cfg.image_width, cfg.image_height, cfg.tn, cfg.tf);
    });
    return ds;
}

struct NvrTrainResult {
    NvrModel model;
    TrainLog log;
};

// Executors and scratch buffers bound to one model; reused across iterations.
struct NvrWorkspace {
    Executor sigma_psi, color_psi, sampler_exec;
    int t_slot_sigma, t_slot_color;

    explicit NvrWorkspace(const NvrModel& m)
        : sigma_psi(m.sigma.grad, *m.sigma.params),
          color_psi(m.color.grad, *m.color.params),
          sampler_exec(m.sampler_graph, *m.sampler_params),
          t_slot_sigma(m.sigma.grad.slot_index("t")),
          t_slot_color(m.color.grad.slot_index("t")) {}
};

// One training batch: renders cfg.batch_rays rays through the Max quadrature
// rule, accumulates gradients for both grad networks and (via the explicit
// delta terms and the reparameterized sample positions) the sampling network.
// Returns the batch loss. Fully deterministic in (seed, iter).
inline double nvr_batch_gradients(const NvrModel& m, NvrWorkspace& ws, const NvrDataset& data, const NvrConfig& cfg,
                                  long long iter, GradientSet* sigma_grads, GradientSet* color_grads,
                                  GradientSet* sampler_grads) {
    const int n = cfg.sections, msamp = cfg.samples_per_section;
    Rng rng = Rng::substream(cfg.train.seed, "nvr.batch", static_cast<uint64_t>(iter));
    double loss = 0.0;

    Inputs sin_(m.sigma.grad), cin(m.color.grad);
    std::vector<double> us(static_cast<size_t>(n) * msamp);
    std::vector<double> tsamp(static_cast<size_t>(n) * msamp);

    for (int bray = 0; bray < cfg.batch_rays; ++bray) {
        const size_t img_idx = rng.uniform_index(data.images.size());
        const Image& img = data.images[img_idx];
        const int px = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(img.width)));
        const int py = static_cast<int>(rng.uniform_index(static_cast<uint64_t>(img.height)));
        const Ray ray = camera_ray(data.cameras[img_idx], px, py, img.width, img.height, cfg.tn, cfg.tf);

        std::vector<double> softmax;
        const std::vector<double> delta = model_delta(m, ws.sampler_exec, ray, &softmax);

        // reparameterized stratified draws
        for (auto& u : us) u = rng.uniform();

        sin_.set(m.sigma.grad, "o", {ray.o[0], ray.o[1], ray.o[2]});
        sin_.set(m.sigma.grad, "d", {ray.d[0], ray.d[1], ray.d[2]});
        cin.set(m.color.grad, "o", {ray.o[0], ray.o[1], ray.o[2]});
        cin.set(m.color.grad, "d", {ray.d[0], ray.d[1], ray.d[2]});

        // forward all samples, recording per-interval raw means
        PiecewiseEstimates est;
        est.sigma_bar.assign(static_cast<size_t>(n), 0.0);
        est.c_bar.assign(static_cast<size_t>(n), {0.0, 0.0, 0.0});
        std::vector<double> mean_sigma(static_cast<size_t>(n), 0.0);
        std::vector<std::array<double, 3>> mean_color(static_cast<size_t>(n), {0.0, 0.0, 0.0});
        double t0 = ray.tn;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < msamp; ++j) {
                const size_t k = static_cast<size_t>(i) * msamp + static_cast<size_t>(j);
                tsamp[k] = t0 + (j + us[k]) / msamp * delta[static_cast<size_t>(i)];
                sin_.set_var(m.sigma.grad, tsamp[k]);
                ws.sigma_psi.forward(sin_);
                mean_sigma[static_cast<size_t>(i)] += ws.sigma_psi.output()[0] / msamp;
                cin.set_var(m.color.grad, tsamp[k]);
                ws.color_psi.forward(cin);
                for (int ch = 0; ch < 3; ++ch)
                    mean_color[static_cast<size_t>(i)][static_cast<size_t>(ch)] +=
                        ws.color_psi.output()[static_cast<size_t>(ch)] / msamp;
            }
            t0 += delta[static_cast<size_t>(i)];
        }
        for (int i = 0; i < n; ++i) {
            est.sigma_bar[static_cast<size_t>(i)] = density_head(mean_sigma[static_cast<size_t>(i)]);
            for (int ch = 0; ch < 3; ++ch)
                est.c_bar[static_cast<size_t>(i)][static_cast<size_t>(ch)] =
                    color_head(mean_color[static_cast<size_t>(i)][static_cast<size_t>(ch)]);
        }

        const Vec3 rendered = max_quadrature_combine(est, delta);
        Vec3 upstream;
        for (int ch = 0; ch < 3; ++ch) {
            const double diff = rendered[static_cast<size_t>(ch)] - img.at(px, py, ch);
            loss += diff * diff / cfg.batch_rays;
            upstream[static_cast<size_t>(ch)] = 2.0 * diff / cfg.batch_rays;
        }
        if (sigma_grads == nullptr) continue;  // loss-only evaluation

        MaxQuadratureBackward rb = max_quadrature_backward(est, delta, upstream);

        // heads: softplus'(mean) = sigmoid(mean); sigmoid' = s(1 - s)
        std::vector<double> dmean_sigma(static_cast<size_t>(n));
        std::vector<std::array<double, 3>> dmean_color(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            dmean_sigma[static_cast<size_t>(i)] =
                rb.dsigma_bar[static_cast<size_t>(i)] * sigmoid(mean_sigma[static_cast<size_t>(i)]);
            for (int ch = 0; ch < 3; ++ch) {
                const double s = est.c_bar[static_cast<size_t>(i)][static_cast<size_t>(ch)];
                dmean_color[static_cast<size_t>(i)][static_cast<size_t>(ch)] =
                    rb.dc_bar[static_cast<size_t>(i)][static_cast<size_t>(ch)] * s * (1.0 - s);
            }
        }

        // backward every sample; collect dL/dt for the sampler chain
        std::vector<double> dt(static_cast<size_t>(n) * msamp, 0.0);
        InputGradients sig_in_grads, col_in_grads;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < msamp; ++j) {
                const size_t k = static_cast<size_t>(i) * msamp + static_cast<size_t>(j);
                const double wsig = dmean_sigma[static_cast<size_t>(i)] / msamp;
                sin_.set_var(m.sigma.grad, tsamp[k]);
                ws.sigma_psi.forward(sin_);
                sig_in_grads.by_slot.clear();
                ws.sigma_psi.backward({{Scalar(wsig)}}, *sigma_grads, &sig_in_grads);
                dt[k] += sig_in_grads.by_slot[static_cast<size_t>(ws.t_slot_sigma)][0];

                Vec cup(3);
                for (int ch = 0; ch < 3; ++ch)
                    cup[static_cast<size_t>(ch)] =
                        Scalar(dmean_color[static_cast<size_t>(i)][static_cast<size_t>(ch)] / msamp);
                cin.set_var(m.color.grad, tsamp[k]);
                ws.color_psi.forward(cin);
                col_in_grads.by_slot.clear();
                ws.color_psi.backward({cup}, *color_grads, &col_in_grads);
                dt[k] += col_in_grads.by_slot[static_cast<size_t>(ws.t_slot_color)][0];
            }
        }

        if (m.use_sampler && sampler_grads != nullptr) {
            // dL/ddelta: explicit renderer term + through sample positions
            std::vector<double> ddelta = rb.ddelta;
            double dt_suffix = 0.0;  // sum of dt over samples in later intervals
            for (int i = n; i-- > 0;) {
                for (int j = 0; j < msamp; ++j) {
                    const size_t k = static_cast<size_t>(i) * msamp + static_cast<size_t>(j);
                    ddelta[static_cast<size_t>(i)] += dt[k] * (j + us[k]) / msamp;
                }
                ddelta[static_cast<size_t>(i)] += dt_suffix;
                for (int j = 0; j < msamp; ++j) dt_suffix += dt[static_cast<size_t>(i) * msamp + static_cast<size_t>(j)];
            }
            const Vec dlogits = delta_backward_to_logits(softmax, ddelta, ray.tn, ray.tf);
            Inputs samp_in(m.sampler_graph);
            samp_in.set(m.sampler_graph, "o", {ray.o[0], ray.o[1], ray.o[2]});
            samp_in.set(m.sampler_graph, "d", {ray.d[0], ray.d[1], ray.d[2]});
            ws.sampler_exec.forward(samp_in);
            ws.sampler_exec.backward({dlogits}, *sampler_grads);
        }
    }
    return loss;
}

// Joint optimization of both grad networks and the sampling network through
// the Max quadrature rule and the reparameterized stratified samples.
inline NvrTrainResult train_nvr(const NvrDataset& data, const MLPSpec& sigma_spec, const MLPSpec& color_spec,
                                const NvrConfig& cfg) {
    NvrTrainResult result{make_nvr_model(sigma_spec, color_spec, cfg.sections, cfg.use_sampler, cfg.train.seed), {}};
    NvrModel& m = result.model;

    NvrWorkspace ws(m);
    GradientSet sigma_grads(*m.sigma.params), color_grads(*m.color.params), sampler_grads(*m.sampler_params);
    AdamState sigma_adam(*m.sigma.params), color_adam(*m.color.params), sampler_adam(*m.sampler_params);

    result.log.rows.reserve(static_cast<size_t>(cfg.train.max_iters));
    for (long long iter = 0; iter < cfg.train.max_iters; ++iter) {
        sigma_grads.zero();
        color_grads.zero();
        sampler_grads.zero();
        const double loss = nvr_batch_gradients(m, ws, data, cfg, iter, &sigma_grads, &color_grads, &sampler_grads);
        const double lr = lr_at(cfg.train, iter);
        if (!std::isfinite(loss)) throw NumericAbort("nvr loss is not finite", iter, lr);
        adam_step(*m.sigma.params, sigma_grads, sigma_adam, lr);
        adam_step(*m.color.params, color_grads, color_adam, lr);
        if (m.use_sampler) adam_step(*m.sampler_params, sampler_grads, sampler_adam, lr);
        result.log.rows.push_back({iter, loss, lr});
    }
    return result;
}

}  // namespace nvr
}  // namespace autoint
