#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "autoint/checkpoint.hpp"
#include "autoint/image_io.hpp"
#include "autoint/log.hpp"
#include "autoint/tomography.hpp"
#include "autoint/train.hpp"
#include "autoint/volrender.hpp"

namespace fs = std::filesystem;
using namespace autoint;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitMissingArtifact = 3;
constexpr int kExitNumeric = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingArtifact : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

class PhaseTimer {
public:
    void begin(const std::string& name) {
        end();
        name_ = name;
        start_ = now_seconds();
    }
    void end() {
        if (!name_.empty()) rows_.emplace_back(name_, now_seconds() - start_);
        name_.clear();
    }
    // wall-clock goes to stdout only; artifact files stay byte-reproducible
    void report() {
        end();
        double total = 0;
        for (const auto& [name, secs] : rows_) {
            std::printf("phase %-14s %8.2f s\n", name.c_str(), secs);
            total += secs;
        }
        std::printf("phase %-14s %8.2f s\n", "total", total);
    }

private:
    std::string name_;
    double start_ = 0;
    std::vector<std::pair<std::string, double>> rows_;
};

// strict schema: unknown keys are configuration errors
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + ": expected an object");
    for (const auto& [key, value] : j.items())
        if (allowed.find(key) == allowed.end()) throw ConfigError(context + ": unknown key '" + key + "'");
}

json load_config(const std::string& path, const std::string& expected_task) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw ConfigError("config must declare \"version\": 1");
    if (!j.contains("task") || j.at("task").get<std::string>() != expected_task)
        throw ConfigError("config task must be \"" + expected_task + "\"");
    if (!j.contains("seed")) throw ConfigError("config must declare a seed");
    return j;
}

TrainConfig train_config_from(const json& j, uint64_t seed) {
    check_keys(j, {"iters", "lr", "decay_factor", "decay_every"}, "train");
    TrainConfig cfg;
    cfg.max_iters = j.value("iters", 1000);
    cfg.learning_rate = j.value("lr", 5e-4);
    cfg.decay_factor = j.value("decay_factor", 0.2);
    cfg.decay_every = j.value("decay_every", static_cast<long long>(100000));
    cfg.seed = seed;
    return cfg;
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory: " + out);
}

// ---------------------------------------------------------------- fit1d ----

struct Target1D {
    std::function<double(double)> f;          // signal to fit
    std::function<double(double)> antideriv;  // analytic antiderivative
};

Target1D named_target(const std::string& name) {
    if (name == "cos") return {[](double x) { return std::cos(x); }, [](double x) { return std::sin(x); }};
    if (name == "poly")
        return {[](double x) { return 3.0 * x * x - 2.0 * x; }, [](double x) { return x * x * x - x * x; }};
    if (name == "gaussian")
        return {[](double x) { return std::exp(-0.5 * x * x); },
                [](double x) { return std::sqrt(3.14159265358979323846 / 2.0) * std::erf(x / std::sqrt(2.0)); }};
    throw ConfigError("unknown fit1d target: " + name);
}

MLPSpec fit1d_spec(const json& net) {
    check_keys(net, {"hidden", "nonlinearity", "encoding_L", "normalized", "omega0", "beta", "raw_block"}, "net");
    MLPSpec spec;
    spec.slots = {{"x", 1, true}};
    const int L = net.value("encoding_L", 0);
    if (L > 0) spec.blocks.push_back({"x", L, net.value("normalized", true)});
    if (net.value("raw_block", true) || L == 0) spec.blocks.push_back({"x", 0, true});
    spec.hidden = net.value("hidden", std::vector<int>{24, 24});
    spec.nl.kind = nonlin_from_name(net.value("nonlinearity", std::string("swish")));
    spec.nl.omega0 = net.value("omega0", 30.0);
    spec.nl.beta = net.value("beta", 1.0);
    return spec;
}

int cmd_fit1d(const std::string& config_path, uint64_t seed_override, bool has_seed_override,
              const std::string& out_dir, int threads) {
    (void)threads;
    json cfg = load_config(config_path, "fit1d");
    check_keys(cfg,
               {"version", "task", "seed", "target", "domain", "net", "train", "eval_intervals", "batch",
                "checkpoint_every"},
               "config");
    const uint64_t seed = has_seed_override ? seed_override : cfg.at("seed").get<uint64_t>();
    const std::string target_name = cfg.value("target", std::string("cos"));
    const Target1D target = named_target(target_name);
    const std::vector<double> domain =
        cfg.value("domain", std::vector<double>{-3.14159265358979323846, 3.14159265358979323846});
    if (domain.size() != 2 || domain[0] >= domain[1]) throw ConfigError("domain must be [lo, hi]");
    const int batch = cfg.value("batch", 128);
    const int eval_intervals = cfg.value("eval_intervals", 20);

    MLPSpec spec = fit1d_spec(cfg.value("net", json::object()));
    TrainConfig tcfg = train_config_from(cfg.value("train", json::object()), seed);

    ensure_out_dir(out_dir);
    PhaseTimer timer;
    timer.begin("train");
    AutoIntPair pair = make_autoint_pair(spec, seed);
    auto sampler = [&](long long iter, std::vector<BatchSample>& out) {
        Rng rng = Rng::substream(seed, "fit1d.batch", static_cast<uint64_t>(iter));
        out.clear();
        for (int i = 0; i < batch; ++i) {
            const double x = rng.uniform(domain[0], domain[1]);
            out.push_back({{{Scalar(x)}}, {Scalar(target.f(x))}});
        }
    };
    const long long checkpoint_every = cfg.value("checkpoint_every", static_cast<long long>(0));
    auto on_checkpoint = [&](long long iter) {
        char name[64];
        std::snprintf(name, sizeof(name), "/checkpoint_%06lld.json", iter);
        save_checkpoint(out_dir + name, spec, seed, *pair.params);
    };
    TrainLog log = fit_grad_network(pair, sampler, tcfg, checkpoint_every, on_checkpoint);
    timer.end();

    log.write_csv(out_dir + "/loss.csv");
    save_checkpoint(out_dir + "/checkpoint.json", spec, seed, *pair.params);

    timer.begin("integrate");
    Executor iex(pair.integral, *pair.params);
    Rng rng = Rng::substream(seed, "fit1d.eval");
    std::ostringstream table;
    table << "a,b,autoint,analytic,abs_err\n";
    for (int k = 0; k < eval_intervals; ++k) {
        double a = rng.uniform(domain[0], domain[1]);
        double b = rng.uniform(domain[0], domain[1]);
        if (a > b) std::swap(a, b);
        IntegralBounds bounds{Inputs(pair.integral), Scalar(a), Scalar(b)};
        const double got = definite_integral(iex, bounds)[0];
        const double want = target.antideriv(b) - target.antideriv(a);
        table << format_double(a) << "," << format_double(b) << "," << format_double(got) << ","
              << format_double(want) << "," << format_double(std::fabs(got - want)) << "\n";
    }
    write_text_file(out_dir + "/integrals.csv", table.str());
    timer.end();

    {
        // reuse metric of the grad network under the cached schedule
        Executor gex(pair.grad, *pair.params);
        Inputs probe(pair.grad);
        probe.set_var(pair.grad, 0.5 * (domain[0] + domain[1]));
        EvalReport naive = gex.evaluate_naive(probe);
        std::printf("reuse: %lld unique node evals per pass vs %lld naive refs\n", gex.unique_evals_per_pass(),
                    naive.total_node_refs);
    }
    std::printf("fit1d %s: final loss %.6g, artifacts in %s\n", target_name.c_str(), log.rows.back().loss,
                out_dir.c_str());
    timer.report();
    return kExitOk;
}

// ------------------------------------------------------------------- ct ----

ct::Phantom named_phantom(const std::string& name) {
    if (name == "shepp-logan") return ct::shepp_logan_phantom();
    if (name == "disk") return ct::disk_phantom(0.5, 1.0);
    throw ConfigError("unknown phantom: " + name);
}

struct CtSetup {
    uint64_t seed = 0;
    std::string phantom_name;
    int rows = 0, cols = 0, factor = 1;
    double oracle_tol = 1e-6;
    int samples_per_ray = 16, batch_rays = 32;
    std::vector<int> hidden;
    std::vector<NonlinKind> kinds;
    TrainConfig tcfg;
};

CtSetup ct_setup(const json& cfg, uint64_t seed_override, bool has_seed_override) {
    check_keys(cfg,
               {"version", "task", "seed", "phantom", "grid", "subsample", "oracle_tol", "samples_per_ray",
                "batch_rays", "nonlinearities", "net", "train"},
               "config");
    CtSetup s;
    s.seed = has_seed_override ? seed_override : cfg.at("seed").get<uint64_t>();
    s.phantom_name = cfg.value("phantom", std::string("shepp-logan"));
    const json grid = cfg.value("grid", json{{"rho", 128}, {"angles", 96}});
    check_keys(grid, {"rho", "angles"}, "grid");
    s.rows = grid.value("rho", 128);
    s.cols = grid.value("angles", 96);
    s.factor = cfg.value("subsample", 1);
    if (s.factor < 1 || s.cols % s.factor != 0) throw ConfigError("subsample factor must divide the angle count");
    s.oracle_tol = cfg.value("oracle_tol", 1e-6);
    s.samples_per_ray = cfg.value("samples_per_ray", 16);
    s.batch_rays = cfg.value("batch_rays", 32);
    const json net = cfg.value("net", json::object());
    check_keys(net, {"hidden"}, "net");
    s.hidden = net.value("hidden", std::vector<int>{32, 32});
    for (const auto& n : cfg.value("nonlinearities", std::vector<std::string>{"swish"}))
        s.kinds.push_back(nonlin_from_name(n));
    if (s.kinds.empty()) throw ConfigError("nonlinearities must not be empty");
    s.tcfg = train_config_from(cfg.value("train", json::object()), s.seed);
    return s;
}

void write_sinogram_artifacts(const std::string& stem, const ct::Sinogram& sino, double peak) {
    write_pgm16(stem + ".pgm", sino.values, sino.cols, sino.rows, peak);
    write_text_file(stem + ".csv", sino.to_csv());
}

int cmd_ct(const std::string& mode, const std::string& config_path, uint64_t seed_override, bool has_seed_override,
           const std::string& out_dir, int threads) {
    json cfg = load_config(config_path, "ct");
    CtSetup s = ct_setup(cfg, seed_override, has_seed_override);
    ensure_out_dir(out_dir);
    PhaseTimer timer;

    timer.begin("oracle");
    const ct::Phantom phantom = named_phantom(s.phantom_name);
    ct::Sinogram truth = make_sinogram(phantom, s.rows, s.cols, s.oracle_tol, threads);
    const double peak = *std::max_element(truth.values.begin(), truth.values.end());
    ct::Sinogram masked = ct::subsample_angles(truth, s.factor);
    timer.end();

    if (mode == "train") {
        const std::vector<double> raster = ct::rasterize_phantom(phantom, 256);
        const double raster_peak = *std::max_element(raster.begin(), raster.end());
        write_pgm16(out_dir + "/phantom.pgm", raster, 256, 256, raster_peak > 0 ? raster_peak : 1.0);
        write_sinogram_artifacts(out_dir + "/sinogram_truth", truth, peak);
        std::ostringstream mask_csv;
        mask_csv << "column,supervised\n";
        for (int j = 0; j < masked.cols; ++j)
            mask_csv << j << "," << (masked.supervised[static_cast<size_t>(j)] ? 1 : 0) << "\n";
        write_text_file(out_dir + "/mask.csv", mask_csv.str());
        ct::Sinogram masked_vis = masked;
        for (int i = 0; i < masked_vis.rows; ++i)
            for (int j = 0; j < masked_vis.cols; ++j)
                if (!masked_vis.supervised[static_cast<size_t>(j)]) masked_vis.at(i, j) = 0.0;
        write_sinogram_artifacts(out_dir + "/sinogram_masked", masked_vis, peak);
    }

    std::ostringstream psnr_csv;
    psnr_csv << "nonlinearity,psnr_all,psnr_supervised,psnr_masked,final_loss\n";
    for (NonlinKind kind : s.kinds) {
        const std::string name = nonlin_name(kind);
        const std::string ckpt_path = out_dir + "/checkpoint_" + name + ".json";
        AutoIntPair pair;
        double final_loss = 0.0;
        if (mode == "train") {
            timer.begin("train-" + name);
            ct::CtTrainResult r =
                ct::train_ct(masked, ct::default_ct_spec(kind, s.hidden), s.tcfg, s.samples_per_ray, s.batch_rays);
            timer.end();
            r.log.write_csv(out_dir + "/loss_" + name + ".csv");
            save_checkpoint(ckpt_path, r.spec, s.seed, *r.pair.params);
            pair = std::move(r.pair);
            final_loss = r.log.rows.empty() ? 0.0 : r.log.rows.back().loss;
            Executor gex(pair.grad, *pair.params);
            Inputs probe(pair.grad);
            EvalReport naive = gex.evaluate_naive(probe);
            std::printf("reuse (%s grad network): %lld unique node evals per pass vs %lld naive refs\n",
                        name.c_str(), gex.unique_evals_per_pass(), naive.total_node_refs);
        } else {
            if (!fs::exists(ckpt_path)) throw MissingArtifact("missing checkpoint: " + ckpt_path);
            pair = pair_from_network(load_checkpoint(ckpt_path));
        }

        timer.begin("inpaint-" + name);
        ct::InpaintResult inpainted = ct::inpaint_sinogram(pair, s.rows, s.cols, threads);
        timer.end();
        inpainted.sino.supervised = masked.supervised;
        write_sinogram_artifacts(out_dir + "/sinogram_inpainted_" + name, inpainted.sino, peak);

        const double p_all = ct::psnr(truth.values, inpainted.sino.values, peak);
        const double p_sup = ct::psnr_columns(masked, inpainted.sino, true, peak);
        const double p_mask = s.factor > 1 ? ct::psnr_columns(masked, inpainted.sino, false, peak) : p_all;
        psnr_csv << name << "," << format_double(p_all) << "," << format_double(p_sup) << "," << format_double(p_mask)
                 << "," << format_double(final_loss) << "\n";
        std::printf("ct %s %s: psnr all %.2f dB, supervised %.2f dB, masked %.2f dB (%lld integral evals)\n",
                    mode.c_str(), name.c_str(), p_all, p_sup, p_mask, inpainted.integral_evaluations);
    }
    write_text_file(out_dir + (mode == "train" ? "/psnr.csv" : "/psnr_inpaint.csv"), psnr_csv.str());
    timer.report();
    return kExitOk;
}

// ------------------------------------------------------------------ nvr ----

struct NvrSetup {
    uint64_t seed = 0;
    nvr::NvrConfig ncfg;
    std::vector<int> sigma_hidden, color_hidden;
    int point_L = 4, dir_L = 2;
    std::vector<int> bench_sections;
};

NvrSetup nvr_setup(const json& cfg, uint64_t seed_override, bool has_seed_override) {
    check_keys(cfg,
               {"version", "task", "seed", "scene", "sections", "samples_per_section", "image", "poses", "camera",
                "bounds", "use_sampler", "oracle_tol", "batch_rays", "nets", "train", "bench_sections"},
               "config");
    NvrSetup s;
    s.seed = has_seed_override ? seed_override : cfg.at("seed").get<uint64_t>();
    nvr::NvrConfig& n = s.ncfg;
    n.scene = cfg.value("scene", std::string("blob"));
    n.sections = cfg.value("sections", 8);
    n.samples_per_section = cfg.value("samples_per_section", std::max(1, 128 / n.sections));
    const json img = cfg.value("image", json::object());
    check_keys(img, {"width", "height"}, "image");
    n.image_width = img.value("width", 16);
    n.image_height = img.value("height", 16);
    const json poses = cfg.value("poses", json::object());
    check_keys(poses, {"train", "test"}, "poses");
    n.train_poses = poses.value("train", 12);
    n.test_poses = poses.value("test", 4);
    const json cam = cfg.value("camera", json::object());
    check_keys(cam, {"radius", "fov_deg"}, "camera");
    n.camera_radius = cam.value("radius", 3.0);
    n.fov_deg = cam.value("fov_deg", 40.0);
    const json bounds = cfg.value("bounds", json::object());
    check_keys(bounds, {"near", "far"}, "bounds");
    n.tn = bounds.value("near", 1.2);
    n.tf = bounds.value("far", 4.8);
    n.use_sampler = cfg.value("use_sampler", true);
    n.oracle_tol = cfg.value("oracle_tol", 1e-5);
    n.batch_rays = cfg.value("batch_rays", 16);
    const json nets = cfg.value("nets", json::object());
    check_keys(nets, {"sigma_hidden", "color_hidden", "point_L", "dir_L"}, "nets");
    s.sigma_hidden = nets.value("sigma_hidden", std::vector<int>{24, 24});
    s.color_hidden = nets.value("color_hidden", std::vector<int>{24, 24});
    s.point_L = nets.value("point_L", 4);
    s.dir_L = nets.value("dir_L", 2);
    n.train = train_config_from(cfg.value("train", json::object()), s.seed);
    s.bench_sections = cfg.value("bench_sections", std::vector<int>{8, 16, 32});
    return s;
}

std::vector<nvr::Camera> nvr_test_poses(const NvrSetup& s) {
    // slightly off the training radius so test poses are genuinely unseen
    return nvr::sphere_poses(s.ncfg.test_poses, s.ncfg.camera_radius * 1.03, s.ncfg.fov_deg);
}

json camera_to_json(const nvr::Camera& cam) {
    return json{{"position", {cam.position[0], cam.position[1], cam.position[2]}},
                {"look_at", {cam.look_at[0], cam.look_at[1], cam.look_at[2]}},
                {"up", {cam.up[0], cam.up[1], cam.up[2]}},
                {"fov_deg", cam.fov_deg}};
}

void save_nvr_checkpoint(const std::string& path, const NvrSetup& s, const nvr::NvrModel& m) {
    json j{{"version", 1},
           {"sections", m.sections},
           {"use_sampler", m.use_sampler},
           {"sigma", checkpoint_to_json(m.sigma_spec, s.seed, *m.sigma.params)},
           {"color", checkpoint_to_json(m.color_spec, s.seed, *m.color.params)},
           {"sampler", checkpoint_to_json(m.sampler_mlp_spec, s.seed, *m.sampler_params)}};
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write checkpoint: " + path);
    f << j.dump(1) << "\n";
}

nvr::NvrModel load_nvr_checkpoint(const std::string& path) {
    if (!fs::exists(path)) throw MissingArtifact("missing checkpoint: " + path);
    std::ifstream f(path);
    json j;
    f >> j;
    nvr::NvrModel m;
    m.sections = j.at("sections").get<int>();
    m.use_sampler = j.at("use_sampler").get<bool>();
    LoadedNetwork sigma = checkpoint_from_json(j.at("sigma"));
    LoadedNetwork color = checkpoint_from_json(j.at("color"));
    LoadedNetwork sampler = checkpoint_from_json(j.at("sampler"));
    m.sigma_spec = sigma.spec;
    m.color_spec = color.spec;
    m.sampler_mlp_spec = sampler.spec;
    m.sigma = pair_from_network(sigma);
    m.color = pair_from_network(color);
    m.sampler_params = sampler.params;
    m.sampler_graph = build_integral_network(sampler.spec, *m.sampler_params);
    return m;
}

void render_test_artifacts(const NvrSetup& s, const nvr::NvrModel& model, const nvr::AnalyticScene& scene,
                           const std::string& out_dir, PhaseTimer& timer, int threads) {
    timer.begin("render");
    const auto test_cams = nvr_test_poses(s);
    std::vector<nvr::Image> refs(test_cams.size()), gots(test_cams.size());
    parallel_for(static_cast<int>(test_cams.size()), threads, [&](int p) {
        const nvr::Camera& cam = test_cams[static_cast<size_t>(p)];
        refs[static_cast<size_t>(p)] = nvr::render_image_with(
            [&](const nvr::Ray& r) { return nvr::reference_render(scene, r, s.ncfg.oracle_tol); }, cam,
            s.ncfg.image_width, s.ncfg.image_height, s.ncfg.tn, s.ncfg.tf);
        gots[static_cast<size_t>(p)] =
            nvr::render_image(model, cam, s.ncfg.image_width, s.ncfg.image_height, s.ncfg.tn, s.ncfg.tf);
    });
    std::ostringstream psnr_csv;
    psnr_csv << "pose,psnr\n";
    json poses = json::array();
    double psnr_sum = 0;
    for (size_t p = 0; p < test_cams.size(); ++p) {
        poses.push_back(camera_to_json(test_cams[p]));
        const double p_db = nvr::image_psnr(refs[p], gots[p]);
        psnr_sum += p_db / static_cast<double>(test_cams.size());
        char name[64];
        std::snprintf(name, sizeof(name), "/test_%03zu", p);
        write_ppm(out_dir + name + ".ppm", gots[p].rgb, gots[p].width, gots[p].height);
        write_raw_float(out_dir + name + ".raw", gots[p].rgb, static_cast<uint32_t>(gots[p].width),
                        static_cast<uint32_t>(gots[p].height), 3);
        write_ppm(out_dir + name + "_ref.ppm", refs[p].rgb, refs[p].width, refs[p].height);
        psnr_csv << p << "," << format_double(p_db) << "\n";
    }
    write_text_file(out_dir + "/psnr.csv", psnr_csv.str());
    write_text_file(out_dir + "/poses.json", poses.dump(1) + "\n");
    timer.end();
    std::printf("nvr render: mean test psnr %.2f dB over %zu poses\n", psnr_sum, test_cams.size());
}

int cmd_nvr(const std::string& mode, const std::string& config_path, uint64_t seed_override, bool has_seed_override,
            const std::string& out_dir, int threads) {
    json cfg = load_config(config_path, "nvr");
    NvrSetup s = nvr_setup(cfg, seed_override, has_seed_override);
    ensure_out_dir(out_dir);
    PhaseTimer timer;
    const nvr::AnalyticScene scene = nvr::make_scene(s.ncfg.scene);
    const std::string ckpt_path = out_dir + "/nvr_checkpoint.json";

    if (mode == "train") {
        timer.begin("dataset");
        const auto train_cams = nvr::sphere_poses(s.ncfg.train_poses, s.ncfg.camera_radius, s.ncfg.fov_deg);
        const nvr::NvrDataset data = nvr::render_dataset(scene, train_cams, s.ncfg, threads);
        timer.end();
        timer.begin("train");
        nvr::NvrTrainResult r = nvr::train_nvr(data, nvr::default_sigma_spec(s.sigma_hidden, s.point_L),
                                               nvr::default_color_spec(s.color_hidden, s.point_L, s.dir_L), s.ncfg);
        timer.end();
        r.log.write_csv(out_dir + "/loss.csv");
        save_nvr_checkpoint(ckpt_path, s, r.model);
        {
            Executor gex(r.model.sigma.grad, *r.model.sigma.params);
            Inputs probe(r.model.sigma.grad);
            probe.set(r.model.sigma.grad, "d", {0.0, 0.0, 1.0});
            probe.set_var(r.model.sigma.grad, 0.5 * (s.ncfg.tn + s.ncfg.tf));
            EvalReport naive = gex.evaluate_naive(probe);
            std::printf("reuse (density grad network): %lld unique node evals per pass vs %lld naive refs\n",
                        gex.unique_evals_per_pass(), naive.total_node_refs);
        }
        render_test_artifacts(s, r.model, scene, out_dir, timer, threads);
        timer.report();
        return kExitOk;
    }

    if (mode == "render") {
        nvr::NvrModel model = load_nvr_checkpoint(ckpt_path);
        render_test_artifacts(s, model, scene, out_dir, timer, threads);
        timer.report();
        return kExitOk;
    }

    // bench: integral-network evaluation counts and wall-clock per frame
    std::ostringstream bench_csv;
    bench_csv << "sections,rays_per_frame,distinct_evals_per_network,logical_evals_per_network\n";
    for (int sections : s.bench_sections) {
        nvr::NvrModel model = nvr::make_nvr_model(nvr::default_sigma_spec(s.sigma_hidden, s.point_L),
                                                  nvr::default_color_spec(s.color_hidden, s.point_L, s.dir_L),
                                                  sections, s.ncfg.use_sampler, s.seed);
        nvr::AutoIntRenderCounts counts;
        const double t0 = now_seconds();
        nvr::Image img = nvr::render_image(model, nvr::sphere_poses(1, s.ncfg.camera_radius, s.ncfg.fov_deg)[0],
                                           s.ncfg.image_width, s.ncfg.image_height, s.ncfg.tn, s.ncfg.tf, &counts);
        const double secs = now_seconds() - t0;
        (void)img;
        const long long rays = static_cast<long long>(s.ncfg.image_width) * s.ncfg.image_height;
        bench_csv << sections << "," << rays << "," << counts.distinct_points << "," << counts.logical_evals << "\n";
        std::printf("nvr bench N=%d: %lld rays, %lld distinct evals/network/frame (%lld logical), %.3f s/frame\n",
                    sections, rays, counts.distinct_points, counts.logical_evals, secs);
    }
    write_text_file(out_dir + "/bench.csv", bench_csv.str());
    timer.report();
    return kExitOk;
}

// ---------------------------------------------------------------- graph ----

int cmd_graph_dump(const std::string& checkpoint_path, bool grad, const std::string& network,
                   const std::string& out_path) {
    if (!fs::exists(checkpoint_path)) throw MissingArtifact("missing checkpoint: " + checkpoint_path);
    std::ifstream f(checkpoint_path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("checkpoint parse error: ") + e.what());
    }
    json net_json = j;
    if (j.contains("sigma")) {  // scene-model bundle
        if (network.empty()) throw ConfigError("bundle checkpoint: pick --network sigma|color|sampler");
        if (!j.contains(network)) throw ConfigError("bundle has no network named " + network);
        net_json = j.at(network);
    }
    LoadedNetwork net = checkpoint_from_json(net_json);
    std::string dot;
    if (grad) {
        AutoIntPair pair = pair_from_network(net);
        dot = pair.grad.to_dot("grad_network");
    } else {
        ComputeGraph g = build_integral_network(net.spec, *net.params);
        dot = g.to_dot("integral_network");
    }
    if (out_path.empty())
        std::fputs(dot.c_str(), stdout);
    else
        write_text_file(out_path, dot);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"automatic-integration experiments: 1-D fits, tomography, volume rendering"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "autoint_out";
    uint64_t seed_override = 0;
    bool has_seed_override = false;
    int threads = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (json)")->required();
        sub->add_option("--seed", seed_override, "override the config seed")->each([&](const std::string&) {
            has_seed_override = true;
        });
        sub->add_option("--threads", threads, "worker threads for oracle sweeps and grid evaluations");
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* fit1d = app.add_subcommand("fit1d", "fit a grad network to a named 1-D signal");
    add_common(fit1d);

    CLI::App* ct_cmd = app.add_subcommand("ct", "compressive-sensing tomography");
    ct_cmd->require_subcommand(1);
    CLI::App* ct_train = ct_cmd->add_subcommand("train", "train on a subsampled sinogram");
    add_common(ct_train);
    CLI::App* ct_inpaint = ct_cmd->add_subcommand("inpaint", "inpaint from trained checkpoints");
    add_common(ct_inpaint);

    CLI::App* nvr_cmd = app.add_subcommand("nvr", "neural volume rendering");
    nvr_cmd->require_subcommand(1);
    CLI::App* nvr_train = nvr_cmd->add_subcommand("train", "train scene networks");
    add_common(nvr_train);
    CLI::App* nvr_render = nvr_cmd->add_subcommand("render", "render test poses from a checkpoint");
    add_common(nvr_render);
    CLI::App* nvr_bench = nvr_cmd->add_subcommand("bench", "per-frame evaluation counts across section counts");
    add_common(nvr_bench);

    CLI::App* graph_cmd = app.add_subcommand("graph", "computational-graph tooling");
    graph_cmd->require_subcommand(1);
    CLI::App* graph_dump = graph_cmd->add_subcommand("dump", "write a DOT listing of a network");
    std::string ckpt_path, network, dump_out;
    bool dump_grad = false;
    graph_dump->add_option("--checkpoint", ckpt_path, "network checkpoint")->required();
    graph_dump->add_flag("--grad", dump_grad, "dump the grad network instead of the integral network");
    graph_dump->add_option("--network", network, "network within a bundle: sigma|color|sampler");
    graph_dump->add_option("--out", dump_out, "output file (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (fit1d->parsed()) return cmd_fit1d(config_path, seed_override, has_seed_override, out_dir, threads);
        if (ct_train->parsed())
            return cmd_ct("train", config_path, seed_override, has_seed_override, out_dir, threads);
        if (ct_inpaint->parsed())
            return cmd_ct("inpaint", config_path, seed_override, has_seed_override, out_dir, threads);
        if (nvr_train->parsed())
            return cmd_nvr("train", config_path, seed_override, has_seed_override, out_dir, threads);
        if (nvr_render->parsed())
            return cmd_nvr("render", config_path, seed_override, has_seed_override, out_dir, threads);
        if (nvr_bench->parsed())
            return cmd_nvr("bench", config_path, seed_override, has_seed_override, out_dir, threads);
        if (graph_dump->parsed()) return cmd_graph_dump(ckpt_path, dump_grad, network, dump_out);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const BuildError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const MissingArtifact& e) {
        std::fprintf(stderr, "missing artifact: %s\n", e.what());
        return kExitMissingArtifact;
    } catch (const NumericAbort& e) {
        std::fprintf(stderr, "numerical abort at iteration %lld (lr %.3g): %s\n", e.iteration, e.learning_rate,
                     e.what());
        return kExitNumeric;
    } catch (const OracleError& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitOk;
}
