#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kCli = AUTOINT_CLI_PATH;

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::path(AUTOINT_TEST_TMP) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path);
    f << content;
}

std::string slurp(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) out[entry.path().filename().string()] = slurp(entry.path());
    return out;
}

const char* kFitConfig = R"({"version":1, "task":"fit1d", "seed":7, "target":"cos",
  "net":{"hidden":[16],"nonlinearity":"swish","encoding_L":2},
  "train":{"iters":150,"lr":3e-3}, "batch":32, "eval_intervals":6})";

const char* kCtConfig = R"({"version":1,"task":"ct","seed":3,"phantom":"disk",
  "grid":{"rho":10,"angles":8},"subsample":2,"oracle_tol":1e-5,
  "samples_per_ray":4,"batch_rays":8,
  "nonlinearities":["relu","softplus","swish","sine"],
  "net":{"hidden":[8]},"train":{"iters":40,"lr":2e-3}})";

const char* kNvrConfig = R"({"version":1,"task":"nvr","seed":5,"scene":"blob",
  "sections":4,"samples_per_section":4,"image":{"width":4,"height":4},
  "poses":{"train":2,"test":2},"bounds":{"near":1.2,"far":4.8},
  "oracle_tol":1e-4,"batch_rays":4,
  "nets":{"sigma_hidden":[8],"color_hidden":[8],"point_L":2,"dir_L":1},
  "train":{"iters":30,"lr":3e-3},"bench_sections":[8,32]})";

}  // namespace

TEST_CASE("fit1d emits the integral table and is byte-reproducible") {
    fs::path dir = fresh_dir("cli_fit1d");
    write_file(dir / "cfg.json", kFitConfig);
    fs::path out1 = dir / "run1", out2 = dir / "run2";
    REQUIRE(run("fit1d --config " + (dir / "cfg.json").string() + " --out " + out1.string()) == 0);
    REQUIRE(run("fit1d --config " + (dir / "cfg.json").string() + " --out " + out2.string()) == 0);

    const std::string table = slurp(out1 / "integrals.csv");
    CHECK(table.rfind("a,b,autoint,analytic,abs_err\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 7);
    CHECK(fs::exists(out1 / "loss.csv"));
    CHECK(fs::exists(out1 / "checkpoint.json"));

    // identical seeds, identical bytes
    auto a = dir_contents(out1), b = dir_contents(out2);
    REQUIRE(a.size() == b.size());
    for (const auto& [name, content] : a) CHECK(content == b.at(name));
}

TEST_CASE("fit1d writes periodic checkpoints when configured") {
    fs::path dir = fresh_dir("cli_fit1d_ckpt");
    std::string cfg = kFitConfig;
    cfg.insert(cfg.rfind('}'), ",\"checkpoint_every\":50");
    write_file(dir / "cfg.json", cfg);
    fs::path out = dir / "out";
    REQUIRE(run("fit1d --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "checkpoint_000050.json"));
    CHECK(fs::exists(out / "checkpoint_000100.json"));
    CHECK(fs::exists(out / "checkpoint_000150.json"));
    CHECK(fs::exists(out / "checkpoint.json"));
}

TEST_CASE("missing config exits with the usage code") {
    CHECK(run("fit1d --config /nonexistent/cfg.json") == 2);
    CHECK(run("fit1d") == 2);
    CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("ct rejects a subsample factor that does not divide the angles") {
    fs::path dir = fresh_dir("cli_ct_badfactor");
    std::string cfg = kCtConfig;
    cfg.replace(cfg.find("\"subsample\":2"), 13, "\"subsample\":3");
    write_file(dir / "cfg.json", cfg);
    CHECK(run("ct train --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 2);
}

TEST_CASE("ct rejects unknown config keys") {
    fs::path dir = fresh_dir("cli_ct_badkey");
    std::string cfg = kCtConfig;
    cfg.insert(cfg.rfind('}'), ",\"typo_key\":1");
    write_file(dir / "cfg.json", cfg);
    CHECK(run("ct train --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 2);
}

TEST_CASE("ct sweep trains all four nonlinearities and inpaint reproduces the psnr") {
    fs::path dir = fresh_dir("cli_ct_sweep");
    write_file(dir / "cfg.json", kCtConfig);
    fs::path out = dir / "out";

    // inpaint before training: the checkpoint artifact is missing
    CHECK(run("ct inpaint --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 3);

    REQUIRE(run("ct train --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    const std::string psnr = slurp(out / "psnr.csv");
    CHECK(std::count(psnr.begin(), psnr.end(), '\n') == 5);  // header + 4 nonlinearities
    for (const char* name : {"relu", "softplus", "swish", "sine"}) CHECK(psnr.find(name) != std::string::npos);

    REQUIRE(run("ct inpaint --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    const std::string psnr2 = slurp(out / "psnr_inpaint.csv");

    // same checkpoints, same grid: the reported psnr values match exactly
    auto psnr_column = [](const std::string& csv) {
        std::vector<std::string> rows;
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);  // header
        while (std::getline(is, line)) {
            // nonlinearity,psnr_all,psnr_supervised,psnr_masked,final_loss
            const size_t first = line.find(','), last = line.rfind(',');
            rows.push_back(line.substr(first, last - first));
        }
        return rows;
    };
    CHECK(psnr_column(psnr) == psnr_column(psnr2));
}

TEST_CASE("ct training artifacts are byte-reproducible") {
    fs::path dir = fresh_dir("cli_ct_repro");
    write_file(dir / "cfg.json", kCtConfig);
    fs::path out1 = dir / "a", out2 = dir / "b";
    REQUIRE(run("ct train --config " + (dir / "cfg.json").string() + " --out " + out1.string()) == 0);
    REQUIRE(run("ct train --config " + (dir / "cfg.json").string() + " --out " + out2.string()) == 0);
    auto a = dir_contents(out1), b = dir_contents(out2);
    REQUIRE(a.size() == b.size());
    for (const auto& [name, content] : a) CHECK(content == b.at(name));
}

TEST_CASE("nvr bench reports the two-evaluation count arithmetic") {
    fs::path dir = fresh_dir("cli_nvr_bench");
    write_file(dir / "cfg.json", kNvrConfig);
    fs::path out = dir / "out";
    REQUIRE(run("nvr bench --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    const std::string bench = slurp(out / "bench.csv");
    std::istringstream is(bench);
    std::string line;
    std::getline(is, line);
    CHECK(line == "sections,rays_per_frame,distinct_evals_per_network,logical_evals_per_network");
    long long prev_evals = -1;
    while (std::getline(is, line)) {
        long long n, rays, distinct, logical;
        REQUIRE(std::sscanf(line.c_str(), "%lld,%lld,%lld,%lld", &n, &rays, &distinct, &logical) == 4);
        CHECK(distinct == (n + 1) * rays);  // endpoints shared between intervals
        CHECK(logical == 2 * n * rays);     // two evaluations per interval
        CHECK(distinct > prev_evals);       // monotone in N
        prev_evals = distinct;
    }
}

TEST_CASE("nvr render without a checkpoint exits with the missing-artifact code") {
    fs::path dir = fresh_dir("cli_nvr_missing");
    write_file(dir / "cfg.json", kNvrConfig);
    CHECK(run("nvr render --config " + (dir / "cfg.json").string() + " --out " + (dir / "out").string()) == 3);
}

TEST_CASE("nvr train then render round-trips through the checkpoint") {
    fs::path dir = fresh_dir("cli_nvr_train");
    write_file(dir / "cfg.json", kNvrConfig);
    fs::path out = dir / "out";
    REQUIRE(run("nvr train --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "nvr_checkpoint.json"));
    CHECK(fs::exists(out / "test_000.ppm"));
    CHECK(fs::exists(out / "test_000.raw"));
    CHECK(fs::exists(out / "poses.json"));
    const std::string psnr_after_train = slurp(out / "psnr.csv");
    REQUIRE(run("nvr render --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);
    CHECK(slurp(out / "psnr.csv") == psnr_after_train);

    // raw float artifact honors the documented header
    const std::string raw = slurp(out / "test_000.raw");
    REQUIRE(raw.size() >= 16);
    CHECK(raw.substr(0, 4) == "AINT");
    const auto u32 = [&](size_t off) {
        return static_cast<uint32_t>(static_cast<unsigned char>(raw[off])) |
               static_cast<uint32_t>(static_cast<unsigned char>(raw[off + 1])) << 8 |
               static_cast<uint32_t>(static_cast<unsigned char>(raw[off + 2])) << 16 |
               static_cast<uint32_t>(static_cast<unsigned char>(raw[off + 3])) << 24;
    };
    CHECK(u32(4) == 4);   // width
    CHECK(u32(8) == 4);   // height
    CHECK(u32(12) == 3);  // channels
    CHECK(raw.size() == 16 + 4ull * 4 * 4 * 3);
}

TEST_CASE("graph dump emits DOT and the grad graph outgrows the integral graph") {
    fs::path dir = fresh_dir("cli_graph");
    write_file(dir / "cfg.json", kFitConfig);
    fs::path out = dir / "out";
    REQUIRE(run("fit1d --config " + (dir / "cfg.json").string() + " --out " + out.string()) == 0);

    REQUIRE(run("graph dump --checkpoint " + (out / "checkpoint.json").string() + " --out " +
                (dir / "integral.dot").string()) == 0);
    REQUIRE(run("graph dump --grad --checkpoint " + (out / "checkpoint.json").string() + " --out " +
                (dir / "grad.dot").string()) == 0);
    CHECK(run("graph dump --checkpoint /nonexistent.json") == 3);

    auto node_count = [](const std::string& dot) {
        size_t n = 0, pos = 0;
        while ((pos = dot.find("[label=", pos)) != std::string::npos) {
            ++n;
            ++pos;
        }
        return n;
    };
    const std::string integral_dot = slurp(dir / "integral.dot");
    const std::string grad_dot = slurp(dir / "grad.dot");
    CHECK(integral_dot.rfind("digraph integral_network {", 0) == 0);
    CHECK(grad_dot.rfind("digraph grad_network {", 0) == 0);
    CHECK(integral_dot.back() == '\n');
    CHECK(std::count(integral_dot.begin(), integral_dot.end(), '{') ==
          std::count(integral_dot.begin(), integral_dot.end(), '}'));
    CHECK(node_count(grad_dot) > node_count(integral_dot));
}

TEST_CASE("thread count does not change artifacts") {
    fs::path dir = fresh_dir("cli_threads");
    write_file(dir / "cfg.json", kCtConfig);
    fs::path out1 = dir / "t1", out2 = dir / "t2";
    REQUIRE(run("ct train --config " + (dir / "cfg.json").string() + " --out " + out1.string() + " --threads 1") == 0);
    REQUIRE(run("ct train --config " + (dir / "cfg.json").string() + " --out " + out2.string() + " --threads 3") == 0);
    auto a = dir_contents(out1), b = dir_contents(out2);
    REQUIRE(a.size() == b.size());
    for (const auto& [name, content] : a) CHECK(content == b.at(name));
}
