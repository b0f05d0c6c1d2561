#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "svmedge/bench.hpp"
#include "svmedge/image.hpp"
#include "svmedge/model_io.hpp"

#ifndef SVMEDGE_CLI_PATH
#error "SVMEDGE_CLI_PATH must point at the built CLI binary"
#endif

using namespace svmedge;
namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "svmedge-cli-tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const fs::path out_file = work_dir() / "stdout.txt";
    const std::string cmd =
        std::string(SVMEDGE_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    return r;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Parse "key   value" style CLI output.
double parse_metric(const std::string& output, const std::string& key) {
    const auto pos = output.find(key);
    REQUIRE(pos != std::string::npos);
    std::istringstream in(output.substr(pos + key.size()));
    double v = 0.0;
    in >> v;
    return v;
}

const fs::path& shared_model() {
    static const fs::path model_path = [] {
        const fs::path p = work_dir() / "default.model";
        const RunResult r = run_cli("train -o " + p.string() + " --seed 42");
        REQUIRE(r.exit_code == 0);
        return p;
    }();
    return model_path;
}

} // namespace

TEST_CASE("cli train writes a model and reports quality") {
    const RunResult r = run_cli("train -o " + (work_dir() / "t1.model").string() + " --seed 7");
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(work_dir() / "t1.model"));
    CHECK(parse_metric(r.output, "train accuracy") >= 0.99);
    CHECK(parse_metric(r.output, "kkt residual") <= 1e-3);
    CHECK_NOTHROW(load_model(work_dir() / "t1.model"));
}

TEST_CASE("cli train is byte-deterministic under a fixed seed") {
    const fs::path a = work_dir() / "det-a.model";
    const fs::path b = work_dir() / "det-b.model";
    REQUIRE(run_cli("train -o " + a.string() + " --seed 123").exit_code == 0);
    REQUIRE(run_cli("train -o " + b.string() + " --seed 123").exit_code == 0);
    CHECK(read_file(a) == read_file(b));
    const fs::path c = work_dir() / "det-c.model";
    REQUIRE(run_cli("train -o " + c.string() + " --seed 124").exit_code == 0);
    CHECK(read_file(a) != read_file(c));
}

TEST_CASE("cli rejects invalid parameters before doing any work") {
    const RunResult r = run_cli("train -o " + (work_dir() / "bad.model").string() + " --c 0");
    CHECK(r.exit_code == 2);
    CHECK_FALSE(fs::exists(work_dir() / "bad.model"));
    CHECK(run_cli("train -o x.model --kernel linear").exit_code == 2);
    CHECK(run_cli("train -o x.model --noise-amp -0.5").exit_code == 2);
}

TEST_CASE("cli detect on a constant image finds nothing") {
    const fs::path img_path = work_dir() / "flat.pgm";
    save_pgm(Image(64, 64, 100), img_path);
    const fs::path out_path = work_dir() / "flat-edges.pgm";
    const RunResult r = run_cli("detect -m " + shared_model().string() + " -i " +
                                img_path.string() + " -o " + out_path.string());
    REQUIRE(r.exit_code == 0);
    const Image out = load_pgm(out_path);
    for (auto v : out.pixels())
        CHECK(v == 0);
    CHECK(parse_metric(r.output, "edge pixels") == 0.0);
}

TEST_CASE("cli detect scores gen-patches output against its truth") {
    const fs::path prefix = work_dir() / "patch";
    const RunResult gen = run_cli("gen-patches -o " + prefix.string() +
                                  " --patch-size 64 --seed 9 --orientation vertical");
    REQUIRE(gen.exit_code == 0);
    const fs::path img = work_dir() / "patch_vertical.pgm";
    const fs::path truth = work_dir() / "patch_vertical_truth.pgm";
    REQUIRE(fs::exists(img));
    REQUIRE(fs::exists(truth));

    const fs::path out = work_dir() / "patch-edges.pgm";
    const RunResult r = run_cli("detect -m " + shared_model().string() + " -i " + img.string() +
                                " -o " + out.string() + " --truth " + truth.string());
    REQUIRE(r.exit_code == 0);
    CHECK(parse_metric(r.output, "f1") >= 0.9);
}

TEST_CASE("cli detect with a missing model exits with the io code") {
    const fs::path img_path = work_dir() / "flat2.pgm";
    save_pgm(Image(16, 16, 10), img_path);
    const RunResult r = run_cli("detect -m " + (work_dir() / "nope.model").string() + " -i " +
                                img_path.string() + " -o " + (work_dir() / "x.pgm").string());
    CHECK(r.exit_code == 3);
}

TEST_CASE("cli compare produces one file and one row per method") {
    const fs::path prefix = work_dir() / "cmp-src";
    REQUIRE(run_cli("gen-patches -o " + prefix.string() +
                    " --patch-size 64 --seed 31 --orientation horizontal")
                .exit_code == 0);
    const fs::path img = work_dir() / "cmp-src_horizontal.pgm";
    const fs::path truth = work_dir() / "cmp-src_horizontal_truth.pgm";

    const fs::path stem = work_dir() / "cmp";
    const RunResult r = run_cli("compare -m " + shared_model().string() + " -i " + img.string() +
                                " -o " + stem.string() + " --methods svm,canny,sobel --truth " +
                                truth.string());
    REQUIRE(r.exit_code == 0);
    for (const char* m : {"svm", "canny", "sobel"}) {
        CHECK(fs::exists(work_dir() / ("cmp_" + std::string(m) + ".pgm")));
        CHECK(r.output.find(m) != std::string::npos);
    }

    SECTION("svm-only run emits a single row") {
        const RunResult solo = run_cli("compare -m " + shared_model().string() + " -i " +
                                       img.string() + " -o " + (work_dir() / "solo").string() +
                                       " --methods svm");
        REQUIRE(solo.exit_code == 0);
        CHECK(solo.output.find("canny") == std::string::npos);
        CHECK(solo.output.find("sobel") == std::string::npos);
    }

    SECTION("unknown method names are rejected") {
        const RunResult bad = run_cli("compare -i " + img.string() + " -o " +
                                      (work_dir() / "bad").string() + " --methods prewitt");
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("cli bench emits the table and a parseable CSV") {
    const fs::path prefix = work_dir() / "bench-src";
    REQUIRE(run_cli("gen-patches -o " + prefix.string() + " --patch-size 64 --seed 55")
                .exit_code == 0);
    const std::string img1 = (work_dir() / "bench-src_vertical.pgm").string();
    const std::string img2 = (work_dir() / "bench-src_diagonal-main.pgm").string();

    const fs::path csv = work_dir() / "bench.csv";
    const RunResult r =
        run_cli("bench -m " + shared_model().string() + " -i " + img1 + " -i " + img2 +
                " --methods svm,sobel --repeats 3 -o " + csv.string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("Tested image") != std::string::npos);

    const BenchReport report = report_from_csv(read_file(csv));
    CHECK(report.rows.size() == 4); // 2 images x 2 methods
    CHECK(report.repeats == 3);

    SECTION("fewer than three repeats is a validation error") {
        const RunResult bad = run_cli("bench -m " + shared_model().string() + " -i " + img1 +
                                      " --repeats 2 --methods sobel");
        CHECK(bad.exit_code == 2);
    }
}

TEST_CASE("cli gen-patches writes image and truth pairs for all orientations") {
    const fs::path prefix = work_dir() / "gp";
    const RunResult r = run_cli("gen-patches -o " + prefix.string() + " --patch-size 32");
    REQUIRE(r.exit_code == 0);
    for (const char* o : {"vertical", "horizontal", "diagonal-main", "diagonal-anti"}) {
        const fs::path img = work_dir() / ("gp_" + std::string(o) + ".pgm");
        const fs::path truth = work_dir() / ("gp_" + std::string(o) + "_truth.pgm");
        REQUIRE(fs::exists(img));
        REQUIRE(fs::exists(truth));
        CHECK(load_pgm(img).width() == 32);
        // truth maps are binary 0/255
        const Image truth_img = load_pgm(truth);
        for (auto v : truth_img.pixels())
            CHECK((v == 0 || v == 255));
    }
}
