#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mdrnn/checkpoint.hpp"
#include "mdrnn/idx.hpp"
#include "mdrnn/raster.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = MDRNN_CLI_PATH;
const std::string kFixtures = MDRNN_FIXTURE_DIR;
const std::string kImages = kFixtures + "/tiny-images-idx3-ubyte";
const std::string kLabels = kFixtures + "/tiny-labels-idx1-ubyte";
const std::string kConfig = kFixtures + "/tiny.cfg";

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mdrnn_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run cli(const std::string& args) {
    static int counter = 0;
    const fs::path dir = fs::temp_directory_path() / "mdrnn_cli_capture";
    fs::create_directories(dir);
    const fs::path out = dir / ("out" + std::to_string(counter));
    const fs::path err = dir / ("err" + std::to_string(counter++));
    const std::string command = quote(kCli) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(command.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_text(out);
    r.err = read_text(err);
    return r;
}

std::string data_flags() { return "--images " + quote(kImages) + " --labels " + quote(kLabels); }

// Trains the fixture config once and returns the run directory.
const fs::path& trained() {
    static const fs::path dir = [] {
        const fs::path d = scratch("trained");
        const Run r = cli("train " + quote(kConfig) + " --output " + quote(d.string()));
        REQUIRE_MESSAGE(r.code == 0, r.err);
        return d;
    }();
    return dir;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("help lists the verbs and flags") {
        const Run top = cli("--help");
        CHECK(top.code == 0);
        for (const char* verb : {"train", "eval", "deform", "jacobian", "activations", "inspect", "gradcheck"})
            CHECK(top.out.find(verb) != std::string::npos);
        const Run deform = cli("deform --help");
        CHECK(deform.code == 0);
        for (const char* flag : {"--sigma", "--alpha", "--seed"}) CHECK(deform.out.find(flag) != std::string::npos);
    }

    TEST_CASE("usage errors exit 1") {
        CHECK(cli("").code == 1);
        CHECK(cli("train " + quote(kConfig) + " --no-such-flag").code == 1);
        CHECK(cli("frobnicate").code == 1);
        CHECK(cli("inspect --preset mnist --config " + quote(kConfig)).code == 1);
        CHECK(cli("train " + quote(kConfig) + " --set hidden=zero").code == 1);
    }

    TEST_CASE("missing inputs exit 2 and name the path") {
        const Run r = cli("eval /nonexistent/model.ckpt " + data_flags());
        CHECK(r.code == 2);
        CHECK(r.err.find("/nonexistent/model.ckpt") != std::string::npos);

        const Run t = cli("train " + quote(kConfig) + " --set images=/nonexistent/images-idx3-ubyte --output " +
                          quote(scratch("missing").string()));
        CHECK(t.code == 2);
        CHECK(t.err.find("/nonexistent/images-idx3-ubyte") != std::string::npos);
    }

    TEST_CASE("training writes every artifact") {
        const fs::path& dir = trained();
        for (const char* name : {"config.txt", "train.log", "best.ckpt", "final.ckpt", "validation_report.txt",
                                 "test_report.txt"})
            CHECK_MESSAGE(fs::exists(dir / name), name);
        const std::string log = read_text(dir / "train.log");
        CHECK(log.rfind("epoch\ttrain_loss\ttrain_pixel_error\tvalidation_pixel_error\tseconds\n", 0) == 0);
        std::size_t lines = 0;
        for (char c : log) lines += c == '\n';
        CHECK(lines == 4);  // header plus three epochs

        const auto best = mdrnn::load_checkpoint((dir / "best.ckpt").string());
        CHECK(best.metadata.at("role") == "best");
        CHECK(best.metadata.at("config.hidden") == "2");
        const auto final_ckpt = mdrnn::load_checkpoint((dir / "final.ckpt").string());
        CHECK_FALSE(final_ckpt.rng_state.empty());
    }

    TEST_CASE("identical configs give bit-identical runs") {
        const fs::path again = scratch("again");
        REQUIRE(cli("train " + quote(kConfig) + " --output " + quote(again.string())).code == 0);
        for (const char* name : {"train.log", "best.ckpt", "final.ckpt", "validation_report.txt", "test_report.txt"})
            CHECK_MESSAGE(read_text(trained() / name) == read_text(again / name), name);
    }

    TEST_CASE("evaluation matches the stored golden report") {
        const Run r = cli("eval " + quote(kFixtures + "/golden.ckpt") + " " + data_flags());
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(r.out == read_text(kFixtures + "/golden-report.txt"));

        const fs::path dir = scratch("eval");
        const Run w = cli("eval " + quote(kFixtures + "/golden.ckpt") + " " + data_flags() + " --workers 4 --report " +
                          quote((dir / "r.txt").string()) + " --confusion " + quote((dir / "c.csv").string()) +
                          " --predictions " + quote((dir / "p.csv").string()));
        CHECK(w.code == 0);
        CHECK(read_text(dir / "r.txt") == r.out);
        CHECK(read_text(dir / "p.csv").rfind("id,target,predicted,pixel_errors,points\n", 0) == 0);
        CHECK(fs::exists(dir / "c.csv"));
    }

    TEST_CASE("damaged checkpoints exit 2") {
        const fs::path dir = scratch("damaged");
        std::string bytes = read_text(trained() / "best.ckpt");
        std::ofstream(dir / "truncated.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() / 2);
        bytes[8] = 9;  // format version
        std::ofstream(dir / "version.ckpt", std::ios::binary) << bytes;
        std::ofstream(dir / "text.ckpt") << "not a checkpoint\n";
        for (const char* name : {"truncated.ckpt", "version.ckpt", "text.ckpt"}) {
            const Run r = cli("eval " + quote((dir / name).string()) + " " + data_flags());
            CHECK_MESSAGE(r.code == 2, name);
            CHECK(r.err.find("format error") != std::string::npos);
        }
    }

    TEST_CASE("an empty split is refused") {
        const Run r = cli("eval " + quote((trained() / "best.ckpt").string()) + " --config " + quote(kConfig) +
                          " --split test --set test_size=0");
        CHECK(r.code == 1);  // --set is not an eval flag
        const fs::path dir = scratch("empty");
        std::string text = read_text(kConfig);
        text.replace(text.find("test_size = 3"), 13, "test_size = 0");
        std::ofstream(dir / "no-test.cfg") << text;
        fs::copy(kImages, dir / "tiny-images-idx3-ubyte");
        fs::copy(kLabels, dir / "tiny-labels-idx1-ubyte");
        const Run e = cli("eval " + quote((trained() / "best.ckpt").string()) + " --config " +
                          quote((dir / "no-test.cfg").string()) + " --split test");
        CHECK(e.code == 2);
        CHECK(e.err.find("no evaluation data") != std::string::npos);
    }

    TEST_CASE("deform") {
        const fs::path dir = scratch("deform");
        const std::string in = quote(kImages);
        REQUIRE(cli("deform " + in + " " + quote((dir / "same").string()) + " --alpha 0").code == 0);
        CHECK(read_text(dir / "same") == read_text(kImages));
        REQUIRE(cli("deform " + in + " " + quote((dir / "a").string()) + " --seed 5").code == 0);
        REQUIRE(cli("deform " + in + " " + quote((dir / "b").string()) + " --seed 5").code == 0);
        REQUIRE(cli("deform " + in + " " + quote((dir / "c").string()) + " --seed 6").code == 0);
        CHECK(read_text(dir / "a") == read_text(dir / "b"));
        CHECK(read_text(dir / "a") != read_text(dir / "c"));
        CHECK(mdrnn::read_idx((dir / "a").string()).dims == mdrnn::read_idx(kImages).dims);
        CHECK(cli("deform " + in + " " + quote((dir / "d").string()) + " --sigma 0").code == 1);
        CHECK(cli("deform /nonexistent/in " + quote((dir / "e").string())).code == 2);
    }

    TEST_CASE("jacobian") {
        const fs::path dir = scratch("jacobian");
        const std::string ckpt = quote((trained() / "best.ckpt").string());
        const Run ok = cli("jacobian " + ckpt + " " + data_flags() + " --index 2 --point 14,14 --class 7 --output " +
                           quote((dir / "j").string()));
        REQUIRE_MESSAGE(ok.code == 0, ok.err);
        const auto raster = mdrnn::read_pnm((dir / "j.pgm").string());
        CHECK(raster.rows == 28);
        CHECK(raster.cols == 28);
        CHECK(read_text(dir / "j.txt").find("focus_point = 14,14") != std::string::npos);

        CHECK(cli("jacobian " + ckpt + " " + data_flags() + " --point 28,0 --class 7 --output " +
                  quote((dir / "k").string()))
                  .code == 1);
        CHECK(cli("jacobian " + ckpt + " " + data_flags() + " --point 1,1 --class 11 --output " +
                  quote((dir / "k").string()))
                  .code == 1);
        CHECK_FALSE(fs::exists(dir / "k.pgm"));
    }

    TEST_CASE("activations") {
        const fs::path dir = scratch("activations");
        const Run r = cli("activations " + quote((trained() / "best.ckpt").string()) + " " + data_flags() +
                          " --unit 0:0 --unit 3:1 --output " + quote(dir.string()));
        REQUIRE_MESSAGE(r.code == 0, r.err);
        CHECK(fs::exists(dir / "unit_d0_u0.pgm"));
        CHECK(fs::exists(dir / "unit_d3_u1.pgm"));
        CHECK(fs::exists(dir / "argmax.pgm"));
        CHECK(cli("activations " + quote((trained() / "best.ckpt").string()) + " " + data_flags() +
                  " --unit 4:0 --output " + quote(dir.string()))
                  .code == 1);
    }

    TEST_CASE("inspect") {
        const Run preset = cli("inspect --preset mnist");
        CHECK(preset.code == 0);
        CHECK(preset.out.find("weights.total = 27611") != std::string::npos);
        CHECK(preset.out.find("reference_total = 27511") != std::string::npos);
        CHECK(preset.out.find("delta = 100") != std::string::npos);
        const Run air = cli("inspect --preset airfreight");
        CHECK(air.out.find("delta = -102") != std::string::npos);
        const Run ckpt = cli("inspect --checkpoint " + quote((trained() / "best.ckpt").string()));
        CHECK(ckpt.code == 0);
        CHECK(ckpt.out.find("weights.total = 379") != std::string::npos);
    }

    TEST_CASE("gradcheck") {
        const Run ok = cli("gradcheck --dims 1");
        CHECK_MESSAGE(ok.code == 0, ok.out);
        CHECK(cli("gradcheck --dims 1 --corrupt").code == 3);
    }
}
