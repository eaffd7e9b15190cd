// Drives the fer executable and checks exit codes and outputs.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "fer_test_cli";

int run(const std::string& args) {
    const std::string cmd = std::string("\"") + FER_CLI_PATH + "\" " + args + " >>\"" + (kDir / "log.txt").string() +
                            "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string path(const std::string& rel) { return (kDir / rel).string(); }

}  // namespace

TEST_CASE("cli workflow") {
    fs::remove_all(kDir);
    fs::create_directories(kDir);

    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("train") == 2);
    CHECK(run("--help") == 0);

    REQUIRE(run("synth --per-class 4 --classes 3 --out " + path("data")) == 0);
    CHECK(fs::exists(path("data/manifest.csv")));
    CHECK(run("ingest --manifest " + path("data/manifest.csv")) == 0);
    CHECK(run("ingest --manifest " + path("nothing.csv")) == 5);

    std::ofstream(path("small.json")) << R"({"learner":{"dim":5},"scheme":{"folds":2}})";
    std::ofstream(path("bad.json")) << R"({"learner":{"dim":-5}})";
    CHECK(run("--config " + path("bad.json") + " evaluate --manifest " + path("data/manifest.csv")) == 3);
    CHECK(run("--config " + path("missing.json") + " evaluate --manifest " + path("data/manifest.csv")) == 4);

    const std::string cfg = "--config " + path("small.json");
    REQUIRE(run(cfg + " --out " + path("ev1") + " evaluate --manifest " + path("data/manifest.csv")) == 0);
    REQUIRE(run(cfg + " --out " + path("ev2") + " evaluate --manifest " + path("data/manifest.csv")) == 0);
    CHECK(slurp(path("ev1/report.json")) == slurp(path("ev2/report.json")));
    CHECK(slurp(path("ev1/report.json")).find("\"accuracy\"") != std::string::npos);

    REQUIRE(run(cfg + " --out " + path("m1") + " train --manifest " + path("data/manifest.csv")) == 0);
    REQUIRE(run(cfg + " --out " + path("m2") + " train --manifest " + path("data/manifest.csv")) == 0);
    const std::string bundle = slurp(path("m1/model.ferbundle"));
    CHECK(bundle == slurp(path("m2/model.ferbundle")));

    CHECK(run("predict --bundle " + path("m1/model.ferbundle") + " " + path("data/images/happy_s00.pgm")) == 0);
    CHECK(slurp(path("log.txt")).find("happy_s00.pgm\thappy\t0") != std::string::npos);

    std::string broken = bundle;
    broken[broken.size() / 2] ^= 1;
    std::ofstream(path("broken.ferbundle"), std::ios::binary) << broken;
    CHECK(run("predict --bundle " + path("broken.ferbundle") + " " + path("data/images/happy_s00.pgm")) == 10);
    std::ofstream(path("junk.png"), std::ios::binary) << "not an image";
    CHECK(run("predict --bundle " + path("m1/model.ferbundle") + " " + path("junk.png")) == 4);

    std::ofstream(path("le.json")) << R"({"learner":{"reduction":"le","classifier":"knn"}})";
    CHECK(run("--config " + path("le.json") + " --out " + path("m3") + " train --manifest " + path("data/manifest.csv")) == 3);

    CHECK(run(cfg + " --out " + path("bench") + " bench --manifest " + path("data/manifest.csv")) == 0);
    CHECK(slurp(path("bench/bench.json")).find("\"Classifier\"") != std::string::npos);

    REQUIRE(run("--out " + path("det") + " train-detector --positives 60 --negatives 120 --mining-images 2 --max-stages 2") == 0);
    CHECK(run("detect --cascade " + path("det/cascade.json") + " " + path("data/images/happy_s00.pgm")) == 0);
    std::ofstream(path("det/bad.json")) << "{\"format\":";
    CHECK(run("detect --cascade " + path("det/bad.json") + " " + path("data/images/happy_s00.pgm")) != 0);

    fs::remove_all(kDir);
}
