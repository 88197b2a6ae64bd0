#include <sys/wait.h>

#include <chrono>
#include <cstdlib>

#include "doctest.h"
#include "helpers.hpp"

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run cli(const std::string& args, const testutil::TempDir& dir) {
    const auto log = dir / "stdout.txt";
    const std::string cmd = std::string("\"") + MICMAC_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, testutil::read_file(log)};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help on every subcommand") {
    testutil::TempDir dir("help");
    CHECK(cli("--help", dir).status == 0);
    for (const char* sub : {"synth", "crossval", "select", "compare", "report"}) {
        const Run r = cli(std::string(sub) + " --help", dir);
        CHECK_MESSAGE(r.status == 0, sub);
        CHECK(r.out.find("--") != std::string::npos);
    }
}

TEST_CASE("usage errors exit with status 2") {
    testutil::TempDir dir("usage");
    CHECK(cli("synth --out " + dir.path().string(), dir).status == 2);
    CHECK(cli("", dir).status == 2);
    const Run bad = cli("crossval --synth-features 20 --scheme lasso:knn --out " + (dir / "o").string(), dir);
    CHECK(bad.status == 2);
    CHECK(bad.out.find("micmac:knn:knn") != std::string::npos);
    CHECK(cli("crossval --out " + (dir / "o").string(), dir).status == 2);
}

TEST_CASE("synth output is deterministic") {
    testutil::TempDir dir("synth");
    const std::string a = (dir / "a").string(), b = (dir / "b").string();
    REQUIRE(cli("synth --features 40 --seed 3 --out " + a, dir).status == 0);
    REQUIRE(cli("synth --features 40 --seed 3 --out " + b, dir).status == 0);
    CHECK(testutil::read_file(dir / "a/data.csv") == testutil::read_file(dir / "b/data.csv"));
    CHECK(testutil::read_file(dir / "a/ground_truth.csv") == testutil::read_file(dir / "b/ground_truth.csv"));
    CHECK(!testutil::read_file(dir / "a/data.csv").empty());
}

TEST_CASE("crossval, select, report and compare end to end") {
    testutil::TempDir dir("e2e");
    REQUIRE(cli("synth --subjects 20 --features 40 --seed 1 --out " + (dir / "d").string(), dir).status == 0);
    const std::string data = (dir / "d/data.csv").string();

    const auto start = std::chrono::steady_clock::now();
    const Run cv = cli("crossval --data " + data +
                           " --scheme micmac:knn:knn --scheme mrmr:knn --repeats 2 --outer 4 --inner 3 --k-max 10"
                           " --preselect 20 --out " + (dir / "r1").string(),
                       dir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    REQUIRE_MESSAGE(cv.status == 0, cv.out);
    CHECK(secs < 60.0);
    const std::string summary = testutil::read_file(dir / "r1/report.csv");
    CHECK(summary.find("MICMAC-knnW-knnC,") != std::string::npos);
    CHECK(summary.find("mRMR-knnC,") != std::string::npos);
    CHECK(testutil::read_file(dir / "r1/run_info.txt").find("leakage_checks=") != std::string::npos);

    const Run sel = cli("select --data " + data + " --outer 4 --inner 3 --preselect 20 --out " +
                            (dir / "trace.csv").string(),
                        dir);
    CHECK(sel.status == 0);
    CHECK(testutil::read_file(dir / "trace.csv").rfind("step,feature_name,merit,phi_after,reason\n", 0) == 0);

    std::filesystem::create_directories(dir / "r2");
    std::filesystem::copy_file(dir / "r1/experiments.csv", dir / "r2/experiments.csv");
    CHECK(cli("report --in " + (dir / "r2").string(), dir).status == 0);
    CHECK(testutil::read_file(dir / "r2/report.csv") == summary);

    const std::string tukey = (dir / "tukey.csv").string();
    const Run cmp = cli("compare " + (dir / "r1").string() + " " + (dir / "r2").string() + " --out " + tukey, dir);
    REQUIRE_MESSAGE(cmp.status == 0, cmp.out);
    const std::string table = testutil::read_file(tukey);
    CHECK(table.rfind("group_a,group_b,q,p\n", 0) == 0);
    // Each scheme against its own copy: q = 0, p = 1.
    CHECK(table.find(",0,1\n") != std::string::npos);

    const Run one = cli("compare " + (dir / "r1").string() + " --out " + tukey, dir);
    CHECK(one.status == 2);
    CHECK(one.out.find("need >= 2 groups") != std::string::npos);
}

}
