#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "fdd/core.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "fdd_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path at(const std::string& name) { return workdir() / name; }

/// Runs the CLI with stdout and stderr captured to files; returns the exit code.
int run(const std::string& args, const std::string& tag = "last") {
    const std::string cmd = std::string(FDD_CLI) + " " + args + " > " + at(tag + ".out").string() + " 2> " +
                            at(tag + ".err").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string out(const std::string& tag = "last") { return slurp(at(tag + ".out")); }
std::string err(const std::string& tag = "last") { return slurp(at(tag + ".err")); }
std::string p(const std::string& name) { return at(name).string(); }

}  // namespace

TEST_CASE("simulate writes a dataset with embedded configuration") {
    REQUIRE(run("simulate --model M1 --n 20 --seed 3 --out " + p("m1.csv")) == 0);
    const auto text = slurp(at("m1.csv"));
    CHECK(text.rfind("# fdd {", 0) == 0);
    const auto ds = fdd::load_dataset(p("m1.csv"));
    CHECK(ds.size() == 20);
    CHECK(ds.points() == 30);
    const auto meta = nlohmann::json::parse(slurp(at("m1.csv.json")));
    CHECK(meta.contains("outliers"));

    REQUIRE(run("simulate --model M1 --n 20 --seed 3 --out " + p("m1b.csv")) == 0);
    CHECK(slurp(at("m1b.csv")) == text);
    REQUIRE(run("simulate --model M1 --n 20 --seed 4 --out " + p("m1c.csv")) == 0);
    CHECK(slurp(at("m1c.csv")) != text);
}

TEST_CASE("a missing seed is generated and reported") {
    REQUIRE(run("simulate --model M0 --n 5 --out " + p("noseed.csv")) == 0);
    CHECK(err().find("no --seed given, using") != std::string::npos);
}

TEST_CASE("depth output and byte-identical reruns") {
    REQUIRE(run("simulate --model M0 --n 15 --seed 1 --out " + p("d.csv")) == 0);
    for (const std::string m : {"linf", "bd", "mbd", "hrd", "mhrd", "rtd", "spatd"}) {
        CAPTURE(m);
        REQUIRE(run("depth --method " + m + " --in " + p("d.csv") + " --seed 2 --out " + p("dep.csv")) == 0);
        const auto first = slurp(at("dep.csv"));
        CHECK(first.find("label,depth,rank\n") != std::string::npos);
        REQUIRE(run("--threads 3 depth --method " + m + " --in " + p("d.csv") + " --seed 2 --out " + p("dep.csv")) == 0);
        CHECK(slurp(at("dep.csv")) == first);
    }
    REQUIRE(run("depth --method linf --in " + p("d.csv") + " --reference " + p("d.csv")) == 0);
    CHECK(out().find("label,depth,rank") != std::string::npos);
}

TEST_CASE("error handling") {
    CHECK(run("depth --method linf --in " + p("does_not_exist.csv")) != 0);
    CHECK(run("depth --method nope --in " + p("d.csv") + " --seed 1") == 1);
    CHECK(err().find("fdd: error:") != std::string::npos);
    std::ofstream(at("bad.csv")) << "grid,0.5,1\nc1,1.0\n";
    CHECK(run("depth --method linf --in " + p("bad.csv")) == 1);
    CHECK(err().find("line 2") != std::string::npos);
    CHECK(run("frobnicate") != 0);
    CHECK(run("simulate --model M11 --seed 1 --out " + p("x.csv")) == 1);
}

TEST_CASE("mise and detect") {
    REQUIRE(run("mise --models M0,M1 --reps 4 --estimators MEAN,LINFD --seed 1 --json " + p("mise.json")) == 0);
    CHECK(out().find("estimator,M0,M1") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(at("mise.json")));
    CHECK(j["metric"] == "mise");
    const auto first = out();
    REQUIRE(run("--threads 2 mise --models M0,M1 --reps 4 --estimators MEAN,LINFD --seed 1") == 0);
    CHECK(out() == first);

    REQUIRE(run("detect --models M5 --methods linf,mbd --reps 4 --seed 1") == 0);
    CHECK(out().find("method,M5") != std::string::npos);
    CHECK(run("detect --models M1 --reps 4 --seed 1") == 1);
}

TEST_CASE("rankrank") {
    REQUIRE(run("simulate --model M0 --n 40 --seed 5 --out " + p("rr.csv")) == 0);
    REQUIRE(run("rankrank --method mbd --in " + p("rr.csv") + " --seed 1 --k 3 --svg " + p("rr.svg") + " --out " +
                p("rr_pairs.csv")) == 0);
    CHECK(slurp(at("rr_pairs.csv")).find("label,rank_in_sample,rank_cross") != std::string::npos);
    CHECK(slurp(at("rr.svg")).rfind("<svg", 0) == 0);
    const auto summary = nlohmann::json::parse(err());
    CHECK(summary["spearman"].is_number());
}

TEST_CASE("light-curve commands") {
    REQUIRE(run("simulate --model lc-raw --n 6 --seed 2 --observations 80 --raw-dir " + p("raw")) == 0);
    CHECK(fs::exists(at("raw") / "manifest.csv"));
    REQUIRE(run("lc-prep --manifest " + (at("raw") / "manifest.csv").string() + " --out " + p("prep.csv")) == 0);
    const auto ds = fdd::load_dataset(p("prep.csv"));
    CHECK(ds.size() == 6);
    CHECK(ds.points() == 100);
    CHECK(ds.labels()[0] == "star0");

    REQUIRE(run("simulate --model lc --n 50 --seed 2 --shifted 0.1 --out " + p("lc.csv")) == 0);
    CHECK(fdd::load_dataset(p("lc.csv")).size() == 50);
}

TEST_CASE("bench and asymptotics") {
    REQUIRE(run("bench --mbd 20,40 --linf 20,40 --bd '' --mbd-naive '' --points 10 --repeats 1 --seed 1 --json " +
                p("bench.json")) == 0);
    CHECK(out().find("method,n,seconds") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(at("bench.json")))["series"].size() == 2);

    REQUIRE(run("asymptotics --model M0 --schedule 10,100 --n-reference 1000 --n 20 --reps 20 --n-plugin 500 --seed 1") ==
            0);
    const auto j = nlohmann::json::parse(out());
    CHECK(j.contains("slln"));
    CHECK(j.contains("clt"));
}
