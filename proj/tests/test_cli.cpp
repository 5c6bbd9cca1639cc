// Copyright 2026 The phylopubo Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "phylopubo/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "phylopubo");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = phylopubo::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Scratch {
    fs::path dir;
    Scratch() {
        dir = fs::temp_directory_path() / ("phylopubo_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return (dir / name).string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("build, solve, verify") {
    Scratch s;
    const auto fasta = s.write("four.fa", ">a\nAC\n>b\nAC\n>c\nGT\n>d\nGT\n");
    const auto built = invoke({"build", fasta, "--out", s.path("m")});
    REQUIRE(built.code == 0);
    const auto report = json::parse(built.out);
    CHECK(report["models"][0]["total_vars"] == 29);
    CHECK(report["models"][0]["penalty"] == 41);
    CHECK(fs::exists(s.path("m/model.pubo")));
    const auto layout = json::parse(slurp(s.path("m/layout.json")));
    CHECK(layout["groups"]["edge"] == 9);
    CHECK(layout["groups"]["base"] == 20);

    const auto solved = invoke({"solve", s.path("m/model.pubo"), "--out", s.path("s")});
    REQUIRE(solved.code == 0);
    const auto sr = json::parse(solved.out);
    CHECK(sr["best_energy"] == 2);
    CHECK(sr["solution"]["feasible"] == true);
    CHECK(slurp(s.path("s/tree.nwk")).rfind("((a,b)", 0) == 0);
    CHECK(slurp(s.path("s/trace.csv")).rfind("step,best_energy\n", 0) == 0);

    const auto annealed = invoke({"solve", s.path("m/model.pubo"), "--method", "anneal", "--seed", "5"});
    REQUIRE(annealed.code == 0);
    CHECK(json::parse(annealed.out)["best_energy"] == 2);

    const auto verified = invoke({"verify", fasta});
    CHECK(verified.code == 0);
    CHECK(json::parse(verified.out)["all_pass"] == true);
}

TEST_CASE("reports are reproducible") {
    Scratch s;
    const auto fasta = s.write("t.fa", ">a\nA\n>b\nC\n>c\nG\n>d\nT\n>e\nA\n");
    REQUIRE(invoke({"build", fasta, "--out", s.path("m")}).code == 0);
    const auto one = invoke({"solve", s.path("m/model.pubo"), "--method", "anneal", "--seed", "3", "--out", s.path("r1")});
    const auto two = invoke({"solve", s.path("m/model.pubo"), "--method", "anneal", "--seed", "3", "--out", s.path("r2")});
    REQUIRE(one.code == 0);
    // identical apart from the echoed output directory
    auto r1 = json::parse(slurp(s.path("r1/report.json")));
    auto r2 = json::parse(slurp(s.path("r2/report.json")));
    CHECK(r1["config"]["out"] != r2["config"]["out"]);
    r1["config"].erase("out");
    r2["config"].erase("out");
    CHECK(r1.dump() == r2.dump());
    CHECK(slurp(s.path("r1/trace.csv")) == slurp(s.path("r2/trace.csv")));
}

TEST_CASE("oracle and windows") {
    Scratch s;
    const auto fasta = s.write("w.fa", ">a\nACGTAC\n>b\nACGTTT\n>c\nGGGTAC\n>d\nACTTAC\n");
    const auto r = invoke({"oracle", fasta, "--window", "4", "--stride", "2"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["results"].size() == 2);
    CHECK(j["results"][0]["m"] == 4);
    CHECK(j["results"][0]["topologies_scored"] == 3);

    const auto b = invoke({"build", fasta, "--window", "3", "--out", s.path("frag")});
    REQUIRE(b.code == 0);
    CHECK(fs::exists(s.path("frag/fragment_1/model.pubo")));
    CHECK(invoke({"build", fasta, "--window", "7"}).code == 2);
}

TEST_CASE("other model kinds build") {
    Scratch s;
    const auto fasta = s.write("t.fa", ">a\nA\n>b\nC\n>c\nG\n");
    const auto d = invoke({"build", fasta, "--model", "depth"});
    REQUIRE(d.code == 0);
    CHECK(json::parse(d.out)["models"][0]["total_vars"] == 24);
    CHECK(invoke({"build", fasta, "--model", "tree"}).code == 2);
}

TEST_CASE("quantum") {
    Scratch s;
    const auto fasta = s.write("t.fa", ">a\nA\n>b\nA\n>c\nG\n");
    REQUIRE(invoke({"build", fasta, "--out", s.path("m")}).code == 0);
    const auto q = invoke({"quantum", s.path("m/model.pubo"), "--algo", "vqe", "--layers", "2", "--tries", "10",
                           "--shots", "500", "--out", s.path("q")});
    REQUIRE(q.code == 0);
    const auto j = json::parse(q.out);
    CHECK(j["exact_ground_energy"] == 1.0);
    CHECK(j["gap"].get<double>() < 1e-3);
    CHECK(j["solution"]["feasible"] == true);
    const auto hist = json::parse(slurp(s.path("q/histogram.json")));
    std::size_t shots = 0;
    for (const auto& [k, v] : hist.items()) shots += v.get<std::size_t>();
    CHECK(shots == 500);

    const auto qa = invoke({"quantum", s.path("m/model.pubo"), "--algo", "qaoa", "--layers", "1", "--max-evals", "200"});
    CHECK(qa.code == 0);
}

TEST_CASE("exit codes") {
    Scratch s;
    CHECK(invoke({"build", s.path("missing.fa")}).code == 2);
    CHECK(invoke({"solve"}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"build", s.write("bad.fa", ">a\nAC\n>b\nA\n>c\nAC\n")}).code == 2);

    // penalty 1 is too weak: dropping every base indicator is cheaper than any tree
    const auto weak = s.write("weak.fa", ">a\nA\n>b\nC\n>c\nT\n");
    REQUIRE(invoke({"build", weak, "--penalty", "1", "--out", s.path("w")}).code == 0);
    CHECK(invoke({"solve", s.path("w/model.pubo")}).code == 3);

    std::string big;
    for (int i = 0; i < 11; ++i) big += ">t" + std::to_string(i) + "\nA\n";
    CHECK(invoke({"oracle", s.write("big.fa", big)}).code == 4);

    const auto two = s.write("two.fa", ">a\nAC\n>b\nAC\n>c\nGT\n>d\nGT\n");
    REQUIRE(invoke({"build", two, "--out", s.path("two")}).code == 0);
    CHECK(invoke({"quantum", s.path("two/model.pubo")}).code == 5);
}

TEST_CASE("verify catches a corrupted model") {
    Scratch s;
    const auto fasta = s.write("t.fa", ">a\nA\n>b\nC\n>c\nG\n>d\nT\n");
    REQUIRE(invoke({"build", fasta, "--out", s.path("m")}).code == 0);
    auto text = slurp(s.path("m/model.pubo"));
    // extra term on top of the compiled polynomial
    text += "5 0 1\n";
    const auto bad = s.write("bad.pubo", text);
    const auto r = invoke({"verify", fasta, "--pubo", bad});
    CHECK(r.code == 1);
    const auto j = json::parse(r.out);
    CHECK(j["checks"][0]["check"] == "energy_identity");
    CHECK(j["checks"][0]["pass"] == false);
}
