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

#include "phylopubo/errors.hpp"
#include "phylopubo/seqio.hpp"

using namespace phylopubo;

TEST_CASE("fasta parsing") {
    const auto a = parse_fasta(">one first taxon\nACgt\nA-\n>two\nAAAA\nTT\n>three\nCCCCGG\n");
    CHECK(a.num_taxa() == 3);
    CHECK(a.num_sites() == 6);
    CHECK(a.taxa() == std::vector<std::string>{"one", "two", "three"});
    CHECK(a.rows()[0] == "ACGTA-");
    CHECK(a.state(0, 3) == 3);
    CHECK(a.column(5) == std::vector<State>{kGap, 3, 2});
    CHECK(a.ingest_notes().empty());
}

TEST_CASE("unknown characters become gaps and are noted") {
    const auto a = parse_fasta(">a\nANRA\n>b\nAAAA\n>c\nAAAA\n");
    CHECK(a.rows()[0] == "A--A");
    REQUIRE(a.ingest_notes().size() == 2);
    CHECK(a.ingest_notes()[0].find("'N'") != std::string::npos);
}

TEST_CASE("malformed alignments") {
    CHECK_THROWS_AS(parse_fasta(""), EmptyInputError);
    CHECK_THROWS_AS(parse_fasta(">a\nAC\n>b\nA\n>c\nAC\n"), AlignmentRaggedError);
    CHECK_THROWS_AS(parse_fasta(">a\nAC\n>b\nAC\n"), TooFewTaxaError);
    CHECK_THROWS_AS(parse_fasta(">a\nAC\n>a\nAC\n>c\nAC\n"), ParseError);
    CHECK_THROWS_AS(parse_fasta("AC\n>a\nAC\n"), ParseError);
    CHECK_THROWS_AS(Alignment({"a", "b", "c"}, {"", "", ""}), EmptyInputError);
}

TEST_CASE("fasta round trip") {
    const auto a = parse_fasta(">x\nACGTACGTAC\n>y\nTTTTTTTTTT\n>z\n----AAAAAA\n");
    const auto text = to_fasta(a, 4);
    CHECK(text.find("ACGT\nACGT\nAC\n") != std::string::npos);
    CHECK(parse_fasta(text) == a);
}

TEST_CASE("default step matrix") {
    const auto s = default_step_matrix();
    const State A = 0, C = 1, G = 2, T = 3;
    // transitions 1, transversions 2, anything against a gap 4
    CHECK(s.cost(A, G) == 1);
    CHECK(s.cost(C, T) == 1);
    CHECK(s.cost(A, C) == 2);
    CHECK(s.cost(A, T) == 2);
    CHECK(s.cost(G, C) == 2);
    CHECK(s.cost(G, T) == 2);
    for (State x = 0; x < 4; ++x) {
        CHECK(s.cost(x, kGap) == 4);
        CHECK(s.cost(x, x) == 0);
    }
    CHECK(s.max_entry() == 4);
}

TEST_CASE("step matrix validation") {
    StepMatrix::Grid g{};
    g[0][1] = 1;
    CHECK_THROWS_AS(StepMatrix{g}, StepMatrixInvalidError);
    g[1][0] = 1;
    g[2][2] = 1;
    CHECK_THROWS_AS(StepMatrix{g}, StepMatrixInvalidError);
    g[2][2] = 0;
    g[3][4] = g[4][3] = -1;
    CHECK_THROWS_AS(StepMatrix{g}, StepMatrixInvalidError);
}

TEST_CASE("step matrix json in any state order") {
    const auto s = load_step_matrix(R"({"states":["-","T","G","C","A"],
        "cost":[[0,3,3,3,3],[3,0,5,1,5],[3,5,0,5,1],[3,1,5,0,5],[3,5,1,5,0]]})");
    CHECK(s.cost(0, 2) == 1);
    CHECK(s.cost(0, 1) == 5);
    CHECK(s.cost(kGap, 3) == 3);
    const auto back = load_step_matrix(step_matrix_to_json(s));
    for (State x = 0; x < kNumStates; ++x)
        for (State y = 0; y < kNumStates; ++y) CHECK(back.cost(x, y) == s.cost(x, y));
    CHECK_THROWS_AS(load_step_matrix("{\"states\":[\"A\"]}"), StepMatrixInvalidError);
    CHECK_THROWS(load_step_matrix("not json"));
}

TEST_CASE("pattern compression") {
    const auto a = parse_fasta(">a\nAACAG\n>b\nAACAG\n>c\nGGTGA\n");
    const auto p = compress_patterns(a);
    REQUIRE(p.size() == 3);
    CHECK(p.weights == std::vector<int>{3, 1, 1});
    CHECK(p.site_to_pattern == std::vector<std::size_t>{0, 0, 1, 0, 2});
    std::size_t total = 0;
    for (auto w : p.weights) total += w;
    CHECK(total == a.num_sites());
}

TEST_CASE("sliding windows") {
    const auto a = parse_fasta(">a\nACGTACGTAC\n>b\nAAAAAAAAAA\n>c\nCCCCCCCCCC\n");
    const auto w = window_fragments(a, 4, 3);
    // starts 0, 3, 6
    REQUIRE(w.size() == 3);
    CHECK(w[1].rows()[0] == "TACG");
    CHECK(w[2].num_sites() == 4);
    CHECK(window_fragments(a, 10, 1).size() == 1);
    CHECK_THROWS_AS(window_fragments(a, 11, 1), FragmentTooLongError);
    CHECK_THROWS_AS(window_fragments(a, 0, 1), Error);
    CHECK_THROWS_AS(window_fragments(a, 2, 0), Error);
}
