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

#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "phylopubo/errors.hpp"
#include "phylopubo/model.hpp"
#include "phylopubo/quantum.hpp"

using namespace phylopubo;
using cd = std::complex<double>;
using Dense = std::vector<std::vector<cd>>;

namespace {

// Full-matrix reference: kron of 2x2 blocks, qubit k is bit k of the index.
Dense embed(const std::array<std::array<cd, 2>, 2>& g, std::size_t q, std::size_t nq) {
    const std::size_t dim = std::size_t{1} << nq;
    Dense m(dim, std::vector<cd>(dim, 0.0));
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            if ((r & ~(std::size_t{1} << q)) != (c & ~(std::size_t{1} << q))) continue;
            m[r][c] = g[r >> q & 1][c >> q & 1];
        }
    return m;
}

std::vector<cd> matvec(const Dense& m, const std::vector<cd>& v) {
    std::vector<cd> out(v.size(), 0.0);
    for (std::size_t r = 0; r < v.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

void check_close(const std::vector<cd>& a, const std::vector<cd>& b, double tol = 1e-12) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < tol);
}

}  // namespace

TEST_CASE("hamiltonian diagonal equals model energies") {
    Rng rng(2);
    const auto steps = default_step_matrix();
    const auto a = oracle::random_alignment(rng, 3, 1);
    const auto cm = compile_branch(a, steps, default_penalty(a, steps));
    const auto h = to_hamiltonian(cm.model);
    REQUIRE(h.num_qubits() == 8);
    for (std::uint64_t i = 0; i < 256; ++i) {
        const auto bits = basis_to_assignment(i, 8);
        CHECK(h[i] == static_cast<double>(oracle::eval_terms(cm.model, bits)));
    }
    const auto g = exact_ground(h);
    CHECK(g.energy == static_cast<double>(oracle::brute_mp(a, steps)));
    for (auto s : g.states) CHECK(h[s] == g.energy);
}

TEST_CASE("qubit bound") {
    const PuboModel big(21, Polynomial(1));
    CHECK_THROWS_AS(to_hamiltonian(big), TooManyQubitsError);
    CHECK_NOTHROW(to_hamiltonian(PuboModel(4, Polynomial(1))));
}

TEST_CASE("gates against dense matrices") {
    Rng rng(10);
    const std::size_t nq = 3;
    for (int rep = 0; rep < 20; ++rep) {
        auto sv = Statevector::uniform(nq);
        for (std::size_t q = 0; q < nq; ++q) sv.apply_ry(q, rng.uniform(-3, 3));
        std::vector<cd> ref = sv.amplitudes();

        const double theta = rng.uniform(-3, 3), beta = rng.uniform(-3, 3);
        const std::size_t q = rng.below(nq);
        const double c = std::cos(theta / 2), s = std::sin(theta / 2);
        sv.apply_ry(q, theta);
        ref = matvec(embed({{{c, -s}, {s, c}}}, q, nq), ref);
        check_close(sv.amplitudes(), ref);

        sv.apply_rx_half(q, beta);
        const cd mi(0, -std::sin(beta));
        ref = matvec(embed({{{std::cos(beta), mi}, {mi, std::cos(beta)}}}, q, nq), ref);
        check_close(sv.amplitudes(), ref);

        sv.apply_cz(0, 2);
        for (std::size_t i = 0; i < ref.size(); ++i)
            if ((i & 1) && (i & 4)) ref[i] = -ref[i];
        check_close(sv.amplitudes(), ref);

        std::vector<double> diag(8);
        for (auto& d : diag) d = rng.uniform(-2, 2);
        const DiagonalHamiltonian h(nq, diag);
        const double gamma = rng.uniform(-1, 1);
        sv.apply_phase(h, gamma);
        for (std::size_t i = 0; i < ref.size(); ++i) ref[i] *= std::exp(cd(0, -gamma * diag[i]));
        check_close(sv.amplitudes(), ref);

        double e = 0;
        for (std::size_t i = 0; i < ref.size(); ++i) e += std::norm(ref[i]) * diag[i];
        CHECK(sv.expectation(h) == doctest::Approx(e).epsilon(1e-12));
    }
}

TEST_CASE("norm is preserved over long gate sequences") {
    Rng rng(44);
    auto sv = Statevector(6);
    const DiagonalHamiltonian h(6, std::vector<double>(64, 1.5));
    for (int k = 0; k < 1000; ++k) {
        switch (rng.below(4)) {
            case 0: sv.apply_ry(rng.below(6), rng.uniform(-7, 7)); break;
            case 1: sv.apply_rx_half(rng.below(6), rng.uniform(-7, 7)); break;
            case 2: sv.apply_cz(rng.below(6), (rng.below(5) + 1) % 6); break;
            default: sv.apply_phase(h, rng.uniform(-7, 7)); break;
        }
        CHECK(std::abs(sv.norm_squared() - 1.0) < 1e-10);
    }
}

TEST_CASE("simple states") {
    const auto z = Statevector(3);
    CHECK(z.amplitudes()[0] == cd(1, 0));
    CHECK(z.most_probable() == 0);
    const auto u = Statevector::uniform(2);
    for (auto p : u.probabilities()) CHECK(p == doctest::Approx(0.25));
    CHECK(u.most_probable() == 0);
    CHECK(Statevector::basis(3, 5).most_probable() == 5);

    // all-zero VQE angles leave |0...0>
    const std::vector<double> zeros(3 * 3, 0.0);
    const auto v = vqe_state(3, 2, zeros);
    CHECK(v.probabilities()[0] == doctest::Approx(1.0));
    // QAOA with zero angles keeps the uniform state
    const DiagonalHamiltonian h(2, {0, 1, 2, 3});
    const auto qs = qaoa_state(h, std::vector<double>{0.0, 0.0});
    for (auto p : qs.probabilities()) CHECK(p == doctest::Approx(0.25));
    CHECK(qs.expectation(h) == doctest::Approx(1.5));
}

TEST_CASE("sampling") {
    auto sv = Statevector(2);
    sv.apply_ry(0, std::numbers::pi / 2);  // |0> and |1> on qubit 0, equal weight
    const auto a = sample_state(sv, 4000, 9);
    const auto b = sample_state(sv, 4000, 9);
    CHECK(a == b);
    std::size_t total = 0;
    for (auto [idx, count] : a) {
        CHECK((idx == 0 || idx == 1));
        total += count;
    }
    CHECK(total == 4000);
    CHECK(a.at(0) > 1800);
    CHECK(a.at(1) > 1800);
}

TEST_CASE("Nelder-Mead") {
    const auto bowl = [](std::span<const double> x) {
        return (x[0] - 1) * (x[0] - 1) + 4 * (x[1] + 2) * (x[1] + 2) + 3;
    };
    const auto r = minimize(bowl, {0.0, 0.0});
    CHECK(r.fx == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.x[1] == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(r.converged);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
    CHECK(r.trace.size() == r.evaluations);

    const auto rosen = [](std::span<const double> x) {
        return 100 * (x[1] - x[0] * x[0]) * (x[1] - x[0] * x[0]) + (1 - x[0]) * (1 - x[0]);
    };
    OptimizerConfig opt;
    opt.max_evals = 3000;
    const auto rr = minimize(rosen, {-1.2, 1.0}, opt);
    CHECK(rr.fx < 1e-6);
    CHECK(rr.evaluations <= 3000);

    opt.max_evals = 10;
    CHECK(minimize(rosen, {-1.2, 1.0}, opt).evaluations <= 10);
}

TEST_CASE("variational runs on a small instance") {
    const auto steps = default_step_matrix();
    const auto a = parse_fasta(">a\nA\n>b\nA\n>c\nG\n");
    const auto cm = compile_branch(a, steps, default_penalty(a, steps));
    const auto h = to_hamiltonian(cm.model);
    const auto e0 = exact_ground(h).energy;
    OptimizerConfig opt;
    opt.max_evals = 600;
    for (std::size_t p = 1; p <= 2; ++p) {
        const auto q = qaoa_run(h, p, opt, 3);
        CHECK(q.params.size() == 2 * p);
        CHECK(q.final_energy >= e0 - 1e-9);
        CHECK(q.trace.size() == q.evaluations);
        const auto again = qaoa_run(h, p, opt, 3);
        CHECK(again.final_energy == q.final_energy);
        const auto v = vqe_run(h, p, opt, 3);
        CHECK(v.params.size() == 8 * (p + 1));
        CHECK(v.final_energy >= e0 - 1e-9);
        CHECK(vqe_state(8, p, v.params).expectation(h) == doctest::Approx(v.final_energy));
    }
    CHECK_THROWS_AS(vqe_run(h, 0, opt, 1), Error);
    const auto csv = variational_trace_csv(qaoa_run(h, 1, opt, 1));
    CHECK(csv.rfind("iteration,expectation\n", 0) == 0);
}
