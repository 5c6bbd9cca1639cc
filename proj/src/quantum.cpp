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

#include "phylopubo/quantum.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <numeric>

#include "phylopubo/errors.hpp"
#include "phylopubo/rng.hpp"
#include "phylopubo/solve.hpp"

namespace phylopubo {

DiagonalHamiltonian::DiagonalHamiltonian(std::size_t num_qubits, std::vector<double> diag)
    : num_qubits_(num_qubits), diag_(std::move(diag)) {
    if (diag_.size() != (std::size_t{1} << num_qubits_)) throw ArityError("diagonal length must be 2^num_qubits");
}

DiagonalHamiltonian to_hamiltonian(const PuboModel& model, std::size_t max_qubits) {
    const std::size_t q = model.num_vars();
    if (q > max_qubits || q > 30) {
        throw TooManyQubitsError(std::to_string(q) + " qubits exceeds the simulation bound of " +
                                 std::to_string(std::min<std::size_t>(max_qubits, 30)));
    }
    std::vector<double> diag(std::size_t{1} << q);
    IncrementalEnergy e(model, Assignment(q, 0));
    std::uint64_t idx = 0;
    diag[0] = static_cast<double>(e.energy());
    for (std::uint64_t k = 1; k < diag.size(); ++k) {
        const int j = std::countr_zero(k);
        e.flip(static_cast<VarIndex>(j));
        idx ^= std::uint64_t{1} << j;
        diag[idx] = static_cast<double>(e.energy());
    }
    return DiagonalHamiltonian(q, std::move(diag));
}

GroundInfo exact_ground(const DiagonalHamiltonian& h) {
    GroundInfo g;
    g.energy = *std::min_element(h.diag().begin(), h.diag().end());
    for (std::uint64_t i = 0; i < h.diag().size(); ++i) {
        if (h[i] == g.energy) g.states.push_back(i);
    }
    return g;
}

Assignment basis_to_assignment(std::uint64_t idx, std::size_t num_qubits) {
    Assignment out(num_qubits);
    for (std::size_t k = 0; k < num_qubits; ++k) out[k] = static_cast<std::uint8_t>((idx >> k) & 1);
    return out;
}

Statevector::Statevector(std::size_t num_qubits)
    : num_qubits_(num_qubits), amps_(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0}) {
    amps_[0] = 1.0;
}

Statevector Statevector::uniform(std::size_t num_qubits) {
    Statevector s(num_qubits);
    const double a = 1.0 / std::sqrt(static_cast<double>(s.amps_.size()));
    std::fill(s.amps_.begin(), s.amps_.end(), Amplitude{a, 0.0});
    return s;
}

Statevector Statevector::basis(std::size_t num_qubits, std::uint64_t idx) {
    Statevector s(num_qubits);
    if (idx >= s.amps_.size()) throw ArityError("basis index out of range");
    s.amps_[0] = 0.0;
    s.amps_[idx] = 1.0;
    return s;
}

double Statevector::norm_squared() const {
    double t = 0.0;
    for (const auto& a : amps_) t += std::norm(a);
    return t;
}

void Statevector::apply_phase(const DiagonalHamiltonian& h, double gamma) {
    for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] *= std::polar(1.0, -gamma * h[i]);
}

void Statevector::apply_rx_half(std::size_t q, double beta) {
    const double c = std::cos(beta), s = std::sin(beta);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const Amplitude a0 = amps_[i], a1 = amps_[i | bit];
        amps_[i] = c * a0 + Amplitude{0.0, -s} * a1;
        amps_[i | bit] = Amplitude{0.0, -s} * a0 + c * a1;
    }
}

void Statevector::apply_ry(std::size_t q, double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const std::size_t bit = std::size_t{1} << q;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if (i & bit) continue;
        const Amplitude a0 = amps_[i], a1 = amps_[i | bit];
        amps_[i] = c * a0 - s * a1;
        amps_[i | bit] = s * a0 + c * a1;
    }
}

void Statevector::apply_cz(std::size_t a, std::size_t b) {
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        if ((i & mask) == mask) amps_[i] = -amps_[i];
    }
}

double Statevector::expectation(const DiagonalHamiltonian& h) const {
    double e = 0.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) e += std::norm(amps_[i]) * h[i];
    return e;
}

std::vector<double> Statevector::probabilities() const {
    std::vector<double> p(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) p[i] = std::norm(amps_[i]);
    return p;
}

std::uint64_t Statevector::most_probable() const {
    std::uint64_t best = 0;
    double best_p = -1.0;
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double p = std::norm(amps_[i]);
        if (p > best_p) {
            best_p = p;
            best = i;
        }
    }
    return best;
}

void qaoa_step(Statevector& state, const DiagonalHamiltonian& h, double gamma, double beta) {
    state.apply_phase(h, gamma);
    for (std::size_t q = 0; q < state.num_qubits(); ++q) state.apply_rx_half(q, beta);
}

std::map<std::uint64_t, std::size_t> sample_state(const Statevector& state, std::size_t shots, std::uint64_t seed) {
    if (shots < 1) throw Error("need at least one shot");
    const auto p = state.probabilities();
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    Rng rng(seed);
    std::map<std::uint64_t, std::size_t> hist;
    for (std::size_t k = 0; k < shots; ++k) {
        const double u = rng.uniform() * cdf.back();
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        // skip zero-probability entries that share the boundary value
        auto idx = static_cast<std::uint64_t>(it - cdf.begin());
        while (p[idx] == 0.0 && idx + 1 < p.size()) ++idx;
        ++hist[idx];
    }
    return hist;
}

// ---------------------------------------------------------------------------
// Nelder-Mead

namespace {

class BudgetedObjective {
  public:
    BudgetedObjective(const Objective& f, std::size_t budget, MinimizeResult& out) : f_(f), budget_(budget), out_(out) {}

    bool exhausted() const { return out_.evaluations >= budget_; }

    double operator()(const std::vector<double>& x) {
        const double v = f_(x);
        ++out_.evaluations;
        if (out_.trace.empty() || v < out_.fx) {
            out_.fx = v;
            out_.x = x;
        }
        out_.trace.push_back(out_.fx);
        return v;
    }

  private:
    const Objective& f_;
    std::size_t budget_;
    MinimizeResult& out_;
};

}  // namespace

MinimizeResult minimize(const Objective& f, std::vector<double> x0, const OptimizerConfig& opt) {
    for (double v : x0) {
        if (!std::isfinite(v)) throw Error("initial point must be finite");
    }
    constexpr double kReflect = 1.0, kExpand = 2.0, kContract = 0.5, kShrink = 0.5;
    MinimizeResult res;
    BudgetedObjective eval(f, std::max<std::size_t>(opt.max_evals, 1), res);
    const std::size_t dim = x0.size();

    std::vector<std::vector<double>> pts;
    std::vector<double> vals;
    auto build_simplex = [&](const std::vector<double>& center, double center_value) {
        pts.assign(1, center);
        vals.assign(1, center_value);
        for (std::size_t i = 0; i < dim && !eval.exhausted(); ++i) {
            auto p = center;
            p[i] += opt.initial_step;
            vals.push_back(eval(p));
            pts.push_back(std::move(p));
        }
    };
    build_simplex(x0, eval(x0));
    if (dim == 0) {
        res.converged = true;
        return res;
    }
    double best_at_restart = res.fx;
    bool first_convergence = true;

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);
    while (true) {
        if (pts.size() < dim + 1) break;  // budget ran out while building
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

        if (vals[worst] - vals[best] <= opt.ftol) {
            const bool improved = best_at_restart - res.fx > opt.ftol;
            if (opt.restart && !eval.exhausted() && (first_convergence || improved)) {
                first_convergence = false;
                best_at_restart = res.fx;
                const auto center = pts[best];
                const double center_value = vals[best];
                build_simplex(center, center_value);
                continue;
            }
            res.converged = true;
            break;
        }
        if (eval.exhausted()) break;

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < dim; ++k) {
            const auto& p = pts[order[k]];
            for (std::size_t i = 0; i < dim; ++i) centroid[i] += p[i] / static_cast<double>(dim);
        }
        for (std::size_t i = 0; i < dim; ++i) xr[i] = centroid[i] + kReflect * (centroid[i] - pts[worst][i]);
        const double fr = eval(xr);

        if (fr < vals[best]) {
            if (eval.exhausted()) {
                pts[worst] = xr;
                vals[worst] = fr;
                break;
            }
            for (std::size_t i = 0; i < dim; ++i) xe[i] = centroid[i] + kExpand * (xr[i] - centroid[i]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        if (eval.exhausted()) break;
        const bool outside = fr < vals[worst];
        const auto& toward = outside ? xr : pts[worst];
        for (std::size_t i = 0; i < dim; ++i) xc[i] = centroid[i] + kContract * (toward[i] - centroid[i]);
        const double fc = eval(xc);
        if (outside ? fc <= fr : fc < vals[worst]) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t k = 1; k <= dim && !eval.exhausted(); ++k) {
            auto& p = pts[order[k]];
            for (std::size_t i = 0; i < dim; ++i) p[i] = pts[best][i] + kShrink * (p[i] - pts[best][i]);
            vals[order[k]] = eval(p);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// variational algorithms

Statevector qaoa_state(const DiagonalHamiltonian& h, std::span<const double> params) {
    if (params.size() % 2 != 0) throw ArityError("QAOA needs 2p parameters");
    const std::size_t p = params.size() / 2;
    auto state = Statevector::uniform(h.num_qubits());
    for (std::size_t l = 0; l < p; ++l) qaoa_step(state, h, params[l], params[p + l]);
    return state;
}

Statevector vqe_state(std::size_t num_qubits, std::size_t layers, std::span<const double> params, bool ring) {
    if (params.size() != num_qubits * (layers + 1)) throw ArityError("VQE needs q * (p + 1) parameters");
    Statevector state(num_qubits);
    for (std::size_t l = 0; l <= layers; ++l) {
        for (std::size_t q = 0; q < num_qubits; ++q) state.apply_ry(q, params[l * num_qubits + q]);
        if (l == layers) break;
        for (std::size_t q = 0; q + 1 < num_qubits; ++q) state.apply_cz(q, q + 1);
        if (ring && num_qubits > 2) state.apply_cz(num_qubits - 1, 0);
    }
    return state;
}

namespace {

VariationalRun finish_run(VariationalAlgo algo, std::size_t layers, std::uint64_t seed, MinimizeResult&& m,
                          const Statevector& final_state, const DiagonalHamiltonian& h) {
    VariationalRun run;
    run.algo = algo;
    run.layers = layers;
    run.seed = seed;
    run.params = std::move(m.x);
    run.trace = std::move(m.trace);
    run.evaluations = m.evaluations;
    run.converged = m.converged;
    run.final_energy = final_state.expectation(h);
    run.most_probable = final_state.most_probable();
    run.most_probable_probability = std::norm(final_state.amplitudes()[run.most_probable]);
    return run;
}

}  // namespace

VariationalRun qaoa_run(const DiagonalHamiltonian& h, std::size_t layers, const OptimizerConfig& opt,
                        std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x0(2 * layers);
    for (auto& v : x0) v = rng.uniform(0.0, 0.1);
    auto m = minimize([&](std::span<const double> x) { return qaoa_state(h, x).expectation(h); }, x0, opt);
    const auto state = qaoa_state(h, m.x);
    return finish_run(VariationalAlgo::Qaoa, layers, seed, std::move(m), state, h);
}

VariationalRun vqe_run(const DiagonalHamiltonian& h, std::size_t layers, const OptimizerConfig& opt,
                       std::uint64_t seed, bool ring) {
    if (layers < 1) throw Error("VQE needs at least one entangling layer");
    Rng rng(seed);
    const std::size_t q = h.num_qubits();
    std::vector<double> x0(q * (layers + 1));
    for (auto& v : x0) v = rng.uniform(-std::numbers::pi, std::numbers::pi);
    auto m = minimize([&](std::span<const double> x) { return vqe_state(q, layers, x, ring).expectation(h); }, x0,
                      opt);
    const auto state = vqe_state(q, layers, m.x, ring);
    return finish_run(VariationalAlgo::Vqe, layers, seed, std::move(m), state, h);
}

std::string variational_trace_csv(const VariationalRun& run) {
    std::string out = "iteration,expectation\n";
    char buf[64];
    for (std::size_t i = 0; i < run.trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", i + 1, run.trace[i]);
        out += buf;
    }
    return out;
}

}  // namespace phylopubo
