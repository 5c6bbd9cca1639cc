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

#include "phylopubo/solve.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "phylopubo/errors.hpp"
#include "phylopubo/rng.hpp"

namespace phylopubo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Polynomial over at most 64 variables with terms as bitmasks. For each
// variable, the terms containing it are stored as (mask of the other
// variables, coefficient), which makes a flip delta a handful of AND/compare.
struct MaskModel {
    int num_vars = 0;
    std::int64_t constant = 0;
    std::vector<std::vector<std::pair<std::uint64_t, std::int64_t>>> by_var;

    explicit MaskModel(int q) : num_vars(q), by_var(static_cast<std::size_t>(q)) {}

    void add(std::uint64_t mask, std::int64_t coef) {
        if (mask == 0) {
            constant += coef;
            return;
        }
        for (std::uint64_t rest = mask; rest; rest &= rest - 1) {
            const int v = std::countr_zero(rest);
            by_var[v].emplace_back(mask & ~(std::uint64_t{1} << v), coef);
        }
    }
};

struct ScanResult {
    std::int64_t best = 0;
    std::uint64_t best_mask = 0;
    std::uint64_t count = 0;
    std::vector<std::uint64_t> ground;
    bool truncated = false;
    std::vector<TracePoint> trace;
};

// Visits all 2^q assignments in Gray-code order.
ScanResult gray_scan(const MaskModel& mm, std::size_t ground_cap, bool keep_trace) {
    ScanResult r;
    std::uint64_t a = 0;
    std::int64_t e = mm.constant;
    r.best = e;
    r.count = 1;
    if (ground_cap > 0) r.ground.push_back(0);
    if (keep_trace) r.trace.push_back({0, e});
    const std::uint64_t total = std::uint64_t{1} << mm.num_vars;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int j = std::countr_zero(k);
        std::int64_t d = 0;
        for (const auto& [m, c] : mm.by_var[j]) {
            if ((a & m) == m) d += c;
        }
        const std::uint64_t bit = std::uint64_t{1} << j;
        e += (a & bit) ? -d : d;
        a ^= bit;
        if (e < r.best) {
            r.best = e;
            r.best_mask = a;
            r.count = 1;
            r.ground.clear();
            r.truncated = false;
            if (ground_cap > 0) r.ground.push_back(a);
            if (keep_trace) r.trace.push_back({k, e});
        } else if (e == r.best) {
            ++r.count;
            if (r.ground.size() < ground_cap) {
                r.ground.push_back(a);
            } else {
                r.truncated = true;
            }
        }
    }
    return r;
}

Assignment mask_to_assignment(std::uint64_t mask, std::size_t q) {
    Assignment out(q, 0);
    for (std::size_t i = 0; i < q; ++i) out[i] = static_cast<std::uint8_t>((mask >> i) & 1);
    return out;
}

}  // namespace

std::string trace_csv(const std::vector<TracePoint>& trace) {
    std::string out = "step,best_energy\n";
    for (const auto& p : trace) out += std::to_string(p.step) + "," + std::to_string(p.best_energy) + "\n";
    return out;
}

SolveResult solve_exhaustive(const PuboModel& model, const ExhaustiveOptions& options) {
    const auto t0 = Clock::now();
    const std::size_t q = model.num_vars();
    if (q > options.max_vars || q > 63) {
        throw TooManyVariablesError("exhaustive search over " + std::to_string(q) + " variables exceeds bound " +
                                    std::to_string(std::min<std::size_t>(options.max_vars, 63)));
    }
    MaskModel mm(static_cast<int>(q));
    for (const auto& t : model.terms()) {
        std::uint64_t mask = 0;
        for (VarIndex v : t.vars) mask |= std::uint64_t{1} << v;
        mm.add(mask, t.coef);
    }
    auto scan = gray_scan(mm, options.max_ground_states, true);

    SolveResult res;
    res.best_energy = scan.best;
    res.best_assignment = mask_to_assignment(scan.best_mask, q);
    res.ground_count = scan.count;
    res.ground_set_truncated = scan.truncated;
    std::vector<Assignment> ground;
    ground.reserve(scan.ground.size());
    std::sort(scan.ground.begin(), scan.ground.end());
    for (auto mask : scan.ground) ground.push_back(mask_to_assignment(mask, q));
    res.ground_set = std::move(ground);
    res.trace = std::move(scan.trace);
    res.wall_time = seconds_since(t0);
    return res;
}

SolveResult solve_conditioned(const PuboModel& model, std::span<const VarIndex> pivot,
                              const ExhaustiveOptions& options, std::optional<std::int64_t> free_floor) {
    const auto t0 = Clock::now();
    const std::size_t q = model.num_vars();
    if (pivot.size() > options.max_vars || pivot.size() > 63) {
        throw TooManyVariablesError("pivot set of " + std::to_string(pivot.size()) + " variables exceeds bound");
    }
    std::vector<int> pivot_bit(q, -1);
    for (std::size_t k = 0; k < pivot.size(); ++k) {
        if (pivot[k] >= q) throw ArityError("pivot variable out of range");
        pivot_bit[pivot[k]] = static_cast<int>(k);
    }

    // split every term into its pivot mask and its free monomial (deduplicated)
    struct Split {
        std::uint64_t pivot_mask = 0;
        std::uint32_t mono = 0;
        std::int64_t coef = 0;
    };
    std::vector<Split> split;
    std::vector<std::vector<VarIndex>> monos;
    {
        std::map<std::vector<VarIndex>, std::uint32_t> ids;
        std::vector<VarIndex> free;
        for (const auto& t : model.terms()) {
            Split sp;
            sp.coef = t.coef;
            free.clear();
            for (VarIndex v : t.vars) {
                if (pivot_bit[v] >= 0) {
                    sp.pivot_mask |= std::uint64_t{1} << pivot_bit[v];
                } else {
                    free.push_back(v);
                }
            }
            auto [it, fresh] = ids.try_emplace(free, static_cast<std::uint32_t>(monos.size()));
            if (fresh) monos.push_back(free);
            sp.mono = it->second;
            split.push_back(sp);
        }
    }

    SolveResult res;
    res.best_energy = std::numeric_limits<std::int64_t>::max();
    const std::uint64_t total = std::uint64_t{1} << pivot.size();
    std::vector<std::int64_t> coef(monos.size(), 0);
    std::vector<std::uint8_t> listed(monos.size(), 0);
    std::vector<std::uint32_t> touched;
    std::vector<VarIndex> parent(q);
    std::vector<std::uint64_t> stamp(q, 0);
    std::vector<int> local(q, -1);
    std::vector<VarIndex> roots;
    std::vector<std::vector<VarIndex>> members;
    std::vector<int> comp_of(q, -1);
    for (std::uint64_t a = 0; a < total; ++a) {
        touched.clear();
        for (const auto& sp : split) {
            if ((a & sp.pivot_mask) != sp.pivot_mask) continue;
            if (!listed[sp.mono]) {
                listed[sp.mono] = 1;
                touched.push_back(sp.mono);
            }
            coef[sp.mono] += sp.coef;
        }
        if (free_floor) {
            std::int64_t constant = 0;
            for (auto id : touched)
                if (monos[id].empty()) constant += coef[id];
            if (constant + *free_floor >= res.best_energy) {
                for (auto id : touched) {
                    coef[id] = 0;
                    listed[id] = 0;
                }
                continue;
            }
        }
        const std::uint64_t tag = a + 1;
        auto find = [&](VarIndex v) {
            if (stamp[v] != tag) {
                stamp[v] = tag;
                parent[v] = v;
                comp_of[v] = -1;
            }
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        std::int64_t energy = 0;
        for (auto id : touched) {
            const auto& vars = monos[id];
            if (vars.empty()) {
                energy += coef[id];
                continue;
            }
            if (coef[id] == 0) continue;
            const VarIndex r0 = find(vars[0]);
            for (std::size_t k = 1; k < vars.size(); ++k) {
                const VarIndex rk = find(vars[k]);
                if (rk != r0) parent[rk] = r0;
            }
        }
        // components of the free variables that appear in some nonzero term
        roots.clear();
        for (auto& m : members) m.clear();
        for (auto id : touched) {
            if (monos[id].empty() || coef[id] == 0) continue;
            for (VarIndex v : monos[id]) {
                const VarIndex r = find(v);
                if (comp_of[r] < 0) {
                    comp_of[r] = static_cast<int>(roots.size());
                    roots.push_back(r);
                    if (members.size() < roots.size()) members.emplace_back();
                }
                auto& mem = members[comp_of[r]];
                if (local[v] < 0) {
                    local[v] = static_cast<int>(mem.size());
                    mem.push_back(v);
                }
            }
        }
        Assignment bits(q, 0);
        for (std::size_t k = 0; k < pivot.size(); ++k) bits[pivot[k]] = static_cast<std::uint8_t>((a >> k) & 1);
        for (std::size_t c = 0; c < roots.size(); ++c) {
            const auto& mem = members[c];
            if (mem.size() > options.max_vars || mem.size() > 63) {
                throw TooManyVariablesError("conditioned component of " + std::to_string(mem.size()) +
                                            " variables exceeds bound");
            }
            MaskModel mm(static_cast<int>(mem.size()));
            for (auto id : touched) {
                const auto& vars = monos[id];
                if (vars.empty() || coef[id] == 0 || find(vars[0]) != roots[c]) continue;
                std::uint64_t mask = 0;
                for (VarIndex v : vars) mask |= std::uint64_t{1} << local[v];
                mm.add(mask, coef[id]);
            }
            const auto scan = gray_scan(mm, 0, false);
            energy += scan.best;
            for (std::size_t k = 0; k < mem.size(); ++k) {
                bits[mem[k]] = static_cast<std::uint8_t>((scan.best_mask >> k) & 1);
            }
        }
        for (std::size_t c = 0; c < roots.size(); ++c)
            for (VarIndex v : members[c]) local[v] = -1;
        for (auto id : touched) {
            coef[id] = 0;
            listed[id] = 0;
        }
        if (energy < res.best_energy) {
            res.best_energy = energy;
            res.best_assignment = std::move(bits);
            res.trace.push_back({a, energy});
        }
    }
    res.wall_time = seconds_since(t0);
    return res;
}

// ---------------------------------------------------------------------------

void AnnealSchedule::validate() const {
    if (sweeps < 1) throw ScheduleInvalidError("anneal schedule needs at least one sweep");
    if (restarts < 1) throw ScheduleInvalidError("anneal schedule needs at least one restart");
    if (!(t_end > 0.0) || !(t_start >= t_end) || !std::isfinite(t_start)) {
        throw ScheduleInvalidError("anneal temperatures must satisfy t_start >= t_end > 0");
    }
}

AnnealSchedule AnnealSchedule::defaults(std::size_t num_vars, std::int64_t penalty) {
    AnnealSchedule s;
    s.sweeps = std::max<std::size_t>(1, 200 * num_vars);
    s.t_start = std::max(static_cast<double>(penalty), 0.1);
    s.t_end = 0.1;
    s.restarts = 8;
    return s;
}

IncrementalEnergy::IncrementalEnergy(const PuboModel& model, Assignment start)
    : model_(model), incident_(model.num_vars()), missing_(model.terms().size(), 0), bits_(std::move(start)) {
    if (bits_.size() != model.num_vars()) throw ArityError("start assignment length differs from model");
    const auto& terms = model.terms();
    for (std::uint32_t t = 0; t < terms.size(); ++t) {
        for (VarIndex v : terms[t].vars) {
            incident_[v].push_back(t);
            if (!bits_[v]) ++missing_[t];
        }
        if (missing_[t] == 0) energy_ += terms[t].coef;
    }
}

std::int64_t IncrementalEnergy::delta(VarIndex v) const {
    const auto& terms = model_.terms();
    std::int64_t d = 0;
    const std::uint32_t own = bits_[v] ? 0 : 1;
    for (std::uint32_t t : incident_[v]) {
        if (missing_[t] == own) d += terms[t].coef;
    }
    return bits_[v] ? -d : d;
}

void IncrementalEnergy::flip(VarIndex v) {
    energy_ += delta(v);
    if (bits_[v]) {
        for (std::uint32_t t : incident_[v]) ++missing_[t];
    } else {
        for (std::uint32_t t : incident_[v]) --missing_[t];
    }
    bits_[v] ^= 1;
}

namespace {

struct ChainResult {
    Assignment best;
    std::int64_t best_energy = 0;
    std::vector<std::int64_t> per_sweep_best;
};

ChainResult anneal_chain(const PuboModel& model, const AnnealSchedule& sch, std::uint64_t chain_seed) {
    Rng rng(chain_seed);
    const std::size_t q = model.num_vars();
    Assignment start(q);
    for (auto& b : start) b = rng.coin() ? 1 : 0;
    IncrementalEnergy state(model, std::move(start));

    ChainResult out;
    out.best = state.assignment();
    out.best_energy = state.energy();
    out.per_sweep_best.reserve(sch.sweeps);
    const double ratio = sch.t_end / sch.t_start;
    for (std::size_t k = 0; k < sch.sweeps; ++k) {
        const double frac = sch.sweeps > 1 ? static_cast<double>(k) / static_cast<double>(sch.sweeps - 1) : 0.0;
        const double temp = sch.t_start * std::pow(ratio, frac);
        for (VarIndex v = 0; v < q; ++v) {
            const std::int64_t d = state.delta(v);
            if (d <= 0 || rng.uniform() < std::exp(-static_cast<double>(d) / temp)) {
                state.flip(v);
                if (state.energy() < out.best_energy) {
                    out.best_energy = state.energy();
                    out.best = state.assignment();
                }
            }
        }
        out.per_sweep_best.push_back(out.best_energy);
    }
    return out;
}

}  // namespace

SolveResult solve_anneal(const PuboModel& model, const AnnealSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    const auto t0 = Clock::now();
    std::vector<std::future<ChainResult>> chains;
    chains.reserve(schedule.restarts);
    for (std::size_t r = 0; r < schedule.restarts; ++r) {
        chains.push_back(std::async(std::launch::async, anneal_chain, std::cref(model), std::cref(schedule),
                                    splitmix64(seed + r)));
    }
    SolveResult res;
    res.seed = seed;
    res.best_energy = std::numeric_limits<std::int64_t>::max();
    for (std::size_t r = 0; r < chains.size(); ++r) {
        auto chain = chains[r].get();
        for (std::size_t k = 0; k < chain.per_sweep_best.size(); ++k) {
            const std::int64_t e = chain.per_sweep_best[k];
            if (res.trace.empty() || e < res.trace.back().best_energy) {
                res.trace.push_back({r * schedule.sweeps + k, e});
            }
        }
        if (chain.best_energy < res.best_energy) {
            res.best_energy = chain.best_energy;
            res.best_assignment = std::move(chain.best);
        }
    }
    res.wall_time = seconds_since(t0);
    return res;
}

SolveResult descend(const PuboModel& model, std::span<const std::uint8_t> start, std::uint64_t seed) {
    const auto t0 = Clock::now();
    IncrementalEnergy state(model, Assignment(start.begin(), start.end()));
    SolveResult res;
    res.seed = seed;
    res.trace.push_back({0, state.energy()});
    for (std::uint64_t step = 1;; ++step) {
        std::int64_t best_delta = 0;
        std::optional<VarIndex> best_var;
        for (VarIndex v = 0; v < model.num_vars(); ++v) {
            const std::int64_t d = state.delta(v);
            if (d < best_delta) {
                best_delta = d;
                best_var = v;
            }
        }
        if (!best_var) break;
        state.flip(*best_var);
        res.trace.push_back({step, state.energy()});
    }
    res.best_energy = state.energy();
    res.best_assignment = state.assignment();
    res.wall_time = seconds_since(t0);
    return res;
}

}  // namespace phylopubo
