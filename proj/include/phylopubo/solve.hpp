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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phylopubo/pubo.hpp"

namespace phylopubo {

struct TracePoint {
    std::uint64_t step = 0;
    std::int64_t best_energy = 0;
};

struct SolveResult {
    Assignment best_assignment;
    std::int64_t best_energy = 0;
    /// Exhaustive search only: minimizing assignments (possibly truncated) and their exact count.
    std::optional<std::vector<Assignment>> ground_set;
    std::uint64_t ground_count = 0;
    bool ground_set_truncated = false;
    /// Best-so-far energy, non-increasing in step.
    std::vector<TracePoint> trace;
    std::uint64_t seed = 0;
    double wall_time = 0.0;  // seconds
};

/// "step,best_energy" CSV.
std::string trace_csv(const std::vector<TracePoint>& trace);

struct ExhaustiveOptions {
    std::size_t max_vars = 26;
    std::size_t max_ground_states = std::size_t{1} << 16;
};

/// Full Gray-code scan of all 2^num_vars assignments.
/// Throws TooManyVariablesError above options.max_vars.
SolveResult solve_exhaustive(const PuboModel& model, const ExhaustiveOptions& options = {});

/// Exact minimum by enumerating the `pivot` variables; for each pivot
/// assignment the remaining polynomial splits into independent connected
/// components, each scanned exhaustively. Every pivot count and component size
/// must respect options.max_vars. Does not fill ground_set.
///
/// `free_floor`, if given, is the caller's guarantee that for every pivot
/// assignment the restricted polynomial minus its constant never drops below
/// it; pivot assignments whose constant plus the floor cannot beat the best
/// energy so far are skipped.
SolveResult solve_conditioned(const PuboModel& model, std::span<const VarIndex> pivot,
                              const ExhaustiveOptions& options = {},
                              std::optional<std::int64_t> free_floor = std::nullopt);

/// Metropolis schedule. Temperatures interpolate geometrically from t_start to
/// t_end over `sweeps` sweeps; one sweep visits every variable once in index order.
struct AnnealSchedule {
    std::size_t sweeps = 1;
    double t_start = 1.0;
    double t_end = 0.1;
    std::size_t restarts = 1;

    /// Throws ScheduleInvalidError.
    void validate() const;
    /// sweeps = 200 * num_vars, t_start = penalty, t_end = 0.1, restarts = 8.
    static AnnealSchedule defaults(std::size_t num_vars, std::int64_t penalty);
};

/// Single-flip simulated annealing from random starts. Restart r draws from
/// Rng(splitmix64(seed + r)); the best restart wins, ties to the lowest r.
SolveResult solve_anneal(const PuboModel& model, const AnnealSchedule& schedule, std::uint64_t seed);

/// Steepest single-flip descent from `start` to a local minimum (ties to the
/// lowest variable index). The seed is recorded only.
SolveResult descend(const PuboModel& model, std::span<const std::uint8_t> start, std::uint64_t seed = 0);

/// Energy of an assignment kept up to date under single-bit flips.
class IncrementalEnergy {
  public:
    IncrementalEnergy(const PuboModel& model, Assignment start);

    std::int64_t energy() const { return energy_; }
    const Assignment& assignment() const { return bits_; }
    /// Energy change if variable `v` were flipped.
    std::int64_t delta(VarIndex v) const;
    void flip(VarIndex v);

  private:
    const PuboModel& model_;
    std::vector<std::vector<std::uint32_t>> incident_;  // variable -> term ids
    std::vector<std::uint32_t> missing_;                // term -> number of its variables at 0
    Assignment bits_;
    std::int64_t energy_ = 0;
};

}  // namespace phylopubo
