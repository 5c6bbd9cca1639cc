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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phylopubo/pubo.hpp"
#include "phylopubo/seqio.hpp"
#include "phylopubo/tree.hpp"

namespace phylopubo {

/// The three tree encodings.
///  - Depth: every non-reference node picks a depth level; edges over all node pairs.
///  - Position: non-reference internal nodes take distinct positions 1..n-3;
///    edges run from a position to a node placed after it.
///  - Branch: edge variables only for internal u -> non-reference v with v > u.
enum class ModelKind { Depth, Position, Branch };

std::string_view to_string(ModelKind kind);
/// Accepts "depth", "position", "branch". Throws UnsupportedModelError otherwise.
ModelKind parse_model_kind(std::string_view name);

/// Binds binary variables to their meaning for one (kind, n, m).
///
/// Model nodes: internal nodes 0..n-3 with reference node 0, leaves
/// n-2..2n-3 (leaf of taxon i is n-2+i). Every internal index is below
/// every leaf index.
///
/// Variable blocks, in index order:
///   branch:   e(u,v)  u internal, v > u            then n(u,s,b)
///   depth:    e(u,v)  all node pairs (row-major)   then x(u,d), u != 0, d in 1..n-2,  then n(u,b)
///   position: x(u,p)  u internal != 0, p in 1..n-3 then e(p,u), p in 0..n-3, u != 0, then n(u,b)
class VariableLayout {
  public:
    enum class Group { Edge, Depth, Position, PositionEdge, Base };

    struct VarInfo {
        Group group;
        int first = 0;   // u (or p for PositionEdge)
        int second = 0;  // v, d, p (or u for PositionEdge), or site for Base
        int third = 0;   // state for Base
    };

    /// Throws UnsupportedModelError for n < 3, m < 1, or m > 1 with depth/position.
    VariableLayout(ModelKind kind, std::size_t n, std::size_t m);

    ModelKind kind() const { return kind_; }
    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    int num_nodes() const { return static_cast<int>(2 * n_ - 2); }
    int num_internal() const { return static_cast<int>(n_ - 2); }
    bool is_internal(int v) const { return v < num_internal(); }
    int leaf_node(std::size_t taxon) const { return num_internal() + static_cast<int>(taxon); }
    std::size_t total_vars() const { return total_; }

    /// Branch: e(u,v) exists for internal u and u < v.
    std::optional<VarIndex> branch_edge(int u, int v) const;
    /// Depth: e(u,v) for every ordered node pair.
    VarIndex depth_edge(int u, int v) const;
    /// Depth: x(u,d) for u != 0, d in 1..n-2.
    std::optional<VarIndex> depth_level(int u, int d) const;
    /// Position: x(u,p) for internal u != 0, p in 1..n-3.
    std::optional<VarIndex> position_slot(int u, int p) const;
    /// Position: e(p,u) for p in 0..n-3, u != 0.
    std::optional<VarIndex> position_edge(int p, int u) const;
    /// n(u,s,b) for internal u.
    VarIndex base(int u, std::size_t site, State b) const;

    VarInfo describe(VarIndex index) const;
    std::string name(VarIndex index) const;
    /// Variable counts per block, keyed "edge", "depth", "position", "base".
    std::map<std::string, std::size_t> group_counts() const;

  private:
    VarIndex branch_row_offset(int u) const;

    ModelKind kind_;
    std::size_t n_, m_;
    std::size_t edge_block_ = 0;   // branch/depth edges, or position slots
    std::size_t second_block_ = 0; // depth levels or position edges
    std::size_t base_offset_ = 0;
    std::size_t total_ = 0;
};

inline VariableLayout layout(ModelKind kind, std::size_t n, std::size_t m) { return VariableLayout(kind, n, m); }

struct PenaltyWeight {
    std::int64_t value = 0;
};

/// 1 + (2n-3) * m * max step cost: exceeds the objective of every feasible tree.
PenaltyWeight default_penalty(const Alignment& a, const StepMatrix& s);

/// A compiled model with everything needed to interpret its assignments.
struct CompiledModel {
    VariableLayout layout;
    std::vector<std::string> taxa;
    /// leaf_states[site][taxon]
    std::vector<std::vector<State>> leaf_states;
    StepMatrix steps;
    PenaltyWeight penalty;
    /// Full energy: objective + penalty * constraints.
    PuboModel model;
    /// The penalty-free parsimony part on its own.
    PuboModel objective;
};

CompiledModel compile_branch(const Alignment& a, const StepMatrix& s, PenaltyWeight p);
/// Single-site alignments only.
CompiledModel compile_depth(const Alignment& a, const StepMatrix& s, PenaltyWeight p);
/// Single-site alignments only.
CompiledModel compile_position(const Alignment& a, const StepMatrix& s, PenaltyWeight p);
CompiledModel compile(ModelKind kind, const Alignment& a, const StepMatrix& s, PenaltyWeight p);

/// Branch model: the edge variables, in index order.
std::vector<VarIndex> branch_edge_variables(const VariableLayout& layout);

/// Branch model: once the edge variables are fixed, the rest of the energy is
/// objective + penalty * (base one-hot residuals), and its constant already
/// holds penalty * (n - 2) * m from the all-zero bases. So the restricted
/// polynomial minus its constant is at least -penalty * (n - 2) * m.
std::int64_t branch_free_floor(const CompiledModel& cm);

/// One constraint residual (left side minus target, or the violating product
/// itself for implication-style penalties). The penalty energy of an
/// assignment is penalty * sum(residual^2) over these.
struct Violation {
    std::string constraint;
    std::int64_t residual = 0;
    friend bool operator==(const Violation&, const Violation&) = default;
};

/// Nonzero residuals of every penalty group. Throws ArityError on length mismatch.
std::vector<Violation> feasibility(std::span<const std::uint8_t> bits, const VariableLayout& layout);

/// Sum of squared residuals, i.e. the penalty energy divided by the weight.
std::int64_t penalty_residual(std::span<const std::uint8_t> bits, const VariableLayout& layout);

/// Parsimony objective evaluated straight from the variable meanings
/// (not through the polynomial).
std::int64_t objective_part(std::span<const std::uint8_t> bits, const CompiledModel& cm);

struct DecodedSolution {
    std::optional<UnrootedTree> tree;
    /// One string per internal model node, one character per site; '?' where
    /// the base indicators are not one-hot.
    std::vector<std::string> ancestral_states;
    std::vector<Violation> violations;
    std::int64_t raw_parsimony = 0;
    bool feasible = false;
};

/// Extracts edges and states, evaluates every residual, and builds the tree
/// when the assignment is feasible. Model internal node u becomes tree node
/// n + u; the leaf of taxon i becomes tree leaf i.
DecodedSolution decode(std::span<const std::uint8_t> bits, const CompiledModel& cm);

}  // namespace phylopubo
