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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phylopubo/seqio.hpp"

namespace phylopubo {

/// Unrooted binary tree on n labeled leaves.
///
/// Node indexing: leaves are 0..n-1 (leaf i carries leaf_labels()[i]),
/// internal nodes are n..2n-3. Ancestral states, when present, hold one
/// string per internal node (in node order) with one state character per site.
class UnrootedTree {
  public:
    using Edge = std::pair<int, int>;

    /// Validates: n >= 3, 2n-3 edges, leaf degree 1, internal degree 3, connected.
    UnrootedTree(std::vector<std::string> leaf_labels, std::vector<Edge> edges);

    std::size_t num_leaves() const { return labels_.size(); }
    std::size_t num_nodes() const { return 2 * labels_.size() - 2; }
    bool is_leaf(int v) const { return v < static_cast<int>(labels_.size()); }

    const std::vector<std::string>& leaf_labels() const { return labels_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const int> neighbors(int v) const {
        return {adjacency_[v].data(), static_cast<std::size_t>(degree_[v])};
    }

    const std::optional<std::vector<std::string>>& ancestral_states() const { return ancestral_; }
    void set_ancestral_states(std::vector<std::string> states);

    /// Non-trivial splits as leaf bitmasks, normalized to the side without leaf 0, sorted.
    /// Two trees over the same label order have the same topology iff their splits match.
    std::vector<std::uint64_t> splits() const;

    /// Topology equality up to internal-node relabeling; leaves matched by label.
    bool same_topology(const UnrootedTree& other) const;

  private:
    struct Unchecked {};
    UnrootedTree(Unchecked, std::vector<std::string> leaf_labels, std::vector<Edge> edges);
    void build_adjacency();
    friend class TopologyEnumerator;

    std::vector<std::string> labels_;
    std::vector<Edge> edges_;
    std::vector<std::array<int, 3>> adjacency_;
    std::vector<std::uint8_t> degree_;
    std::optional<std::vector<std::string>> ancestral_;
};

struct ScoredTree {
    UnrootedTree tree;
    std::int64_t score = 0;
};

/// (2n-5)!! for n >= 3. Throws BigCountError if it does not fit in 64 bits.
std::uint64_t count_topologies(std::size_t n);

struct TopologyCount {
    std::uint64_t value = 0;
    bool saturated = false;  // value clamped to UINT64_MAX
};
TopologyCount count_topologies_saturating(std::size_t n);

/// Upper bound on the leaf count accepted by enumerate_topologies. 10 unless
/// the PARSIMONY_MAX_ENUM environment variable holds a positive integer.
std::size_t default_enumeration_bound();

/// Streams every unrooted binary topology on `leaf_labels` exactly once, built
/// by inserting leaf k into every edge of each tree on leaves 0..k-1.
/// Throws EnumerationTooLargeError if the leaf count exceeds `bound`.
void for_each_topology(const std::vector<std::string>& leaf_labels,
                       const std::function<void(const UnrootedTree&)>& visit,
                       std::size_t bound = default_enumeration_bound());

std::vector<UnrootedTree> enumerate_topologies(const std::vector<std::string>& leaf_labels,
                                               std::size_t bound = default_enumeration_bound());

/// Fitch minimum change count over the five states (gap is an ordinary state).
/// `pattern[i]` is the state of leaf i.
int fitch_score(const UnrootedTree& t, std::span<const State> pattern);

struct SankoffResult {
    std::int64_t cost = 0;
    /// One state per internal node, indexed by (node - n).
    std::vector<State> internal_states;
};

/// Weighted parsimony by Sankoff DP rooted at internal node `root` (default:
/// the first internal node). Ties in the traceback go to the smallest state.
SankoffResult sankoff_score(const UnrootedTree& t, std::span<const State> pattern, const StepMatrix& s,
                            std::optional<int> root = std::nullopt);

/// Every internal-state assignment that reaches the Sankoff minimum, up to `limit`.
std::vector<std::vector<State>> sankoff_all_optimal(const UnrootedTree& t, std::span<const State> pattern,
                                                    const StepMatrix& s, std::size_t limit = 1u << 16);

/// Sum of step costs over the tree edges for fully specified internal states.
std::int64_t assignment_cost(const UnrootedTree& t, std::span<const State> pattern,
                             std::span<const State> internal_states, const StepMatrix& s);

/// Weighted Sankoff score summed over the site patterns of `a`.
std::int64_t parsimony_score(const UnrootedTree& t, const PatternTable& patterns, const StepMatrix& s);

struct ExactMpResult {
    std::int64_t best_score = 0;
    /// All co-optimal topologies, each with one optimal ancestral reconstruction attached.
    std::vector<ScoredTree> optimal;
    std::uint64_t topologies_scored = 0;
};

/// Exhaustive maximum parsimony over all topologies.
ExactMpResult exact_mp(const Alignment& a, const StepMatrix& s, std::size_t bound = default_enumeration_bound());

/// Newick text, displayed rooted at the internal node adjacent to the last
/// leaf (a trifurcation). Children are ordered by the smallest leaf index they
/// contain. With `annotate`, each internal node carries "[&states=...]".
std::string to_newick(const UnrootedTree& t, bool annotate = true);

/// Parses Newick (labels, optional branch lengths, bracket comments). A
/// bifurcating root is suppressed. If `leaf_order` is given, leaf indices follow
/// it; otherwise leaves are numbered in order of appearance. "[&states=...]"
/// annotations are restored when every internal node carries one.
UnrootedTree parse_newick(std::string_view text, const std::vector<std::string>* leaf_order = nullptr);

}  // namespace phylopubo
