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

#include "phylopubo/tree.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <map>

#include "phylopubo/errors.hpp"

namespace phylopubo {

namespace {

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

// Parent pointers and a post-order over a tree rooted at `root`.
struct Rooting {
    std::vector<int> parent;
    std::vector<int> postorder;
};

Rooting root_at(const UnrootedTree& t, int root) {
    Rooting r;
    r.parent.assign(t.num_nodes(), -1);
    r.postorder.reserve(t.num_nodes());
    std::vector<int> stack{root};
    std::vector<int> preorder;
    preorder.reserve(t.num_nodes());
    r.parent[root] = root;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        preorder.push_back(v);
        for (int w : t.neighbors(v)) {
            if (r.parent[w] != -1) continue;
            r.parent[w] = v;
            stack.push_back(w);
        }
    }
    r.postorder.assign(preorder.rbegin(), preorder.rend());
    return r;
}

}  // namespace

UnrootedTree::UnrootedTree(std::vector<std::string> leaf_labels, std::vector<Edge> edges)
    : labels_(std::move(leaf_labels)), edges_(std::move(edges)) {
    const std::size_t n = labels_.size();
    if (n < 3) throw TooFewTaxaError("a tree needs at least 3 leaves");
    if (n > 64) throw Error("trees are limited to 64 leaves");
    if (edges_.size() != 2 * n - 3) {
        throw Error("tree on " + std::to_string(n) + " leaves needs " + std::to_string(2 * n - 3) + " edges");
    }
    const int nodes = static_cast<int>(num_nodes());
    degree_.assign(nodes, 0);
    for (const auto& [a, b] : edges_) {
        if (a < 0 || b < 0 || a >= nodes || b >= nodes || a == b) throw Error("edge endpoint out of range");
        const int cap_a = is_leaf(a) ? 1 : 3;
        const int cap_b = is_leaf(b) ? 1 : 3;
        if (++degree_[a] > cap_a || ++degree_[b] > cap_b) throw Error("node degree exceeds binary-tree degree");
    }
    for (int v = 0; v < nodes; ++v) {
        if (degree_[v] != (is_leaf(v) ? 1 : 3)) throw Error("node " + std::to_string(v) + " has wrong degree");
    }
    build_adjacency();
    // 2n-3 edges on 2n-2 nodes: connected iff acyclic
    const auto r = root_at(*this, 0);
    if (std::find(r.parent.begin(), r.parent.end(), -1) != r.parent.end()) throw Error("tree is not connected");
}

UnrootedTree::UnrootedTree(Unchecked, std::vector<std::string> leaf_labels, std::vector<Edge> edges)
    : labels_(std::move(leaf_labels)), edges_(std::move(edges)) {
    build_adjacency();
}

void UnrootedTree::build_adjacency() {
    adjacency_.assign(num_nodes(), {-1, -1, -1});
    degree_.assign(num_nodes(), 0);
    for (const auto& [a, b] : edges_) {
        adjacency_[a][degree_[a]++] = b;
        adjacency_[b][degree_[b]++] = a;
    }
}

void UnrootedTree::set_ancestral_states(std::vector<std::string> states) {
    if (states.size() != num_leaves() - 2) throw Error("need one ancestral state string per internal node");
    for (const auto& s : states) {
        if (s.size() != states.front().size()) throw Error("ancestral state strings differ in length");
    }
    ancestral_ = std::move(states);
}

std::vector<std::uint64_t> UnrootedTree::splits() const {
    const auto r = root_at(*this, 0);
    std::vector<std::uint64_t> below(num_nodes(), 0);
    const std::size_t n = num_leaves();
    std::vector<std::uint64_t> out;
    for (int v : r.postorder) {
        if (is_leaf(v)) below[v] |= std::uint64_t{1} << v;
        if (v != 0) below[r.parent[v]] |= below[v];
        const int size = std::popcount(below[v]);
        if (v != 0 && !is_leaf(v) && size >= 2 && static_cast<std::size_t>(size) <= n - 2) out.push_back(below[v]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool UnrootedTree::same_topology(const UnrootedTree& other) const {
    if (other.num_leaves() != num_leaves()) return false;
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < labels_.size(); ++i) index[labels_[i]] = static_cast<int>(i);
    std::vector<Edge> mapped;
    mapped.reserve(other.edges_.size());
    const int n = static_cast<int>(num_leaves());
    auto remap = [&](int v) {
        if (v >= n) return v;
        const auto it = index.find(other.labels_[v]);
        return it == index.end() ? -1 : it->second;
    };
    for (const auto& [a, b] : other.edges_) {
        const int ra = remap(a), rb = remap(b);
        if (ra < 0 || rb < 0) return false;
        mapped.emplace_back(ra, rb);
    }
    return UnrootedTree(Unchecked{}, labels_, std::move(mapped)).splits() == splits();
}

TopologyCount count_topologies_saturating(std::size_t n) {
    if (n < 3) throw TooFewTaxaError("topology count needs n >= 3");
    TopologyCount c{1, false};
    for (std::uint64_t k = 3; k <= 2 * n - 5; k += 2) {
        if (c.value > UINT64_MAX / k) return {UINT64_MAX, true};
        c.value *= k;
    }
    return c;
}

std::uint64_t count_topologies(std::size_t n) {
    const auto c = count_topologies_saturating(n);
    if (c.saturated) throw BigCountError("(2n-5)!! overflows 64 bits for n = " + std::to_string(n));
    return c.value;
}

std::size_t default_enumeration_bound() {
    if (const char* env = std::getenv("PARSIMONY_MAX_ENUM")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 10;
}

class TopologyEnumerator {
  public:
    TopologyEnumerator(const std::vector<std::string>& labels, const std::function<void(const UnrootedTree&)>& visit)
        : labels_(labels), visit_(visit), n_(static_cast<int>(labels.size())) {}

    void run() {
        edges_ = {{0, n_}, {1, n_}, {2, n_}};
        insert(3);
    }

  private:
    void insert(int leaf) {
        if (leaf == n_) {
            visit_(UnrootedTree(UnrootedTree::Unchecked{}, labels_, edges_));
            return;
        }
        const int w = n_ + leaf - 2;
        const std::size_t count = edges_.size();
        for (std::size_t i = 0; i < count; ++i) {
            const auto [a, b] = edges_[i];
            edges_[i] = {a, w};
            edges_.emplace_back(w, b);
            edges_.emplace_back(w, leaf);
            insert(leaf + 1);
            edges_.pop_back();
            edges_.pop_back();
            edges_[i] = {a, b};
        }
    }

    const std::vector<std::string>& labels_;
    const std::function<void(const UnrootedTree&)>& visit_;
    int n_;
    std::vector<UnrootedTree::Edge> edges_;
};

void for_each_topology(const std::vector<std::string>& leaf_labels,
                       const std::function<void(const UnrootedTree&)>& visit, std::size_t bound) {
    if (leaf_labels.size() < 3) throw TooFewTaxaError("enumeration needs at least 3 leaves");
    if (leaf_labels.size() > bound) {
        throw EnumerationTooLargeError("refusing to enumerate " + std::to_string(leaf_labels.size()) +
                                       "-leaf topologies (bound " + std::to_string(bound) + ")");
    }
    TopologyEnumerator(leaf_labels, visit).run();
}

std::vector<UnrootedTree> enumerate_topologies(const std::vector<std::string>& leaf_labels, std::size_t bound) {
    std::vector<UnrootedTree> out;
    for_each_topology(leaf_labels, [&](const UnrootedTree& t) { out.push_back(t); }, bound);
    return out;
}

int fitch_score(const UnrootedTree& t, std::span<const State> pattern) {
    if (pattern.size() != t.num_leaves()) throw ArityError("pattern length differs from leaf count");
    // Rooted at leaf 0 every internal node has exactly two children.
    const auto r = root_at(t, 0);
    std::vector<std::uint8_t> set(t.num_nodes(), 0);
    int changes = 0;
    for (int v : r.postorder) {
        if (t.is_leaf(v)) {
            set[v] = static_cast<std::uint8_t>(1u << pattern[v]);
            continue;
        }
        std::uint8_t inter = 0x1f, uni = 0;
        for (int w : t.neighbors(v)) {
            if (w == r.parent[v]) continue;
            inter &= set[w];
            uni |= set[w];
        }
        if (inter) {
            set[v] = inter;
        } else {
            set[v] = uni;
            ++changes;
        }
    }
    const int child = t.neighbors(0)[0];
    if ((set[child] & set[0]) == 0) ++changes;
    return changes;
}

namespace {

using CostRow = std::array<std::int64_t, kNumStates>;

// Post-order Sankoff tables for a tree rooted at `root`.
std::vector<CostRow> sankoff_tables(const UnrootedTree& t, const Rooting& r, std::span<const State> pattern,
                                    const StepMatrix& s) {
    std::vector<CostRow> cost(t.num_nodes());
    for (int v : r.postorder) {
        auto& row = cost[v];
        if (t.is_leaf(v)) {
            row.fill(kInf);
            row[pattern[v]] = 0;
            continue;
        }
        row.fill(0);
        for (int w : t.neighbors(v)) {
            if (w == r.parent[v]) continue;
            for (int a = 0; a < kNumStates; ++a) {
                std::int64_t best = kInf;
                for (int b = 0; b < kNumStates; ++b) {
                    if (cost[w][b] < kInf) best = std::min(best, s.cost(a, b) + cost[w][b]);
                }
                row[a] += best;
            }
        }
    }
    return cost;
}

int first_internal(const UnrootedTree& t) { return static_cast<int>(t.num_leaves()); }

void check_pattern(const UnrootedTree& t, std::span<const State> pattern) {
    if (pattern.size() != t.num_leaves()) throw ArityError("pattern length differs from leaf count");
    for (State x : pattern) {
        if (x >= kNumStates) throw ArityError("pattern state out of range");
    }
}

}  // namespace

SankoffResult sankoff_score(const UnrootedTree& t, std::span<const State> pattern, const StepMatrix& s,
                            std::optional<int> root) {
    check_pattern(t, pattern);
    const int rt = root.value_or(first_internal(t));
    if (t.is_leaf(rt) || rt >= static_cast<int>(t.num_nodes())) throw Error("Sankoff root must be internal");
    const auto r = root_at(t, rt);
    const auto cost = sankoff_tables(t, r, pattern, s);

    const int n = static_cast<int>(t.num_leaves());
    SankoffResult res;
    res.internal_states.assign(t.num_nodes() - t.num_leaves(), 0);
    std::vector<State> state(t.num_nodes(), 0);
    const auto& top = cost[rt];
    const auto best = std::min_element(top.begin(), top.end());
    res.cost = *best;
    state[rt] = static_cast<State>(best - top.begin());
    // reverse post-order visits parents before children
    for (auto it = r.postorder.rbegin(); it != r.postorder.rend(); ++it) {
        const int v = *it;
        if (v == rt) continue;
        if (t.is_leaf(v)) {
            state[v] = pattern[v];
            continue;
        }
        const State p = state[r.parent[v]];
        std::int64_t best_total = kInf;
        for (int b = 0; b < kNumStates; ++b) {
            const std::int64_t total = s.cost(p, b) + cost[v][b];
            if (total < best_total) {
                best_total = total;
                state[v] = static_cast<State>(b);
            }
        }
    }
    for (int v = n; v < static_cast<int>(t.num_nodes()); ++v) res.internal_states[v - n] = state[v];
    return res;
}

std::vector<std::vector<State>> sankoff_all_optimal(const UnrootedTree& t, std::span<const State> pattern,
                                                    const StepMatrix& s, std::size_t limit) {
    check_pattern(t, pattern);
    const int rt = first_internal(t);
    const auto r = root_at(t, rt);
    const auto cost = sankoff_tables(t, r, pattern, s);
    const int n = static_cast<int>(t.num_leaves());

    std::vector<int> order;  // internal nodes, parents first
    for (auto it = r.postorder.rbegin(); it != r.postorder.rend(); ++it) {
        if (!t.is_leaf(*it)) order.push_back(*it);
    }
    const std::int64_t optimum = *std::min_element(cost[rt].begin(), cost[rt].end());

    std::vector<std::vector<State>> out;
    std::vector<State> state(t.num_nodes(), 0);
    for (int v = 0; v < n; ++v) state[v] = pattern[v];

    std::function<void(std::size_t)> expand = [&](std::size_t k) {
        if (out.size() >= limit) return;
        if (k == order.size()) {
            out.emplace_back(state.begin() + n, state.end());
            return;
        }
        const int v = order[k];
        std::int64_t target;
        if (v == rt) {
            target = optimum;
        } else {
            target = kInf;
            for (int b = 0; b < kNumStates; ++b) target = std::min(target, s.cost(state[r.parent[v]], b) + cost[v][b]);
        }
        for (int b = 0; b < kNumStates; ++b) {
            const std::int64_t here = v == rt ? cost[v][b] : s.cost(state[r.parent[v]], b) + cost[v][b];
            if (here != target) continue;
            state[v] = static_cast<State>(b);
            expand(k + 1);
        }
    };
    expand(0);
    return out;
}

std::int64_t assignment_cost(const UnrootedTree& t, std::span<const State> pattern,
                             std::span<const State> internal_states, const StepMatrix& s) {
    check_pattern(t, pattern);
    const std::size_t n = t.num_leaves();
    if (internal_states.size() != n - 2) throw ArityError("need one state per internal node");
    auto state_of = [&](int v) { return t.is_leaf(v) ? pattern[v] : internal_states[v - n]; };
    std::int64_t total = 0;
    for (const auto& [a, b] : t.edges()) total += s.cost(state_of(a), state_of(b));
    return total;
}

std::int64_t parsimony_score(const UnrootedTree& t, const PatternTable& patterns, const StepMatrix& s) {
    std::int64_t total = 0;
    for (std::size_t i = 0; i < patterns.size(); ++i) {
        total += sankoff_score(t, patterns.patterns[i], s).cost * patterns.weights[i];
    }
    return total;
}

ExactMpResult exact_mp(const Alignment& a, const StepMatrix& s, std::size_t bound) {
    const auto table = compress_patterns(a);
    ExactMpResult res;
    res.best_score = kInf;
    for_each_topology(
        a.taxa(),
        [&](const UnrootedTree& t) {
            ++res.topologies_scored;
            const std::int64_t score = parsimony_score(t, table, s);
            if (score > res.best_score) return;
            if (score < res.best_score) {
                res.best_score = score;
                res.optimal.clear();
            }
            res.optimal.push_back({t, score});
        },
        bound);

    // attach one optimal reconstruction per site
    const std::size_t internal = a.num_taxa() - 2;
    for (auto& st : res.optimal) {
        std::vector<std::vector<State>> per_pattern;
        per_pattern.reserve(table.size());
        for (const auto& p : table.patterns) per_pattern.push_back(sankoff_score(st.tree, p, s).internal_states);
        std::vector<std::string> states(internal, std::string(a.num_sites(), '-'));
        for (std::size_t site = 0; site < a.num_sites(); ++site) {
            const auto& inner = per_pattern[table.site_to_pattern[site]];
            for (std::size_t u = 0; u < internal; ++u) states[u][site] = state_char(inner[u]);
        }
        st.tree.set_ancestral_states(std::move(states));
    }
    return res;
}

namespace {

void write_newick(const UnrootedTree& t, int v, int parent, const std::vector<int>& min_leaf, bool annotate,
                  std::string& out) {
    if (t.is_leaf(v)) {
        out += t.leaf_labels()[v];
        return;
    }
    std::vector<int> children;
    for (int w : t.neighbors(v)) {
        if (w != parent) children.push_back(w);
    }
    std::sort(children.begin(), children.end(), [&](int x, int y) { return min_leaf[x] < min_leaf[y]; });
    out += '(';
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (i) out += ',';
        write_newick(t, children[i], v, min_leaf, annotate, out);
    }
    out += ')';
    const auto& anc = t.ancestral_states();
    if (annotate && anc) out += "[&states=" + (*anc)[v - t.num_leaves()] + "]";
}

}  // namespace

std::string to_newick(const UnrootedTree& t, bool annotate) {
    const int root = t.neighbors(static_cast<int>(t.num_leaves()) - 1)[0];
    const auto r = root_at(t, root);
    std::vector<int> min_leaf(t.num_nodes(), std::numeric_limits<int>::max());
    for (int v : r.postorder) {
        if (t.is_leaf(v)) min_leaf[v] = v;
        if (v != root) min_leaf[r.parent[v]] = std::min(min_leaf[r.parent[v]], min_leaf[v]);
    }
    std::string out;
    write_newick(t, root, -1, min_leaf, annotate, out);
    out += ';';
    return out;
}

namespace {

class NewickParser {
  public:
    explicit NewickParser(std::string_view text) : text_(text) {}

    struct Node {
        std::string label;
        std::string states;
        std::vector<int> children;
    };

    std::vector<Node> nodes;

    int parse() {
        const int root = subtree();
        skip_space();
        if (!eat(';')) fail("expected ';'");
        skip_space();
        if (pos_ != text_.size()) fail("trailing characters after ';'");
        return root;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("Newick: " + msg + " at offset " + std::to_string(pos_));
    }

    void skip_space() {
        while (pos_ < text_.size()) {
            if (std::isspace(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
            } else if (text_[pos_] == '[') {
                const auto end = text_.find(']', pos_);
                if (end == std::string_view::npos) fail("unterminated comment");
                pending_comment_ = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
                pos_ = end + 1;
            } else {
                break;
            }
        }
    }

    bool eat(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string label() {
        std::string out;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' || c == '[' ||
                std::isspace(static_cast<unsigned char>(c))) {
                break;
            }
            out += c;
            ++pos_;
        }
        return out;
    }

    void branch_length() {
        skip_space();
        if (!eat(':')) return;
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
                                       std::string_view("+-.eE").find(text_[pos_]) != std::string_view::npos)) {
            ++pos_;
        }
        if (pos_ == start) fail("empty branch length");
    }

    int subtree() {
        skip_space();
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        if (eat('(')) {
            do {
                const int child = subtree();
                nodes[id].children.push_back(child);
                skip_space();
            } while (eat(','));
            if (!eat(')')) fail("expected ')'");
            pending_comment_.clear();
            skip_space();
            nodes[id].label = label();
            skip_space();
        } else {
            nodes[id].label = label();
            if (nodes[id].label.empty()) fail("empty leaf label");
        }
        branch_length();
        skip_space();
        constexpr std::string_view tag = "&states=";
        if (!nodes[id].children.empty() && pending_comment_.starts_with(tag)) {
            nodes[id].states = pending_comment_.substr(tag.size());
        }
        pending_comment_.clear();
        return id;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::string pending_comment_;
};

}  // namespace

UnrootedTree parse_newick(std::string_view text, const std::vector<std::string>* leaf_order) {
    NewickParser p(text);
    int root = p.parse();
    auto& nodes = p.nodes;

    // suppress a bifurcating root by joining its two children
    std::vector<std::pair<int, int>> raw_edges;
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        for (int c : nodes[v].children) raw_edges.emplace_back(static_cast<int>(v), c);
    }
    int dropped = -1;
    if (nodes[root].children.size() == 2) {
        const int a = nodes[root].children[0], b = nodes[root].children[1];
        std::erase_if(raw_edges, [&](const auto& e) { return e.first == root; });
        raw_edges.emplace_back(a, b);
        const int internal_child = nodes[a].children.empty() ? b : a;
        if (nodes[internal_child].children.empty()) throw ParseError("Newick: tree has only two leaves");
        dropped = root;
        root = internal_child;
    }

    std::vector<std::string> labels;
    std::map<std::string, int> leaf_index;
    if (leaf_order) {
        labels = *leaf_order;
        for (std::size_t i = 0; i < labels.size(); ++i) leaf_index[labels[i]] = static_cast<int>(i);
    }
    std::vector<int> id(nodes.size(), -1);
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        if (!nodes[v].children.empty()) continue;
        const auto& name = nodes[v].label;
        auto it = leaf_index.find(name);
        if (it == leaf_index.end()) {
            if (leaf_order) throw ParseError("Newick: unknown leaf '" + name + "'");
            it = leaf_index.emplace(name, static_cast<int>(labels.size())).first;
            labels.push_back(name);
        }
        if (std::find(id.begin(), id.end(), it->second) != id.end()) {
            throw ParseError("Newick: leaf '" + name + "' appears twice");
        }
        id[v] = it->second;
    }
    const int n = static_cast<int>(labels.size());
    int next_internal = n;
    std::vector<std::string> states;
    bool all_states = true;
    // display root first, so it becomes the first internal node
    std::vector<int> internal_order{root};
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
        if (!nodes[v].children.empty() && v != root && v != dropped) internal_order.push_back(v);
    }
    for (int v : internal_order) id[v] = next_internal++;
    std::vector<UnrootedTree::Edge> edges;
    for (const auto& [a, b] : raw_edges) {
        if (id[a] < 0 || id[b] < 0) throw ParseError("Newick: malformed tree");
        edges.emplace_back(id[a], id[b]);
    }
    UnrootedTree tree = [&] {
        try {
            return UnrootedTree(labels, std::move(edges));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(std::string("Newick: not an unrooted binary tree: ") + e.what());
        }
    }();
    std::vector<std::string> ordered(static_cast<std::size_t>(std::max(0, n - 2)));
    for (int v : internal_order) {
        if (nodes[v].states.empty()) all_states = false;
        ordered[id[v] - n] = nodes[v].states;
    }
    if (all_states && !ordered.empty()) tree.set_ancestral_states(std::move(ordered));
    return tree;
}

}  // namespace phylopubo
