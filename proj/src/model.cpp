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

#include "phylopubo/model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "phylopubo/errors.hpp"

namespace phylopubo {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Depth: return "depth";
        case ModelKind::Position: return "position";
        case ModelKind::Branch: return "branch";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "depth") return ModelKind::Depth;
    if (name == "position") return ModelKind::Position;
    if (name == "branch") return ModelKind::Branch;
    throw UnsupportedModelError("unknown model kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// layout

VariableLayout::VariableLayout(ModelKind kind, std::size_t n, std::size_t m) : kind_(kind), n_(n), m_(m) {
    if (n < 3) throw UnsupportedModelError("models need n >= 3 leaves");
    if (m < 1) throw UnsupportedModelError("models need at least one site");
    if (kind != ModelKind::Branch && m != 1) {
        throw UnsupportedModelError(std::string(to_string(kind)) + " model is defined for a single site only");
    }
    const std::size_t nodes = 2 * n - 2;
    switch (kind) {
        case ModelKind::Branch:
            edge_block_ = (n - 2) * (3 * n - 3) / 2;
            second_block_ = 0;
            break;
        case ModelKind::Depth:
            edge_block_ = nodes * nodes;
            second_block_ = (nodes - 1) * (n - 2);
            break;
        case ModelKind::Position:
            edge_block_ = (n - 3) * (n - 3);
            second_block_ = (n - 2) * (nodes - 1);
            break;
    }
    base_offset_ = edge_block_ + second_block_;
    total_ = base_offset_ + kNumStates * (n - 2) * m;
}

VarIndex VariableLayout::branch_row_offset(int u) const {
    const auto uu = static_cast<std::size_t>(u);
    return static_cast<VarIndex>(uu * (2 * n_ - 3) - uu * (uu - (uu > 0 ? 1 : 0)) / 2);
}

std::optional<VarIndex> VariableLayout::branch_edge(int u, int v) const {
    if (kind_ != ModelKind::Branch || u < 0 || !is_internal(u) || v <= u || v >= num_nodes()) return std::nullopt;
    return branch_row_offset(u) + static_cast<VarIndex>(v - u - 1);
}

VarIndex VariableLayout::depth_edge(int u, int v) const {
    if (kind_ != ModelKind::Depth || u < 0 || v < 0 || u >= num_nodes() || v >= num_nodes()) {
        throw std::out_of_range("depth_edge index");
    }
    return static_cast<VarIndex>(u * num_nodes() + v);
}

std::optional<VarIndex> VariableLayout::depth_level(int u, int d) const {
    if (kind_ != ModelKind::Depth || u <= 0 || u >= num_nodes() || d < 1 || d > num_internal()) return std::nullopt;
    return static_cast<VarIndex>(edge_block_ + (u - 1) * (n_ - 2) + (d - 1));
}

std::optional<VarIndex> VariableLayout::position_slot(int u, int p) const {
    const int last = num_internal() - 1;  // n-3
    if (kind_ != ModelKind::Position || u <= 0 || u > last || p < 1 || p > last) return std::nullopt;
    return static_cast<VarIndex>((u - 1) * last + (p - 1));
}

std::optional<VarIndex> VariableLayout::position_edge(int p, int u) const {
    if (kind_ != ModelKind::Position || p < 0 || p >= num_internal() || u <= 0 || u >= num_nodes()) {
        return std::nullopt;
    }
    return static_cast<VarIndex>(edge_block_ + p * (num_nodes() - 1) + (u - 1));
}

VarIndex VariableLayout::base(int u, std::size_t site, State b) const {
    if (u < 0 || !is_internal(u) || site >= m_ || b >= kNumStates) throw std::out_of_range("base index");
    return static_cast<VarIndex>(base_offset_ + (static_cast<std::size_t>(u) * m_ + site) * kNumStates + b);
}

VariableLayout::VarInfo VariableLayout::describe(VarIndex index) const {
    if (index >= total_) throw std::out_of_range("variable index");
    if (index >= base_offset_) {
        const std::size_t k = index - base_offset_;
        return {Group::Base, static_cast<int>(k / kNumStates / m_), static_cast<int>(k / kNumStates % m_),
                static_cast<int>(k % kNumStates)};
    }
    switch (kind_) {
        case ModelKind::Branch: {
            int u = 0;
            while (u + 1 < num_internal() && branch_row_offset(u + 1) <= index) ++u;
            return {Group::Edge, u, static_cast<int>(index - branch_row_offset(u)) + u + 1, 0};
        }
        case ModelKind::Depth:
            if (index < edge_block_) {
                return {Group::Edge, static_cast<int>(index / num_nodes()), static_cast<int>(index % num_nodes()), 0};
            } else {
                const std::size_t k = index - edge_block_;
                return {Group::Depth, static_cast<int>(k / (n_ - 2)) + 1, static_cast<int>(k % (n_ - 2)) + 1, 0};
            }
        case ModelKind::Position:
            if (index < edge_block_) {
                return {Group::Position, static_cast<int>(index / (n_ - 3)) + 1, static_cast<int>(index % (n_ - 3)) + 1,
                        0};
            } else {
                const std::size_t k = index - edge_block_;
                return {Group::PositionEdge, static_cast<int>(k / (num_nodes() - 1)),
                        static_cast<int>(k % (num_nodes() - 1)) + 1, 0};
            }
    }
    throw std::logic_error("unreachable");
}

std::string VariableLayout::name(VarIndex index) const {
    const auto info = describe(index);
    auto pair = [](const char* tag, int a, int b) {
        return std::string(tag) + "(" + std::to_string(a) + "," + std::to_string(b) + ")";
    };
    switch (info.group) {
        case Group::Edge: return pair("e", info.first, info.second);
        case Group::Depth: return pair("x", info.first, info.second);
        case Group::Position: return pair("x", info.first, info.second);
        case Group::PositionEdge: return pair("e", info.first, info.second);
        case Group::Base:
            return "n(" + std::to_string(info.first) + "," + std::to_string(info.second) + "," +
                   state_char(static_cast<State>(info.third)) + ")";
    }
    return "?";
}

std::map<std::string, std::size_t> VariableLayout::group_counts() const {
    std::map<std::string, std::size_t> out;
    out["base"] = total_ - base_offset_;
    switch (kind_) {
        case ModelKind::Branch: out["edge"] = edge_block_; break;
        case ModelKind::Depth:
            out["edge"] = edge_block_;
            out["depth"] = second_block_;
            break;
        case ModelKind::Position:
            out["position"] = edge_block_;
            out["edge"] = second_block_;
            break;
    }
    return out;
}

PenaltyWeight default_penalty(const Alignment& a, const StepMatrix& s) {
    const auto n = static_cast<std::int64_t>(a.num_taxa());
    const auto m = static_cast<std::int64_t>(a.num_sites());
    return {1 + (2 * n - 3) * m * s.max_entry()};
}

// ---------------------------------------------------------------------------
// compilation

namespace {

// weight * (target - sum(vars))^2, expanded with x^2 = x
void add_square(Polynomial& h, std::int64_t weight, std::int64_t target, const std::vector<VarIndex>& vars) {
    h.add_term(weight * target * target, {});
    for (std::size_t i = 0; i < vars.size(); ++i) {
        h.add_term(weight * (1 - 2 * target), {vars[i]});
        for (std::size_t j = i + 1; j < vars.size(); ++j) h.add_term(2 * weight, {vars[i], vars[j]});
    }
}

CompiledModel make_compiled(ModelKind kind, const Alignment& a, const StepMatrix& s, PenaltyWeight p) {
    VariableLayout lay(kind, a.num_taxa(), a.num_sites());
    std::vector<std::vector<State>> leaf_states;
    leaf_states.reserve(a.num_sites());
    for (std::size_t site = 0; site < a.num_sites(); ++site) leaf_states.push_back(a.column(site));
    return CompiledModel{lay, a.taxa(), std::move(leaf_states), s, p, {}, {}};
}

void add_base_onehot(Polynomial& pen, const VariableLayout& lay) {
    std::vector<VarIndex> vars(kNumStates);
    for (int u = 0; u < lay.num_internal(); ++u) {
        for (std::size_t site = 0; site < lay.m(); ++site) {
            for (State b = 0; b < kNumStates; ++b) vars[b] = lay.base(u, site, b);
            add_square(pen, 1, 1, vars);
        }
    }
}

void finish(CompiledModel& cm, const Polynomial& objective, const Polynomial& penalty) {
    const auto total = cm.layout.total_vars();
    cm.objective = PuboModel(total, objective);
    cm.model = PuboModel(total, objective + penalty * cm.penalty.value);
}

}  // namespace

CompiledModel compile_branch(const Alignment& a, const StepMatrix& s, PenaltyWeight p) {
    auto cm = make_compiled(ModelKind::Branch, a, s, p);
    const auto& lay = cm.layout;
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();

    Polynomial obj;
    for (std::size_t site = 0; site < lay.m(); ++site) {
        for (int u = 0; u < internal; ++u) {
            for (int v = u + 1; v < nodes; ++v) {
                const VarIndex e = *lay.branch_edge(u, v);
                if (lay.is_internal(v)) {
                    for (State b = 0; b < kNumStates; ++b) {
                        for (State c = 0; c < kNumStates; ++c) {
                            obj.add_term(s.cost(b, c), {e, lay.base(u, site, b), lay.base(v, site, c)});
                        }
                    }
                } else {
                    const State leaf = cm.leaf_states[site][v - internal];
                    for (State b = 0; b < kNumStates; ++b) obj.add_term(s.cost(leaf, b), {e, lay.base(u, site, b)});
                }
            }
        }
    }

    Polynomial pen;
    std::vector<VarIndex> vars;
    for (int v = 1; v < nodes; ++v) {  // one parent per non-reference node
        vars.clear();
        for (int u = 0; u < std::min(v, internal); ++u) vars.push_back(*lay.branch_edge(u, v));
        add_square(pen, 1, 1, vars);
    }
    for (int u = 1; u < internal; ++u) {  // two children per non-reference internal node
        vars.clear();
        for (int v = u + 1; v < nodes; ++v) vars.push_back(*lay.branch_edge(u, v));
        add_square(pen, 1, 2, vars);
    }
    add_base_onehot(pen, lay);
    finish(cm, obj, pen);
    return cm;
}

CompiledModel compile_depth(const Alignment& a, const StepMatrix& s, PenaltyWeight p) {
    auto cm = make_compiled(ModelKind::Depth, a, s, p);
    const auto& lay = cm.layout;
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    const int levels = internal;  // depths 1..n-2

    Polynomial obj;
    for (int u = 0; u < internal; ++u) {
        for (int v = 0; v < nodes; ++v) {
            const VarIndex e = lay.depth_edge(u, v);
            if (lay.is_internal(v)) {
                for (State b = 0; b < kNumStates; ++b) {
                    for (State c = 0; c < kNumStates; ++c) {
                        obj.add_term(s.cost(b, c), {e, lay.base(u, 0, b), lay.base(v, 0, c)});
                    }
                }
            } else {
                const State leaf = cm.leaf_states[0][v - internal];
                for (State b = 0; b < kNumStates; ++b) obj.add_term(s.cost(leaf, b), {e, lay.base(u, 0, b)});
            }
        }
    }

    Polynomial pen;
    std::vector<VarIndex> vars;
    for (int u = 1; u < nodes; ++u) {  // exactly one depth
        vars.clear();
        for (int d = 1; d <= levels; ++d) vars.push_back(*lay.depth_level(u, d));
        add_square(pen, 1, 1, vars);
    }
    for (int u = 0; u < nodes; ++u) pen.add_term(1, {lay.depth_edge(u, 0)});  // nothing enters the reference
    vars.clear();
    for (int v = 0; v < nodes; ++v) vars.push_back(lay.depth_edge(0, v));
    add_square(pen, 1, 3, vars);
    for (int v = 1; v < nodes; ++v) {
        vars.clear();
        for (int u = 0; u < nodes; ++u) vars.push_back(lay.depth_edge(u, v));
        add_square(pen, 1, 1, vars);
    }
    for (int u = 1; u < internal; ++u) {
        vars.clear();
        for (int v = 0; v < nodes; ++v) vars.push_back(lay.depth_edge(u, v));
        add_square(pen, 1, 2, vars);
    }
    for (int u = internal; u < nodes; ++u) {  // leaves have no children
        for (int v = 0; v < nodes; ++v) pen.add_term(1, {lay.depth_edge(u, v)});
    }
    // e(u,v) * (1 - sum_d x(u,d-1) x(v,d))^2 with x(0,0) = 1 and every other
    // depth-0 or reference indicator fixed to 0
    for (int u = 0; u < nodes; ++u) {
        for (int v = 0; v < nodes; ++v) {
            Polynomial link(1);
            if (v != 0) {
                for (int d = 1; d <= levels; ++d) {
                    const VarIndex xv = *lay.depth_level(v, d);
                    if (d == 1) {
                        if (u == 0) link.add_term(-1, {xv});
                    } else if (u != 0) {
                        link.add_term(-1, {*lay.depth_level(u, d - 1), xv});
                    }
                }
            }
            pen += Polynomial::variable(lay.depth_edge(u, v)) * (link * link);
        }
    }
    add_base_onehot(pen, lay);
    finish(cm, obj, pen);
    return cm;
}

CompiledModel compile_position(const Alignment& a, const StepMatrix& s, PenaltyWeight p) {
    auto cm = make_compiled(ModelKind::Position, a, s, p);
    const auto& lay = cm.layout;
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    const int last = internal - 1;  // positions 1..n-3

    // x(u,p) as a (possibly empty) variable list; nullopt when fixed to 0
    auto slot = [&](int u, int pos) -> std::optional<std::vector<VarIndex>> {
        if (u == 0) return pos == 0 ? std::optional<std::vector<VarIndex>>(std::vector<VarIndex>{}) : std::nullopt;
        if (pos == 0) return std::nullopt;
        return std::vector<VarIndex>{*lay.position_slot(u, pos)};
    };

    Polynomial obj;
    std::vector<VarIndex> vars;
    for (int u = 0; u < internal; ++u) {
        for (int v = 1; v < nodes; ++v) {
            for (int pos = 0; pos <= last; ++pos) {
                const auto x = slot(u, pos);
                if (!x) continue;
                const VarIndex e = *lay.position_edge(pos, v);
                if (lay.is_internal(v)) {
                    for (State b = 0; b < kNumStates; ++b) {
                        for (State c = 0; c < kNumStates; ++c) {
                            vars = *x;
                            vars.insert(vars.end(), {e, lay.base(u, 0, b), lay.base(v, 0, c)});
                            obj.add_term(s.cost(b, c), vars);
                        }
                    }
                } else {
                    const State leaf = cm.leaf_states[0][v - internal];
                    for (State b = 0; b < kNumStates; ++b) {
                        vars = *x;
                        vars.insert(vars.end(), {e, lay.base(u, 0, b)});
                        obj.add_term(s.cost(leaf, b), vars);
                    }
                }
            }
        }
    }

    Polynomial pen;
    for (int pos = 1; pos <= last; ++pos) {  // each position holds one node
        vars.clear();
        for (int u = 1; u < internal; ++u) vars.push_back(*lay.position_slot(u, pos));
        add_square(pen, 1, 1, vars);
    }
    for (int u = 1; u < internal; ++u) {  // each node takes one position
        vars.clear();
        for (int pos = 1; pos <= last; ++pos) vars.push_back(*lay.position_slot(u, pos));
        add_square(pen, 1, 1, vars);
    }
    for (int u = 1; u < nodes; ++u) {  // one parent position
        vars.clear();
        for (int pos = 0; pos <= last; ++pos) vars.push_back(*lay.position_edge(pos, u));
        add_square(pen, 1, 1, vars);
    }
    for (int pos = 1; pos <= last; ++pos) {  // two children
        vars.clear();
        for (int u = 1; u < nodes; ++u) vars.push_back(*lay.position_edge(pos, u));
        add_square(pen, 1, 2, vars);
    }
    // e(p,u) * sum_{p' <= p} x(u,p'): a child must sit at a later position
    for (int pos = 0; pos <= last; ++pos) {
        for (int u = 1; u < internal; ++u) {
            for (int q = 1; q <= pos; ++q) pen.add_term(1, {*lay.position_edge(pos, u), *lay.position_slot(u, q)});
        }
    }
    add_base_onehot(pen, lay);
    finish(cm, obj, pen);
    return cm;
}

CompiledModel compile(ModelKind kind, const Alignment& a, const StepMatrix& s, PenaltyWeight p) {
    switch (kind) {
        case ModelKind::Branch: return compile_branch(a, s, p);
        case ModelKind::Depth: return compile_depth(a, s, p);
        case ModelKind::Position: return compile_position(a, s, p);
    }
    throw UnsupportedModelError("unknown model kind");
}

// ---------------------------------------------------------------------------
// residuals and decoding

namespace {

class Bits {
  public:
    Bits(std::span<const std::uint8_t> bits, const VariableLayout& lay) : bits_(bits) {
        if (bits.size() != lay.total_vars()) {
            throw ArityError("assignment has " + std::to_string(bits.size()) + " bits, layout has " +
                             std::to_string(lay.total_vars()) + " variables");
        }
    }
    int operator()(VarIndex i) const { return bits_[i] ? 1 : 0; }
    int operator()(std::optional<VarIndex> i) const { return i && bits_[*i] ? 1 : 0; }

  private:
    std::span<const std::uint8_t> bits_;
};

std::string tag(const char* name, std::initializer_list<std::pair<const char*, int>> args) {
    std::string out = name;
    out += '[';
    bool first = true;
    for (const auto& [k, v] : args) {
        if (!first) out += ',';
        first = false;
        out += k;
        out += '=';
        out += std::to_string(v);
    }
    out += ']';
    return out;
}

void push(std::vector<Violation>& out, std::int64_t residual, std::string name) {
    if (residual != 0) out.push_back({std::move(name), residual});
}

void base_residuals(const Bits& x, const VariableLayout& lay, std::vector<Violation>& out) {
    for (int u = 0; u < lay.num_internal(); ++u) {
        for (std::size_t site = 0; site < lay.m(); ++site) {
            int sum = 0;
            for (State b = 0; b < kNumStates; ++b) sum += x(lay.base(u, site, b));
            push(out, sum - 1, tag("base_onehot", {{"u", u}, {"s", static_cast<int>(site)}}));
        }
    }
}

void branch_residuals(const Bits& x, const VariableLayout& lay, std::vector<Violation>& out) {
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    for (int v = 1; v < nodes; ++v) {
        int in = 0;
        for (int u = 0; u < std::min(v, internal); ++u) in += x(lay.branch_edge(u, v));
        push(out, in - 1, tag("in_degree", {{"v", v}}));
    }
    for (int u = 1; u < internal; ++u) {
        int children = 0;
        for (int v = u + 1; v < nodes; ++v) children += x(lay.branch_edge(u, v));
        push(out, children - 2, tag("out_degree", {{"u", u}}));
    }
}

void depth_residuals(const Bits& x, const VariableLayout& lay, std::vector<Violation>& out) {
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    auto level = [&](int u, int d) -> int {
        if (d == 0) return u == 0 ? 1 : 0;
        return x(lay.depth_level(u, d));
    };
    for (int u = 1; u < nodes; ++u) {
        int sum = 0;
        for (int d = 1; d <= internal; ++d) sum += level(u, d);
        push(out, sum - 1, tag("depth_onehot", {{"u", u}}));
    }
    for (int u = 0; u < nodes; ++u) push(out, x(lay.depth_edge(u, 0)), tag("reference_in", {{"u", u}}));
    int root_out = 0;
    for (int v = 0; v < nodes; ++v) root_out += x(lay.depth_edge(0, v));
    push(out, root_out - 3, "reference_out[u=0]");
    for (int v = 1; v < nodes; ++v) {
        int in = 0;
        for (int u = 0; u < nodes; ++u) in += x(lay.depth_edge(u, v));
        push(out, in - 1, tag("in_degree", {{"v", v}}));
    }
    for (int u = 1; u < internal; ++u) {
        int children = 0;
        for (int v = 0; v < nodes; ++v) children += x(lay.depth_edge(u, v));
        push(out, children - 2, tag("out_degree", {{"u", u}}));
    }
    for (int u = internal; u < nodes; ++u) {
        for (int v = 0; v < nodes; ++v) push(out, x(lay.depth_edge(u, v)), tag("leaf_out", {{"u", u}, {"v", v}}));
    }
    for (int u = 0; u < nodes; ++u) {
        for (int v = 0; v < nodes; ++v) {
            if (!x(lay.depth_edge(u, v))) continue;
            int linked = 0;
            for (int d = 1; d <= internal; ++d) linked += level(u, d - 1) * (v == 0 ? 0 : level(v, d));
            push(out, 1 - linked, tag("depth_link", {{"u", u}, {"v", v}}));
        }
    }
}

void position_residuals(const Bits& x, const VariableLayout& lay, std::vector<Violation>& out) {
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    const int last = internal - 1;
    for (int pos = 1; pos <= last; ++pos) {
        int sum = 0;
        for (int u = 1; u < internal; ++u) sum += x(lay.position_slot(u, pos));
        push(out, sum - 1, tag("position_filled", {{"p", pos}}));
    }
    for (int u = 1; u < internal; ++u) {
        int sum = 0;
        for (int pos = 1; pos <= last; ++pos) sum += x(lay.position_slot(u, pos));
        push(out, sum - 1, tag("position_onehot", {{"u", u}}));
    }
    for (int u = 1; u < nodes; ++u) {
        int in = 0;
        for (int pos = 0; pos <= last; ++pos) in += x(lay.position_edge(pos, u));
        push(out, in - 1, tag("in_degree", {{"v", u}}));
    }
    for (int pos = 1; pos <= last; ++pos) {
        int children = 0;
        for (int u = 1; u < nodes; ++u) children += x(lay.position_edge(pos, u));
        push(out, children - 2, tag("out_degree", {{"p", pos}}));
    }
    for (int pos = 0; pos <= last; ++pos) {
        for (int u = 1; u < internal; ++u) {
            if (!x(lay.position_edge(pos, u))) continue;
            for (int q = 1; q <= pos; ++q) {
                push(out, x(lay.position_slot(u, q)), tag("order", {{"p", pos}, {"u", u}, {"q", q}}));
            }
        }
    }
}

}  // namespace

std::vector<VarIndex> branch_edge_variables(const VariableLayout& lay) {
    if (lay.kind() != ModelKind::Branch) throw UnsupportedModelError("edge pivots need a branch model");
    std::vector<VarIndex> out(lay.group_counts().at("edge"));
    std::iota(out.begin(), out.end(), VarIndex{0});
    return out;
}

std::int64_t branch_free_floor(const CompiledModel& cm) {
    if (cm.layout.kind() != ModelKind::Branch) throw UnsupportedModelError("free floor needs a branch model");
    return -cm.penalty.value * static_cast<std::int64_t>((cm.layout.n() - 2) * cm.layout.m());
}

std::vector<Violation> feasibility(std::span<const std::uint8_t> bits, const VariableLayout& lay) {
    const Bits x(bits, lay);
    std::vector<Violation> out;
    switch (lay.kind()) {
        case ModelKind::Branch: branch_residuals(x, lay, out); break;
        case ModelKind::Depth: depth_residuals(x, lay, out); break;
        case ModelKind::Position: position_residuals(x, lay, out); break;
    }
    base_residuals(x, lay, out);
    return out;
}

std::int64_t penalty_residual(std::span<const std::uint8_t> bits, const VariableLayout& lay) {
    std::int64_t total = 0;
    for (const auto& v : feasibility(bits, lay)) total += v.residual * v.residual;
    return total;
}

std::int64_t objective_part(std::span<const std::uint8_t> bits, const CompiledModel& cm) {
    const auto& lay = cm.layout;
    const Bits x(bits, lay);
    const auto& s = cm.steps;
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();

    // sum over edges of S(state(u), state(v)), with base indicators expanded as in the polynomial
    auto edge_cost = [&](int u, int v, std::size_t site) -> std::int64_t {
        std::int64_t c = 0;
        for (State b = 0; b < kNumStates; ++b) {
            if (!x(lay.base(u, site, b))) continue;
            if (lay.is_internal(v)) {
                for (State t = 0; t < kNumStates; ++t) c += x(lay.base(v, site, t)) * s.cost(b, t);
            } else {
                c += s.cost(cm.leaf_states[site][v - internal], b);
            }
        }
        return c;
    };

    std::int64_t total = 0;
    switch (lay.kind()) {
        case ModelKind::Branch:
            for (std::size_t site = 0; site < lay.m(); ++site) {
                for (int u = 0; u < internal; ++u) {
                    for (int v = u + 1; v < nodes; ++v) {
                        if (x(lay.branch_edge(u, v))) total += edge_cost(u, v, site);
                    }
                }
            }
            break;
        case ModelKind::Depth:
            for (int u = 0; u < internal; ++u) {
                for (int v = 0; v < nodes; ++v) {
                    if (x(lay.depth_edge(u, v))) total += edge_cost(u, v, 0);
                }
            }
            break;
        case ModelKind::Position:
            for (int u = 0; u < internal; ++u) {
                for (int pos = 0; pos < internal; ++pos) {
                    const int at = u == 0 ? (pos == 0 ? 1 : 0) : (pos == 0 ? 0 : x(lay.position_slot(u, pos)));
                    if (!at) continue;
                    for (int v = 1; v < nodes; ++v) {
                        if (x(lay.position_edge(pos, v))) total += edge_cost(u, v, 0);
                    }
                }
            }
            break;
    }
    return total;
}

DecodedSolution decode(std::span<const std::uint8_t> bits, const CompiledModel& cm) {
    const auto& lay = cm.layout;
    const Bits x(bits, lay);
    const int internal = lay.num_internal();
    const int nodes = lay.num_nodes();
    const int n = static_cast<int>(lay.n());

    DecodedSolution out;
    out.violations = feasibility(bits, lay);
    out.feasible = out.violations.empty();
    out.raw_parsimony = objective_part(bits, cm);

    out.ancestral_states.assign(internal, std::string(lay.m(), '?'));
    for (int u = 0; u < internal; ++u) {
        for (std::size_t site = 0; site < lay.m(); ++site) {
            int count = 0;
            State which = 0;
            for (State b = 0; b < kNumStates; ++b) {
                if (x(lay.base(u, site, b))) {
                    ++count;
                    which = b;
                }
            }
            if (count == 1) out.ancestral_states[u][site] = state_char(which);
        }
    }
    if (!out.feasible) return out;

    // model node -> tree node
    auto to_tree = [&](int v) { return lay.is_internal(v) ? n + v : v - internal; };
    std::vector<UnrootedTree::Edge> edges;
    switch (lay.kind()) {
        case ModelKind::Branch: {
            int root_out = 0;
            for (int u = 0; u < internal; ++u) {
                for (int v = u + 1; v < nodes; ++v) {
                    if (!x(lay.branch_edge(u, v))) continue;
                    edges.emplace_back(to_tree(u), to_tree(v));
                    if (u == 0) ++root_out;
                }
            }
            // in-degrees sum to 2n-3, other internal nodes use 2(n-3) of them
            if (root_out != (2 * n - 3) - 2 * (n - 3)) throw std::logic_error("reference out-degree is not 3");
            break;
        }
        case ModelKind::Depth:
            for (int u = 0; u < nodes; ++u) {
                for (int v = 0; v < nodes; ++v) {
                    if (x(lay.depth_edge(u, v))) edges.emplace_back(to_tree(u), to_tree(v));
                }
            }
            break;
        case ModelKind::Position: {
            std::vector<int> at(internal, 0);
            for (int u = 1; u < internal; ++u) {
                for (int pos = 1; pos < internal; ++pos) {
                    if (x(lay.position_slot(u, pos))) at[pos] = u;
                }
            }
            for (int pos = 0; pos < internal; ++pos) {
                for (int v = 1; v < nodes; ++v) {
                    if (x(lay.position_edge(pos, v))) edges.emplace_back(to_tree(at[pos]), to_tree(v));
                }
            }
            break;
        }
    }
    UnrootedTree tree(cm.taxa, std::move(edges));
    tree.set_ancestral_states(out.ancestral_states);
    out.tree = std::move(tree);
    return out;
}

}  // namespace phylopubo
