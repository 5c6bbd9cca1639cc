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

#include "phylopubo/pubo.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "phylopubo/errors.hpp"

namespace phylopubo {

void Polynomial::add_term(std::int64_t coef, std::span<const VarIndex> vars) {
    if (coef == 0) return;
    Monomial key(vars.begin(), vars.end());
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    auto [it, inserted] = terms_.try_emplace(std::move(key), coef);
    if (!inserted) {
        it->second += coef;
        if (it->second == 0) terms_.erase(it);
    }
}

std::int64_t Polynomial::constant() const {
    const auto it = terms_.find(Monomial{});
    return it == terms_.end() ? 0 : it->second;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    for (const auto& [vars, coef] : other.terms_) add_term(coef, vars);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    for (const auto& [vars, coef] : other.terms_) add_term(-coef, vars);
    return *this;
}

Polynomial& Polynomial::operator*=(std::int64_t k) {
    if (k == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [vars, coef] : terms_) coef *= k;
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out;
    Monomial merged;
    for (const auto& [va, ca] : a.terms_) {
        for (const auto& [vb, cb] : b.terms_) {
            merged.clear();
            std::set_union(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(merged));
            out.add_term(ca * cb, merged);
        }
    }
    return out;
}

PuboModel::PuboModel(std::size_t num_vars, const Polynomial& poly) : num_vars_(num_vars) {
    terms_.reserve(poly.terms().size());
    for (const auto& [vars, coef] : poly.terms()) {
        if (!vars.empty() && vars.back() >= num_vars) {
            throw ArityError("variable index " + std::to_string(vars.back()) + " out of range for " +
                             std::to_string(num_vars) + " variables");
        }
        terms_.push_back({vars, coef});
    }
}

std::int64_t PuboModel::constant() const {
    return !terms_.empty() && terms_.front().vars.empty() ? terms_.front().coef : 0;
}

int PuboModel::max_degree() const { return terms_.empty() ? 0 : static_cast<int>(terms_.back().vars.size()); }

PuboModel operator+(const PuboModel& a, const PuboModel& b) {
    if (a.num_vars_ != b.num_vars_) throw ArityError("adding models over different variable counts");
    Polynomial p;
    for (const auto& t : a.terms_) p.add_term(t.coef, t.vars);
    for (const auto& t : b.terms_) p.add_term(t.coef, t.vars);
    return PuboModel(a.num_vars_, p);
}

std::int64_t evaluate(const PuboModel& model, std::span<const std::uint8_t> bits) {
    if (bits.size() != model.num_vars()) {
        throw ArityError("assignment has " + std::to_string(bits.size()) + " bits, model has " +
                         std::to_string(model.num_vars()) + " variables");
    }
    std::int64_t energy = 0;
    for (const auto& t : model.terms()) {
        bool on = true;
        for (VarIndex v : t.vars) {
            if (!bits[v]) {
                on = false;
                break;
            }
        }
        if (on) energy += t.coef;
    }
    return energy;
}

PuboStats stats(const PuboModel& model) {
    PuboStats s;
    s.num_vars = model.num_vars();
    s.num_terms = model.terms().size();
    s.max_degree = model.max_degree();
    s.by_degree.assign(static_cast<std::size_t>(s.max_degree) + 1, 0);
    for (const auto& t : model.terms()) ++s.by_degree[t.vars.size()];
    return s;
}

std::string serialize(const PuboModel& model) {
    std::string out = "pubo " + std::to_string(model.num_vars()) + "\n";
    for (const auto& t : model.terms()) {
        out += std::to_string(t.coef);
        for (VarIndex v : t.vars) {
            out += ' ';
            out += std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

template <typename Int>
Int parse_int(std::string_view tok, std::size_t line_no) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ParseError("pubo line " + std::to_string(line_no) + ": bad integer '" + std::string(tok) + "'");
    }
    return value;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

}  // namespace

PuboModel parse_pubo(std::string_view text) {
    std::size_t line_no = 0;
    std::size_t num_vars = 0;
    bool have_header = false;
    Polynomial poly;
    std::vector<VarIndex> vars;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        const auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        if (!have_header) {
            if (tokens.size() != 2 || tokens[0] != "pubo") throw ParseError("pubo: missing 'pubo <num_vars>' header");
            num_vars = parse_int<std::size_t>(tokens[1], line_no);
            have_header = true;
            continue;
        }
        const auto coef = parse_int<std::int64_t>(tokens[0], line_no);
        vars.clear();
        for (std::size_t k = 1; k < tokens.size(); ++k) {
            const auto v = parse_int<VarIndex>(tokens[k], line_no);
            if (v >= num_vars) {
                throw ParseError("pubo line " + std::to_string(line_no) + ": index " + std::to_string(v) +
                                 " >= num_vars " + std::to_string(num_vars));
            }
            vars.push_back(v);
        }
        poly.add_term(coef, vars);
    }
    if (!have_header) throw ParseError("pubo: empty input");
    return PuboModel(num_vars, poly);
}

}  // namespace phylopubo
