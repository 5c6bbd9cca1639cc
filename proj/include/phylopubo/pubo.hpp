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
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace phylopubo {

using VarIndex = std::uint32_t;
/// Sorted, duplicate-free variable indices. The empty monomial is the constant.
using Monomial = std::vector<VarIndex>;
/// One byte per variable, each 0 or 1.
using Assignment = std::vector<std::uint8_t>;

/// Canonical term order: by degree, then lexicographically by indices.
struct MonomialOrder {
    bool operator()(const Monomial& a, const Monomial& b) const {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    }
};

/// Multilinear polynomial with integer coefficients over 0/1 variables.
/// x*x is folded to x on insertion and zero coefficients are never stored.
class Polynomial {
  public:
    using TermMap = std::map<Monomial, std::int64_t, MonomialOrder>;

    Polynomial() = default;
    explicit Polynomial(std::int64_t constant) { add_term(constant, {}); }

    static Polynomial variable(VarIndex v) {
        Polynomial p;
        p.add_term(1, {v});
        return p;
    }

    /// Adds coef * prod(vars); `vars` may be unsorted and contain repeats.
    void add_term(std::int64_t coef, std::span<const VarIndex> vars);
    void add_term(std::int64_t coef, std::initializer_list<VarIndex> vars) {
        add_term(coef, std::span<const VarIndex>(vars.begin(), vars.size()));
    }

    const TermMap& terms() const { return terms_; }
    std::int64_t constant() const;
    bool empty() const { return terms_.empty(); }

    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(std::int64_t k);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, std::int64_t k) { return a *= k; }
    friend Polynomial operator*(std::int64_t k, Polynomial a) { return a *= k; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

  private:
    TermMap terms_;
};

struct Term {
    Monomial vars;
    std::int64_t coef = 0;
    friend bool operator==(const Term&, const Term&) = default;
};

/// Immutable canonical PUBO: a multilinear polynomial over `num_vars` binary variables.
class PuboModel {
  public:
    PuboModel() = default;
    /// Throws ArityError if any index is >= num_vars.
    PuboModel(std::size_t num_vars, const Polynomial& poly);

    std::size_t num_vars() const { return num_vars_; }
    /// Canonical order (degree, then lexicographic).
    const std::vector<Term>& terms() const { return terms_; }
    std::int64_t constant() const;
    int max_degree() const;

    friend bool operator==(const PuboModel&, const PuboModel&) = default;
    /// Both operands must have the same num_vars.
    friend PuboModel operator+(const PuboModel& a, const PuboModel& b);

  private:
    std::size_t num_vars_ = 0;
    std::vector<Term> terms_;
};

/// Sum of coef * prod(bits). Throws ArityError on length mismatch.
std::int64_t evaluate(const PuboModel& model, std::span<const std::uint8_t> bits);

struct PuboStats {
    std::size_t num_vars = 0;
    std::size_t num_terms = 0;           // including the constant, if nonzero
    std::vector<std::size_t> by_degree;  // by_degree[k] = number of degree-k terms
    int max_degree = 0;
};

PuboStats stats(const PuboModel& model);

/// Text format:
///   pubo <num_vars>
///   <coef> [i1 i2 ... ik]      one term per line, canonical order
std::string serialize(const PuboModel& model);
/// Throws ParseError on malformed input or out-of-range indices.
PuboModel parse_pubo(std::string_view text);

}  // namespace phylopubo
