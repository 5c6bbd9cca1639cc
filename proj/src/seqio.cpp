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

#include "phylopubo/seqio.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "phylopubo/errors.hpp"

namespace phylopubo {

State state_from_char(char c) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return kGap;
    }
}

Alignment::Alignment(std::vector<std::string> taxa, std::vector<std::string> rows)
    : taxa_(std::move(taxa)), rows_(std::move(rows)) {
    if (taxa_.empty()) throw EmptyInputError("alignment has no sequences");
    if (taxa_.size() != rows_.size()) throw AlignmentRaggedError("taxon/row count mismatch");
    if (taxa_.size() < 3) {
        throw TooFewTaxaError("need at least 3 taxa, got " + std::to_string(taxa_.size()));
    }
    std::set<std::string> seen;
    for (const auto& t : taxa_) {
        if (!seen.insert(t).second) throw ParseError("duplicate taxon name '" + t + "'");
    }
    const std::size_t m = rows_.front().size();
    if (m == 0) throw EmptyInputError("alignment has zero sites");

    std::map<char, std::size_t> remapped;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        auto& row = rows_[i];
        if (row.size() != m) {
            throw AlignmentRaggedError("row '" + taxa_[i] + "' has length " + std::to_string(row.size()) +
                                       ", expected " + std::to_string(m));
        }
        for (char& c : row) {
            const char folded = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            const char mapped = state_char(state_from_char(folded));
            if (mapped != folded) ++remapped[folded];
            c = mapped;
        }
    }
    for (const auto& [c, count] : remapped) {
        notes_.push_back(std::string("mapped '") + c + "' -> '-' (" + std::to_string(count) + " sites)");
    }
}

std::vector<State> Alignment::column(std::size_t site) const {
    std::vector<State> col(num_taxa());
    for (std::size_t i = 0; i < num_taxa(); ++i) col[i] = state(i, site);
    return col;
}

Alignment Alignment::slice(std::size_t begin, std::size_t len) const {
    std::vector<std::string> rows;
    rows.reserve(rows_.size());
    for (const auto& r : rows_) rows.push_back(r.substr(begin, len));
    return Alignment(taxa_, std::move(rows));
}

Alignment parse_fasta(std::string_view text) {
    std::vector<std::string> taxa;
    std::vector<std::string> rows;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '>') {
            std::string name = line.substr(1);
            const auto first = name.find_first_not_of(" \t");
            name = first == std::string::npos ? "" : name.substr(first);
            // the name ends at the first whitespace, the rest is a free-form description
            name = name.substr(0, name.find_first_of(" \t"));
            if (name.empty()) throw ParseError("FASTA header without a name");
            taxa.push_back(std::move(name));
            rows.emplace_back();
            continue;
        }
        if (taxa.empty()) throw ParseError("sequence data before the first '>' header");
        for (char c : line) {
            if (!std::isspace(static_cast<unsigned char>(c))) rows.back().push_back(c);
        }
    }
    if (taxa.empty()) throw EmptyInputError("no FASTA records found");
    return Alignment(std::move(taxa), std::move(rows));
}

std::string to_fasta(const Alignment& a, std::size_t line_width) {
    std::string out;
    for (std::size_t i = 0; i < a.num_taxa(); ++i) {
        out += '>' + a.taxa()[i] + '\n';
        const auto& row = a.rows()[i];
        for (std::size_t pos = 0; pos < row.size(); pos += line_width) {
            out += row.substr(pos, line_width);
            out += '\n';
        }
    }
    return out;
}

StepMatrix::StepMatrix(const Grid& grid) : grid_(grid) {
    for (int i = 0; i < kNumStates; ++i) {
        if (grid_[i][i] != 0) {
            throw StepMatrixInvalidError(std::string("nonzero diagonal at state ") + state_char(i));
        }
        for (int j = 0; j < kNumStates; ++j) {
            if (grid_[i][j] < 0) throw StepMatrixInvalidError("negative step cost");
            if (grid_[i][j] != grid_[j][i]) {
                throw StepMatrixInvalidError(std::string("asymmetric costs between ") + state_char(i) +
                                             " and " + state_char(j));
            }
        }
    }
}

int StepMatrix::max_entry() const {
    int best = 0;
    for (const auto& row : grid_) best = std::max(best, *std::max_element(row.begin(), row.end()));
    return best;
}

StepMatrix StepMatrix::uniform(int c) {
    Grid g{};
    for (int i = 0; i < kNumStates; ++i) {
        for (int j = 0; j < kNumStates; ++j) g[i][j] = i == j ? 0 : c;
    }
    return StepMatrix(g);
}

StepMatrix default_step_matrix() {
    return StepMatrix(StepMatrix::Grid{{
        {0, 2, 1, 2, 4},
        {2, 0, 2, 1, 4},
        {1, 2, 0, 2, 4},
        {2, 1, 2, 0, 4},
        {4, 4, 4, 4, 0},
    }});
}

StepMatrix load_step_matrix(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw StepMatrixInvalidError(std::string("step matrix config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("states") || !doc.contains("cost")) {
        throw StepMatrixInvalidError("step matrix config needs 'states' and 'cost'");
    }
    const auto& states = doc["states"];
    const auto& cost = doc["cost"];
    if (!states.is_array() || states.size() != kNumStates || !cost.is_array() || cost.size() != kNumStates) {
        throw StepMatrixInvalidError("step matrix must be 5x5 with 5 state labels");
    }
    std::array<State, kNumStates> order{};
    std::set<State> used;
    for (int i = 0; i < kNumStates; ++i) {
        if (!states[i].is_string() || states[i].get<std::string>().size() != 1) {
            throw StepMatrixInvalidError("state labels must be single characters");
        }
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(states[i].get<std::string>()[0])));
        const State s = state_from_char(c);
        if (state_char(s) != c || !used.insert(s).second) {
            throw StepMatrixInvalidError(std::string("bad or repeated state label '") + c + "'");
        }
        order[i] = s;
    }
    StepMatrix::Grid grid{};
    for (int i = 0; i < kNumStates; ++i) {
        if (!cost[i].is_array() || cost[i].size() != kNumStates) {
            throw StepMatrixInvalidError("cost row " + std::to_string(i) + " must have 5 entries");
        }
        for (int j = 0; j < kNumStates; ++j) {
            if (!cost[i][j].is_number_integer()) throw StepMatrixInvalidError("step costs must be integers");
            grid[order[i]][order[j]] = cost[i][j].get<int>();
        }
    }
    return StepMatrix(grid);
}

std::string step_matrix_to_json(const StepMatrix& s) {
    nlohmann::json doc;
    doc["states"] = {"A", "C", "G", "T", "-"};
    doc["cost"] = s.grid();
    return doc.dump();
}

PatternTable compress_patterns(const Alignment& a) {
    PatternTable table;
    std::map<std::vector<State>, std::size_t> index;
    table.site_to_pattern.reserve(a.num_sites());
    for (std::size_t s = 0; s < a.num_sites(); ++s) {
        auto col = a.column(s);
        auto [it, inserted] = index.try_emplace(col, table.patterns.size());
        if (inserted) {
            table.patterns.push_back(std::move(col));
            table.weights.push_back(0);
        }
        ++table.weights[it->second];
        table.site_to_pattern.push_back(it->second);
    }
    return table;
}

std::vector<Alignment> window_fragments(const Alignment& a, std::size_t len, std::size_t stride) {
    if (len == 0 || stride == 0) throw Error("window length and stride must be at least 1");
    if (len > a.num_sites()) {
        throw FragmentTooLongError("window length " + std::to_string(len) + " exceeds alignment length " +
                                   std::to_string(a.num_sites()));
    }
    std::vector<Alignment> out;
    for (std::size_t start = 0; start + len <= a.num_sites(); start += stride) out.push_back(a.slice(start, len));
    return out;
}

}  // namespace phylopubo
