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
#include <string>
#include <string_view>
#include <vector>

namespace phylopubo {

/// Character state index. Order is fixed: A < C < G < T < '-'.
using State = std::uint8_t;

inline constexpr int kNumStates = 5;
inline constexpr State kGap = 4;
inline constexpr std::array<char, kNumStates> kStateChars = {'A', 'C', 'G', 'T', '-'};

/// Case-folds; anything outside {A,C,G,T,-} becomes '-'.
State state_from_char(char c);
inline char state_char(State s) { return kStateChars[s]; }

/// Equal-length rows over the five-state alphabet, one per named taxon.
class Alignment {
  public:
    /// Normalizes rows (case fold, unknown -> '-') and validates shape.
    /// Throws TooFewTaxaError, AlignmentRaggedError, EmptyInputError, ParseError
    /// (duplicate names).
    Alignment(std::vector<std::string> taxa, std::vector<std::string> rows);

    std::size_t num_taxa() const { return taxa_.size(); }
    std::size_t num_sites() const { return rows_.front().size(); }

    const std::vector<std::string>& taxa() const { return taxa_; }
    const std::vector<std::string>& rows() const { return rows_; }

    State state(std::size_t taxon, std::size_t site) const {
        return state_from_char(rows_[taxon][site]);
    }
    std::vector<State> column(std::size_t site) const;

    /// Sites [begin, begin + len).
    Alignment slice(std::size_t begin, std::size_t len) const;

    /// One line per remapped input character, e.g. "mapped 'N' -> '-' (3 sites)".
    const std::vector<std::string>& ingest_notes() const { return notes_; }

    friend bool operator==(const Alignment& a, const Alignment& b) {
        return a.taxa_ == b.taxa_ && a.rows_ == b.rows_;
    }

  private:
    std::vector<std::string> taxa_;
    std::vector<std::string> rows_;
    std::vector<std::string> notes_;
};

Alignment parse_fasta(std::string_view text);
std::string to_fasta(const Alignment& a, std::size_t line_width = 60);

/// Symmetric 5x5 substitution cost table with zero diagonal.
class StepMatrix {
  public:
    using Grid = std::array<std::array<int, kNumStates>, kNumStates>;

    /// Throws StepMatrixInvalidError on negative, asymmetric or nonzero-diagonal grids.
    explicit StepMatrix(const Grid& grid);

    int cost(State from, State to) const { return grid_[from][to]; }
    int max_entry() const;
    const Grid& grid() const { return grid_; }

    /// All off-diagonal entries equal to `c`.
    static StepMatrix uniform(int c = 1);

    friend bool operator==(const StepMatrix&, const StepMatrix&) = default;

  private:
    Grid grid_;
};

/// Transitions 1, transversions 2, any change to or from a gap 4.
StepMatrix default_step_matrix();

/// JSON config: {"states": ["A","C","G","T","-"], "cost": [[...5 ints...] x5]}.
/// States may be listed in any order; the grid is permuted accordingly.
StepMatrix load_step_matrix(std::string_view json_text);
std::string step_matrix_to_json(const StepMatrix& s);

/// Distinct alignment columns with multiplicities.
struct PatternTable {
    std::vector<std::vector<State>> patterns;
    std::vector<int> weights;
    std::vector<std::size_t> site_to_pattern;

    std::size_t size() const { return patterns.size(); }
};

/// Patterns are listed in order of first appearance.
PatternTable compress_patterns(const Alignment& a);

/// Windows starting at 0, stride, 2*stride, ... that lie fully inside the
/// alignment; a partial tail is dropped. Throws FragmentTooLongError if
/// len > num_sites.
std::vector<Alignment> window_fragments(const Alignment& a, std::size_t len, std::size_t stride);

}  // namespace phylopubo
