#pragma once

#include "qcp/latin_square.hpp"
#include "qcp/random.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcp {

/// How First-Fail ties on domain size are broken.
enum class TieBreak
{
    brelaz,         ///< prefer the cell constrained with the most unassigned cells
    reverse_brelaz, ///< prefer the cell constrained with the fewest
};

enum class ValueOrder
{
    systematic, ///< ascending value
    random,     ///< seeded uniform permutation
};

/// One of the four search strategies plus the run-specific seed and cutoff.
struct HeuristicConfig
{
    TieBreak tie_break = TieBreak::brelaz;
    ValueOrder value_order = ValueOrder::systematic;
    std::uint64_t seed = 0;
    /// Maximum backtracks before the run is censored; nullopt is unbounded.
    std::optional<std::uint64_t> cutoff;

    friend auto operator==(const HeuristicConfig &, const HeuristicConfig &) -> bool = default;
};

/// "brelaz-s", "brelaz-r", "r-brelaz-s" or "r-brelaz-r".
auto strategy_name(TieBreak tie_break, ValueOrder value_order) -> std::string;
auto strategy_name(const HeuristicConfig & config) -> std::string;
/// Inverse of strategy_name; seed and cutoff are left at their defaults.
/// Throws InvalidArgument on an unknown name.
auto parse_strategy(std::string_view name) -> HeuristicConfig;

inline constexpr std::string_view all_strategies[] = {"brelaz-s", "brelaz-r", "r-brelaz-s", "r-brelaz-r"};

enum class Outcome
{
    sat,
    unsat,
    cutoff,
};

auto to_string(Outcome outcome) -> std::string;

struct SolveResult
{
    Outcome outcome = Outcome::unsat;
    std::uint64_t backtracks = 0;
    /// Assignments attempted. Diagnostic only.
    std::uint64_t nodes = 0;
    /// Present iff outcome is sat.
    std::optional<PartialLatinSquare> completion;

    friend auto operator==(const SolveResult &, const SolveResult &) -> bool = default;
};

/// Search state with forward checking: every unassigned cell keeps the set
/// of values absent from its row and column.
class SearchState
{
public:
    enum class Propagation { consistent, wipeout };

    /// Loads the pre-assigned cells. Throws InvalidArgument if the square
    /// violates the Latin property.
    explicit SearchState(const PartialLatinSquare & square);

    [[nodiscard]] auto order() const noexcept -> int { return order_; }
    [[nodiscard]] auto value(Cell c) const -> int { return values_[flat(c)]; }
    [[nodiscard]] auto assigned(Cell c) const -> bool { return value(c) != PartialLatinSquare::empty; }
    /// Remaining domain as a bit mask over values.
    [[nodiscard]] auto domain(Cell c) const -> std::uint64_t { return domains_[flat(c)]; }
    [[nodiscard]] auto domain_size(Cell c) const -> int { return sizes_[flat(c)]; }
    /// Unassigned cells sharing the row or column of `c`, excluding `c`.
    [[nodiscard]] auto degree(Cell c) const -> int;
    [[nodiscard]] auto unassigned() const noexcept -> int { return static_cast<int>(free_.size()); }
    /// Row-major indices (row * order + col) of the unassigned cells, in an
    /// order that depends only on the sequence of assign/undo calls.
    [[nodiscard]] auto unassigned_cells() const noexcept -> std::span<const int> { return free_; }
    /// Number of assignments made through assign() and not yet undone.
    [[nodiscard]] auto depth() const noexcept -> std::size_t { return frames_.size(); }
    /// True when some unassigned cell has an empty domain.
    [[nodiscard]] auto has_wipeout() const -> bool;

    /// Assigns `value` to the unassigned cell `c` and removes it from the
    /// domains of the unassigned peers in its row and column. Reports a
    /// wipeout when one of those peers is left with no value. The
    /// assignment stands either way; retract it with undo().
    auto assign(Cell c, int value) -> Propagation;
    /// Retracts the most recent assignment and restores the peer domains.
    auto undo() -> void;

    [[nodiscard]] auto snapshot() const -> PartialLatinSquare;

private:
    [[nodiscard]] auto flat(Cell c) const -> std::size_t { return static_cast<std::size_t>(c.row) * order_ + c.col; }

    struct Frame
    {
        Cell cell;
        int value;
        std::size_t trail_mark;
        std::size_t free_slot;
    };

    auto remove_free(std::size_t at) -> void;

    int order_;
    std::vector<int> values_;
    std::vector<std::uint64_t> domains_;
    std::vector<int> sizes_;
    std::vector<int> free_;
    std::vector<std::size_t> free_pos_;
    std::vector<int> row_free_, col_free_;
    std::vector<std::size_t> trail_; // peers whose domain lost the frame's value
    std::vector<Frame> frames_;
};

/// First-Fail with (reverse) Brelaz tie-breaking: an unassigned cell of
/// minimum domain size, then extreme degree, then uniform among the rest.
/// Draws from `rng` only when more than one candidate survives.
/// Requires at least one unassigned cell.
auto select_variable(const SearchState & state, TieBreak tie_break, Rng & rng) -> Cell;

/// Remaining values of `c`, ascending or shuffled.
auto order_values(const SearchState & state, Cell c, ValueOrder order, Rng & rng) -> std::vector<int>;
/// As above, writing into `out` to avoid an allocation per search node.
auto order_values(const SearchState & state, Cell c, ValueOrder order, Rng & rng, std::vector<int> & out) -> void;

/// Complete depth-first search with forward checking.
///
/// One backtrack is counted each time a node has tried all of its values
/// without success and the search retreats, including the final retreat
/// from the root that proves unsatisfiability. A run needing more than
/// config.cutoff backtracks stops with outcome cutoff and backtracks equal
/// to the cutoff. Randomness comes from one generator seeded with
/// config.seed, drawn per node for the variable tie-break and then for the
/// value permutation.
///
/// Throws InvalidArgument if `square` is not a valid partial Latin square.
auto solve(const PartialLatinSquare & square, const HeuristicConfig & config) -> SolveResult;

} // namespace qcp
