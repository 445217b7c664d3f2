#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qcp {

/// Largest supported order. Domains are held as 64-bit value masks.
inline constexpr int max_order = 64;

struct Cell
{
    int row = 0;
    int col = 0;

    friend auto operator==(const Cell &, const Cell &) -> bool = default;
};

/// Parameters of the random instance generator.
struct GeneratorSpec
{
    int order = 1;
    double fill_fraction = 0.0;
    std::uint64_t seed = 0;

    /// Number of cells the generator pre-assigns: ceil(fill_fraction * order^2).
    [[nodiscard]] auto target_filled() const -> int;
    /// Throws InvalidArgument when order or fill_fraction is out of range.
    auto check() const -> void;

    friend auto operator==(const GeneratorSpec &, const GeneratorSpec &) -> bool = default;
};

/// A row or column in which a value appears more than once.
struct Violation
{
    enum class Line { row, column };
    Line line = Line::row;
    int index = 0;
    int value = 0;

    [[nodiscard]] auto describe() const -> std::string;

    friend auto operator==(const Violation &, const Violation &) -> bool = default;
};

/// An order-N grid whose cells are either empty or hold a value in [0, N).
///
/// The grid itself does not enforce the Latin property, so that parsers and
/// tests can hold conflicting grids long enough to report them; use
/// validate() or is_valid() to check it.
class PartialLatinSquare
{
public:
    static constexpr int empty = -1;

    /// Empty square of the given order. Throws InvalidArgument unless
    /// 1 <= order <= max_order.
    explicit PartialLatinSquare(int order);

    [[nodiscard]] auto order() const noexcept -> int { return order_; }

    [[nodiscard]] auto at(int row, int col) const -> int { return cells_[index(row, col)]; }
    [[nodiscard]] auto at(Cell c) const -> int { return at(c.row, c.col); }
    [[nodiscard]] auto filled(int row, int col) const -> bool { return at(row, col) != empty; }

    /// Throws InvalidArgument if value is outside [0, N) (or not `empty`).
    auto set(int row, int col, int value) -> void;
    auto clear(int row, int col) -> void { set(row, col, empty); }

    [[nodiscard]] auto filled_count() const -> int;
    [[nodiscard]] auto complete() const -> bool { return filled_count() == order_ * order_; }

    /// Row and column duplicates among the filled cells, rows first.
    [[nodiscard]] auto validate() const -> std::vector<Violation>;
    [[nodiscard]] auto is_valid() const -> bool { return validate().empty(); }

    /// True when every filled cell of `other` holds the same value here.
    [[nodiscard]] auto extends(const PartialLatinSquare & other) const -> bool;

    friend auto operator==(const PartialLatinSquare &, const PartialLatinSquare &) -> bool = default;

private:
    [[nodiscard]] auto index(int row, int col) const -> std::size_t;

    int order_;
    std::vector<int> cells_;
};

/// Random partial Latin square with exactly spec.target_filled() cells.
///
/// Repeatedly draws a uniformly random cell from the pool of empty cells and
/// a uniformly random value consistent with its row and column. A drawn cell
/// with no consistent value leaves the pool. Completability is not checked.
/// Throws PlacementExhausted if the pool empties before the target is met.
auto generate(const GeneratorSpec & spec) -> PartialLatinSquare;

/// Text form: "order N" followed by N rows of N space-separated tokens,
/// each a decimal value or "." for an empty cell. Every line ends with LF.
auto to_text(const PartialLatinSquare & square) -> std::string;

/// Parses the text form. Rejects wrong token counts, values outside [0, N)
/// and grids with row or column duplicates. Throws ParseError.
auto parse_text(const std::string & text) -> PartialLatinSquare;

} // namespace qcp
