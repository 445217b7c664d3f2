#include "qcp/latin_square.hpp"

#include "qcp/error.hpp"
#include "qcp/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qcp {

auto GeneratorSpec::target_filled() const -> int
{
    // fill fractions such as 0.43 are not exact in binary; the slack keeps
    // 0.43 * 100 from rounding up to 44.
    const double cells = static_cast<double>(order) * order;
    const auto target = static_cast<int>(std::ceil(fill_fraction * cells - 1e-9));
    return std::clamp(target, 0, order * order);
}

auto GeneratorSpec::check() const -> void
{
    if (order < 1 || order > max_order)
        throw InvalidArgument("order must be in [1, " + std::to_string(max_order) + "], got " + std::to_string(order));
    if (!(fill_fraction >= 0.0 && fill_fraction <= 1.0))
        throw InvalidArgument("fill fraction must be in [0, 1], got " + std::to_string(fill_fraction));
}

auto Violation::describe() const -> std::string
{
    return (line == Line::row ? "row " : "column ") + std::to_string(index) + " duplicates value " + std::to_string(value);
}

PartialLatinSquare::PartialLatinSquare(int order) : order_(order)
{
    if (order < 1 || order > max_order)
        throw InvalidArgument("order must be in [1, " + std::to_string(max_order) + "], got " + std::to_string(order));
    cells_.assign(static_cast<std::size_t>(order) * order, empty);
}

auto PartialLatinSquare::index(int row, int col) const -> std::size_t
{
    if (row < 0 || row >= order_ || col < 0 || col >= order_)
        throw InvalidArgument("cell (" + std::to_string(row) + ", " + std::to_string(col) + ") outside order " + std::to_string(order_));
    return static_cast<std::size_t>(row) * order_ + col;
}

auto PartialLatinSquare::set(int row, int col, int value) -> void
{
    if (value != empty && (value < 0 || value >= order_))
        throw InvalidArgument("value " + std::to_string(value) + " outside [0, " + std::to_string(order_) + ")");
    cells_[index(row, col)] = value;
}

auto PartialLatinSquare::filled_count() const -> int
{
    return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](int v) { return v != empty; }));
}

auto PartialLatinSquare::validate() const -> std::vector<Violation>
{
    std::vector<Violation> out;
    std::vector<int> seen(order_);
    for (auto line : {Violation::Line::row, Violation::Line::column}) {
        for (int i = 0; i < order_; ++i) {
            std::fill(seen.begin(), seen.end(), 0);
            for (int j = 0; j < order_; ++j) {
                int v = line == Violation::Line::row ? at(i, j) : at(j, i);
                if (v != empty && ++seen[v] == 2)
                    out.push_back({line, i, v});
            }
        }
    }
    return out;
}

auto PartialLatinSquare::extends(const PartialLatinSquare & other) const -> bool
{
    if (other.order_ != order_)
        return false;
    for (std::size_t i = 0; i < cells_.size(); ++i)
        if (other.cells_[i] != empty && other.cells_[i] != cells_[i])
            return false;
    return true;
}

auto generate(const GeneratorSpec & spec) -> PartialLatinSquare
{
    spec.check();
    const int n = spec.order;
    const int target = spec.target_filled();

    PartialLatinSquare square(n);
    Rng rng(spec.seed);

    std::vector<std::uint64_t> row_used(n, 0), col_used(n, 0);
    std::vector<Cell> pool;
    pool.reserve(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            pool.push_back({r, c});

    auto take = [&](std::size_t i) {
        Cell cell = pool[i];
        pool[i] = pool.back();
        pool.pop_back();
        return cell;
    };

    std::vector<int> candidates;
    int placed = 0;
    while (placed < target) {
        if (pool.empty())
            throw PlacementExhausted("no cell admits a consistent value after " + std::to_string(placed) + " of "
                + std::to_string(target) + " placements");
        Cell cell = take(rng.below(pool.size()));
        const std::uint64_t used = row_used[cell.row] | col_used[cell.col];
        candidates.clear();
        for (int v = 0; v < n; ++v)
            if (!(used >> v & 1U))
                candidates.push_back(v);
        if (candidates.empty())
            continue;
        int value = candidates[rng.below(candidates.size())];
        square.set(cell.row, cell.col, value);
        row_used[cell.row] |= std::uint64_t{1} << value;
        col_used[cell.col] |= std::uint64_t{1} << value;
        ++placed;
    }
    return square;
}

auto to_text(const PartialLatinSquare & square) -> std::string
{
    std::string out = "order " + std::to_string(square.order()) + "\n";
    for (int r = 0; r < square.order(); ++r) {
        for (int c = 0; c < square.order(); ++c) {
            if (c > 0)
                out += ' ';
            int v = square.at(r, c);
            out += v == PartialLatinSquare::empty ? std::string(".") : std::to_string(v);
        }
        out += '\n';
    }
    return out;
}

namespace {

auto split_tokens(const std::string & line) -> std::vector<std::string>
{
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;)
        tokens.push_back(t);
    return tokens;
}

auto parse_int(const std::string & token, std::size_t line, const char * what) -> long long
{
    if (token.empty() || token.size() > 18 || !std::all_of(token.begin(), token.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        throw ParseError(line, std::string("expected ") + what + ", got '" + token + "'");
    return std::stoll(token);
}

} // namespace

auto parse_text(const std::string & text) -> PartialLatinSquare
{
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.find_first_not_of(" \t") != std::string::npos)
                return true;
        }
        return false;
    };

    if (!next_line())
        throw ParseError(line_no + 1, "missing 'order N' header");
    auto header = split_tokens(line);
    if (header.size() != 2 || header[0] != "order")
        throw ParseError(line_no, "expected 'order N' header");
    long long order = parse_int(header[1], line_no, "order");
    if (order < 1 || order > max_order)
        throw ParseError(line_no, "order " + std::to_string(order) + " outside [1, " + std::to_string(max_order) + "]");

    const int n = static_cast<int>(order);
    PartialLatinSquare square(n);
    for (int r = 0; r < n; ++r) {
        if (!next_line())
            throw ParseError(line_no + 1, "expected " + std::to_string(n) + " rows, found " + std::to_string(r));
        auto tokens = split_tokens(line);
        if (tokens.size() != static_cast<std::size_t>(n))
            throw ParseError(line_no, "expected " + std::to_string(n) + " tokens, found " + std::to_string(tokens.size()));
        for (int c = 0; c < n; ++c) {
            if (tokens[c] == ".")
                continue;
            long long v = parse_int(tokens[c], line_no, "value or '.'");
            if (v >= n)
                throw ParseError(line_no, "value " + tokens[c] + " outside [0, " + std::to_string(n) + ")");
            square.set(r, c, static_cast<int>(v));
        }
    }
    if (next_line())
        throw ParseError(line_no, "unexpected content after the last row");

    if (auto violations = square.validate(); !violations.empty())
        throw ParseError(line_no, "not a partial Latin square: " + violations.front().describe());
    return square;
}

} // namespace qcp
