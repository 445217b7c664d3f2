#include "qcp/solver.hpp"

#include "qcp/error.hpp"

#include <bit>
#include <limits>

namespace qcp {

auto strategy_name(TieBreak tie_break, ValueOrder value_order) -> std::string
{
    std::string name = tie_break == TieBreak::brelaz ? "brelaz" : "r-brelaz";
    return name + (value_order == ValueOrder::systematic ? "-s" : "-r");
}

auto strategy_name(const HeuristicConfig & config) -> std::string
{
    return strategy_name(config.tie_break, config.value_order);
}

auto parse_strategy(std::string_view name) -> HeuristicConfig
{
    for (auto tb : {TieBreak::brelaz, TieBreak::reverse_brelaz})
        for (auto vo : {ValueOrder::systematic, ValueOrder::random})
            if (strategy_name(tb, vo) == name)
                return HeuristicConfig{tb, vo, 0, std::nullopt};
    throw InvalidArgument("unknown heuristic '" + std::string(name)
        + "' (expected brelaz-s, brelaz-r, r-brelaz-s or r-brelaz-r)");
}

auto to_string(Outcome outcome) -> std::string
{
    switch (outcome) {
    case Outcome::sat: return "sat";
    case Outcome::unsat: return "unsat";
    case Outcome::cutoff: return "cutoff";
    }
    return "?";
}

SearchState::SearchState(const PartialLatinSquare & square) : order_(square.order())
{
    if (auto violations = square.validate(); !violations.empty())
        throw InvalidArgument("not a partial Latin square: " + violations.front().describe());

    const int n = order_;
    const std::size_t cells = static_cast<std::size_t>(n) * n;
    const std::uint64_t full = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
    values_.assign(cells, PartialLatinSquare::empty);
    domains_.assign(cells, full);
    sizes_.assign(cells, n);
    free_pos_.assign(cells, cells);
    row_free_.assign(n, n);
    col_free_.assign(n, n);

    std::vector<std::uint64_t> row_used(n, 0), col_used(n, 0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (int v = square.at(r, c); v != PartialLatinSquare::empty) {
                values_[flat({r, c})] = v;
                row_used[r] |= std::uint64_t{1} << v;
                col_used[c] |= std::uint64_t{1} << v;
                --row_free_[r];
                --col_free_[c];
            }
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const std::size_t i = flat({r, c});
            domains_[i] = values_[i] == PartialLatinSquare::empty ? full & ~(row_used[r] | col_used[c])
                                                                  : std::uint64_t{1} << values_[i];
            sizes_[i] = std::popcount(domains_[i]);
            if (values_[i] == PartialLatinSquare::empty) {
                free_pos_[i] = free_.size();
                free_.push_back(static_cast<int>(i));
            }
        }
}

auto SearchState::degree(Cell c) const -> int
{
    int d = row_free_[c.row] + col_free_[c.col];
    return assigned(c) ? d : d - 2;
}

auto SearchState::has_wipeout() const -> bool
{
    for (int i : free_)
        if (sizes_[i] == 0)
            return true;
    return false;
}

auto SearchState::remove_free(std::size_t at) -> void
{
    // Swap with the last entry; undo() reverses this exactly.
    const std::size_t pos = free_pos_[at];
    const int last = free_.back();
    free_[pos] = last;
    free_pos_[last] = pos;
    free_.pop_back();
    free_pos_[at] = values_.size();
}

auto SearchState::assign(Cell c, int value) -> Propagation
{
    const std::size_t at = flat(c);
    if (values_[at] != PartialLatinSquare::empty)
        throw InvalidArgument("cell already assigned");
    if (value < 0 || value >= order_)
        throw InvalidArgument("value out of range");

    frames_.push_back({c, value, trail_.size(), free_pos_[at]});
    values_[at] = value;
    remove_free(at);
    --row_free_[c.row];
    --col_free_[c.col];

    const std::uint64_t bit = std::uint64_t{1} << value;
    bool wipeout = false;
    auto prune = [&](std::size_t peer) {
        if (values_[peer] != PartialLatinSquare::empty || !(domains_[peer] & bit))
            return;
        domains_[peer] &= ~bit;
        trail_.push_back(peer);
        if (--sizes_[peer] == 0)
            wipeout = true;
    };
    for (int k = 0; k < order_; ++k) {
        if (k != c.col)
            prune(flat({c.row, k}));
        if (k != c.row)
            prune(flat({k, c.col}));
    }
    return wipeout ? Propagation::wipeout : Propagation::consistent;
}

auto SearchState::undo() -> void
{
    if (frames_.empty())
        throw InvalidArgument("nothing to undo");
    Frame f = frames_.back();
    frames_.pop_back();
    const std::uint64_t bit = std::uint64_t{1} << f.value;
    for (std::size_t i = f.trail_mark; i < trail_.size(); ++i) {
        domains_[trail_[i]] |= bit;
        ++sizes_[trail_[i]];
    }
    trail_.resize(f.trail_mark);

    const std::size_t at = flat(f.cell);
    values_[at] = PartialLatinSquare::empty;
    // Reverse remove_free(): move the occupant of our old slot back to the end.
    if (f.free_slot == free_.size()) {
        free_.push_back(static_cast<int>(at));
    }
    else {
        const int moved = free_[f.free_slot];
        free_pos_[moved] = free_.size();
        free_.push_back(moved);
        free_[f.free_slot] = static_cast<int>(at);
    }
    free_pos_[at] = f.free_slot;
    ++row_free_[f.cell.row];
    ++col_free_[f.cell.col];
}

auto SearchState::snapshot() const -> PartialLatinSquare
{
    PartialLatinSquare out(order_);
    for (int r = 0; r < order_; ++r)
        for (int c = 0; c < order_; ++c)
            out.set(r, c, values_[flat({r, c})]);
    return out;
}

auto select_variable(const SearchState & state, TieBreak tie_break, Rng & rng) -> Cell
{
    const int n = state.order();
    const auto cells = state.unassigned_cells();
    if (cells.empty())
        throw InvalidArgument("select_variable: no unassigned cell");

    auto cell_of = [n](int i) { return Cell{i / n, i % n}; };

    int best_size = std::numeric_limits<int>::max();
    int best_degree = 0;
    std::size_t ties = 0;
    for (int i : cells) {
        const Cell cell = cell_of(i);
        const int size = state.domain_size(cell);
        if (size > best_size)
            continue;
        const int deg = state.degree(cell);
        if (size < best_size || (tie_break == TieBreak::brelaz ? deg > best_degree : deg < best_degree)) {
            best_size = size;
            best_degree = deg;
            ties = 1;
        }
        else if (deg == best_degree)
            ++ties;
    }

    std::size_t pick = ties > 1 ? rng.below(ties) : 0;
    for (int i : cells) {
        const Cell cell = cell_of(i);
        if (state.domain_size(cell) == best_size && state.degree(cell) == best_degree && pick-- == 0)
            return cell;
    }
    throw InvalidArgument("select_variable: inconsistent tie count");
}

auto order_values(const SearchState & state, Cell c, ValueOrder order, Rng & rng, std::vector<int> & out) -> void
{
    out.clear();
    for (std::uint64_t d = state.domain(c); d != 0; d &= d - 1)
        out.push_back(std::countr_zero(d));
    if (order == ValueOrder::random)
        rng.shuffle(std::span<int>(out));
}

auto order_values(const SearchState & state, Cell c, ValueOrder order, Rng & rng) -> std::vector<int>
{
    std::vector<int> values;
    order_values(state, c, order, rng, values);
    return values;
}

namespace {

class Search
{
public:
    Search(const PartialLatinSquare & square, const HeuristicConfig & config)
        : state_(square), config_(config), rng_(config.seed)
    {
    }

    auto run() -> SolveResult
    {
        SolveResult result;
        if (state_.has_wipeout()) {
            result.outcome = Outcome::unsat;
            return result;
        }
        bool found = descend();
        result.backtracks = backtracks_;
        result.nodes = nodes_;
        if (found) {
            result.outcome = Outcome::sat;
            result.completion = state_.snapshot();
        }
        else
            result.outcome = aborted_ ? Outcome::cutoff : Outcome::unsat;
        return result;
    }

private:
    auto descend() -> bool
    {
        if (state_.unassigned() == 0)
            return true;
        const Cell cell = select_variable(state_, config_.tie_break, rng_);
        const std::size_t depth = state_.depth();
        if (buffers_.size() <= depth)
            buffers_.resize(depth + 1);
        order_values(state_, cell, config_.value_order, rng_, buffers_[depth]);
        for (int v : buffers_[depth]) {
            ++nodes_;
            if (state_.assign(cell, v) == SearchState::Propagation::consistent) {
                if (descend())
                    return true;
                if (aborted_)
                    return false;
            }
            state_.undo();
        }
        if (config_.cutoff && backtracks_ >= *config_.cutoff) {
            aborted_ = true;
            return false;
        }
        ++backtracks_;
        return false;
    }

    SearchState state_;
    HeuristicConfig config_;
    Rng rng_;
    std::vector<std::vector<int>> buffers_; // candidate values per depth
    std::uint64_t backtracks_ = 0;
    std::uint64_t nodes_ = 0;
    bool aborted_ = false;
};

} // namespace

auto solve(const PartialLatinSquare & square, const HeuristicConfig & config) -> SolveResult
{
    return Search(square, config).run();
}

} // namespace qcp
