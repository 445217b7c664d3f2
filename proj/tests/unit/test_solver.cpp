#include "qcp/error.hpp"
#include "qcp/solver.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <map>
#include <set>

using namespace qcp;

namespace {

auto config(std::string_view name, std::uint64_t seed = 0, std::optional<std::uint64_t> cutoff = std::nullopt)
{
    auto c = parse_strategy(name);
    c.seed = seed;
    c.cutoff = cutoff;
    return c;
}

auto chi_square(const std::vector<int> & counts, double expected) -> double
{
    double x2 = 0.0;
    for (int c : counts)
        x2 += (c - expected) * (c - expected) / expected;
    return x2;
}

auto random_instance(Rng & rng, int order, double max_fill) -> PartialLatinSquare
{
    for (;;) {
        try {
            return generate({order, max_fill * rng.unit(), rng.next()});
        }
        catch (const PlacementExhausted &) {
        }
    }
}

} // namespace

TEST_CASE("strategy names")
{
    for (auto name : all_strategies)
        CHECK(strategy_name(parse_strategy(name)) == name);
    CHECK(parse_strategy("brelaz-s").tie_break == TieBreak::brelaz);
    CHECK(parse_strategy("brelaz-s").value_order == ValueOrder::systematic);
    CHECK(parse_strategy("r-brelaz-r").tie_break == TieBreak::reverse_brelaz);
    CHECK(parse_strategy("r-brelaz-r").value_order == ValueOrder::random);
    CHECK_THROWS_AS(parse_strategy("dsatur"), InvalidArgument);
}

TEST_CASE("solve examples")
{
    PartialLatinSquare stuck(2);
    stuck.set(0, 0, 0);
    stuck.set(1, 1, 1);
    for (auto name : all_strategies)
        CHECK(solve(stuck, config(name)).outcome == Outcome::unsat);

    auto one = solve(PartialLatinSquare(1), config("brelaz-s"));
    CHECK(one.outcome == Outcome::sat);
    CHECK(one.backtracks == 0);
    REQUIRE(one.completion);
    CHECK(one.completion->at(0, 0) == 0);

    PartialLatinSquare bad(2);
    bad.set(0, 0, 1);
    bad.set(0, 1, 1);
    CHECK_THROWS_AS(solve(bad, config("brelaz-s")), InvalidArgument);
}

TEST_CASE("search state domains")
{
    SearchState st{PartialLatinSquare(4)};
    CHECK(st.unassigned() == 16);
    CHECK(st.domain_size({2, 2}) == 4);
    CHECK(st.degree({2, 2}) == 6);

    CHECK(st.assign({0, 0}, 3) == SearchState::Propagation::consistent);
    int pruned = 0;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) {
            if (r == 0 && c == 0)
                continue;
            bool peer = r == 0 || c == 0;
            CHECK(static_cast<bool>(st.domain({r, c}) >> 3 & 1) == !peer);
            pruned += peer;
        }
    CHECK(pruned == 6);
    CHECK(st.degree({0, 1}) == 5);
    CHECK(st.degree({1, 1}) == 6);

    st.undo();
    CHECK(st.unassigned() == 16);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            CHECK(st.domain({r, c}) == 0xF);
}

TEST_CASE("wipeout is signalled")
{
    // Once row 0 holds 0 and column 1 holds 2 and 3, (0,1) is left with {1}.
    PartialLatinSquare sq(4);
    sq.set(1, 1, 2);
    sq.set(2, 1, 3);
    SearchState st(sq);
    CHECK(st.assign({0, 0}, 0) == SearchState::Propagation::consistent);
    CHECK(st.domain({0, 1}) == 0b0010);
    CHECK(st.assign({0, 2}, 1) == SearchState::Propagation::wipeout);
    CHECK(st.has_wipeout());
    st.undo();
    CHECK_FALSE(st.has_wipeout());
}

TEST_CASE("forward checking matches recomputed domains")
{
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        SearchState st(random_instance(rng, 5, 0.4));
        for (int step = 0; step < 30; ++step) {
            auto cells = st.unassigned_cells();
            bool do_undo = st.depth() > 0 && (cells.empty() || st.has_wipeout() || rng.below(4) == 0);
            if (do_undo)
                st.undo();
            else {
                int i = cells[rng.below(cells.size())];
                Cell c{i / 5, i % 5};
                if (st.domain(c) == 0)
                    continue;
                auto values = order_values(st, c, ValueOrder::random, rng);
                st.assign(c, values.front());
            }
            auto snap = st.snapshot();
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c)
                    if (!snap.filled(r, c)) {
                        REQUIRE(st.domain({r, c}) == oracle::brute_domain(snap, r, c));
                        REQUIRE(st.domain_size({r, c}) == std::popcount(st.domain({r, c})));
                    }
        }
    }
}

TEST_CASE("unassigned cell list survives assign and undo")
{
    SearchState st{PartialLatinSquare(3)};
    std::vector<int> before(st.unassigned_cells().begin(), st.unassigned_cells().end());
    st.assign({1, 1}, 0);
    st.assign({0, 2}, 2);
    CHECK(st.unassigned() == 7);
    st.undo();
    st.undo();
    std::vector<int> after(st.unassigned_cells().begin(), st.unassigned_cells().end());
    CHECK(before == after);
}

TEST_CASE("select_variable: single unassigned cell")
{
    PartialLatinSquare sq(2);
    sq.set(0, 0, 0);
    sq.set(0, 1, 1);
    sq.set(1, 0, 1);
    SearchState st(sq);
    Rng rng(1);
    CHECK(select_variable(st, TieBreak::brelaz, rng) == Cell{1, 1});
    CHECK(select_variable(st, TieBreak::reverse_brelaz, rng) == Cell{1, 1});
}

TEST_CASE("select_variable: uniform over a fully symmetric square")
{
    SearchState st{PartialLatinSquare(3)};
    for (auto tb : {TieBreak::brelaz, TieBreak::reverse_brelaz}) {
        Rng rng(77);
        std::vector<int> counts(9, 0);
        for (int i = 0; i < 9000; ++i) {
            Cell c = select_variable(st, tb, rng);
            ++counts[c.row * 3 + c.col];
        }
        // 8 degrees of freedom, p = 0.001 critical value 26.12.
        CHECK(chi_square(counts, 1000.0) < 26.12);
    }
}

TEST_CASE("select_variable follows First-Fail then (reverse) Brelaz")
{
    // Brute force: minimum domain size, then extreme degree.
    Rng rng(11);
    int unique_minimizers = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 3 + static_cast<int>(rng.below(4));
        SearchState st(random_instance(rng, n, 0.5));
        if (st.unassigned() == 0)
            continue;
        int min_size = 100;
        for (int i : st.unassigned_cells())
            min_size = std::min(min_size, st.domain_size({i / n, i % n}));
        std::vector<Cell> first_fail;
        for (int i : st.unassigned_cells())
            if (st.domain_size({i / n, i % n}) == min_size)
                first_fail.push_back({i / n, i % n});
        unique_minimizers += first_fail.size() == 1;

        for (auto tb : {TieBreak::brelaz, TieBreak::reverse_brelaz}) {
            int best = tb == TieBreak::brelaz ? -1 : 1000;
            for (Cell c : first_fail)
                best = tb == TieBreak::brelaz ? std::max(best, st.degree(c)) : std::min(best, st.degree(c));
            Cell chosen = select_variable(st, tb, rng);
            CHECK(st.domain_size(chosen) == min_size);
            CHECK(st.degree(chosen) == best);
            if (first_fail.size() == 1)
                CHECK(chosen == first_fail.front());
        }
    }
    CHECK(unique_minimizers > 10);
}

TEST_CASE("select_variable: Brelaz and reverse Brelaz split on degree")
{
    // With (0,0)=0, (0,1)=1, (1,2)=0 in an order-4 square the cells of
    // domain size 2 are (0,2) with degree 3, and (0,3), (1,1) with degree 4.
    SearchState st{PartialLatinSquare(4)};
    st.assign({0, 0}, 0);
    st.assign({0, 1}, 1);
    st.assign({1, 2}, 0);
    CHECK(st.domain_size({0, 2}) == 2);
    CHECK(st.degree({0, 2}) == 3);
    CHECK(st.degree({0, 3}) == 4);
    CHECK(st.degree({1, 1}) == 4);

    Rng rng(3);
    std::set<std::pair<int, int>> brelaz, reverse;
    for (int i = 0; i < 200; ++i) {
        Cell a = select_variable(st, TieBreak::brelaz, rng);
        Cell b = select_variable(st, TieBreak::reverse_brelaz, rng);
        brelaz.insert({a.row, a.col});
        reverse.insert({b.row, b.col});
    }
    CHECK(brelaz == std::set<std::pair<int, int>>{{0, 3}, {1, 1}});
    CHECK(reverse == std::set<std::pair<int, int>>{{0, 2}});
}

TEST_CASE("order_values")
{
    PartialLatinSquare sq(4);
    sq.set(0, 1, 3);
    SearchState st(sq);
    Rng rng(1);
    CHECK(order_values(st, {0, 0}, ValueOrder::systematic, rng) == std::vector<int>{0, 1, 2});

    PartialLatinSquare single(2);
    single.set(0, 0, 1);
    SearchState st1(single);
    CHECK(order_values(st1, {0, 1}, ValueOrder::random, rng) == std::vector<int>{0});
}

TEST_CASE("random value order is a uniform permutation")
{
    SearchState st{PartialLatinSquare(4)};
    Rng rng(2718);
    std::map<std::vector<int>, int> counts;
    for (int i = 0; i < 24000; ++i)
        ++counts[order_values(st, {2, 1}, ValueOrder::random, rng)];
    REQUIRE(counts.size() == 24);
    std::vector<int> observed;
    for (auto & [perm, c] : counts)
        observed.push_back(c);
    // 23 degrees of freedom, p = 0.001 critical value 49.73.
    CHECK(chi_square(observed, 1000.0) < 49.73);
}

TEST_CASE("solutions are sound and the verdict complete on small orders")
{
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 2 + static_cast<int>(rng.below(3));
        auto sq = random_instance(rng, n, 0.7);
        const bool expected = oracle::completable(sq);
        for (auto name : all_strategies) {
            auto res = solve(sq, config(name, rng.next()));
            REQUIRE(res.outcome != Outcome::cutoff);
            CHECK((res.outcome == Outcome::sat) == expected);
            if (res.completion) {
                CHECK(res.completion->complete());
                CHECK(res.completion->is_valid());
                CHECK(res.completion->extends(sq));
            }
        }
    }
}

TEST_CASE("solve is deterministic")
{
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto sq = random_instance(rng, 8, 0.45);
        for (auto name : all_strategies) {
            auto c = config(name, rng.next(), 100000);
            CHECK(solve(sq, c) == solve(sq, c));
        }
    }
}

TEST_CASE("random value order is seed sensitive on the empty order-20 square")
{
    for (auto name : {"brelaz-r", "r-brelaz-r"}) {
        std::set<std::uint64_t> distinct;
        for (std::uint64_t seed = 0; seed < 100; ++seed)
            distinct.insert(solve(PartialLatinSquare(20), config(name, seed, 20000)).backtracks);
        CHECK(distinct.size() >= 2);
    }
}

TEST_CASE("cutoff censors exactly the runs that need more backtracks")
{
    Rng rng(8);
    int censored_cases = 0;
    for (int trial = 0; trial < 60; ++trial) {
        auto sq = random_instance(rng, 9, 0.5);
        auto c = config(all_strategies[trial % 4], rng.next());
        auto full = solve(sq, c);
        REQUIRE(full.outcome != Outcome::cutoff);
        for (std::uint64_t cut : {std::uint64_t{0}, full.backtracks / 2, full.backtracks, full.backtracks + 5}) {
            c.cutoff = cut;
            auto part = solve(sq, c);
            if (full.backtracks <= cut) {
                CHECK(part == full);
            }
            else {
                ++censored_cases;
                CHECK(part.outcome == Outcome::cutoff);
                CHECK(part.backtracks == cut);
                CHECK_FALSE(part.completion);
            }
        }
    }
    CHECK(censored_cases > 0);
}

TEST_CASE("order 10 at 43% fill yields both completable and infeasible instances")
{
    int sat = 0, unsat = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        auto sq = generate({10, 0.43, seed});
        auto res = solve(sq, config("r-brelaz-r", seed));
        sat += res.outcome == Outcome::sat;
        unsat += res.outcome == Outcome::unsat;
    }
    CHECK(sat > 0);
    CHECK(unsat > 0);
}
