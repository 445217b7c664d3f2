#include "qcp/error.hpp"
#include "qcp/persistence.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace qcp;

TEST_CASE("format_double round-trips")
{
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.0) == "0");
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        double x = rng.unit() * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
        CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
    }
}

TEST_CASE("instance documents round-trip")
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GeneratorSpec spec{1 + static_cast<int>(seed % 12), 0.05 * static_cast<double>(seed % 10), seed};
        InstanceDocument doc{generate(spec), spec};
        auto text = instance_to_json(doc);
        CHECK(instance_from_json(text) == doc);
        CHECK(parse_instance(text) == doc);
        CHECK(parse_instance(to_text(doc.square)).square == doc.square);
    }
}

TEST_CASE("malformed instance documents")
{
    CHECK_THROWS_AS(instance_from_json("{\"schema\": \"qcp.instance/1\", \"order\": 2}"), ParseError);
    CHECK_THROWS_AS(instance_from_json("{\"schema\": \"other\", \"order\": 1, \"cells\": [[null]]}"), ParseError);
    CHECK_THROWS_AS(instance_from_json("{\"schema\": \"qcp.instance/1\", \"order\": 2, \"cells\": [[0, 0], [null, null]]}"),
        ParseError);
    CHECK_THROWS_AS(instance_from_json("{\"schema\": \"qcp.instance/1\", \"order\": 2, \"cells\": [[2, null], [null, null]]}"),
        ParseError);
    CHECK_THROWS_AS(instance_from_json("{\"schema\": \"qcp.instance/1\", \"order\": 2, \"cells\": [[0], [null, null]]}"),
        ParseError);
    try {
        instance_from_json("{\n\"schema\":\n oops}");
        FAIL("expected a parse error");
    }
    catch (const ParseError & e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("run sets round-trip")
{
    auto h = parse_strategy("brelaz-r");
    h.cutoff = 50;
    auto fixed = collect(generate({6, 0.3, 1}), h, 20, 9);
    CHECK(runset_from_json(runset_to_json(fixed)) == fixed);

    h.cutoff = std::nullopt;
    auto fresh = collect(GeneratorSpec{2, 1.0, 0}, h, 20, 9);
    CHECK(runset_from_json(runset_to_json(fresh)) == fresh);

    auto text = runset_to_json(fixed);
    auto broken = text;
    broken.replace(broken.find("\"runs\": 20"), 10, "\"runs\": 21");
    CHECK_THROWS_AS(runset_from_json(broken), ParseError);
}

TEST_CASE("distributions round-trip through JSON and CSV")
{
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        auto d = oracle::random_distribution(rng, 1 + static_cast<int>(rng.below(8)), 1000);
        d.metadata["strategy"] = "brelaz-s";
        CHECK(distribution_from_json(distribution_to_json(d)) == d);

        auto csv = distribution_from_csv(distribution_to_csv(d));
        CHECK(csv.support() == d.support());
        CHECK(csv.pmf() == d.pmf());
        CHECK(csv.censored_mass() < 1e-12);
    }
    auto censored = EmpiricalDistribution({3, 7}, {0.25, 0.5}, 0.25);
    CHECK(distribution_from_json(distribution_to_json(censored)) == censored);
    CHECK(distribution_from_csv(distribution_to_csv(censored)).censored_mass() == doctest::Approx(0.25));
    CHECK(distribution_to_csv(censored) == "x,pmf,cdf\n3,0.25,0.25\n7,0.5,0.75\n");
}

TEST_CASE("malformed CSV")
{
    CHECK_THROWS_AS(distribution_from_csv(""), ParseError);
    CHECK_THROWS_AS(distribution_from_csv("a,b,c\n"), ParseError);
    try {
        distribution_from_csv("x,pmf,cdf\n1,0.5,0.5\n2,zero,1\n");
        FAIL("expected a parse error");
    }
    catch (const ParseError & e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(distribution_from_csv("x,pmf,cdf\n1,0.5\n"), ParseError);
    CHECK_THROWS_AS(distribution_from_csv("x,pmf,cdf\n2,0.5,0.5\n1,0.5,1\n"), ParseError);
}

TEST_CASE("phase rows round-trip")
{
    std::vector<PhaseRow> rows{
        {0.1, 100, 0, 0, 0.25, 1.0, 0.0, 0.0},
        {0.45, 100, 3, 120, 311.5, 0.4, 0.55, 0.05},
        {0.95, 10, 10, std::nullopt, std::nullopt, 0.0, 0.0, 0.0},
    };
    auto csv = phase_to_csv(rows);
    CHECK(phase_from_csv(csv) == rows);
    CHECK(csv.find("\n0.95,10,10,,,0,0,0\n") != std::string::npos);
}

TEST_CASE("portfolio tables round-trip")
{
    std::vector<EmpiricalDistribution> dists{EmpiricalDistribution({1, 2}, {0.5, 0.5}), EmpiricalDistribution({0, 9}, {0.3, 0.7})};
    auto ps = enumerate_portfolios(dists, 3);
    auto csv = portfolios_to_csv(ps, {"a", "b"});
    CHECK(csv.starts_with("n_a,n_b,mean,std,on_frontier\n"));
    auto rows = portfolios_from_csv(csv);
    auto mask = frontier_mask(ps);
    REQUIRE(rows.size() == ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        CHECK(rows[i].allocation == ps[i].allocation);
        CHECK(rows[i].mean == ps[i].stats.mean);
        CHECK(rows[i].std == ps[i].stats.std);
        CHECK(rows[i].on_frontier == mask[i]);
    }
    CHECK_THROWS_AS(portfolios_to_csv(ps, {"a"}), InvalidArgument);
}
