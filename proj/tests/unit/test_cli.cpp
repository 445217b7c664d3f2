#include "qcp/cli.hpp"
#include "qcp/persistence.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>
#include <sstream>

using namespace qcp;
namespace fs = std::filesystem;

namespace {

struct TempDir
{
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() / ("qcp_cli_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    TempDir(const TempDir &) = delete;
    auto operator=(const TempDir &) -> TempDir & = delete;

    auto operator/(const std::string & name) const -> std::string { return (path / name).string(); }

    fs::path path;
};

struct Result
{
    int code;
    std::string out;
    std::string err;
};

auto run(std::vector<std::string> args) -> Result
{
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("usage errors")
{
    CHECK(run({}).code == cli::exit_usage);
    CHECK(run({"frobnicate"}).code == cli::exit_usage);
    CHECK(run({"gen", "--order", "3"}).code == cli::exit_usage);
    CHECK(run({"solve", "x.txt", "--heuristic", "dsatur"}).code == cli::exit_usage);
    CHECK(run({"--help"}).code == cli::exit_ok);
}

TEST_CASE("gen writes byte-identical files on rerun")
{
    TempDir a, b;
    auto r = run({"gen", "--order", "6", "--fill", "0.4", "--count", "3", "--seed", "5", "--out", a.path.string()});
    CHECK(r.code == 0);
    run({"gen", "--order", "6", "--fill", "0.4", "--count", "3", "--seed", "5", "--out", b.path.string()});
    for (auto name : {"instance_0000.txt", "instance_0001.txt", "instance_0002.txt", "manifest.json"})
        CHECK(read_file(a / name) == read_file(b / name));
    CHECK(parse_text(read_file(a / "instance_0001.txt")).filled_count() == 15);

    TempDir empty;
    CHECK(run({"gen", "--order", "4", "--out", empty.path.string()}).code == 0);
    CHECK(read_file(empty / "instance_0000.txt") == "order 4\n. . . .\n. . . .\n. . . .\n. . . .\n");

    TempDir json;
    CHECK(run({"gen", "--order", "5", "--fill", "0.2", "--format", "json", "--out", json.path.string()}).code == 0);
    auto doc = instance_from_json(read_file(json / "instance_0000.json"));
    CHECK(doc.generator->fill_fraction == 0.2);
}

TEST_CASE("gen fails only when every instance fails")
{
    TempDir d;
    // A full order-2 square gets stuck on some seeds; 200 instances mix both.
    auto some = run({"gen", "--order", "2", "--fill", "1", "--count", "200", "--out", d.path.string()});
    CHECK(some.code == 0);
    CHECK_FALSE(some.err.empty());
}

TEST_CASE("solve exit codes")
{
    TempDir d;
    write_file(d / "unsat.txt", "order 2\n0 .\n. 1\n");
    write_file(d / "one.txt", "order 1\n.\n");
    write_file(d / "bad.txt", "order 3\n. . .\n. 7 .\n. . .\n");

    auto unsat = run({"solve", d / "unsat.txt"});
    CHECK(unsat.code == cli::exit_unsat);
    CHECK(unsat.out.starts_with("outcome unsat\n"));

    auto sat = run({"solve", d / "one.txt", "--heuristic", "brelaz-s"});
    CHECK(sat.code == cli::exit_ok);
    CHECK(sat.out == "outcome sat\nbacktracks 0\nnodes 1\norder 1\n0\n");

    auto bad = run({"solve", d / "bad.txt"});
    CHECK(bad.code == cli::exit_data);
    CHECK(bad.err.find("line 3") != std::string::npos);

    CHECK(run({"solve", d / "missing.txt"}).code == cli::exit_data);

    // Find an instance that needs backtracks, then censor it at zero.
    TempDir g;
    run({"gen", "--order", "10", "--fill", "0.42", "--count", "30", "--seed", "1", "--out", g.path.string()});
    bool censored = false;
    for (int i = 0; i < 30 && !censored; ++i) {
        std::string path = g / ("instance_00" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ".txt");
        auto full = run({"solve", path, "--cutoff", "unbounded"});
        if (full.out.find("backtracks 0\n") != std::string::npos)
            continue;
        auto cut = run({"solve", path, "--cutoff", "0", "--format", "json"});
        CHECK(cut.code == cli::exit_cutoff);
        CHECK(cut.out.find("\"outcome\": \"cutoff\"") != std::string::npos);
        censored = true;
    }
    CHECK(censored);
}

TEST_CASE("profile writes distributions and an antisymmetric dominance report")
{
    TempDir d;
    auto r = run({"profile", "--order", "8", "--fill", "0.3", "--fresh", "--runs", "200", "--cutoff", "2000", "--cap",
        "--seed", "3", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    std::map<std::pair<std::string, std::string>, std::string> verdict;
    std::istringstream report(read_file(d / "dominance.csv"));
    std::string line;
    std::getline(report, line);
    CHECK(line == "a,b,dominates");
    while (std::getline(report, line)) {
        auto c1 = line.find(','), c2 = line.rfind(',');
        verdict[{line.substr(0, c1), line.substr(c1 + 1, c2 - c1 - 1)}] = line.substr(c2 + 1);
    }
    CHECK(verdict.size() == 12);
    for (auto & [pair, v] : verdict)
        CHECK_FALSE((v == "1" && verdict[{pair.second, pair.first}] == "1"));

    for (auto name : {"brelaz-s", "brelaz-r", "r-brelaz-s", "r-brelaz-r"}) {
        auto runs = runset_from_json(read_file(d / (std::string(name) + ".runs.json")));
        CHECK(runs.records.size() == 200);
        auto dist = distribution_from_json(read_file(d / (std::string(name) + ".dist.json")));
        auto csv = distribution_from_csv(read_file(d / (std::string(name) + ".cdf.csv")));
        CHECK(csv.support() == dist.support());
        CHECK(dist.censored_mass() == 0.0);
    }
}

TEST_CASE("profile with one run gives point masses")
{
    TempDir d;
    write_file(d / "sq.txt", "order 5\n0 . . . .\n. . . . .\n. . 3 . .\n. . . . .\n. . . . .\n");
    auto r = run({"profile", "--instance", d / "sq.txt", "--heuristics", "brelaz-s,r-brelaz-r", "--runs", "1", "--out",
        (d.path / "out").string()});
    REQUIRE(r.code == 0);
    auto dist = distribution_from_json(read_file(d.path / "out" / "brelaz-s.dist.json"));
    CHECK(dist.support().size() == 1);
    CHECK(dist.pmf()[0] == 1.0);
    CHECK_FALSE(fs::exists(d.path / "out" / "brelaz-r.dist.json"));
    CHECK(run({"profile", "--runs", "1", "--out", d / "x"}).code == cli::exit_usage);
}

TEST_CASE("portfolio and frontier commands")
{
    TempDir d;
    write_file(d / "fast.dist.json", distribution_to_json(EmpiricalDistribution({0, 10}, {0.4, 0.6})));
    write_file(d / "steady.dist.json", distribution_to_json(EmpiricalDistribution({2, 4}, {0.5, 0.5})));
    write_file(d / "cens.dist.json", distribution_to_json(EmpiricalDistribution({2}, {0.5}, 0.5)));

    auto single = run({"portfolio", "--dist", d / "steady.dist.json:1"});
    REQUIRE(single.code == 0);
    CHECK(single.out.starts_with("processors 1\nmean 3\nstd 1\n"));

    auto mixed = run({"portfolio", "--dist", d / "fast.dist.json:2", "--dist", d / "steady.dist.json:1", "--method",
        "binomial", "--out", (d.path / "p").string()});
    REQUIRE(mixed.code == 0);
    auto pmf = distribution_from_json(read_file(d.path / "p" / "portfolio.dist.json"));
    // P[X = 0] = 1 - 0.6^2.
    CHECK(pmf.probability(0) == doctest::Approx(0.64));

    auto refused = run({"portfolio", "--dist", d / "cens.dist.json:2"});
    CHECK(refused.code == cli::exit_data);
    CHECK(refused.err.find("cens.dist.json") != std::string::npos);

    auto two = run({"frontier", "--dist", d / "fast.dist.json", "--dist", d / "steady.dist.json", "--processors", "2",
        "--out", (d.path / "f2").string()});
    REQUIRE(two.code == 0);
    auto rows = portfolios_from_csv(read_file(d.path / "f2" / "frontier.csv"));
    CHECK(rows.size() == 3);
    CHECK(two.out.starts_with("n_fast,n_steady,mean,std,on_frontier\n"));

    auto twenty = run({"frontier", "--dist", d / "fast.dist.json", "--dist", d / "steady.dist.json", "--processors", "20",
        "--format", "json"});
    REQUIRE(twenty.code == 0);
    CHECK(twenty.out.find("\"processors\": 20") != std::string::npos);

    CHECK(run({"frontier", "--dist", d / "cens.dist.json", "--processors", "2"}).code == cli::exit_data);
    CHECK(run({"portfolio", "--dist", d / "fast.dist.json:0"}).code == cli::exit_usage);
}

TEST_CASE("phase command")
{
    TempDir a, b;
    auto r = run({"phase", "--order", "5", "--fills", "0.3", "--instances", "10", "--seed", "2", "--out", a.path.string()});
    REQUIRE(r.code == 0);
    auto rows = phase_from_csv(read_file(a / "phase.csv"));
    CHECK(rows.size() == 1);
    run({"phase", "--order", "5", "--fills", "0.3", "--instances", "10", "--seed", "2", "--jobs", "3", "--out",
        b.path.string()});
    CHECK(read_file(a / "phase.csv") == read_file(b / "phase.csv"));
    CHECK(read_file(a / "manifest.json") == read_file(b / "manifest.json"));

    auto range = run({"phase", "--order", "4", "--fill-from", "0.1", "--fill-to", "0.3", "--fill-step", "0.05",
        "--instances", "3"});
    REQUIRE(range.code == 0);
    CHECK(phase_from_csv(range.out).size() == 5);
    CHECK(range.out.find("\n0.15,") != std::string::npos);

    CHECK(run({"phase", "--fill-from", "0.5", "--fill-to", "0.1"}).code == cli::exit_usage);
}
