#include "qcp/cli.hpp"

#include "qcp/error.hpp"
#include "qcp/persistence.hpp"
#include "qcp/portfolio.hpp"
#include "qcp/profiles.hpp"
#include "qcp/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace qcp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t default_cutoff = 1'000'000;

/// Failure that maps to a specific exit code.
struct CommandError : Error
{
    CommandError(int code, const std::string & what) : Error(what), code(code) {}
    int code;
};

auto manifest(const std::string & command, json parameters, std::uint64_t seed, const std::vector<std::string> & outputs)
    -> std::string
{
    json j = {
        {"tool", "qcp"},
        {"version", tool_version},
        {"command", command},
        {"parameters", std::move(parameters)},
        {"master_seed", seed},
        {"outputs", outputs},
    };
    return j.dump(2) + "\n";
}

auto cutoff_value(const std::string & text) -> std::optional<std::uint64_t>
{
    if (text == "unbounded")
        return std::nullopt;
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size())
        throw CommandError(exit_usage, "--cutoff expects a non-negative integer or 'unbounded', got '" + text + "'");
    return v;
}

auto cutoff_json(const std::optional<std::uint64_t> & cutoff) -> json
{
    return cutoff ? json(*cutoff) : json("unbounded");
}

auto heuristic(const std::string & name, const std::string & cutoff) -> HeuristicConfig
{
    HeuristicConfig config;
    try {
        config = parse_strategy(name);
    }
    catch (const InvalidArgument & e) {
        throw CommandError(exit_usage, e.what());
    }
    config.cutoff = cutoff_value(cutoff);
    return config;
}

/// Reads and parses a file, prefixing errors with its path.
template <typename Parser>
auto load(const fs::path & path, Parser && parser)
{
    std::string text;
    try {
        text = read_file(path);
    }
    catch (const Error & e) {
        throw CommandError(exit_data, e.what());
    }
    try {
        return parser(text);
    }
    catch (const Error & e) {
        throw CommandError(exit_data, path.string() + ": " + e.what());
    }
}

auto index_name(std::uint64_t index, std::uint64_t count) -> std::string
{
    std::size_t width = std::max<std::size_t>(4, std::to_string(count - 1).size());
    std::string digits = std::to_string(index);
    return std::string(width - std::min(width, digits.size()), '0') + digits;
}

auto stem_name(const fs::path & path) -> std::string
{
    std::string name = path.filename().string();
    for (const char * suffix : {".dist.json", ".json", ".csv"})
        if (name.size() > std::string(suffix).size() && name.ends_with(suffix))
            return name.substr(0, name.size() - std::string(suffix).size());
    return name;
}

auto load_distribution(const fs::path & path) -> EmpiricalDistribution
{
    return load(path, [](const std::string & text) {
        auto first = text.find_first_not_of(" \t\r\n");
        return first != std::string::npos && text[first] == '{' ? distribution_from_json(text) : distribution_from_csv(text);
    });
}

auto require_uncensored(const EmpiricalDistribution & dist, const fs::path & path) -> void
{
    if (dist.censored_mass() > 0.0)
        throw CommandError(exit_data, "refusing " + path.string() + ": censored mass " + format_double(dist.censored_mass())
                + " (re-profile with --cap or a higher --cutoff)");
}

// ---------------------------------------------------------------- gen

struct GenOptions
{
    int order = 0;
    double fill = 0.0;
    std::uint64_t count = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
};

auto cmd_gen(const GenOptions & o, std::ostream & out, std::ostream & err) -> int
{
    GeneratorSpec base{o.order, o.fill, 0};
    try {
        base.check();
    }
    catch (const InvalidArgument & e) {
        throw CommandError(exit_usage, e.what());
    }
    const fs::path dir(o.out);
    std::vector<std::string> outputs;
    std::uint64_t failures = 0;
    for (std::uint64_t i = 0; i < o.count; ++i) {
        GeneratorSpec spec = base;
        spec.seed = instance_seed(o.seed, i);
        const std::string name = "instance_" + index_name(i, o.count) + (o.format == "json" ? ".json" : ".txt");
        try {
            auto square = generate(spec);
            write_file(dir / name, o.format == "json" ? instance_to_json({square, spec}) : to_text(square));
            outputs.push_back(name);
        }
        catch (const PlacementExhausted & e) {
            ++failures;
            err << "instance " << i << ": " << e.what() << "\n";
        }
    }
    json params = {{"order", o.order}, {"fill", o.fill}, {"count", o.count}, {"format", o.format}};
    write_file(dir / "manifest.json", manifest("gen", params, o.seed, outputs));
    out << "generated " << outputs.size() << " of " << o.count << " instances in " << dir.string() << "\n";
    if (failures == o.count)
        throw CommandError(exit_data, "every instance hit placement exhaustion");
    return exit_ok;
}

// ---------------------------------------------------------------- solve

struct SolveOptions
{
    std::string instance;
    std::string heuristic = "r-brelaz-r";
    std::uint64_t seed = 0;
    std::string cutoff = std::to_string(default_cutoff);
    std::string format = "csv";
};

auto cmd_solve(const SolveOptions & o, std::ostream & out) -> int
{
    auto config = heuristic(o.heuristic, o.cutoff);
    config.seed = o.seed;
    auto doc = load(o.instance, parse_instance);
    auto result = solve(doc.square, config);

    if (o.format == "json") {
        json j = {
            {"outcome", to_string(result.outcome)},
            {"backtracks", result.backtracks},
            {"nodes", result.nodes},
            {"heuristic", strategy_name(config)},
            {"seed", config.seed},
            {"cutoff", cutoff_json(config.cutoff)},
        };
        if (result.completion)
            j["completion"] = to_text(*result.completion);
        out << j.dump(2) << "\n";
    }
    else {
        out << "outcome " << to_string(result.outcome) << "\n"
            << "backtracks " << result.backtracks << "\n"
            << "nodes " << result.nodes << "\n";
        if (result.completion)
            out << to_text(*result.completion);
    }
    switch (result.outcome) {
    case Outcome::sat: return exit_ok;
    case Outcome::unsat: return exit_unsat;
    case Outcome::cutoff: return exit_cutoff;
    }
    return exit_ok;
}

// ---------------------------------------------------------------- profile

struct ProfileOptions
{
    std::string instance;
    int order = 0;
    double fill = 0.0;
    bool fresh = false;
    std::vector<std::string> heuristics;
    std::uint64_t runs = 1000;
    std::uint64_t seed = 0;
    std::string cutoff = std::to_string(default_cutoff);
    unsigned jobs = 1;
    std::string out;
    bool sat_only = false;
    bool cap = false;
    double censored_threshold = 0.0;
    std::string format = "csv";
};

auto cmd_profile(ProfileOptions o, std::ostream & out) -> int
{
    if (o.heuristics.empty())
        o.heuristics.assign(std::begin(all_strategies), std::end(all_strategies));
    if (o.runs == 0)
        throw CommandError(exit_usage, "--runs must be at least 1");
    if (o.instance.empty() == (o.order == 0))
        throw CommandError(exit_usage, "give exactly one of --instance or --order");

    json source_json;
    InstanceSource source = PartialLatinSquare(1);
    if (!o.instance.empty()) {
        source = load(o.instance, parse_instance).square;
        source_json = {{"instance", o.instance}};
    }
    else {
        GeneratorSpec spec{o.order, o.fill, 0};
        try {
            spec.check();
            if (o.fresh)
                source = spec;
            else {
                spec.seed = instance_seed(o.seed, 0);
                source = generate(spec);
            }
        }
        catch (const InvalidArgument & e) {
            throw CommandError(exit_usage, e.what());
        }
        catch (const PlacementExhausted & e) {
            throw CommandError(exit_data, e.what());
        }
        source_json = {{"order", o.order}, {"fill", o.fill}, {"fresh", o.fresh}};
    }

    const fs::path dir(o.out);
    std::vector<std::string> outputs;
    std::vector<EmpiricalDistribution> dists;
    const DistributionOptions dist_options{.sat_only = o.sat_only, .cap_at_cutoff = o.cap};

    out << std::left << std::setw(12) << "heuristic" << std::setw(10) << "runs" << std::setw(12) << "censored"
        << std::setw(10) << "median" << "mean\n";
    for (const auto & name : o.heuristics) {
        auto config = heuristic(name, o.cutoff);
        auto runs = collect(source, config, o.runs, o.seed, o.jobs);
        auto dist = to_distribution(runs, dist_options);
        write_file(dir / (name + ".runs.json"), runset_to_json(runs));
        write_file(dir / (name + ".dist.json"), distribution_to_json(dist));
        write_file(dir / (name + ".cdf.csv"), distribution_to_csv(dist));
        outputs.insert(outputs.end(), {name + ".runs.json", name + ".dist.json", name + ".cdf.csv"});

        auto s = summary(dist);
        out << std::setw(12) << name << std::setw(10) << dist.metadata["runs"] << std::setw(12)
            << format_double(dist.censored_mass()) << std::setw(10) << (s.median ? std::to_string(*s.median) : "-")
            << (s.mean ? format_double(*s.mean) : "-") << "\n";
        dists.push_back(std::move(dist));
    }

    std::string report = "a,b,dominates\n";
    const DominanceOptions dom{.censored_threshold = o.censored_threshold, .tolerance = 1e-12};
    for (std::size_t a = 0; a < dists.size(); ++a)
        for (std::size_t b = 0; b < dists.size(); ++b) {
            if (a == b)
                continue;
            std::string verdict;
            try {
                verdict = dominates(dists[a], dists[b], dom) ? "1" : "0";
            }
            catch (const CensoredData &) {
                verdict = "censored";
            }
            report += o.heuristics[a] + ',' + o.heuristics[b] + ',' + verdict + '\n';
        }
    write_file(dir / "dominance.csv", report);
    outputs.push_back("dominance.csv");

    json params = {
        {"source", source_json},
        {"heuristics", o.heuristics},
        {"runs", o.runs},
        {"cutoff", cutoff_json(cutoff_value(o.cutoff))},
        {"sat_only", o.sat_only},
        {"cap", o.cap},
        {"censored_threshold", o.censored_threshold},
    };
    write_file(dir / "manifest.json", manifest("profile", params, o.seed, outputs));
    out << "dominance report: " << (dir / "dominance.csv").string() << "\n";
    return exit_ok;
}

// ---------------------------------------------------------------- portfolio

struct PortfolioOptions
{
    std::vector<std::string> dists;
    std::string method = "survival";
    std::string out;
    std::string format = "csv";
};

auto method_of(const std::string & name) -> PmfMethod
{
    if (name == "survival")
        return PmfMethod::survival_product;
    if (name == "binomial")
        return PmfMethod::binomial_sum;
    throw CommandError(exit_usage, "--method must be survival or binomial");
}

auto cmd_portfolio(const PortfolioOptions & o, std::ostream & out) -> int
{
    PortfolioSpec spec;
    json components = json::array();
    for (const auto & item : o.dists) {
        auto colon = item.rfind(':');
        int processors = 1;
        std::string path = item;
        if (colon != std::string::npos) {
            path = item.substr(0, colon);
            const std::string count = item.substr(colon + 1);
            auto [end, ec] = std::from_chars(count.data(), count.data() + count.size(), processors);
            if (ec != std::errc() || end != count.data() + count.size() || processors < 1)
                throw CommandError(exit_usage, "--dist expects FILE:PROCESSORS with a positive count, got '" + item + "'");
        }
        auto dist = load_distribution(path);
        require_uncensored(dist, path);
        spec.components.push_back({std::move(dist), processors});
        components.push_back({{"file", path}, {"processors", processors}});
    }

    auto st = stats(portfolio_pmf(spec, method_of(o.method)));
    st.pmf.metadata["mean"] = format_double(st.mean);
    st.pmf.metadata["std"] = format_double(st.std);

    if (!o.out.empty()) {
        const fs::path dir(o.out);
        write_file(dir / "portfolio.dist.json", distribution_to_json(st.pmf));
        write_file(dir / "portfolio.cdf.csv", distribution_to_csv(st.pmf));
        json params = {{"components", components}, {"method", o.method}};
        write_file(dir / "manifest.json", manifest("portfolio", params, 0, {"portfolio.dist.json", "portfolio.cdf.csv"}));
    }
    if (o.format == "json") {
        out << json{{"components", components},
                       {"processors", spec.total_processors()},
                       {"mean", st.mean},
                       {"std", st.std},
                       {"support", st.pmf.support()},
                       {"pmf", st.pmf.pmf()}}
                   .dump(2)
            << "\n";
    }
    else {
        out << "processors " << spec.total_processors() << "\n"
            << "mean " << format_double(st.mean) << "\n"
            << "std " << format_double(st.std) << "\n"
            << distribution_to_csv(st.pmf);
    }
    return exit_ok;
}

// ---------------------------------------------------------------- frontier

struct FrontierOptions
{
    std::vector<std::string> dists;
    int processors = 0;
    std::string method = "survival";
    std::string out;
    std::string format = "csv";
};

auto cmd_frontier(const FrontierOptions & o, std::ostream & out) -> int
{
    if (o.processors < 1)
        throw CommandError(exit_usage, "--processors must be at least 1");
    std::vector<EmpiricalDistribution> dists;
    std::vector<std::string> names;
    for (const auto & path : o.dists) {
        auto dist = load_distribution(path);
        require_uncensored(dist, path);
        dists.push_back(std::move(dist));
        names.push_back(stem_name(path));
    }
    auto portfolios = enumerate_portfolios(dists, o.processors, method_of(o.method));
    const std::string csv = portfolios_to_csv(portfolios, names);

    if (!o.out.empty()) {
        const fs::path dir(o.out);
        write_file(dir / "frontier.csv", csv);
        json params = {{"dists", o.dists}, {"processors", o.processors}, {"method", o.method}};
        write_file(dir / "manifest.json", manifest("frontier", params, 0, {"frontier.csv"}));
    }
    if (o.format == "json") {
        const auto mask = frontier_mask(portfolios);
        json rows = json::array();
        for (std::size_t i = 0; i < portfolios.size(); ++i)
            rows.push_back({{"allocation", portfolios[i].allocation},
                {"mean", portfolios[i].stats.mean},
                {"std", portfolios[i].stats.std},
                {"on_frontier", static_cast<bool>(mask[i])}});
        out << json{{"names", names}, {"processors", o.processors}, {"portfolios", rows}}.dump(2) << "\n";
    }
    else
        out << csv;
    return exit_ok;
}

// ---------------------------------------------------------------- phase

struct PhaseOptions
{
    int order = 10;
    std::vector<double> fills;
    double fill_from = 0.1;
    double fill_to = 0.6;
    double fill_step = 0.05;
    std::uint64_t instances = 100;
    std::string heuristic = "r-brelaz-r";
    std::string cutoff = std::to_string(default_cutoff);
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    std::string out;
    std::string format = "csv";
};

/// from, from + step, ... up to `to`, each rounded to 1e-9 so that decimal
/// steps such as 0.05 land on their printed values.
auto fill_range(double from, double to, double step) -> std::vector<double>
{
    if (!(step > 0.0) || to < from)
        throw CommandError(exit_usage, "fill range must satisfy from <= to and step > 0");
    std::vector<double> fills;
    const auto points = static_cast<std::uint64_t>(std::floor((to - from) / step + 1e-9)) + 1;
    for (std::uint64_t k = 0; k < points; ++k)
        fills.push_back(std::round((from + static_cast<double>(k) * step) * 1e9) / 1e9);
    return fills;
}

auto cmd_phase(const PhaseOptions & o, std::ostream & out) -> int
{
    PhaseSweepSpec spec;
    spec.order = o.order;
    spec.fills = o.fills.empty() ? fill_range(o.fill_from, o.fill_to, o.fill_step) : o.fills;
    spec.instances_per_point = o.instances;
    spec.heuristic = heuristic(o.heuristic, o.cutoff);
    spec.master_seed = o.seed;
    try {
        for (double f : spec.fills)
            GeneratorSpec{o.order, f, 0}.check();
    }
    catch (const InvalidArgument & e) {
        throw CommandError(exit_usage, e.what());
    }
    if (o.instances == 0)
        throw CommandError(exit_usage, "--instances must be at least 1");

    auto rows = phase_sweep(spec, o.jobs);
    const std::string csv = phase_to_csv(rows);
    if (!o.out.empty()) {
        const fs::path dir(o.out);
        write_file(dir / "phase.csv", csv);
        json params = {
            {"order", o.order},
            {"fills", spec.fills},
            {"instances", o.instances},
            {"heuristic", o.heuristic},
            {"cutoff", cutoff_json(spec.heuristic.cutoff)},
        };
        write_file(dir / "manifest.json", manifest("phase", params, o.seed, {"phase.csv"}));
    }
    if (o.format == "json") {
        json j = json::array();
        for (const auto & r : rows)
            j.push_back({{"fill", r.fill},
                {"instances", r.instances},
                {"generation_failures", r.generation_failures},
                {"median_backtracks", r.median_backtracks ? json(*r.median_backtracks) : json(nullptr)},
                {"mean_backtracks", r.mean_backtracks ? json(*r.mean_backtracks) : json(nullptr)},
                {"fraction_sat", r.fraction_sat},
                {"fraction_unsat", r.fraction_unsat},
                {"fraction_cutoff", r.fraction_cutoff}});
        out << j.dump(2) << "\n";
    }
    else
        out << csv;
    return exit_ok;
}

} // namespace

auto run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err) -> int
{
    CLI::App app{"Quasigroup completion search profiles and algorithm portfolios", "qcp"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);

    const std::vector<std::string> data_formats{"csv", "json"};
    std::string cutoff_help = "maximum backtracks per run, or 'unbounded' (default " + std::to_string(default_cutoff) + ")";

    GenOptions gen;
    auto * gen_cmd = app.add_subcommand("gen", "generate random partial Latin squares");
    gen_cmd->add_option("--order", gen.order, "order N")->required()->check(CLI::Range(1, max_order));
    gen_cmd->add_option("--fill", gen.fill, "fraction of cells pre-assigned")->check(CLI::Range(0.0, 1.0));
    gen_cmd->add_option("--count", gen.count, "number of instances")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--seed", gen.seed, "master seed");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--format", gen.format, "instance file format")->check(CLI::IsMember({"text", "json"}));

    SolveOptions sol;
    auto * solve_cmd = app.add_subcommand("solve", "solve one instance");
    solve_cmd->add_option("instance", sol.instance, "instance file (text or JSON)")->required();
    solve_cmd->add_option("--heuristic", sol.heuristic, "brelaz-s, brelaz-r, r-brelaz-s or r-brelaz-r");
    solve_cmd->add_option("--seed", sol.seed, "run seed");
    solve_cmd->add_option("--cutoff", sol.cutoff, cutoff_help);
    solve_cmd->add_option("--format", sol.format, "report format")->check(CLI::IsMember(data_formats));

    ProfileOptions prof;
    auto * profile_cmd = app.add_subcommand("profile", "collect backtrack distributions for several heuristics");
    profile_cmd->add_option("--instance", prof.instance, "fixed instance file");
    profile_cmd->add_option("--order", prof.order, "generated instance order")->check(CLI::Range(1, max_order));
    profile_cmd->add_option("--fill", prof.fill, "generated instance fill fraction")->check(CLI::Range(0.0, 1.0));
    profile_cmd->add_flag("--fresh", prof.fresh, "generate a new instance for every run");
    profile_cmd->add_option("--heuristics", prof.heuristics, "heuristics to profile (default: all four)")->delimiter(',');
    profile_cmd->add_option("--runs", prof.runs, "runs per heuristic");
    profile_cmd->add_option("--seed", prof.seed, "master seed");
    profile_cmd->add_option("--cutoff", prof.cutoff, cutoff_help);
    profile_cmd->add_option("--jobs", prof.jobs, "worker threads")->check(CLI::PositiveNumber);
    profile_cmd->add_option("--out", prof.out, "output directory")->required();
    profile_cmd->add_flag("--sat-only", prof.sat_only, "keep only runs that found a completion");
    profile_cmd->add_flag("--cap", prof.cap, "record cutoff runs at the cutoff value (law of min(A, cutoff))");
    profile_cmd->add_option("--censored-threshold", prof.censored_threshold, "censored mass tolerated by the dominance report")
        ->check(CLI::Range(0.0, 1.0));
    profile_cmd->add_option("--format", prof.format, "unused; accepted for uniformity")->check(CLI::IsMember(data_formats));

    PortfolioOptions port;
    auto * portfolio_cmd = app.add_subcommand("portfolio", "law, mean and std of one portfolio");
    portfolio_cmd->add_option("--dist", port.dists, "distribution file with processor count, FILE:N")->required();
    portfolio_cmd->add_option("--method", port.method, "survival or binomial")->check(CLI::IsMember({"survival", "binomial"}));
    portfolio_cmd->add_option("--out", port.out, "output directory");
    portfolio_cmd->add_option("--format", port.format, "stdout format")->check(CLI::IsMember(data_formats));

    FrontierOptions front;
    auto * frontier_cmd = app.add_subcommand("frontier", "all allocations of N processors and their efficient set");
    frontier_cmd->add_option("--dist", front.dists, "distribution files")->required();
    frontier_cmd->add_option("--processors", front.processors, "total processors N")->required();
    frontier_cmd->add_option("--method", front.method, "survival or binomial")->check(CLI::IsMember({"survival", "binomial"}));
    frontier_cmd->add_option("--out", front.out, "output directory");
    frontier_cmd->add_option("--format", front.format, "stdout format")->check(CLI::IsMember(data_formats));

    PhaseOptions phase;
    auto * phase_cmd = app.add_subcommand("phase", "median cost and satisfiability across fill fractions");
    phase_cmd->add_option("--order", phase.order, "instance order")->check(CLI::Range(1, max_order));
    phase_cmd->add_option("--fills", phase.fills, "explicit fill fractions")->delimiter(',');
    phase_cmd->add_option("--fill-from", phase.fill_from, "first fill fraction");
    phase_cmd->add_option("--fill-to", phase.fill_to, "last fill fraction");
    phase_cmd->add_option("--fill-step", phase.fill_step, "fill fraction step");
    phase_cmd->add_option("--instances", phase.instances, "instances per fill fraction");
    phase_cmd->add_option("--heuristic", phase.heuristic, "heuristic");
    phase_cmd->add_option("--cutoff", phase.cutoff, cutoff_help);
    phase_cmd->add_option("--seed", phase.seed, "master seed");
    phase_cmd->add_option("--jobs", phase.jobs, "worker threads")->check(CLI::PositiveNumber);
    phase_cmd->add_option("--out", phase.out, "output directory");
    phase_cmd->add_option("--format", phase.format, "stdout format")->check(CLI::IsMember(data_formats));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError & e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (gen_cmd->parsed())
            return cmd_gen(gen, out, err);
        if (solve_cmd->parsed())
            return cmd_solve(sol, out);
        if (profile_cmd->parsed())
            return cmd_profile(prof, out);
        if (portfolio_cmd->parsed())
            return cmd_portfolio(port, out);
        if (frontier_cmd->parsed())
            return cmd_frontier(front, out);
        if (phase_cmd->parsed())
            return cmd_phase(phase, out);
    }
    catch (const CommandError & e) {
        err << "error: " << e.what() << "\n";
        return e.code;
    }
    catch (const std::exception & e) {
        err << "error: " << e.what() << "\n";
        return exit_data;
    }
    return exit_usage;
}

} // namespace qcp::cli
