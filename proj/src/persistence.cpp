#include "qcp/persistence.hpp"

#include "qcp/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qcp {

using nlohmann::json;

auto format_double(double value) -> std::string
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc())
        throw Error("cannot format double");
    return {buf, end};
}

namespace {

auto parse_json(const std::string & text) -> json
{
    try {
        return json::parse(text);
    }
    catch (const json::parse_error & e) {
        auto upto = std::min<std::size_t>(e.byte, text.size());
        auto line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
        throw ParseError(line, std::string("malformed JSON: ") + e.what());
    }
}

auto expect_schema(const json & doc, const char * schema) -> void
{
    if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != schema)
        throw ParseError(0, std::string("expected a document with schema \"") + schema + "\"");
}

/// Runs `body`, turning JSON type and key errors into ParseError.
template <typename F>
auto guarded(const char * what, F && body)
{
    try {
        return body();
    }
    catch (const json::exception & e) {
        throw ParseError(0, std::string("bad ") + what + " document: " + e.what());
    }
    catch (const InvalidArgument & e) {
        throw ParseError(0, std::string("bad ") + what + " document: " + e.what());
    }
}

auto square_to_json(const PartialLatinSquare & square) -> json
{
    json rows = json::array();
    for (int r = 0; r < square.order(); ++r) {
        json row = json::array();
        for (int c = 0; c < square.order(); ++c)
            row.push_back(square.filled(r, c) ? json(square.at(r, c)) : json(nullptr));
        rows.push_back(row);
    }
    return {{"order", square.order()}, {"cells", rows}};
}

auto square_from_json(const json & j) -> PartialLatinSquare
{
    const int n = j.at("order").get<int>();
    PartialLatinSquare square(n);
    const auto & rows = j.at("cells");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
        throw ParseError(0, "cells must hold " + std::to_string(n) + " rows");
    for (int r = 0; r < n; ++r) {
        const auto & row = rows[r];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
            throw ParseError(0, "row " + std::to_string(r) + " must hold " + std::to_string(n) + " cells");
        for (int c = 0; c < n; ++c)
            if (!row[c].is_null()) {
                int v = row[c].get<int>();
                if (v < 0 || v >= n)
                    throw ParseError(0, "value " + std::to_string(v) + " outside [0, " + std::to_string(n) + ")");
                square.set(r, c, v);
            }
    }
    if (auto violations = square.validate(); !violations.empty())
        throw ParseError(0, "not a partial Latin square: " + violations.front().describe());
    return square;
}

auto generator_to_json(const GeneratorSpec & g) -> json
{
    return {{"order", g.order}, {"fill_fraction", g.fill_fraction}, {"seed", g.seed}};
}

auto generator_from_json(const json & j) -> GeneratorSpec
{
    GeneratorSpec g{j.at("order").get<int>(), j.at("fill_fraction").get<double>(), j.value("seed", std::uint64_t{0})};
    g.check();
    return g;
}

} // namespace

auto instance_to_json(const InstanceDocument & doc) -> std::string
{
    json j = {{"schema", instance_schema}};
    j.update(square_to_json(doc.square));
    if (doc.generator)
        j["generator"] = generator_to_json(*doc.generator);
    return j.dump(2) + "\n";
}

auto instance_from_json(const std::string & text) -> InstanceDocument
{
    json j = parse_json(text);
    expect_schema(j, instance_schema);
    return guarded("instance", [&] {
        InstanceDocument doc{square_from_json(j), std::nullopt};
        if (j.contains("generator"))
            doc.generator = generator_from_json(j["generator"]);
        return doc;
    });
}

auto parse_instance(const std::string & text) -> InstanceDocument
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
        return instance_from_json(text);
    return InstanceDocument{parse_text(text), std::nullopt};
}

auto runset_to_json(const RunSet & runs) -> std::string
{
    json source;
    if (const auto * square = std::get_if<PartialLatinSquare>(&runs.source)) {
        source = {{"kind", "instance"}, {"instance", square_to_json(*square)}};
    }
    else {
        const auto & g = std::get<GeneratorSpec>(runs.source);
        source = {{"kind", "generator"}, {"order", g.order}, {"fill_fraction", g.fill_fraction}};
    }
    json records = json::array();
    for (const auto & r : runs.records)
        records.push_back(
            {{"run_index", r.run_index}, {"seed", r.seed}, {"outcome", to_string(r.outcome)}, {"backtracks", r.backtracks}});
    json j = {
        {"schema", runset_schema},
        {"source", source},
        {"heuristic", strategy_name(runs.heuristic)},
        {"cutoff", runs.heuristic.cutoff ? json(*runs.heuristic.cutoff) : json(nullptr)},
        {"master_seed", runs.master_seed},
        {"runs", runs.records.size()},
        {"records", records},
    };
    return j.dump(1) + "\n";
}

auto runset_from_json(const std::string & text) -> RunSet
{
    json j = parse_json(text);
    expect_schema(j, runset_schema);
    return guarded("run set", [&] {
        RunSet out;
        const auto & source = j.at("source");
        const auto kind = source.at("kind").get<std::string>();
        if (kind == "instance")
            out.source = square_from_json(source.at("instance"));
        else if (kind == "generator")
            out.source = GeneratorSpec{source.at("order").get<int>(), source.at("fill_fraction").get<double>(), 0};
        else
            throw ParseError(0, "unknown source kind '" + kind + "'");
        out.heuristic = parse_strategy(j.at("heuristic").get<std::string>());
        if (!j.at("cutoff").is_null())
            out.heuristic.cutoff = j["cutoff"].get<std::uint64_t>();
        out.master_seed = j.at("master_seed").get<std::uint64_t>();
        for (const auto & r : j.at("records"))
            out.records.push_back({r.at("run_index").get<std::uint64_t>(), r.at("seed").get<std::uint64_t>(),
                parse_run_outcome(r.at("outcome").get<std::string>()), r.at("backtracks").get<std::uint64_t>()});
        if (j.at("runs").get<std::size_t>() != out.records.size())
            throw ParseError(0, "run count does not match the number of records");
        out.check();
        return out;
    });
}

auto distribution_to_json(const EmpiricalDistribution & dist) -> std::string
{
    json j = {
        {"schema", distribution_schema},
        {"support", dist.support()},
        {"pmf", dist.pmf()},
        {"censored_mass", dist.censored_mass()},
        {"metadata", dist.metadata},
    };
    return j.dump(1) + "\n";
}

auto distribution_from_json(const std::string & text) -> EmpiricalDistribution
{
    json j = parse_json(text);
    expect_schema(j, distribution_schema);
    return guarded("distribution", [&] {
        EmpiricalDistribution d(j.at("support").get<std::vector<std::uint64_t>>(), j.at("pmf").get<std::vector<double>>(),
            j.at("censored_mass").get<double>());
        if (j.contains("metadata"))
            d.metadata = j["metadata"].get<std::map<std::string, std::string>>();
        return d;
    });
}

auto distribution_to_csv(const EmpiricalDistribution & dist) -> std::string
{
    std::string out = "x,pmf,cdf\n";
    double cdf = 0.0;
    for (std::size_t i = 0; i < dist.support().size(); ++i) {
        cdf += dist.pmf()[i];
        out += std::to_string(dist.support()[i]) + ',' + format_double(dist.pmf()[i]) + ',' + format_double(cdf) + '\n';
    }
    return out;
}

namespace {

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines; // source line of each row
};

auto split_csv_line(const std::string & line) -> std::vector<std::string>
{
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

auto read_csv(const std::string & text, const std::vector<std::string> & expected_prefix) -> CsvTable
{
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            table.header = fields;
            if (table.header.size() < expected_prefix.size()
                || !std::equal(expected_prefix.begin(), expected_prefix.end(), table.header.begin()))
                throw ParseError(line_no, "unexpected CSV header");
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(line_no, "expected " + std::to_string(table.header.size()) + " fields, found "
                + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    if (table.header.empty())
        throw ParseError(1, "missing CSV header");
    return table;
}

template <typename T>
auto parse_number(const std::string & field, std::size_t line) -> T
{
    T value{};
    auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size())
        throw ParseError(line, "bad number '" + field + "'");
    return value;
}

} // namespace

auto distribution_from_csv(const std::string & text) -> EmpiricalDistribution
{
    auto table = read_csv(text, {"x", "pmf", "cdf"});
    std::vector<std::uint64_t> support;
    std::vector<double> pmf;
    double last_cdf = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        support.push_back(parse_number<std::uint64_t>(table.rows[i][0], table.lines[i]));
        pmf.push_back(parse_number<double>(table.rows[i][1], table.lines[i]));
        last_cdf = parse_number<double>(table.rows[i][2], table.lines[i]);
    }
    try {
        return EmpiricalDistribution(std::move(support), std::move(pmf), std::max(0.0, 1.0 - last_cdf));
    }
    catch (const InvalidArgument & e) {
        throw ParseError(0, e.what());
    }
}

auto phase_to_csv(const std::vector<PhaseRow> & rows) -> std::string
{
    std::string out = "fill,instances,generation_failures,median_backtracks,mean_backtracks,fraction_sat,fraction_unsat,"
                      "fraction_cutoff\n";
    for (const auto & r : rows) {
        out += format_double(r.fill) + ',' + std::to_string(r.instances) + ',' + std::to_string(r.generation_failures) + ','
            + (r.median_backtracks ? std::to_string(*r.median_backtracks) : "") + ','
            + (r.mean_backtracks ? format_double(*r.mean_backtracks) : "") + ',' + format_double(r.fraction_sat) + ','
            + format_double(r.fraction_unsat) + ',' + format_double(r.fraction_cutoff) + '\n';
    }
    return out;
}

auto phase_from_csv(const std::string & text) -> std::vector<PhaseRow>
{
    auto table = read_csv(text, {"fill", "instances", "generation_failures", "median_backtracks", "mean_backtracks",
                                    "fraction_sat", "fraction_unsat", "fraction_cutoff"});
    std::vector<PhaseRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto & f = table.rows[i];
        const auto line = table.lines[i];
        PhaseRow r;
        r.fill = parse_number<double>(f[0], line);
        r.instances = parse_number<std::uint64_t>(f[1], line);
        r.generation_failures = parse_number<std::uint64_t>(f[2], line);
        if (!f[3].empty())
            r.median_backtracks = parse_number<std::uint64_t>(f[3], line);
        if (!f[4].empty())
            r.mean_backtracks = parse_number<double>(f[4], line);
        r.fraction_sat = parse_number<double>(f[5], line);
        r.fraction_unsat = parse_number<double>(f[6], line);
        r.fraction_cutoff = parse_number<double>(f[7], line);
        rows.push_back(r);
    }
    return rows;
}

auto portfolios_to_csv(const std::vector<EvaluatedPortfolio> & portfolios, const std::vector<std::string> & names)
    -> std::string
{
    std::string out;
    for (const auto & name : names)
        out += "n_" + name + ',';
    out += "mean,std,on_frontier\n";
    const auto mask = frontier_mask(portfolios);
    for (std::size_t p = 0; p < portfolios.size(); ++p) {
        if (portfolios[p].allocation.size() != names.size())
            throw InvalidArgument("allocation length differs from the number of names");
        for (int n : portfolios[p].allocation)
            out += std::to_string(n) + ',';
        out += format_double(portfolios[p].stats.mean) + ',' + format_double(portfolios[p].stats.std) + ','
            + (mask[p] ? "1" : "0") + '\n';
    }
    return out;
}

auto portfolios_from_csv(const std::string & text) -> std::vector<PortfolioRow>
{
    auto table = read_csv(text, {});
    const auto & h = table.header;
    if (h.size() < 4 || h[h.size() - 3] != "mean" || h[h.size() - 2] != "std" || h.back() != "on_frontier")
        throw ParseError(1, "unexpected CSV header");
    const std::size_t m = h.size() - 3;
    std::vector<PortfolioRow> rows;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto & f = table.rows[i];
        const auto line = table.lines[i];
        PortfolioRow r;
        for (std::size_t k = 0; k < m; ++k)
            r.allocation.push_back(parse_number<int>(f[k], line));
        r.mean = parse_number<double>(f[m], line);
        r.std = parse_number<double>(f[m + 1], line);
        if (f[m + 2] != "0" && f[m + 2] != "1")
            throw ParseError(line, "on_frontier must be 0 or 1");
        r.on_frontier = f[m + 2] == "1";
        rows.push_back(r);
    }
    return rows;
}

auto read_file(const std::filesystem::path & path) -> std::string
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

auto write_file(const std::filesystem::path & path, const std::string & contents) -> void
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot write " + path.string());
    out << contents;
    if (!out)
        throw Error("write failed for " + path.string());
}

} // namespace qcp
