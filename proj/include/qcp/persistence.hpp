#pragma once

#include "qcp/latin_square.hpp"
#include "qcp/portfolio.hpp"
#include "qcp/profiles.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace qcp {

/// Every structured document carries a "schema" field with one of these.
inline constexpr const char * instance_schema = "qcp.instance/1";
inline constexpr const char * runset_schema = "qcp.runset/1";
inline constexpr const char * distribution_schema = "qcp.distribution/1";

/// Shortest decimal text that reads back to the same double.
auto format_double(double value) -> std::string;

struct InstanceDocument
{
    PartialLatinSquare square;
    std::optional<GeneratorSpec> generator;

    friend auto operator==(const InstanceDocument &, const InstanceDocument &) -> bool = default;
};

auto instance_to_json(const InstanceDocument & doc) -> std::string;
/// Throws ParseError on a malformed document or an invalid grid.
auto instance_from_json(const std::string & text) -> InstanceDocument;
/// Accepts either the text form or the structured form.
auto parse_instance(const std::string & text) -> InstanceDocument;

auto runset_to_json(const RunSet & runs) -> std::string;
auto runset_from_json(const std::string & text) -> RunSet;

auto distribution_to_json(const EmpiricalDistribution & dist) -> std::string;
auto distribution_from_json(const std::string & text) -> EmpiricalDistribution;

/// Header "x,pmf,cdf", one row per support point.
auto distribution_to_csv(const EmpiricalDistribution & dist) -> std::string;
/// Inverse of distribution_to_csv; mass missing from the final cdf becomes censored mass.
auto distribution_from_csv(const std::string & text) -> EmpiricalDistribution;

/// Header "fill,instances,generation_failures,median_backtracks,mean_backtracks,
/// fraction_sat,fraction_unsat,fraction_cutoff". Absent values are empty fields.
auto phase_to_csv(const std::vector<PhaseRow> & rows) -> std::string;
auto phase_from_csv(const std::string & text) -> std::vector<PhaseRow>;

/// One row per portfolio: one processor-count column per name, then
/// mean, std and on_frontier (0/1).
auto portfolios_to_csv(const std::vector<EvaluatedPortfolio> & portfolios, const std::vector<std::string> & names)
    -> std::string;

struct PortfolioRow
{
    std::vector<int> allocation;
    double mean = 0.0;
    double std = 0.0;
    bool on_frontier = false;
};

auto portfolios_from_csv(const std::string & text) -> std::vector<PortfolioRow>;

auto read_file(const std::filesystem::path & path) -> std::string;
/// Writes bytes exactly as given, creating parent directories.
auto write_file(const std::filesystem::path & path, const std::string & contents) -> void;

} // namespace qcp
