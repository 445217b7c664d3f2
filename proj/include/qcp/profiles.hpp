#pragma once

#include "qcp/latin_square.hpp"
#include "qcp/solver.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qcp {

/// Where the instances of a batch come from: one fixed square, or a fresh
/// generated square per run (the generator seed is derived per run and the
/// spec's own seed field is ignored).
using InstanceSource = std::variant<PartialLatinSquare, GeneratorSpec>;

enum class RunOutcome
{
    sat,
    unsat,
    cutoff,
    generation_failure, ///< the generator hit placement exhaustion; no solve took place
};

auto to_string(RunOutcome outcome) -> std::string;
auto parse_run_outcome(const std::string & text) -> RunOutcome;

struct RunRecord
{
    std::uint64_t run_index = 0;
    std::uint64_t seed = 0;
    RunOutcome outcome = RunOutcome::sat;
    std::uint64_t backtracks = 0;

    friend auto operator==(const RunRecord &, const RunRecord &) -> bool = default;
};

/// Outcomes of one heuristic on one source, ordered by run_index.
struct RunSet
{
    InstanceSource source = PartialLatinSquare(1);
    /// The strategy and cutoff; the per-run seed lives in each record.
    HeuristicConfig heuristic;
    std::uint64_t master_seed = 0;
    std::vector<RunRecord> records;

    /// Throws InvalidArgument unless run indices are 0, 1, 2, ... in order.
    auto check() const -> void;

    friend auto operator==(const RunSet &, const RunSet &) -> bool = default;
};

/// Solver seed for run `index` of a batch.
auto run_seed(std::uint64_t master_seed, std::uint64_t index) -> std::uint64_t;
/// Generator seed for run `index` of a fresh-instance batch.
auto instance_seed(std::uint64_t master_seed, std::uint64_t index) -> std::uint64_t;

/// Solves `runs` seeded copies. Record i uses run_seed(master_seed, i) and,
/// for a generator source, a square generated with instance_seed(master_seed, i).
/// Up to `jobs` worker threads are used; the result does not depend on it.
auto collect(const InstanceSource & source, const HeuristicConfig & heuristic, std::uint64_t runs,
    std::uint64_t master_seed, unsigned jobs = 1) -> RunSet;

/// A discrete law over backtrack counts, possibly with mass beyond a cutoff.
class EmpiricalDistribution
{
public:
    EmpiricalDistribution() = default;
    /// Throws InvalidArgument unless support is strictly ascending, every
    /// probability is non-negative and the total mass is 1 within 1e-9.
    EmpiricalDistribution(std::vector<std::uint64_t> support, std::vector<double> pmf, double censored_mass = 0.0);

    static auto point_mass(std::uint64_t x) -> EmpiricalDistribution;
    /// Builds from (value, probability) pairs; zero-probability entries are dropped.
    static auto from_map(const std::map<std::uint64_t, double> & masses, double censored_mass = 0.0)
        -> EmpiricalDistribution;

    [[nodiscard]] auto support() const noexcept -> const std::vector<std::uint64_t> & { return support_; }
    [[nodiscard]] auto pmf() const noexcept -> const std::vector<double> & { return pmf_; }
    [[nodiscard]] auto censored_mass() const noexcept -> double { return censored_mass_; }
    [[nodiscard]] auto empty() const noexcept -> bool { return support_.empty(); }

    /// P[A = x].
    [[nodiscard]] auto probability(std::uint64_t x) const -> double;
    /// P[A <= x]. Censored mass is never included.
    [[nodiscard]] auto cdf(std::uint64_t x) const -> double;
    /// P[A > x], summed over the upper tail plus the censored mass.
    [[nodiscard]] auto survival(std::uint64_t x) const -> double;

    std::map<std::string, std::string> metadata;

    friend auto operator==(const EmpiricalDistribution &, const EmpiricalDistribution &) -> bool = default;

private:
    std::vector<std::uint64_t> support_;
    std::vector<double> pmf_;
    double censored_mass_ = 0.0;
};

struct DistributionOptions
{
    /// Keep only sat runs: the law of the cost conditioned on finding a completion.
    bool sat_only = false;
    /// Place cutoff runs at the cutoff value instead of in the censored tail,
    /// giving the exact law of min(A, cutoff).
    bool cap_at_cutoff = false;
};

/// pmf(x) = #(finished runs with x backtracks) / #runs and censored mass =
/// #cutoff runs / #runs, where generation failures are not runs.
/// Throws InvalidArgument when no run remains.
auto to_distribution(const RunSet & runs, const DistributionOptions & options = {}) -> EmpiricalDistribution;

/// The law of min(A, cap): mass above `cap`, censored mass included, moves to `cap`.
auto capped(const EmpiricalDistribution & dist, std::uint64_t cap) -> EmpiricalDistribution;

struct DominanceOptions
{
    /// Largest censored mass either side may carry.
    double censored_threshold = 0.0;
    /// cdf differences within this band count as equal.
    double tolerance = 1e-12;
};

/// True iff cdf_a >= cdf_b at every point of the union of the supports and
/// strictly greater at one of them (smaller cost is better).
/// Throws CensoredData if either censored mass exceeds the threshold.
auto dominates(const EmpiricalDistribution & a, const EmpiricalDistribution & b, const DominanceOptions & options = {})
    -> bool;

/// Throws CensoredData when the distribution has censored mass.
auto mean(const EmpiricalDistribution & dist) -> double;
/// Population standard deviation. Throws CensoredData as mean().
auto standard_deviation(const EmpiricalDistribution & dist) -> double;
/// Smallest support point x with cdf(x) >= q, or nullopt when the
/// uncensored mass never reaches q.
auto quantile(const EmpiricalDistribution & dist, double q) -> std::optional<std::uint64_t>;

struct Summary
{
    std::optional<double> mean;
    std::optional<double> std;
    std::optional<std::uint64_t> median;
    /// Probability level -> quantile, for the levels that are reachable.
    std::map<double, std::uint64_t> quantiles;
};

/// Mean and std are present only without censored mass; quantiles at
/// 0.1, 0.25, 0.5, 0.75 and 0.9 wherever reachable.
auto summary(const EmpiricalDistribution & dist) -> Summary;

struct PhaseRow
{
    double fill = 0.0;
    std::uint64_t instances = 0;
    std::uint64_t generation_failures = 0;
    /// Median and mean backtracks over solved-or-censored instances, with
    /// censored runs counted at the cutoff. Absent when every generation failed.
    std::optional<std::uint64_t> median_backtracks;
    std::optional<double> mean_backtracks;
    double fraction_sat = 0.0;
    double fraction_unsat = 0.0;
    double fraction_cutoff = 0.0;

    friend auto operator==(const PhaseRow &, const PhaseRow &) -> bool = default;
};

struct PhaseSweepSpec
{
    int order = 10;
    std::vector<double> fills;
    std::uint64_t instances_per_point = 100;
    /// Strategy and cutoff. The seed field is ignored.
    HeuristicConfig heuristic;
    std::uint64_t master_seed = 0;
};

/// Master seed of sweep point `point` (fed to collect()).
auto phase_point_seed(std::uint64_t master_seed, std::uint64_t point) -> std::uint64_t;

/// One fresh-instance batch per fill fraction; fractions are over the
/// instances that were generated.
auto phase_sweep(const PhaseSweepSpec & spec, unsigned jobs = 1) -> std::vector<PhaseRow>;

} // namespace qcp
