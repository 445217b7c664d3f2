#include "qcp/profiles.hpp"

#include "qcp/error.hpp"
#include "qcp/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace qcp {

auto to_string(RunOutcome outcome) -> std::string
{
    switch (outcome) {
    case RunOutcome::sat: return "sat";
    case RunOutcome::unsat: return "unsat";
    case RunOutcome::cutoff: return "cutoff";
    case RunOutcome::generation_failure: return "generation_failure";
    }
    return "?";
}

auto parse_run_outcome(const std::string & text) -> RunOutcome
{
    for (auto o : {RunOutcome::sat, RunOutcome::unsat, RunOutcome::cutoff, RunOutcome::generation_failure})
        if (to_string(o) == text)
            return o;
    throw InvalidArgument("unknown run outcome '" + text + "'");
}

auto RunSet::check() const -> void
{
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].run_index != i)
            throw InvalidArgument("run indices must be contiguous from 0; record " + std::to_string(i) + " has index "
                + std::to_string(records[i].run_index));
}

auto run_seed(std::uint64_t master_seed, std::uint64_t index) -> std::uint64_t
{
    return derive_seed(master_seed, index, 0);
}

auto instance_seed(std::uint64_t master_seed, std::uint64_t index) -> std::uint64_t
{
    return derive_seed(master_seed, index, 1);
}

namespace {

auto run_one(const InstanceSource & source, HeuristicConfig config, std::uint64_t master_seed, std::uint64_t index)
    -> RunRecord
{
    RunRecord record;
    record.run_index = index;
    record.seed = run_seed(master_seed, index);
    config.seed = record.seed;

    SolveResult result;
    if (const auto * fixed = std::get_if<PartialLatinSquare>(&source)) {
        result = solve(*fixed, config);
    }
    else {
        GeneratorSpec spec = std::get<GeneratorSpec>(source);
        spec.seed = instance_seed(master_seed, index);
        try {
            result = solve(generate(spec), config);
        }
        catch (const PlacementExhausted &) {
            record.outcome = RunOutcome::generation_failure;
            return record;
        }
    }
    record.backtracks = result.backtracks;
    switch (result.outcome) {
    case Outcome::sat: record.outcome = RunOutcome::sat; break;
    case Outcome::unsat: record.outcome = RunOutcome::unsat; break;
    case Outcome::cutoff: record.outcome = RunOutcome::cutoff; break;
    }
    return record;
}

} // namespace

auto collect(const InstanceSource & source, const HeuristicConfig & heuristic, std::uint64_t runs,
    std::uint64_t master_seed, unsigned jobs) -> RunSet
{
    if (runs == 0)
        throw InvalidArgument("collect needs at least one run");
    if (const auto * spec = std::get_if<GeneratorSpec>(&source))
        spec->check();
    else if (!std::get<PartialLatinSquare>(source).is_valid())
        throw InvalidArgument("source instance is not a partial Latin square");

    RunSet out;
    out.source = source;
    out.heuristic = heuristic;
    out.heuristic.seed = 0;
    out.master_seed = master_seed;
    out.records.resize(runs);

    // Each record is written to its own slot, so completion order is irrelevant.
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::uint64_t i; (i = next.fetch_add(1)) < runs;) {
            try {
                out.records[i] = run_one(source, heuristic, master_seed, i);
            }
            catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
                next = runs;
            }
        }
    };

    const auto workers = static_cast<unsigned>(std::clamp<std::uint64_t>(jobs, 1, runs));
    if (workers == 1)
        worker();
    else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);
    return out;
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<std::uint64_t> support, std::vector<double> pmf,
    double censored_mass)
    : support_(std::move(support)), pmf_(std::move(pmf)), censored_mass_(censored_mass)
{
    if (support_.size() != pmf_.size())
        throw InvalidArgument("support and pmf differ in length");
    for (std::size_t i = 1; i < support_.size(); ++i)
        if (support_[i] <= support_[i - 1])
            throw InvalidArgument("support must be strictly ascending");
    if (!(censored_mass_ >= 0.0 && censored_mass_ <= 1.0 + 1e-9))
        throw InvalidArgument("censored mass outside [0, 1]");
    double total = censored_mass_;
    for (double p : pmf_) {
        if (!(p >= 0.0))
            throw InvalidArgument("negative or NaN probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InvalidArgument("total mass " + std::to_string(total) + " differs from 1");
}

auto EmpiricalDistribution::point_mass(std::uint64_t x) -> EmpiricalDistribution
{
    return EmpiricalDistribution({x}, {1.0});
}

auto EmpiricalDistribution::from_map(const std::map<std::uint64_t, double> & masses, double censored_mass)
    -> EmpiricalDistribution
{
    std::vector<std::uint64_t> support;
    std::vector<double> pmf;
    for (auto [x, p] : masses)
        if (p != 0.0) {
            support.push_back(x);
            pmf.push_back(p);
        }
    return EmpiricalDistribution(std::move(support), std::move(pmf), censored_mass);
}

auto EmpiricalDistribution::probability(std::uint64_t x) const -> double
{
    auto it = std::lower_bound(support_.begin(), support_.end(), x);
    return it != support_.end() && *it == x ? pmf_[it - support_.begin()] : 0.0;
}

auto EmpiricalDistribution::cdf(std::uint64_t x) const -> double
{
    auto end = std::upper_bound(support_.begin(), support_.end(), x) - support_.begin();
    return std::accumulate(pmf_.begin(), pmf_.begin() + end, 0.0);
}

auto EmpiricalDistribution::survival(std::uint64_t x) const -> double
{
    auto begin = std::upper_bound(support_.begin(), support_.end(), x) - support_.begin();
    return std::accumulate(pmf_.begin() + begin, pmf_.end(), 0.0) + censored_mass_;
}

auto to_distribution(const RunSet & runs, const DistributionOptions & options) -> EmpiricalDistribution
{
    std::map<std::uint64_t, std::uint64_t> counts;
    std::uint64_t total = 0, censored = 0;
    for (const auto & r : runs.records) {
        switch (r.outcome) {
        case RunOutcome::generation_failure: continue;
        case RunOutcome::unsat:
            if (options.sat_only)
                continue;
            [[fallthrough]];
        case RunOutcome::sat: ++counts[r.backtracks]; break;
        case RunOutcome::cutoff:
            if (options.cap_at_cutoff)
                ++counts[r.backtracks];
            else
                ++censored;
            break;
        }
        ++total;
    }
    if (total == 0)
        throw InvalidArgument("run set has no usable runs");

    std::vector<std::uint64_t> support;
    std::vector<double> pmf;
    for (auto [x, c] : counts) {
        support.push_back(x);
        pmf.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    EmpiricalDistribution dist(std::move(support), std::move(pmf), static_cast<double>(censored) / static_cast<double>(total));
    dist.metadata["strategy"] = strategy_name(runs.heuristic);
    dist.metadata["runs"] = std::to_string(total);
    dist.metadata["master_seed"] = std::to_string(runs.master_seed);
    dist.metadata["cutoff"] = runs.heuristic.cutoff ? std::to_string(*runs.heuristic.cutoff) : "unbounded";
    if (options.sat_only)
        dist.metadata["sat_only"] = "true";
    if (options.cap_at_cutoff)
        dist.metadata["capped_at_cutoff"] = "true";
    return dist;
}

auto capped(const EmpiricalDistribution & dist, std::uint64_t cap) -> EmpiricalDistribution
{
    std::map<std::uint64_t, double> masses;
    double above = dist.censored_mass();
    for (std::size_t i = 0; i < dist.support().size(); ++i) {
        if (dist.support()[i] < cap)
            masses[dist.support()[i]] = dist.pmf()[i];
        else
            above += dist.pmf()[i];
    }
    if (above > 0.0)
        masses[cap] = above;
    auto out = EmpiricalDistribution::from_map(masses);
    out.metadata = dist.metadata;
    out.metadata["capped_at"] = std::to_string(cap);
    return out;
}

auto dominates(const EmpiricalDistribution & a, const EmpiricalDistribution & b, const DominanceOptions & options)
    -> bool
{
    for (const auto * d : {&a, &b})
        if (d->censored_mass() > options.censored_threshold)
            throw CensoredData("censored mass " + std::to_string(d->censored_mass()) + " exceeds the dominance threshold "
                + std::to_string(options.censored_threshold));

    // Merge the supports, accumulating both cdfs in step.
    std::size_t i = 0, j = 0;
    double cdf_a = 0.0, cdf_b = 0.0;
    bool strict = false;
    const auto & sa = a.support();
    const auto & sb = b.support();
    while (i < sa.size() || j < sb.size()) {
        std::uint64_t x = std::min(i < sa.size() ? sa[i] : UINT64_MAX, j < sb.size() ? sb[j] : UINT64_MAX);
        if (i < sa.size() && sa[i] == x)
            cdf_a += a.pmf()[i++];
        if (j < sb.size() && sb[j] == x)
            cdf_b += b.pmf()[j++];
        if (cdf_a < cdf_b - options.tolerance)
            return false;
        if (cdf_a > cdf_b + options.tolerance)
            strict = true;
    }
    return strict;
}

auto mean(const EmpiricalDistribution & dist) -> double
{
    if (dist.censored_mass() > 0.0)
        throw CensoredData("mean is undefined with censored mass " + std::to_string(dist.censored_mass()));
    double m = 0.0;
    for (std::size_t i = 0; i < dist.support().size(); ++i)
        m += static_cast<double>(dist.support()[i]) * dist.pmf()[i];
    return m;
}

auto standard_deviation(const EmpiricalDistribution & dist) -> double
{
    const double m = mean(dist);
    double var = 0.0;
    for (std::size_t i = 0; i < dist.support().size(); ++i) {
        double d = static_cast<double>(dist.support()[i]) - m;
        var += d * d * dist.pmf()[i];
    }
    return std::sqrt(var);
}

auto quantile(const EmpiricalDistribution & dist, double q) -> std::optional<std::uint64_t>
{
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.support().size(); ++i) {
        acc += dist.pmf()[i];
        if (acc >= q - 1e-12)
            return dist.support()[i];
    }
    return std::nullopt;
}

auto summary(const EmpiricalDistribution & dist) -> Summary
{
    Summary s;
    if (dist.censored_mass() == 0.0 && !dist.empty()) {
        s.mean = mean(dist);
        s.std = standard_deviation(dist);
    }
    for (double q : {0.1, 0.25, 0.5, 0.75, 0.9})
        if (auto v = quantile(dist, q))
            s.quantiles[q] = *v;
    if (auto it = s.quantiles.find(0.5); it != s.quantiles.end())
        s.median = it->second;
    return s;
}

auto phase_point_seed(std::uint64_t master_seed, std::uint64_t point) -> std::uint64_t
{
    return derive_seed(master_seed, point, 2);
}

auto phase_sweep(const PhaseSweepSpec & spec, unsigned jobs) -> std::vector<PhaseRow>
{
    if (spec.instances_per_point == 0)
        throw InvalidArgument("phase sweep needs at least one instance per point");
    if (spec.fills.empty())
        throw InvalidArgument("phase sweep needs at least one fill fraction");

    std::vector<PhaseRow> rows;
    for (std::size_t p = 0; p < spec.fills.size(); ++p) {
        GeneratorSpec gen{spec.order, spec.fills[p], 0};
        RunSet runs = collect(gen, spec.heuristic, spec.instances_per_point, phase_point_seed(spec.master_seed, p), jobs);

        PhaseRow row;
        row.fill = spec.fills[p];
        row.instances = spec.instances_per_point;
        std::uint64_t sat = 0, unsat = 0, cut = 0;
        for (const auto & r : runs.records)
            switch (r.outcome) {
            case RunOutcome::sat: ++sat; break;
            case RunOutcome::unsat: ++unsat; break;
            case RunOutcome::cutoff: ++cut; break;
            case RunOutcome::generation_failure: ++row.generation_failures; break;
            }
        const std::uint64_t solved = sat + unsat + cut;
        if (solved > 0) {
            auto dist = to_distribution(runs, {.sat_only = false, .cap_at_cutoff = true});
            row.median_backtracks = quantile(dist, 0.5);
            row.mean_backtracks = mean(dist);
            row.fraction_sat = static_cast<double>(sat) / static_cast<double>(solved);
            row.fraction_unsat = static_cast<double>(unsat) / static_cast<double>(solved);
            row.fraction_cutoff = static_cast<double>(cut) / static_cast<double>(solved);
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace qcp
