#pragma once

#include "qcp/profiles.hpp"

#include <cstdint>
#include <vector>

namespace qcp {

/// `processors` independent copies of an algorithm whose cost law is `dist`.
struct PortfolioComponent
{
    EmpiricalDistribution dist;
    int processors = 1;
};

/// A portfolio's cost is the minimum cost over all of its processors.
struct PortfolioSpec
{
    std::vector<PortfolioComponent> components;

    [[nodiscard]] auto total_processors() const -> int;
    /// Throws InvalidArgument for an empty spec or a non-positive processor
    /// count, CensoredData for a component with censored mass.
    auto check() const -> void;
};

/// How the law of the minimum is evaluated.
enum class PmfMethod
{
    /// P[X > x] = prod_i P[A_i > x]^{n_i}, differenced over ascending x.
    survival_product,
    /// Sum over the number of processors hitting x exactly: for each
    /// component C(n_i, k_i) P[A_i = x]^{k_i} P[A_i > x]^{n_i - k_i},
    /// multiplied across components and summed over sum(k_i) >= 1.
    binomial_sum,
};

/// Law of the minimum of `processors` independent copies of `dist`, as
/// sum_{i=1..N} C(N, i) P[A = x]^i P[A > x]^{N-i}.
/// Throws CensoredData for censored input, InvalidArgument unless 1 <= N <= 64.
auto portfolio_pmf_single(const EmpiricalDistribution & dist, int processors) -> EmpiricalDistribution;

/// Law of the portfolio cost, supported on the union of component supports.
/// Zero-probability points are dropped. The binomial method is limited to
/// 64 processors per component.
auto portfolio_pmf(const PortfolioSpec & spec, PmfMethod method = PmfMethod::survival_product) -> EmpiricalDistribution;

struct PortfolioStats
{
    EmpiricalDistribution pmf;
    double mean = 0.0;
    /// Population standard deviation; the portfolio's risk.
    double std = 0.0;
};

/// Throws CensoredData if `pmf` carries censored mass.
auto stats(const EmpiricalDistribution & pmf) -> PortfolioStats;

/// Exact C(n, k) for n <= 64. Throws InvalidArgument beyond that.
auto binomial(int n, int k) -> std::uint64_t;

struct EvaluatedPortfolio
{
    /// Processors per input distribution; zero entries are allowed.
    std::vector<int> allocation;
    PortfolioStats stats;
};

/// Every allocation of `processors` over the M distributions,
/// C(N + M - 1, M - 1) of them, in lexicographic order of the allocation vector.
auto enumerate_portfolios(const std::vector<EmpiricalDistribution> & dists, int processors,
    PmfMethod method = PmfMethod::survival_product) -> std::vector<EvaluatedPortfolio>;

/// Marks the portfolios that no other portfolio beats in (mean, std) with
/// at least one strict improvement. Identical points share a verdict.
auto frontier_mask(const std::vector<EvaluatedPortfolio> & portfolios) -> std::vector<bool>;

/// The portfolios selected by frontier_mask(), in input order.
auto efficient_frontier(const std::vector<EvaluatedPortfolio> & portfolios) -> std::vector<EvaluatedPortfolio>;

/// Stochastic dominance between portfolio laws; see dominates().
auto portfolio_dominates(const EmpiricalDistribution & a, const EmpiricalDistribution & b,
    const DominanceOptions & options = {}) -> bool;

} // namespace qcp
