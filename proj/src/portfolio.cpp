#include "qcp/portfolio.hpp"

#include "qcp/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace qcp {

namespace {

constexpr int max_binomial_n = 64;

auto require_uncensored(const EmpiricalDistribution & dist) -> void
{
    if (dist.censored_mass() > 0.0)
        throw CensoredData("portfolio input has censored mass " + std::to_string(dist.censored_mass())
            + "; cap it at the cutoff or collect without censoring");
}

/// P[A > x] at each point of `grid`, computed as upper-tail sums.
auto survival_on(const EmpiricalDistribution & dist, const std::vector<std::uint64_t> & grid) -> std::vector<double>
{
    std::vector<double> out(grid.size());
    const auto & support = dist.support();
    const auto & pmf = dist.pmf();
    double tail = dist.censored_mass();
    std::size_t k = support.size();
    for (std::size_t g = grid.size(); g-- > 0;) {
        while (k > 0 && support[k - 1] > grid[g])
            tail += pmf[--k];
        out[g] = tail;
    }
    return out;
}

auto union_support(const PortfolioSpec & spec) -> std::vector<std::uint64_t>
{
    std::set<std::uint64_t> xs;
    for (const auto & c : spec.components)
        xs.insert(c.dist.support().begin(), c.dist.support().end());
    return {xs.begin(), xs.end()};
}

auto survival_product(const PortfolioSpec & spec, const std::vector<std::uint64_t> & grid) -> std::map<std::uint64_t, double>
{
    std::vector<double> joint(grid.size(), 1.0);
    for (const auto & c : spec.components) {
        auto s = survival_on(c.dist, grid);
        for (std::size_t g = 0; g < grid.size(); ++g)
            joint[g] *= std::pow(s[g], c.processors);
    }
    std::map<std::uint64_t, double> masses;
    double previous = 1.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        masses[grid[g]] = std::max(0.0, previous - joint[g]);
        previous = joint[g];
    }
    return masses;
}

auto binomial_sum(const PortfolioSpec & spec, const std::vector<std::uint64_t> & grid) -> std::map<std::uint64_t, double>
{
    const int total = spec.total_processors();
    std::vector<std::vector<double>> exact(spec.components.size()), above(spec.components.size());
    for (std::size_t j = 0; j < spec.components.size(); ++j) {
        const auto & c = spec.components[j];
        if (c.processors > max_binomial_n)
            throw InvalidArgument("binomial evaluation supports at most 64 processors per component");
        above[j] = survival_on(c.dist, grid);
        for (auto x : grid)
            exact[j].push_back(c.dist.probability(x));
    }

    std::map<std::uint64_t, double> masses;
    std::vector<double> by_count, next;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        // by_count[i]: probability that exactly i processors so far take x
        // backtracks and the rest take more.
        by_count.assign(1, 1.0);
        for (std::size_t j = 0; j < spec.components.size(); ++j) {
            const int n = spec.components[j].processors;
            const double p = exact[j][g], s = above[j][g];
            next.assign(by_count.size() + n, 0.0);
            for (int k = 0; k <= n; ++k) {
                const double term = static_cast<double>(binomial(n, k)) * std::pow(p, k) * std::pow(s, n - k);
                if (term == 0.0)
                    continue;
                for (std::size_t i = 0; i < by_count.size(); ++i)
                    next[i + k] += by_count[i] * term;
            }
            by_count.swap(next);
        }
        double mass = 0.0;
        for (int i = 1; i <= total; ++i)
            mass += by_count[i];
        masses[grid[g]] = mass;
    }
    return masses;
}

} // namespace

auto binomial(int n, int k) -> std::uint64_t
{
    if (n < 0 || n > max_binomial_n)
        throw InvalidArgument("binomial(n, k) supports 0 <= n <= 64");
    if (k < 0 || k > n)
        return 0;
    k = std::min(k, n - k);
    // C(n, i+1) = C(n, i) * (n - i) / (i + 1). Cancelling the gcd first
    // keeps every intermediate below C(n, i+1), so nothing overflows.
    std::uint64_t c = 1;
    for (int i = 0; i < k; ++i) {
        const std::uint64_t den = static_cast<std::uint64_t>(i) + 1;
        const std::uint64_t g = std::gcd(c, den);
        c = (c / g) * (static_cast<std::uint64_t>(n - i) / (den / g));
    }
    return c;
}

auto PortfolioSpec::total_processors() const -> int
{
    int n = 0;
    for (const auto & c : components)
        n += c.processors;
    return n;
}

auto PortfolioSpec::check() const -> void
{
    if (components.empty())
        throw InvalidArgument("portfolio has no components");
    for (const auto & c : components) {
        if (c.processors < 1)
            throw InvalidArgument("every portfolio component needs at least one processor");
        require_uncensored(c.dist);
        if (c.dist.empty())
            throw InvalidArgument("portfolio component has an empty distribution");
    }
}

auto portfolio_pmf_single(const EmpiricalDistribution & dist, int processors) -> EmpiricalDistribution
{
    if (processors < 1 || processors > max_binomial_n)
        throw InvalidArgument("processor count must be in [1, 64]");
    return portfolio_pmf(PortfolioSpec{{{dist, processors}}}, PmfMethod::binomial_sum);
}

auto portfolio_pmf(const PortfolioSpec & spec, PmfMethod method) -> EmpiricalDistribution
{
    spec.check();
    const auto grid = union_support(spec);
    auto masses = method == PmfMethod::survival_product ? survival_product(spec, grid) : binomial_sum(spec, grid);

    auto out = EmpiricalDistribution::from_map(masses);
    out.metadata["processors"] = std::to_string(spec.total_processors());
    out.metadata["method"] = method == PmfMethod::survival_product ? "survival_product" : "binomial_sum";
    return out;
}

auto stats(const EmpiricalDistribution & pmf) -> PortfolioStats
{
    return PortfolioStats{pmf, mean(pmf), standard_deviation(pmf)};
}

auto enumerate_portfolios(const std::vector<EmpiricalDistribution> & dists, int processors, PmfMethod method)
    -> std::vector<EvaluatedPortfolio>
{
    if (dists.empty())
        throw InvalidArgument("enumerate_portfolios needs at least one distribution");
    if (processors < 1)
        throw InvalidArgument("enumerate_portfolios needs at least one processor");
    for (const auto & d : dists)
        require_uncensored(d);

    const std::size_t m = dists.size();
    std::vector<EvaluatedPortfolio> out;
    std::vector<int> allocation(m, 0);

    std::function<void(std::size_t, int)> fill = [&](std::size_t j, int remaining) {
        if (j + 1 == m) {
            allocation[j] = remaining;
            PortfolioSpec spec;
            for (std::size_t k = 0; k < m; ++k)
                if (allocation[k] > 0)
                    spec.components.push_back({dists[k], allocation[k]});
            out.push_back({allocation, stats(portfolio_pmf(spec, method))});
            return;
        }
        for (int n = 0; n <= remaining; ++n) {
            allocation[j] = n;
            fill(j + 1, remaining - n);
        }
    };
    fill(0, processors);
    return out;
}

auto frontier_mask(const std::vector<EvaluatedPortfolio> & portfolios) -> std::vector<bool>
{
    std::vector<bool> mask(portfolios.size(), true);
    for (std::size_t p = 0; p < portfolios.size(); ++p) {
        const auto & a = portfolios[p].stats;
        for (const auto & other : portfolios) {
            const auto & b = other.stats;
            if (b.mean <= a.mean && b.std <= a.std && (b.mean < a.mean || b.std < a.std)) {
                mask[p] = false;
                break;
            }
        }
    }
    return mask;
}

auto efficient_frontier(const std::vector<EvaluatedPortfolio> & portfolios) -> std::vector<EvaluatedPortfolio>
{
    auto mask = frontier_mask(portfolios);
    std::vector<EvaluatedPortfolio> out;
    for (std::size_t i = 0; i < portfolios.size(); ++i)
        if (mask[i])
            out.push_back(portfolios[i]);
    return out;
}

auto portfolio_dominates(const EmpiricalDistribution & a, const EmpiricalDistribution & b,
    const DominanceOptions & options) -> bool
{
    return dominates(a, b, options);
}

} // namespace qcp
