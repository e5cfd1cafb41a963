#include "rwre/annealed.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace rwre {

namespace {

struct SiteUse {
    std::uint32_t rights = 0;  // steps x -> x+1 taken from this site
    std::uint32_t lefts = 0;   // steps x -> x-1
};

std::map<std::int64_t, SiteUse> step_counts(
    const std::vector<std::int64_t>& path) {
    if (path.empty()) throw std::invalid_argument("empty path");
    std::map<std::int64_t, SiteUse> uses;
    for (size_t t = 0; t + 1 < path.size(); ++t) {
        const std::int64_t d = path[t + 1] - path[t];
        if (d == 1)
            ++uses[path[t]].rights;
        else if (d == -1)
            ++uses[path[t]].lefts;
        else
            throw std::invalid_argument("path increments must be +-1");
    }
    return uses;
}

}  // namespace

double annealed_path_probability(const EnvironmentLaw& law,
                                 const std::vector<std::int64_t>& path) {
    if (!law.has_finite_support())
        throw std::invalid_argument(
            "annealed enumeration requires a finite-support law");
    const auto uses = step_counts(path);
    const auto atoms = law.sample_atoms();
    const size_t m = atoms.size();
    const size_t sites = uses.size();
    if (sites == 0) return 1.0;  // zero-step path

    const double n_terms = std::pow(static_cast<double>(m),
                                    static_cast<double>(sites));
    if (n_terms > 1e7) throw EnumerationTooLarge{n_terms};

    // Per-site table of weight * p^rights * q^lefts for each atom choice.
    std::vector<std::vector<double>> table;
    table.reserve(sites);
    for (const auto& [site, use] : uses) {
        std::vector<double> row(m);
        for (size_t a = 0; a < m; ++a) {
            row[a] = atoms[a].weight *
                     std::pow(atoms[a].p, double(use.rights)) *
                     std::pow(1.0 - atoms[a].p, double(use.lefts));
        }
        table.push_back(std::move(row));
    }

    // Odometer over atom assignments; term = product over sites.
    std::vector<size_t> idx(sites, 0);
    double total = 0.0;
    while (true) {
        double term = 1.0;
        for (size_t s = 0; s < sites; ++s) term *= table[s][idx[s]];
        total += term;
        size_t s = 0;
        while (s < sites && ++idx[s] == m) idx[s++] = 0;
        if (s == sites) break;
    }
    return total;
}

std::pair<double, double> annealed_markov_violation(
    const EnvironmentLaw& law, const std::vector<std::int64_t>& prefix_a,
    const std::vector<std::int64_t>& prefix_b, std::int64_t next) {
    if (prefix_a.empty() || prefix_b.empty())
        throw std::invalid_argument("empty prefix");
    if (prefix_a.back() != prefix_b.back())
        throw std::invalid_argument("prefixes must end at the same site");
    const auto conditional = [&](const std::vector<std::int64_t>& prefix) {
        const double denom = annealed_path_probability(law, prefix);
        if (!(denom > 0.0))
            throw std::invalid_argument("zero-probability prefix");
        std::vector<std::int64_t> extended = prefix;
        extended.push_back(next);
        return annealed_path_probability(law, extended) / denom;
    };
    return {conditional(prefix_a), conditional(prefix_b)};
}

}  // namespace rwre
