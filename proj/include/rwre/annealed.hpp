// Exact annealed path probabilities for finite-support laws, computed by
// enumerating atom assignments over the sites the path steps from. Used to
// exhibit the loss of the Markov property under the annealed law.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

struct EnumerationTooLarge : std::runtime_error {
    explicit EnumerationTooLarge(double terms)
        : std::runtime_error("annealed enumeration exceeds 1e7 terms"),
          terms(terms) {}
    double terms;
};

// P(X_0 = path[0], ..., X_m = path[m]) under the annealed law: the
// environment average of the quenched path probability. Exact; requires a
// deterministic or finite-support law and +-1 increments.
double annealed_path_probability(const EnvironmentLaw& law,
                                 const std::vector<std::int64_t>& path);

// Conditional probabilities of stepping to `next` given each prefix
// (both must end at the same site), as exact annealed ratios. The two
// values generally differ: the annealed chain remembers its past.
std::pair<double, double> annealed_markov_violation(
    const EnvironmentLaw& law, const std::vector<std::int64_t>& prefix_a,
    const std::vector<std::int64_t>& prefix_b, std::int64_t next);

}  // namespace rwre
