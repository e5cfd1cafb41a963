#include "rwre/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rwre {

namespace {

constexpr std::uint64_t kEnvTag = 0x656e76;    // substream namespaces
constexpr std::uint64_t kWalkTag = 0x776c6b;

inline std::int64_t checked_step(const Environment1D& env, std::int64_t x,
                                 RandomStream& rng) {
    const std::int64_t y = step_site(env, x, rng);
    if (y < env.lo() || y > env.hi()) throw WindowExit{y};
    return y;
}

std::int64_t diffusive_margin(std::uint64_t n) {
    return static_cast<std::int64_t>(
               std::ceil(6.0 * std::sqrt(static_cast<double>(n)))) +
           64;
}

}  // namespace

Trajectory simulate_quenched(const Environment1D& env, std::int64_t start,
                             std::uint64_t n_steps, std::uint64_t walk_seed) {
    if (!env.contains(start))
        throw std::invalid_argument("start site outside environment window");
    Trajectory traj;
    traj.start = start;
    traj.env_seed = env.seed();
    traj.walk_seed = walk_seed;
    traj.positions.reserve(n_steps + 1);
    traj.positions.push_back(start);
    RandomStream rng(walk_seed);
    std::int64_t x = start;
    for (std::uint64_t t = 0; t < n_steps; ++t) {
        x = checked_step(env, x, rng);
        traj.positions.push_back(x);
    }
    return traj;
}

std::int64_t final_position(const Environment1D& env, std::int64_t start,
                            std::uint64_t n_steps, RandomStream& rng) {
    std::int64_t x = start;
    for (std::uint64_t t = 0; t < n_steps; ++t) x = checked_step(env, x, rng);
    return x;
}

LocalTimeTable local_time(const Trajectory& traj) {
    LocalTimeTable table;
    table.horizon = traj.positions.empty() ? 0 : traj.positions.size() - 1;
    for (std::int64_t x : traj.positions) ++table.counts[x];
    return table;
}

PassageRecord first_passage(const Environment1D& env, std::int64_t start,
                            std::int64_t target, std::uint64_t max_steps,
                            std::uint64_t walk_seed) {
    if (!env.contains(start) || !env.contains(target))
        throw std::invalid_argument("start or target outside window");
    RandomStream rng(walk_seed);
    std::int64_t x = start;
    for (std::uint64_t t = 1; t <= max_steps; ++t) {
        x = checked_step(env, x, rng);
        if (x == target) return {target, t};
    }
    return {target, std::nullopt};
}

// ---- excursions -----------------------------------------------------------

ExcursionSample left_excursions(const Environment1D& env,
                                std::uint64_t n_excursions,
                                std::uint64_t walk_seed, std::uint64_t cap,
                                int threads) {
    if (!env.contains(1) || !env.contains(0))
        throw std::invalid_argument("window must contain sites 0 and 1");
    ExcursionSample out;
    out.cap = cap;
    // 0 marks a timeout until the reduction below.
    std::vector<std::uint64_t> durations(n_excursions, 0);
    for_each_task(n_excursions, threads, [&](std::uint64_t i) {
        RandomStream rng(seed_for(walk_seed, i));
        std::int64_t x = 0;  // forced first jump 1 -> 0
        for (std::uint64_t t = 1; t < cap; ++t) {
            x = checked_step(env, x, rng);
            if (x == 1) {
                durations[i] = t + 1;  // includes the forced first step
                return;
            }
        }
    });
    out.durations.reserve(n_excursions);
    for (std::uint64_t d : durations) {
        if (d == 0)
            ++out.n_timeouts;
        else
            out.durations.push_back(d);
    }
    return out;
}

double quenched_excursion_mean(const Environment1D& env, std::int64_t site) {
    if (!env.contains(site) || site <= env.lo())
        throw std::invalid_argument("site outside (or at the floor of) window");
    // Reflecting truncation: omega at the floor is 0, then
    // omega_x = 2 + rho_{x-1} omega_{x-1} upward. The dropped tail is
    // 2 * prod(rho over the window below `site`) * r/(1-r), r = sup rho.
    double omega = 0.0;
    double log_prod = 0.0;
    for (std::int64_t x = env.lo() + 1; x <= site; ++x) {
        const double rho = env.rho(x - 1);
        omega = 2.0 + rho * omega;
        log_prod += std::log(rho);
    }
    double bound = std::numeric_limits<double>::infinity();
    if (const EnvironmentLaw* law = env.law()) {
        const double r = law->rho_sup();
        if (r < 1.0) bound = 2.0 * std::exp(log_prod) * r / (1.0 - r);
    } else {
        // Synthetic environment: bound from the realized window values.
        double r = 0.0;
        for (std::int64_t x = env.lo(); x <= env.hi(); ++x)
            r = std::max(r, env.rho(x));
        if (r < 1.0) bound = 2.0 * std::exp(log_prod) * r / (1.0 - r);
    }
    if (!(bound < 1e-9)) throw NotConvergent{bound};
    return omega;
}

// ---- final-position ensembles ----------------------------------------------

namespace {

// Window for a horizon-n walk from 0 under `law`: the deterministic drift
// extent plus a diffusive margin on both sides.
std::pair<std::int64_t, std::int64_t> drift_window(const EnvironmentLaw& law,
                                                   std::uint64_t n) {
    const double v = solomon_velocity(law);
    const std::int64_t margin = diffusive_margin(n);
    const auto drift = static_cast<std::int64_t>(
        std::ceil(std::abs(v) * static_cast<double>(n)));
    std::int64_t lo = -margin, hi = margin;
    if (v > 0.0) hi += drift;
    if (v < 0.0) lo -= drift;
    const auto nn = static_cast<std::int64_t>(n);
    return {std::max(lo, -nn - 1), std::min(hi, nn + 1)};
}

}  // namespace

PositionEnsemble position_ensemble(const EnvironmentLaw& law, std::uint64_t n,
                                   std::uint64_t n_walks, std::uint64_t seed,
                                   bool annealed, int threads) {
    PositionEnsemble out;
    out.horizon = n;
    out.finals.assign(n_walks, 0);
    const auto [lo, hi] = drift_window(law, n);
    Environment1D shared = Environment1D::sample(
        law, lo, hi, seed_for(seed, kEnvTag, 0));
    for_each_task(n_walks, threads, [&](std::uint64_t w) {
        RandomStream rng(seed_for(seed, kWalkTag, w));
        if (annealed) {
            Environment1D env = Environment1D::sample(
                law, lo, hi, seed_for(seed, kEnvTag, w));
            out.finals[w] = final_position(env, 0, n, rng);
        } else {
            out.finals[w] = final_position(shared, 0, n, rng);
        }
    });
    return out;
}

std::int64_t sinai_window_halfwidth(const EnvironmentLaw& law,
                                    std::uint64_t n) {
    const double s = mean_sq_log_rho(law);
    const double ln = std::log(static_cast<double>(std::max<std::uint64_t>(n, 2)));
    return static_cast<std::int64_t>(std::ceil(8.0 * ln * ln / s)) + 64;
}

SinaiEnsemble sinai_rescaled_ensemble(const EnvironmentLaw& law,
                                      std::uint64_t n, std::uint64_t n_env,
                                      std::uint64_t n_walks_per_env,
                                      std::uint64_t seed, int threads) {
    if (classify_solomon(law).kind != Transience::recurrent)
        throw std::invalid_argument("sinai ensemble requires a recurrent law");
    const double sigma_sq = mean_sq_log_rho(law);
    if (!(sigma_sq > 0.0))
        throw std::invalid_argument(
            "sinai ensemble requires E ln^2 rho > 0 (non-degenerate law)");

    SinaiEnsemble out;
    out.horizon = n;
    out.sigma_sq = sigma_sq;
    out.n_env = n_env;
    out.n_walks_per_env = n_walks_per_env;
    const std::uint64_t total = n_env * n_walks_per_env;
    out.finals.assign(total, 0);
    out.rescaled.assign(total, 0.0);
    out.env_median_rescaled.assign(n_env, 0.0);

    const std::int64_t half = sinai_window_halfwidth(law, n);
    const double ln = std::log(static_cast<double>(n));
    const double scale = sigma_sq / (ln * ln);

    for_each_task(n_env, threads, [&](std::uint64_t e) {
        Environment1D env =
            Environment1D::sample(law, -half, half, seed_for(seed, kEnvTag, e));
        std::vector<double> env_samples(n_walks_per_env);
        for (std::uint64_t w = 0; w < n_walks_per_env; ++w) {
            RandomStream rng(seed_for(seed, kWalkTag, e, w));
            const std::int64_t xn = final_position(env, 0, n, rng);
            const double r = scale * static_cast<double>(xn);
            out.finals[e * n_walks_per_env + w] = xn;
            out.rescaled[e * n_walks_per_env + w] = r;
            env_samples[w] = r;
        }
        out.env_median_rescaled[e] = median_of(std::move(env_samples));
    });
    return out;
}

double localization_fraction(const Environment1D& env, std::uint64_t n,
                             std::uint64_t n_walks, std::uint64_t seed,
                             int threads) {
    const PotentialPath pot = random_potential(env);
    std::int64_t minimizer = env.lo();
    for (std::int64_t x = env.lo(); x <= env.hi(); ++x)
        if (pot.value(x) < pot.value(minimizer)) minimizer = x;
    const double ln =
        n >= 2 ? std::log(static_cast<double>(n)) : 0.0;
    const double radius = ln * ln / 4.0;

    std::vector<double> hits(n_walks, 0.0);
    for_each_task(n_walks, threads, [&](std::uint64_t w) {
        RandomStream rng(seed_for(seed, kWalkTag, w));
        const std::int64_t xn = final_position(env, 0, n, rng);
        hits[w] = std::abs(static_cast<double>(xn - minimizer)) <= radius
                      ? 1.0
                      : 0.0;
    });
    return mc_estimate(hits).mean;
}

// ---- passage-before-return ----------------------------------------------

HitBeforeReturn hit_before_return_mc(const Environment1D& env, std::int64_t k,
                                     std::uint64_t n_trials,
                                     std::uint64_t walk_seed, int threads) {
    if (k < 1) throw std::invalid_argument("target k must be >= 1");
    if (!env.contains(k))
        throw std::invalid_argument("target k outside environment window");
    // A walk at a negative site must re-cross 0 before it can reach k, so
    // the outcome is already a failure there; ending the trial at -1 is
    // exact and avoids arbitrarily long excursions in potential traps left
    // of the origin (which also makes the truncation count identically 0).
    std::vector<double> success(n_trials, 0.0);
    for_each_task(n_trials, threads, [&](std::uint64_t i) {
        RandomStream rng(seed_for(walk_seed, i));
        std::int64_t x = step_site(env, 0, rng);
        while (x > 0 && x != k) x = step_site(env, x, rng);
        success[i] = (x == k) ? 1.0 : 0.0;
    });
    HitBeforeReturn out;
    out.estimate = mc_estimate(success);
    out.n_truncated = 0;
    return out;
}

double passage_formula(const Environment1D& env, std::int64_t k) {
    if (k < 3) throw std::invalid_argument("passage formula needs k >= 3");
    if (!env.contains(k)) throw std::invalid_argument("k outside window");
    const PotentialPath pot = random_potential(env);
    double w = 1.0;
    for (std::int64_t j = 2; j <= k - 1; ++j) w += std::exp(pot.value(j));
    return env.p(0) / w;
}

double passage_exact(const Environment1D& env, std::int64_t k) {
    if (k < 1) throw std::invalid_argument("target k must be >= 1");
    if (!env.contains(k)) throw std::invalid_argument("k outside window");
    // p_0 * P_1(hit k before 0) with
    // P_1 = 1 / sum_{j=0}^{k-1} exp(V_j); log-sum-exp for deep potentials.
    const PotentialPath pot = random_potential(env);
    double vmax = 0.0;
    for (std::int64_t j = 0; j <= k - 1; ++j)
        vmax = std::max(vmax, pot.value(j));
    double s = 0.0;
    for (std::int64_t j = 0; j <= k - 1; ++j)
        s += std::exp(pot.value(j) - vmax);
    return env.p(0) * std::exp(-vmax) / s;
}

std::uint64_t max_local_time(const Environment1D& env, std::int64_t start,
                             std::uint64_t n, RandomStream& rng) {
    std::vector<std::uint64_t> counts(static_cast<size_t>(env.size()), 0);
    std::int64_t x = start;
    ++counts[static_cast<size_t>(x - env.lo())];
    for (std::uint64_t t = 0; t < n; ++t) {
        x = checked_step(env, x, rng);
        ++counts[static_cast<size_t>(x - env.lo())];
    }
    return *std::max_element(counts.begin(), counts.end());
}

}  // namespace rwre
