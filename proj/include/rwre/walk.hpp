// Quenched walk simulation on a realized environment: trajectories, local
// times, first passages, left excursions (Monte Carlo and exact quenched
// means), localization diagnostics, and the sub-diffusive rescaling
// ensembles for recurrent laws.
//
// Seeding contract: ensemble task (e, w) draws from
// seed_for(master, tag, e, w); see rng.hpp. A walk never leaves its
// environment window silently -- stepping outside raises WindowExit.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/rng.hpp"

namespace rwre {

struct WindowExit : std::runtime_error {
    explicit WindowExit(std::int64_t site)
        : std::runtime_error("walk stepped outside the environment window"),
          site(site) {}
    std::int64_t site;
};

struct NotConvergent : std::runtime_error {
    explicit NotConvergent(double bound)
        : std::runtime_error(
              "window too shallow: truncation error bound above 1e-9"),
          bound(bound) {}
    double bound;
};

// ---- trajectories -----------------------------------------------------

struct Trajectory {
    std::int64_t start = 0;
    std::vector<std::int64_t> positions;  // length n+1, index = time
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;
};

struct LocalTimeTable {
    std::uint64_t horizon = 0;                  // n
    std::map<std::int64_t, std::uint64_t> counts;  // site -> visits in [0,n]
};

struct PassageRecord {
    std::int64_t target = 0;
    std::optional<std::uint64_t> time;  // first t >= 1 with X_t = target
};

// One +-1 step from x using the environment's p_x.
inline std::int64_t step_site(const Environment1D& env, std::int64_t x,
                              RandomStream& rng) {
    return x + (rng.next_unit() < env.p(x) ? 1 : -1);
}

Trajectory simulate_quenched(const Environment1D& env, std::int64_t start,
                             std::uint64_t n_steps, std::uint64_t walk_seed);

// Final position only; identical stepping to simulate_quenched.
std::int64_t final_position(const Environment1D& env, std::int64_t start,
                            std::uint64_t n_steps, RandomStream& rng);

LocalTimeTable local_time(const Trajectory& traj);

PassageRecord first_passage(const Environment1D& env, std::int64_t start,
                            std::int64_t target, std::uint64_t max_steps,
                            std::uint64_t walk_seed);

// ---- excursions --------------------------------------------------------

struct ExcursionSample {
    std::vector<std::uint64_t> durations;  // completed excursions, all even
    std::uint64_t n_timeouts = 0;          // excursions that hit the cap
    std::uint64_t cap = 0;
};

inline constexpr std::uint64_t kDefaultExcursionCap = 100'000'000;

// Left excursions from site 1: first step forced to 0, duration = time of
// the return to 1. Excursion i uses substream seed_for(walk_seed, i).
ExcursionSample left_excursions(const Environment1D& env,
                                std::uint64_t n_excursions,
                                std::uint64_t walk_seed,
                                std::uint64_t cap = kDefaultExcursionCap,
                                int threads = 0);

// Exact quenched mean left-excursion duration omega_s, solved from
// omega_s = 2 + rho_{s-1} omega_{s-1} with a reflecting wall at the window
// floor. Throws NotConvergent unless the truncation error bound is < 1e-9
// (requires sup rho < 1 under the environment's law).
double quenched_excursion_mean(const Environment1D& env, std::int64_t site);

// ---- final-position ensembles -------------------------------------------

struct PositionEnsemble {
    std::vector<std::int64_t> finals;  // X_n per walk, task order
    std::uint64_t horizon = 0;
};

// n_walks independent walks from 0 at horizon n. Annealed mode samples a
// fresh environment per walk (env substream e = walk index); quenched mode
// reuses environment substream 0. Windows are sized from the law: drift
// extent |v| n plus a 6 sqrt(n) + 64 diffusive margin.
PositionEnsemble position_ensemble(const EnvironmentLaw& law, std::uint64_t n,
                                   std::uint64_t n_walks, std::uint64_t seed,
                                   bool annealed = true, int threads = 0);

std::int64_t sinai_window_halfwidth(const EnvironmentLaw& law,
                                    std::uint64_t n);

struct SinaiEnsemble {
    std::uint64_t horizon = 0;
    double sigma_sq = 0.0;               // E ln^2 rho
    std::uint64_t n_env = 0, n_walks_per_env = 0;
    std::vector<std::int64_t> finals;    // env-major, n_env * n_walks
    std::vector<double> rescaled;        // sigma_sq * X_n / ln^2 n
    std::vector<double> env_median_rescaled;  // per-environment medians
};

// Rescaled-position ensemble for a recurrent law with E ln^2 rho > 0.
// Throws std::invalid_argument otherwise.
SinaiEnsemble sinai_rescaled_ensemble(const EnvironmentLaw& law,
                                      std::uint64_t n, std::uint64_t n_env,
                                      std::uint64_t n_walks_per_env,
                                      std::uint64_t seed, int threads = 0);

// Fraction of walks whose X_n lies within ln^2(n)/4 of the potential
// minimizer of the environment window (ties broken to the leftmost site).
double localization_fraction(const Environment1D& env, std::uint64_t n,
                             std::uint64_t n_walks, std::uint64_t seed,
                             int threads = 0);

// ---- passage-before-return ------------------------------------------------

struct HitBeforeReturn {
    McEstimate estimate;          // P(visit k before first return to 0)
    std::uint64_t n_truncated = 0;  // walks cut at the window floor (count
                                    // as failures; bias <= n_truncated/n)
};

// Walks from 0 until first return to 0 or first visit to k >= 1; success =
// reached k. Reaching the window floor counts as a return (truncation).
HitBeforeReturn hit_before_return_mc(const Environment1D& env, std::int64_t k,
                                     std::uint64_t n_trials,
                                     std::uint64_t walk_seed, int threads = 0);

// The printed passage formula p_0 / W_k with
// W_k = 1 + exp(V_2) + ... + exp(V_{k-1}); requires k >= 3.
double passage_formula(const Environment1D& env, std::int64_t k);

// Exact value p_0 * P_1(hit k before 0) from the gambler's-ruin sum
// evaluated in the log domain (stable for arbitrarily deep potentials).
double passage_exact(const Environment1D& env, std::int64_t k);

// ---- local-time helpers -----------------------------------------------------

// Max over sites of the local time at horizon n for one walk.
std::uint64_t max_local_time(const Environment1D& env, std::int64_t start,
                             std::uint64_t n, RandomStream& rng);

}  // namespace rwre
