// One-dimensional random environments: the law of the i.i.d. jump
// probabilities p_x, realized environments on an integer window, the
// Solomon transience classification, and the random potential.
//
// Conventions: at site x the walker steps right with probability p_x and
// left with q_x = 1 - p_x; rho_x = q_x / p_x. All log quantities are in
// nats. Expectations over a law are exact for deterministic / finite
// support variants and adaptive-quadrature (abs err <= 1e-10) for the
// uniform-interval variant, so classification is deterministic.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "rwre/rng.hpp"

namespace rwre {

// Uniform-interval sampling clamps draws into [delta, 1-delta]
// (uniform ellipticity). Finite atoms are validated but never clipped.
inline constexpr double kDefaultEllipticity = 0.01;

inline constexpr double kQuadratureTol = 1e-10;

// |mean_log_rho| at or below these declares the law recurrent.
inline constexpr double kRecurrentTolExact = 1e-12;
inline constexpr double kRecurrentTolQuadrature = 1e-9;

struct ProbabilityAtom {
    double p;       // right-jump probability, in (0,1)
    double weight;  // positive, weights sum to 1 within 1e-12
};

class EnvironmentLaw {
  public:
    struct Deterministic {
        double p;
    };
    struct FiniteSupport {
        std::vector<ProbabilityAtom> atoms;
    };
    struct UniformInterval {
        double lo, hi;
        double delta;  // ellipticity clamp applied when sampling
    };

    static EnvironmentLaw deterministic(double p);
    static EnvironmentLaw finite_support(std::vector<ProbabilityAtom> atoms);
    static EnvironmentLaw uniform_interval(double lo, double hi,
                                           double delta = kDefaultEllipticity);

    bool is_deterministic() const {
        return std::holds_alternative<Deterministic>(v_);
    }
    bool is_finite_support() const {
        return std::holds_alternative<FiniteSupport>(v_);
    }
    bool is_uniform() const {
        return std::holds_alternative<UniformInterval>(v_);
    }
    bool has_finite_support() const { return !is_uniform(); }

    const FiniteSupport& finite() const {
        return std::get<FiniteSupport>(v_);
    }
    const UniformInterval& uniform() const {
        return std::get<UniformInterval>(v_);
    }
    const Deterministic& det() const { return std::get<Deterministic>(v_); }

    // Atoms of the sampled distribution. For the uniform variant the
    // ellipticity clamp can pile mass onto the interval ends; those end
    // atoms are returned here so expectations match what is sampled.
    std::vector<ProbabilityAtom> sample_atoms() const;

    // Inverse-CDF draw from one uniform variate in [0,1).
    double draw(double unit) const;

    // E[g(p_0)] over the sampled distribution (exact sum or quadrature).
    double expect(const std::function<double(double)>& g) const;

    // Largest value rho = (1-p)/p can take under this law (for
    // truncation-error bounds). May exceed 1.
    double rho_sup() const;

    // True if the law puts positive mass on rho > 1.
    bool has_mass_rho_above_one() const;

  private:
    explicit EnvironmentLaw(
        std::variant<Deterministic, FiniteSupport, UniformInterval> v)
        : v_(std::move(v)) {}

    std::variant<Deterministic, FiniteSupport, UniformInterval> v_;
};

inline double rho_of(double p) { return (1.0 - p) / p; }

// ---- law expectations -------------------------------------------------

double mean_log_rho(const EnvironmentLaw& law);     // eta = E ln rho_0
double mean_sq_log_rho(const EnvironmentLaw& law);  // E ln^2 rho_0
double mean_rho(const EnvironmentLaw& law);
double mean_inv_rho(const EnvironmentLaw& law);
double rho_moment(const EnvironmentLaw& law, double k);  // E rho_0^k
double mean_drift(const EnvironmentLaw& law);            // E(p_0 - q_0)
double mean_p(const EnvironmentLaw& law);

enum class Transience { transient_right, transient_left, recurrent };

const char* to_string(Transience t);

struct SolomonClass {
    Transience kind;
    double mean_log_rho;  // the classifying log-mean, nats
};

// Sign of E ln rho_0: negative -> escapes right, positive -> escapes left,
// zero (within the law-appropriate tolerance) -> recurrent.
SolomonClass classify_solomon(const EnvironmentLaw& law);

// Almost-sure limit of X_n / n: (1 - E rho)/(1 + E rho) when E rho < 1,
// the mirrored value when E rho^{-1} < 1, else 0.
double solomon_velocity(const EnvironmentLaw& law);

// Unique k > 0 with E rho_0^k = 1 (|residual| <= 1e-10), or nullopt when
// no such root exists (law recurrent, or rho <= 1 almost surely, or the
// bracket search exceeds k = 64).
std::optional<double> critical_exponent(const EnvironmentLaw& law);

// Annealed mean duration of a left excursion: 2/(1 - E rho) when
// E rho < 1, +infinity otherwise.
double annealed_mean_excursion(const EnvironmentLaw& law);

// ---- realized environments ---------------------------------------------

class Environment1D {
  public:
    // Draws p_x i.i.d. from `law` for every site of [lo, hi]. Each site's
    // value is a pure function of (seed, site), so regenerating with the
    // same seed reproduces the environment regardless of window.
    static Environment1D sample(const EnvironmentLaw& law, std::int64_t lo,
                                std::int64_t hi, std::uint64_t seed);

    // Wraps explicit per-site probabilities (synthetic fixtures).
    static Environment1D from_values(std::int64_t lo, std::vector<double> p);

    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return hi_; }
    std::int64_t size() const { return hi_ - lo_ + 1; }
    std::uint64_t seed() const { return seed_; }
    bool contains(std::int64_t x) const { return x >= lo_ && x <= hi_; }

    double p(std::int64_t x) const { return p_[static_cast<size_t>(x - lo_)]; }
    double q(std::int64_t x) const { return 1.0 - p(x); }
    double rho(std::int64_t x) const { return q(x) / p(x); }

    const EnvironmentLaw* law() const {
        return law_ ? &*law_ : nullptr;
    }

  private:
    Environment1D(std::int64_t lo, std::int64_t hi, std::uint64_t seed,
                  std::vector<double> p, std::optional<EnvironmentLaw> law)
        : lo_(lo), hi_(hi), seed_(seed), p_(std::move(p)),
          law_(std::move(law)) {}

    std::int64_t lo_, hi_;
    std::uint64_t seed_ = 0;
    std::vector<double> p_;
    std::optional<EnvironmentLaw> law_;
};

// ---- random potential ----------------------------------------------------

// V_0 = 0 and V_n - V_{n-1} = ln rho_n on the environment window; sites
// left of the origin follow the inverted recurrence V_{n-1} = V_n - ln rho_n.
class PotentialPath {
  public:
    explicit PotentialPath(const Environment1D& env);

    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return hi_; }
    bool contains(std::int64_t x) const { return x >= lo_ && x <= hi_; }
    double value(std::int64_t x) const {
        return v_[static_cast<size_t>(x - lo_)];
    }

  private:
    std::int64_t lo_, hi_;
    std::vector<double> v_;
};

PotentialPath random_potential(const Environment1D& env);

// Height of the largest left-to-right drop max_{lo<=i<=j<=hi} (V_i - V_j),
// scanned in O(hi - lo). Zero for monotone increasing V.
double barrier_height(const PotentialPath& pot, std::int64_t lo,
                      std::int64_t hi);

// Transposed orientation: largest ascent max_{lo<=i<=j<=hi} (V_j - V_i).
double ascent_height(const PotentialPath& pot, std::int64_t lo,
                     std::int64_t hi);

}  // namespace rwre
