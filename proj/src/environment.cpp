#include "rwre/environment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwre/quadrature.hpp"

namespace rwre {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

constexpr double kWeightSumTol = 1e-12;

}  // namespace

EnvironmentLaw EnvironmentLaw::deterministic(double p) {
    require(p > 0.0 && p < 1.0, "deterministic law: p must lie in (0,1)");
    return EnvironmentLaw{Deterministic{p}};
}

EnvironmentLaw EnvironmentLaw::finite_support(
    std::vector<ProbabilityAtom> atoms) {
    require(!atoms.empty(), "finite-support law: no atoms");
    double wsum = 0.0;
    for (const auto& a : atoms) {
        require(a.p > 0.0 && a.p < 1.0,
                "finite-support law: atom p must lie in (0,1)");
        require(a.weight > 0.0, "finite-support law: weights must be positive");
        wsum += a.weight;
    }
    require(std::abs(wsum - 1.0) <= kWeightSumTol,
            "finite-support law: weights must sum to 1 within 1e-12");
    return EnvironmentLaw{FiniteSupport{std::move(atoms)}};
}

EnvironmentLaw EnvironmentLaw::uniform_interval(double lo, double hi,
                                                double delta) {
    require(lo > 0.0 && lo < hi && hi < 1.0,
            "uniform-interval law: need 0 < lo < hi < 1");
    require(delta >= 0.0 && delta < 0.5,
            "uniform-interval law: delta must lie in [0, 0.5)");
    return EnvironmentLaw{UniformInterval{lo, hi, delta}};
}

std::vector<ProbabilityAtom> EnvironmentLaw::sample_atoms() const {
    if (const auto* d = std::get_if<Deterministic>(&v_))
        return {{d->p, 1.0}};
    if (const auto* f = std::get_if<FiniteSupport>(&v_)) return f->atoms;
    return {};  // uniform: continuous part handled by expect()
}

double EnvironmentLaw::draw(double unit) const {
    if (const auto* d = std::get_if<Deterministic>(&v_)) return d->p;
    if (const auto* f = std::get_if<FiniteSupport>(&v_)) {
        double acc = 0.0;
        for (const auto& a : f->atoms) {
            acc += a.weight;
            if (unit < acc) return a.p;
        }
        return f->atoms.back().p;
    }
    const auto& u = std::get<UniformInterval>(v_);
    const double p = u.lo + unit * (u.hi - u.lo);
    return std::clamp(p, u.delta, 1.0 - u.delta);
}

double EnvironmentLaw::expect(const std::function<double(double)>& g) const {
    if (const auto* d = std::get_if<Deterministic>(&v_)) return g(d->p);
    if (const auto* f = std::get_if<FiniteSupport>(&v_)) {
        double acc = 0.0;
        for (const auto& a : f->atoms) acc += a.weight * g(a.p);
        return acc;
    }
    // Uniform on [lo, hi], clamped into [delta, 1-delta]: a continuous part
    // on the clipped interval plus end atoms carrying the clipped mass.
    const auto& u = std::get<UniformInterval>(v_);
    const double span = u.hi - u.lo;
    const double clo = std::max(u.lo, u.delta);
    const double chi = std::min(u.hi, 1.0 - u.delta);
    double acc = 0.0;
    if (clo > u.lo) acc += (clo - u.lo) / span * g(clo);
    if (chi < u.hi) acc += (u.hi - chi) / span * g(chi);
    acc += detail::integrate(g, clo, chi, kQuadratureTol) / span;
    return acc;
}

double EnvironmentLaw::rho_sup() const {
    // rho is decreasing in p, so the sup sits at the smallest reachable p.
    if (const auto* d = std::get_if<Deterministic>(&v_)) return rho_of(d->p);
    if (const auto* f = std::get_if<FiniteSupport>(&v_)) {
        double pmin = 1.0;
        for (const auto& a : f->atoms) pmin = std::min(pmin, a.p);
        return rho_of(pmin);
    }
    const auto& u = std::get<UniformInterval>(v_);
    return rho_of(std::max(u.lo, u.delta));
}

bool EnvironmentLaw::has_mass_rho_above_one() const {
    if (const auto* u = std::get_if<UniformInterval>(&v_))
        return std::max(u->lo, u->delta) < 0.5;
    for (const auto& a : sample_atoms())
        if (rho_of(a.p) > 1.0) return true;
    return false;
}

// ---- law expectations ------------------------------------------------------

double mean_log_rho(const EnvironmentLaw& law) {
    return law.expect([](double p) { return std::log(rho_of(p)); });
}

double mean_sq_log_rho(const EnvironmentLaw& law) {
    return law.expect([](double p) {
        const double l = std::log(rho_of(p));
        return l * l;
    });
}

double mean_rho(const EnvironmentLaw& law) {
    return law.expect([](double p) { return rho_of(p); });
}

double mean_inv_rho(const EnvironmentLaw& law) {
    return law.expect([](double p) { return 1.0 / rho_of(p); });
}

double rho_moment(const EnvironmentLaw& law, double k) {
    return law.expect([k](double p) { return std::pow(rho_of(p), k); });
}

double mean_drift(const EnvironmentLaw& law) {
    return law.expect([](double p) { return 2.0 * p - 1.0; });
}

double mean_p(const EnvironmentLaw& law) {
    return law.expect([](double p) { return p; });
}

const char* to_string(Transience t) {
    switch (t) {
        case Transience::transient_right: return "transient-right";
        case Transience::transient_left: return "transient-left";
        case Transience::recurrent: return "recurrent";
    }
    return "?";
}

SolomonClass classify_solomon(const EnvironmentLaw& law) {
    const double eta = mean_log_rho(law);
    const double tol =
        law.is_uniform() ? kRecurrentTolQuadrature : kRecurrentTolExact;
    if (eta < -tol) return {Transience::transient_right, eta};
    if (eta > tol) return {Transience::transient_left, eta};
    return {Transience::recurrent, eta};
}

double solomon_velocity(const EnvironmentLaw& law) {
    const double er = mean_rho(law);
    if (er < 1.0) return (1.0 - er) / (1.0 + er);
    const double eir = mean_inv_rho(law);
    if (eir < 1.0) return -(1.0 - eir) / (1.0 + eir);
    return 0.0;
}

std::optional<double> critical_exponent(const EnvironmentLaw& law) {
    if (classify_solomon(law).kind != Transience::transient_right)
        return std::nullopt;
    if (!law.has_mass_rho_above_one()) return std::nullopt;

    // E rho^k is convex with value 1 at k = 0 and negative slope eta, so
    // the second crossing of 1 brackets between a tiny k and the first
    // upper end where the moment reaches 1 again.
    const auto f = [&law](double k) { return rho_moment(law, k) - 1.0; };
    double lo = 1e-6, hi = 1.0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 64.0) return std::nullopt;
    }
    double flo = f(lo);
    if (flo > 0.0) return std::nullopt;  // already above 1: no crossing
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::abs(fm) <= 1e-12) return mid;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double annealed_mean_excursion(const EnvironmentLaw& law) {
    const double er = mean_rho(law);
    if (er < 1.0) return 2.0 / (1.0 - er);
    return std::numeric_limits<double>::infinity();
}

// ---- realized environments --------------------------------------------------

Environment1D Environment1D::sample(const EnvironmentLaw& law, std::int64_t lo,
                                    std::int64_t hi, std::uint64_t seed) {
    if (lo > hi) throw std::invalid_argument("environment window is empty");
    if (lo > 0 || hi < 0)
        throw std::invalid_argument("environment window must contain 0");
    std::vector<double> p(static_cast<size_t>(hi - lo + 1));
    for (std::int64_t x = lo; x <= hi; ++x) {
        const double u = unit_from_bits(mix64(seed_for(seed, zigzag(x))));
        p[static_cast<size_t>(x - lo)] = law.draw(u);
    }
    return Environment1D{lo, hi, seed, std::move(p), law};
}

Environment1D Environment1D::from_values(std::int64_t lo,
                                         std::vector<double> p) {
    if (p.empty()) throw std::invalid_argument("environment window is empty");
    const std::int64_t hi = lo + static_cast<std::int64_t>(p.size()) - 1;
    if (lo > 0 || hi < 0)
        throw std::invalid_argument("environment window must contain 0");
    for (double v : p)
        if (!(v > 0.0 && v < 1.0))
            throw std::invalid_argument("site probability outside (0,1)");
    return Environment1D{lo, hi, 0, std::move(p), std::nullopt};
}

// ---- random potential --------------------------------------------------------

PotentialPath::PotentialPath(const Environment1D& env)
    : lo_(env.lo()), hi_(env.hi()),
      v_(static_cast<size_t>(env.size()), 0.0) {
    const auto at = [this](std::int64_t x) -> double& {
        return v_[static_cast<size_t>(x - lo_)];
    };
    at(0) = 0.0;
    for (std::int64_t n = 1; n <= hi_; ++n)
        at(n) = at(n - 1) + std::log(env.rho(n));
    for (std::int64_t n = 0; n > lo_; --n)
        at(n - 1) = at(n) - std::log(env.rho(n));
}

PotentialPath random_potential(const Environment1D& env) {
    return PotentialPath(env);
}

double barrier_height(const PotentialPath& pot, std::int64_t lo,
                      std::int64_t hi) {
    if (lo > hi || !pot.contains(lo) || !pot.contains(hi))
        throw std::invalid_argument("barrier range outside potential window");
    double peak = pot.value(lo);  // running max of V_i, i <= j
    double best = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) {
        peak = std::max(peak, pot.value(j));
        best = std::max(best, peak - pot.value(j));
    }
    return best;
}

double ascent_height(const PotentialPath& pot, std::int64_t lo,
                     std::int64_t hi) {
    if (lo > hi || !pot.contains(lo) || !pot.contains(hi))
        throw std::invalid_argument("barrier range outside potential window");
    double valley = pot.value(lo);  // running min of V_i, i <= j
    double best = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) {
        valley = std::min(valley, pot.value(j));
        best = std::max(best, pot.value(j) - valley);
    }
    return best;
}

}  // namespace rwre
