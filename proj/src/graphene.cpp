#include "rwre/graphene.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rwre/rng.hpp"

namespace rwre::graphene {

namespace {

constexpr std::uint64_t kLatticeTag = 0x677261;

void validate_params(int L, double c, double gamma, double p) {
    if (L < 2) throw std::invalid_argument("lattice size must be >= 2");
    if (!(c > 0.0)) throw std::invalid_argument("base conductance must be > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    if (!(p >= -1.0 && p <= 1.0))
        throw std::invalid_argument("doping p must lie in [-1, 1]");
}

}  // namespace

GrapheneLattice sample_lattice(int L, double c, double gamma, double p_doping,
                               std::uint64_t seed) {
    validate_params(L, c, gamma, p_doping);
    GrapheneLattice lat;
    lat.L = L;
    lat.c = c;
    lat.gamma = gamma;
    lat.p_doping = p_doping;
    lat.seed = seed;
    lat.field.resize(static_cast<size_t>(L) * L);
    const double threshold = 0.5 * (1.0 + p_doping);
    for (size_t idx = 0; idx < lat.field.size(); ++idx) {
        const double u = unit_from_bits(mix64(seed_for(seed, idx)));
        lat.field[idx] = u < threshold ? 1 : -1;
    }
    return lat;
}

std::string lattice_to_text(const GrapheneLattice& lat) {
    std::ostringstream os;
    for (int i = 0; i < lat.L; ++i) {
        for (int j = 0; j < lat.L; ++j) {
            if (j) os << ' ';
            os << static_cast<int>(lat.X(i, j));
        }
        os << '\n';
    }
    return os.str();
}

GrapheneLattice lattice_from_text(const std::string& text, double c,
                                  double gamma) {
    std::istringstream is(text);
    std::vector<std::vector<std::int8_t>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<std::int8_t> row;
        int v;
        while (ls >> v) {
            if (v != 1 && v != -1)
                throw std::invalid_argument("lattice text entries must be +-1");
            row.push_back(static_cast<std::int8_t>(v));
        }
        rows.push_back(std::move(row));
    }
    const int L = static_cast<int>(rows.size());
    if (L < 2) throw std::invalid_argument("lattice text needs >= 2 rows");
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != L)
            throw std::invalid_argument("lattice text must be square");
    GrapheneLattice lat;
    lat.L = L;
    lat.c = c;
    lat.gamma = gamma;
    lat.seed = 0;
    lat.field.reserve(static_cast<size_t>(L) * L);
    double sum = 0.0;
    for (const auto& r : rows)
        for (std::int8_t v : r) {
            lat.field.push_back(v);
            sum += v;
        }
    lat.p_doping = sum / static_cast<double>(lat.field.size());
    validate_params(L, c, gamma, std::clamp(lat.p_doping, -1.0, 1.0));
    return lat;
}

TerminalNetwork build_network(const GrapheneLattice& lat) {
    const int L = lat.L;
    TerminalNetwork tn;
    // Node (i,j), 0 <= i,j <= L. Column i = 0 merges into the source bus
    // bar, column i = L into the drain; interior columns map densely.
    net::ConductanceNetwork net(2 + (L - 1) * (L + 1));
    tn.source = 0;
    tn.drain = 1;
    const auto node = [&](int i, int j) {
        if (i == 0) return 0;
        if (i == L) return 1;
        return 2 + (i - 1) * (L + 1) + j;
    };
    const auto add = [&](int u, int v, double c) {
        if (u == v || !(c > 0.0)) return;  // intra-bus-bar or closed bond
        net.add_edge(u, v, c);
    };

    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            const double diag = lat.c * (1.0 + sign * lat.X(i, j)) / 2.0;
            const double anti = lat.c * (1.0 - sign * lat.X(i, j)) / 2.0;
            add(node(i, j), node(i + 1, j + 1), diag);
            add(node(i, j + 1), node(i + 1, j), anti);
        }
    }
    const double leak = lat.gamma * lat.c;
    for (int i = 0; i <= L; ++i) {
        for (int j = 0; j <= L; ++j) {
            if (i < L) add(node(i, j), node(i + 1, j), leak);
            if (j < L) add(node(i, j), node(i, j + 1), leak);
        }
    }
    tn.net = std::move(net);
    return tn;
}

double two_terminal_conductance(const TerminalNetwork& tn) {
    const auto labels = tn.net.component_labels();
    if (labels[tn.source] != labels[tn.drain]) return 0.0;

    // Restrict the solve to the terminals' component; other components
    // carry no current and would make the Dirichlet system singular.
    const int label = labels[tn.source];
    std::vector<int> remap(tn.net.node_count(), -1);
    net::ConductanceNetwork sub;
    for (int x = 0; x < tn.net.node_count(); ++x)
        if (labels[x] == label) remap[x] = sub.add_node();
    for (int x = 0; x < tn.net.node_count(); ++x) {
        if (labels[x] != label) continue;
        for (const auto& [y, cxy] : tn.net.neighbors(x))
            if (y > x) sub.add_edge(remap[x], remap[y], cxy);
    }
    const auto sol = net::solve_dirichlet(
        sub, {{remap[tn.source], 1.0}, {remap[tn.drain], 0.0}});
    return std::max(sol.injected[remap[tn.source]], 0.0);
}

double two_terminal_conductance(const GrapheneLattice& lat) {
    return two_terminal_conductance(build_network(lat));
}

namespace {

ConductivityCurve sweep(const std::vector<double>& params, int L,
                        std::uint64_t n_realizations, double c,
                        std::uint64_t seed, int threads, bool param_is_gamma,
                        double fixed_other) {
    ConductivityCurve curve;
    curve.reserve(params.size());
    for (size_t pi = 0; pi < params.size(); ++pi) {
        const double gamma = param_is_gamma ? params[pi] : fixed_other;
        const double p = param_is_gamma ? fixed_other : params[pi];
        std::vector<double> samples(n_realizations, 0.0);
        for_each_task(n_realizations, threads, [&](std::uint64_t k) {
            const GrapheneLattice lat = sample_lattice(
                L, c, gamma, p, seed_for(seed, kLatticeTag, pi, k));
            samples[k] = two_terminal_conductance(lat);
        });
        const McEstimate est = mc_estimate(samples);
        curve.push_back({params[pi], est.mean, est.stderror, est.n});
    }
    return curve;
}

}  // namespace

ConductivityCurve sigma_min_curve(const std::vector<double>& gammas, int L,
                                  std::uint64_t n_realizations, double c,
                                  std::uint64_t seed, int threads) {
    return sweep(gammas, L, n_realizations, c, seed, threads,
                 /*param_is_gamma=*/true, /*fixed p=*/0.0);
}

ConductivityCurve doping_sweep(const std::vector<double>& p_grid, int L,
                               double gamma, std::uint64_t n_realizations,
                               double c, std::uint64_t seed, int threads) {
    return sweep(p_grid, L, n_realizations, c, seed, threads,
                 /*param_is_gamma=*/false, gamma);
}

std::vector<double> default_doping_grid() {
    std::vector<double> grid;
    for (int k = -80; k <= 80; ++k) grid.push_back(k * 0.0125);
    return grid;
}

namespace {

// Ordinary least squares y = intercept + slope * t with per-point residuals.
struct LineFit {
    double slope = 0.0, intercept = 0.0;
    std::vector<double> residuals;
};

LineFit fit_line(const std::vector<double>& t, const std::vector<double>& y) {
    const size_t n = t.size();
    if (n < 2 || y.size() != n)
        throw std::invalid_argument("fit needs >= 2 matched points");
    double tm = 0.0, ym = 0.0;
    for (size_t i = 0; i < n; ++i) {
        tm += t[i];
        ym += y[i];
    }
    tm /= n;
    ym /= n;
    double stt = 0.0, sty = 0.0;
    for (size_t i = 0; i < n; ++i) {
        stt += (t[i] - tm) * (t[i] - tm);
        sty += (t[i] - tm) * (y[i] - ym);
    }
    if (!(stt > 0.0)) throw std::invalid_argument("degenerate abscissae");
    LineFit f;
    f.slope = sty / stt;
    f.intercept = ym - f.slope * tm;
    f.residuals.resize(n);
    for (size_t i = 0; i < n; ++i)
        f.residuals[i] = y[i] - (f.intercept + f.slope * t[i]);
    return f;
}

std::vector<double> checked_logs(const std::vector<double>& means,
                                 const char* what) {
    std::vector<double> logs;
    logs.reserve(means.size());
    for (size_t i = 0; i < means.size(); ++i) {
        if (!(means[i] > 0.0)) {
            std::ostringstream os;
            os << what << ": mean at point " << i << " is " << means[i]
               << " (log undefined)";
            throw NonpositiveMean(os.str());
        }
        logs.push_back(std::log(means[i]));
    }
    return logs;
}

}  // namespace

PowerLawFit fit_size_scaling(const std::vector<double>& Ls,
                             const std::vector<double>& means) {
    const auto y = checked_logs(means, "size scaling fit");
    std::vector<double> t;
    t.reserve(Ls.size());
    for (double L : Ls) t.push_back(std::log(L));
    const LineFit line = fit_line(t, y);
    PowerLawFit fit;
    fit.exponent = -line.slope;  // <C> = (a/L)^x  =>  ln C = x ln a - x ln L
    if (std::abs(fit.exponent) < 1e-12)
        throw std::domain_error("flat scaling: prefactor undefined");
    fit.prefactor = std::exp(line.intercept / fit.exponent);
    fit.residuals = line.residuals;
    return fit;
}

PowerLawFit fit_leakage_exponent(const std::vector<double>& gammas,
                                 const std::vector<double>& means) {
    const auto y = checked_logs(means, "leakage exponent fit");
    std::vector<double> t;
    t.reserve(gammas.size());
    for (double g : gammas) {
        if (!(g > 0.0))
            throw std::invalid_argument("gamma values must be positive");
        t.push_back(std::log(g));
    }
    const LineFit line = fit_line(t, y);
    PowerLawFit fit;
    fit.exponent = line.slope;  // sigma = A gamma^alpha
    fit.prefactor = std::exp(line.intercept);
    fit.residuals = line.residuals;
    return fit;
}

ScalingResult conductance_scaling(const std::vector<int>& Ls,
                                  std::uint64_t n_realizations, double c,
                                  double gamma, double p_doping,
                                  std::uint64_t seed, int threads) {
    if (Ls.size() < 3)
        throw std::invalid_argument("scaling needs >= 3 distinct sizes");
    ScalingResult result;
    std::vector<double> sizes, means;
    for (size_t li = 0; li < Ls.size(); ++li) {
        const int L = Ls[li];
        std::vector<double> samples(n_realizations, 0.0);
        for_each_task(n_realizations, threads, [&](std::uint64_t k) {
            const GrapheneLattice lat =
                sample_lattice(L, c, gamma, p_doping,
                               seed_for(seed, kLatticeTag, li, k));
            samples[k] = two_terminal_conductance(lat);
        });
        const McEstimate est = mc_estimate(samples);
        result.sizes.push_back(
            {static_cast<double>(L), est.mean, est.stderror, est.n});
        sizes.push_back(static_cast<double>(L));
        means.push_back(est.mean);
    }
    result.fit = fit_size_scaling(sizes, means);
    return result;
}

}  // namespace rwre::graphene
