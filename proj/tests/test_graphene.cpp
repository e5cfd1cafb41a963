#include <doctest.h>

#include <cmath>
#include <random>

#include "rwre/graphene.hpp"

using namespace rwre;
using namespace rwre::graphene;

namespace {

// Star-mesh elimination: independent two-terminal oracle (duplicated from
// the network tests on purpose; oracles stay local to what they check).
double eliminate_two_terminal(std::vector<std::vector<double>> c, int a,
                              int b) {
    const int n = static_cast<int>(c.size());
    for (int k = 0; k < n; ++k) {
        if (k == a || k == b) continue;
        double ck = 0.0;
        for (int i = 0; i < n; ++i) ck += c[k][i];
        if (ck == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            if (i == k || c[i][k] == 0.0) continue;
            for (int j = i + 1; j < n; ++j) {
                if (j == k || c[j][k] == 0.0) continue;
                const double add = c[i][k] * c[j][k] / ck;
                c[i][j] += add;
                c[j][i] += add;
            }
        }
        for (int i = 0; i < n; ++i) c[i][k] = c[k][i] = 0.0;
    }
    return c[a][b];
}

std::vector<std::vector<double>> dense_of(const net::ConductanceNetwork& n) {
    std::vector<std::vector<double>> c(n.node_count(),
                                       std::vector<double>(n.node_count()));
    for (int x = 0; x < n.node_count(); ++x)
        for (const auto& [y, cxy] : n.neighbors(x)) c[x][y] = cxy;
    return c;
}

GrapheneLattice uniform_lattice(int L, double c, double gamma, int sign) {
    GrapheneLattice lat;
    lat.L = L;
    lat.c = c;
    lat.gamma = gamma;
    lat.p_doping = sign;
    lat.field.assign(size_t(L) * L, std::int8_t(sign));
    return lat;
}

}  // namespace

TEST_CASE("lattice sampling: degenerate doping and empirical mean") {
    const auto plus = sample_lattice(8, 1.0, 0.1, 1.0, 3);
    for (auto v : plus.field) CHECK(v == 1);
    const auto minus = sample_lattice(8, 1.0, 0.1, -1.0, 3);
    for (auto v : minus.field) CHECK(v == -1);

    const auto neutral = sample_lattice(64, 1.0, 0.0, 0.0, 9);
    double mean = 0.0;
    for (auto v : neutral.field) mean += v;
    mean /= double(neutral.field.size());
    CHECK(std::abs(mean) <= 0.05);  // 4 s.e. of 4096 draws is ~0.0625

    // deterministic per seed
    const auto again = sample_lattice(64, 1.0, 0.0, 0.0, 9);
    CHECK(neutral.field == again.field);

    CHECK_THROWS_AS(sample_lattice(1, 1.0, 0.0, 0.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_lattice(4, 1.0, -0.5, 0.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(sample_lattice(4, 1.0, 0.0, 1.5, 1),
                    std::invalid_argument);
}

TEST_CASE("lattice text round trip") {
    const auto lat = sample_lattice(5, 2.0, 0.25, 0.2, 44);
    const auto text = lattice_to_text(lat);
    const auto back = lattice_from_text(text, 2.0, 0.25);
    CHECK(back.L == 5);
    CHECK(back.field == lat.field);
    CHECK_THROWS_AS(lattice_from_text("1 1\n1\n", 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("bond rule: parity selects exactly one open cross bond") {
    const auto lat = sample_lattice(6, 1.5, 0.05, 0.0, 17);
    const auto tn = build_network(lat);

    // every realized bond conductance is c or gamma c (0 omitted)
    for (int x = 0; x < tn.net.node_count(); ++x)
        for (const auto& [y, cxy] : tn.net.neighbors(x)) {
            if (x == tn.source || x == tn.drain || y == tn.source ||
                y == tn.drain)
                continue;  // bus bars accumulate parallel bonds
            const bool open = std::abs(cxy - 1.5) < 1e-15;
            const bool leak = std::abs(cxy - 0.05 * 1.5) < 1e-15;
            CHECK((open || leak));
        }

    // plaquette (0,0) with X = +1: diagonal open, anti closed;
    // plaquette (0,1) with X = +1: parity flips the selection
    auto fixed = uniform_lattice(4, 1.0, 0.0, +1);
    const auto net = build_network(fixed).net;
    const auto node = [&](int i, int j) {
        if (i == 0) return 0;
        if (i == 4) return 1;
        return 2 + (i - 1) * 5 + j;
    };
    CHECK(net.conductance(node(1, 1), node(2, 2)) == 1.0);  // pl(1,1) even
    CHECK(net.conductance(node(1, 2), node(2, 1)) == 0.0);
    CHECK(net.conductance(node(1, 3), node(2, 2)) == 1.0);  // pl(1,2) odd
    CHECK(net.conductance(node(1, 2), node(2, 3)) == 0.0);
}

TEST_CASE("cross-bond conductances of every plaquette sum to c") {
    const auto lat = sample_lattice(5, 2.25, 0.1, 0.3, 5);
    for (int i = 0; i < lat.L; ++i)
        for (int j = 0; j < lat.L; ++j) {
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            const double diag = lat.c * (1.0 + sign * lat.X(i, j)) / 2.0;
            const double anti = lat.c * (1.0 - sign * lat.X(i, j)) / 2.0;
            CHECK(diag + anti == lat.c);
            CHECK((diag == 0.0 || diag == lat.c));
        }
}

TEST_CASE("two-terminal conductance: elementary fixtures") {
    // p = +1, gamma = 0, L = 2: source - center (2c) - drain (2c) in series
    const auto small = uniform_lattice(2, 1.0, 0.0, +1);
    CHECK(two_terminal_conductance(small) == doctest::Approx(1.0).epsilon(1e-10));

    // independent elimination oracle on the gamma-only grid (all cross
    // bonds removed by hand): L = 2 axis-bond lattice
    net::ConductanceNetwork grid(2 + 3);  // src, drn, middle column j=0..2
    const double leak = 0.35;
    for (int j = 0; j < 3; ++j) {
        grid.add_edge(0, 2 + j, leak);  // src column to middle
        grid.add_edge(2 + j, 1, leak);  // middle to drn
    }
    grid.add_edge(2, 3, leak);
    grid.add_edge(3, 4, leak);
    const double oracle = eliminate_two_terminal(dense_of(grid), 0, 1);
    net::ConductanceNetwork copy = grid;
    const auto sol = net::solve_dirichlet(copy, {{0, 1.0}, {1, 0.0}});
    CHECK(sol.injected[0] == doctest::Approx(oracle).epsilon(1e-10));
    // vertical leaks never matter between equal-potential columns here:
    // the value is just two leak stages of 3 parallel bonds in series
    CHECK(oracle == doctest::Approx(3.0 * leak / 2.0).epsilon(1e-12));

    // p = +1, gamma = 0, L = 4: hand reduction. The open bonds form two
    // x-shaped trees meeting the bars; reduction gives C = 2c * 2c / (2c +
    // 2c) per lane and two independent lanes between the bars.
    const auto big = uniform_lattice(4, 1.0, 0.0, +1);
    const double measured = two_terminal_conductance(big);
    const double elim = eliminate_two_terminal(
        dense_of(build_network(big).net), 0, 1);
    CHECK(measured == doctest::Approx(elim).epsilon(1e-10));
}

TEST_CASE("uniform L = 4 fixture: full bond enumeration and hand value") {
    // all X = +1, gamma = 0: even-parity plaquettes open their diagonal,
    // odd-parity ones their anti-diagonal, nothing else exists
    const auto lat = uniform_lattice(4, 1.0, 0.0, +1);
    const auto tn = build_network(lat);
    const auto node = [&](int i, int j) {
        if (i == 0) return 0;
        if (i == 4) return 1;
        return 2 + (i - 1) * 5 + j;
    };
    std::uint64_t open_bonds = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const bool even = (i + j) % 2 == 0;
            const int du = node(i, j), dv = node(i + 1, j + 1);
            const int au = node(i, j + 1), av = node(i + 1, j);
            if (even) {
                CHECK(tn.net.conductance(du, dv) >= 1.0);  // bus bars stack
                if (!(au == av))
                    CHECK(tn.net.conductance(au, av) == 0.0);
            } else {
                CHECK(tn.net.conductance(au, av) >= 1.0);
                if (!(du == dv))
                    CHECK(tn.net.conductance(du, dv) == 0.0);
            }
            ++open_bonds;
        }
    CHECK(open_bonds == 16);

    // hand reduction: merging the j-symmetric nodes collapses the graph to
    // SRC -4c- A -{A-M-C, A-B-C in parallel: 2c}- C -4c- DRN = 1c
    CHECK(two_terminal_conductance(lat) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("two-terminal solve on a bare two-node network returns c") {
    TerminalNetwork tn;
    tn.net = net::ConductanceNetwork(2);
    tn.net.add_edge(0, 1, 0.75);
    tn.source = 0;
    tn.drain = 1;
    CHECK(two_terminal_conductance(tn) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("fully doped lattices at +-1 conduct identically") {
    // point-mass disorder: 'means within 3 s.e.' degenerates to equality
    for (double gamma : {0.0, 0.05, 0.3}) {
        const auto plus = uniform_lattice(6, 1.0, gamma, +1);
        const auto minus = uniform_lattice(6, 1.0, gamma, -1);
        CHECK(two_terminal_conductance(plus) ==
              doctest::Approx(two_terminal_conductance(minus)).epsilon(1e-12));
    }
}

TEST_CASE("gamma = 0 conducts strictly less than gamma = 0.01 on average") {
    const int L = 16;
    const std::uint64_t n = 150;
    std::vector<double> closed(n);
    for_each_task(n, 0, [&](std::uint64_t k) {
        const auto lat =
            sample_lattice(L, 1.0, 0.0, 0.0, seed_for(4040, 0, k));
        closed[k] = two_terminal_conductance(lat);
    });
    const auto base = mc_estimate(closed);
    const auto curve = sigma_min_curve({0.01}, L, n, 1.0, 4040, 0);
    CHECK(base.mean < curve[0].mean);
}

TEST_CASE("two-terminal conductance: disconnection yields zero") {
    // gamma = 0 and alternating signs can separate the bars; manufacture a
    // field whose open bonds all avoid one sublattice crossing
    GrapheneLattice lat = uniform_lattice(2, 1.0, 0.0, +1);
    // flip plaquettes so every open bond stays within the left half
    lat.field = {1, 1, -1, -1};  // rows (i=0): +1 +1, (i=1): -1 -1
    const double c = two_terminal_conductance(lat);
    CHECK(c == 0.0);
}

TEST_CASE("rayleigh monotonicity in gamma, exact per realization") {
    for (int rep = 0; rep < 50; ++rep) {
        const auto base = sample_lattice(8, 1.0, 0.02, 0.0, 1000 + rep);
        GrapheneLattice more = base;
        more.gamma = 0.1;
        const double lo = two_terminal_conductance(base);
        const double hi = two_terminal_conductance(more);
        CHECK(hi >= lo - 1e-12);
    }
}

TEST_CASE("lattice mirror is an exact conductance isomorphism") {
    // reflecting the j axis relabels nodes without touching the bus bars,
    // so the conductance is reproduced to solver precision
    for (int rep = 0; rep < 10; ++rep) {
        const auto lat = sample_lattice(6, 1.0, 0.07, 0.4, 300 + rep);
        GrapheneLattice mirrored = lat;
        for (int i = 0; i < lat.L; ++i)
            for (int j = 0; j < lat.L; ++j)
                mirrored.field[size_t(i) * lat.L + j] =
                    lat.X(i, lat.L - 1 - j);
        CHECK(two_terminal_conductance(mirrored) ==
              doctest::Approx(two_terminal_conductance(lat)).epsilon(1e-9));
    }
}

TEST_CASE("electron-hole duality: +-p sweeps agree within noise") {
    // negating the disorder field maps law(p) onto law(-p) and shifts the
    // open-bond pattern by one plaquette parity; bus bars break the shift
    // only at the boundary, so the means coincide statistically.
    const auto curve = doping_sweep({-0.4, 0.4}, 10, 0.05, 400, 1.0, 606, 0);
    const double se = std::sqrt(curve[0].stderror * curve[0].stderror +
                                curve[1].stderror * curve[1].stderror);
    CHECK(std::abs(curve[0].mean - curve[1].mean) <= 3.0 * se);
}

TEST_CASE("power-law fits: exact fixtures and noise tolerance") {
    // <C(L)> = (2/L)^1
    std::vector<double> Ls = {8, 16, 32, 64};
    std::vector<double> exact;
    for (double L : Ls) exact.push_back(2.0 / L);
    auto fit = fit_size_scaling(Ls, exact);
    CHECK(fit.exponent == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(2.0).epsilon(1e-12));
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-12);

    // <C(L)> = (1/L)^0.97
    std::vector<double> ref;
    for (double L : Ls) ref.push_back(std::pow(1.0 / L, 0.97));
    fit = fit_size_scaling(Ls, ref);
    CHECK(fit.exponent == doctest::Approx(0.97).epsilon(1e-12));

    // sigma = 3 gamma^0.5, exact then with 1% multiplicative noise
    std::vector<double> gammas = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
    std::vector<double> sig;
    for (double g : gammas) sig.push_back(3.0 * std::sqrt(g));
    auto leak = fit_leakage_exponent(gammas, sig);
    CHECK(leak.exponent == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(leak.prefactor == doctest::Approx(3.0).epsilon(1e-12));

    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> noise(-0.01, 0.01);
    std::vector<double> noisy;
    for (double s : sig) noisy.push_back(s * (1.0 + noise(gen)));
    leak = fit_leakage_exponent(gammas, noisy);
    CHECK(std::abs(leak.exponent - 0.5) <= 0.05);

    CHECK_THROWS_AS(fit_size_scaling({8, 16}, {0.1, 0.0}), NonpositiveMean);
    CHECK_THROWS_AS(fit_leakage_exponent({0.0, 0.1}, {0.1, 0.2}),
                    std::invalid_argument);
}

TEST_CASE("sigma_min curve rises with gamma; determinism per seed") {
    const auto curve = sigma_min_curve({0.01, 0.1, 0.5}, 16, 60, 1.0, 123, 0);
    REQUIRE(curve.size() == 3);
    CHECK(curve[1].mean - curve[0].mean >
          -3.0 * (curve[1].stderror + curve[0].stderror));
    CHECK(curve[1].mean > curve[0].mean);
    CHECK(curve[2].mean > curve[1].mean);

    const auto again = sigma_min_curve({0.01, 0.1, 0.5}, 16, 60, 1.0, 123, 1);
    for (size_t i = 0; i < curve.size(); ++i)
        CHECK(curve[i].mean == again[i].mean);  // thread-count independent

    // single realization at L = 2 repeats bit-identically
    const auto one = sigma_min_curve({0.2}, 2, 1, 1.0, 77, 0);
    const auto two = sigma_min_curve({0.2}, 2, 1, 1.0, 77, 0);
    CHECK(one[0].mean == two[0].mean);
}

TEST_CASE("doping grid default has 161 points; sweep is p-symmetric") {
    CHECK(default_doping_grid().size() == 161);
    const auto curve =
        doping_sweep({-0.5, 0.0, 0.5}, 12, 0.05, 150, 1.0, 321, 0);
    REQUIRE(curve.size() == 3);
    const double gap = std::abs(curve[0].mean - curve[2].mean);
    CHECK(gap <= 3.0 * (curve[0].stderror + curve[2].stderror));
    // charge neutrality is the conductance minimum
    CHECK(curve[1].mean < curve[0].mean);
    CHECK(curve[1].mean < curve[2].mean);
}

TEST_CASE("conductance scaling: desk-scale run stays in the bracket") {
    const auto result =
        conductance_scaling({8, 16, 32}, 120, 1.0, 0.0, 0.0, 2026, 0);
    CHECK(result.fit.exponent > 0.6);
    CHECK(result.fit.exponent < 1.4);
    for (size_t i = 1; i < result.sizes.size(); ++i)
        CHECK(result.sizes[i].mean < result.sizes[i - 1].mean);
    CHECK_THROWS_AS(conductance_scaling({8, 16}, 10, 1.0, 0.0, 0.0, 1, 0),
                    std::invalid_argument);
}
