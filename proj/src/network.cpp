#include "rwre/network.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace rwre::net {

void ConductanceNetwork::add_edge(int u, int v, double c) {
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count())
        throw std::invalid_argument("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (!(c > 0.0))
        throw std::invalid_argument("conductance must be positive");
    adj_[u][v] += c;
    adj_[v][u] += c;
}

std::vector<int> ConductanceNetwork::component_labels() const {
    std::vector<int> label(node_count(), -1);
    int next = 0;
    std::deque<int> queue;
    for (int s = 0; s < node_count(); ++s) {
        if (label[s] != -1) continue;
        label[s] = next;
        queue.push_back(s);
        while (!queue.empty()) {
            const int x = queue.front();
            queue.pop_front();
            for (const auto& [y, c] : adj_[x]) {
                if (label[y] == -1) {
                    label[y] = next;
                    queue.push_back(y);
                }
            }
        }
        ++next;
    }
    return label;
}

bool ConductanceNetwork::is_connected() const {
    if (node_count() == 0) return true;
    const auto labels = component_labels();
    return std::all_of(labels.begin(), labels.end(),
                       [](int l) { return l == 0; });
}

std::vector<std::vector<double>> transition_matrix(
    const ConductanceNetwork& net) {
    if (!net.is_connected()) throw DisconnectedNetwork{};
    const int n = net.node_count();
    std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
    for (int x = 0; x < n; ++x) {
        const double cx = net.node_conductance(x);
        for (const auto& [y, cxy] : net.neighbors(x)) p[x][y] = cxy / cx;
    }
    return p;
}

HarmonicSolution solve_dirichlet(const ConductanceNetwork& net,
                                 const std::map<int, double>& boundary,
                                 double tol) {
    const int n = net.node_count();
    if (boundary.empty())
        throw std::invalid_argument("boundary must be nonempty");
    for (const auto& [b, v] : boundary)
        if (b < 0 || b >= n)
            throw std::invalid_argument("boundary node out of range");

    // Every node must reach a boundary node.
    {
        const auto labels = net.component_labels();
        std::vector<char> grounded(
            static_cast<size_t>(*std::max_element(labels.begin(),
                                                   labels.end()) + 1),
            0);
        for (const auto& [b, v] : boundary) grounded[labels[b]] = 1;
        for (int x = 0; x < n; ++x)
            if (!grounded[labels[x]]) throw DisconnectedNetwork{};
    }

    // Interior system  L_II v_I = -L_IB v_B  (SPD).
    std::vector<int> row(n, -1);
    std::vector<int> interior;
    for (int x = 0; x < n; ++x) {
        if (!boundary.count(x)) {
            row[x] = static_cast<int>(interior.size());
            interior.push_back(x);
        }
    }

    HarmonicSolution sol;
    sol.voltages.assign(n, 0.0);
    sol.injected.assign(n, 0.0);
    for (const auto& [b, v] : boundary) sol.voltages[b] = v;

    const int m = static_cast<int>(interior.size());
    if (m > 0) {
        Eigen::SparseMatrix<double> lap(m, m);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<size_t>(m) * 5);
        for (int i = 0; i < m; ++i) {
            const int x = interior[i];
            double diag = 0.0;
            for (const auto& [y, cxy] : net.neighbors(x)) {
                diag += cxy;
                if (row[y] >= 0)
                    trip.emplace_back(i, row[y], -cxy);
                else
                    rhs[i] += cxy * sol.voltages[y];
            }
            trip.emplace_back(i, i, diag);
        }
        lap.setFromTriplets(trip.begin(), trip.end());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
        solver.compute(lap);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("dirichlet factorization failed");
        Eigen::VectorXd v = solver.solve(rhs);
        // One step of iterative refinement tightens the residual.
        v += solver.solve(rhs - lap * v);
        for (int i = 0; i < m; ++i) sol.voltages[interior[i]] = v[i];
    }

    for (const auto& [b, vb] : boundary) {
        double inj = 0.0;
        for (const auto& [y, cby] : net.neighbors(b))
            inj += cby * (sol.voltages[b] - sol.voltages[y]);
        sol.injected[b] = inj;
    }

    const double res = kirchhoff_residual(net, sol, boundary);
    double iscale = 0.0;
    for (const auto& [b, v] : boundary)
        iscale = std::max(iscale, std::abs(sol.injected[b]));
    if (iscale > 0.0 && res > tol * std::max(iscale, 1.0))
        throw std::runtime_error("dirichlet solve residual above tolerance");
    return sol;
}

double kirchhoff_residual(const ConductanceNetwork& net,
                          const HarmonicSolution& sol,
                          const std::map<int, double>& boundary) {
    double worst = 0.0;
    for (int x = 0; x < net.node_count(); ++x) {
        if (boundary.count(x)) continue;
        double net_out = 0.0;
        for (const auto& [y, cxy] : net.neighbors(x))
            net_out += cxy * (sol.voltages[x] - sol.voltages[y]);
        worst = std::max(worst, std::abs(net_out));
    }
    return worst;
}

double effective_resistance(const ConductanceNetwork& net, int a, int b) {
    if (a == b) throw std::invalid_argument("terminals must differ");
    const auto sol = solve_dirichlet(net, {{a, 1.0}, {b, 0.0}});
    const double ia = sol.injected[a];
    if (!(ia > 0.0))
        throw std::runtime_error("no current flows between the terminals");
    return 1.0 / ia;
}

double effective_conductance(const ConductanceNetwork& net, int a, int b) {
    return 1.0 / effective_resistance(net, a, b);
}

double escape_probability(const ConductanceNetwork& net, int a, int b) {
    return effective_conductance(net, a, b) / net.node_conductance(a);
}

namespace {

// CSR walk table with per-node cumulative jump probabilities.
struct WalkTable {
    std::vector<std::uint32_t> offset;
    std::vector<int> target;
    std::vector<double> cumulative;

    explicit WalkTable(const ConductanceNetwork& net) {
        const int n = net.node_count();
        offset.assign(static_cast<size_t>(n) + 1, 0);
        for (int x = 0; x < n; ++x)
            offset[x + 1] =
                offset[x] + static_cast<std::uint32_t>(net.neighbors(x).size());
        target.resize(offset[n]);
        cumulative.resize(offset[n]);
        for (int x = 0; x < n; ++x) {
            const double cx = net.node_conductance(x);
            double acc = 0.0;
            std::uint32_t k = offset[x];
            for (const auto& [y, cxy] : net.neighbors(x)) {
                acc += cxy / cx;
                target[k] = y;
                cumulative[k] = acc;
                ++k;
            }
            if (k > offset[x]) cumulative[k - 1] = 1.0;
        }
    }

    int step(int x, RandomStream& rng) const {
        const double u = rng.next_unit();
        for (std::uint32_t k = offset[x]; k < offset[x + 1]; ++k)
            if (u < cumulative[k]) return target[k];
        return target[offset[x + 1] - 1];
    }
};

}  // namespace

McEstimate hitting_probability_mc(const ConductanceNetwork& net, int start,
                                  int absorb_a, int absorb_b,
                                  std::uint64_t n_trials, std::uint64_t seed,
                                  int threads) {
    if (absorb_a == absorb_b)
        throw std::invalid_argument("absorbing states must differ");
    const WalkTable table(net);
    std::vector<double> hit(n_trials, 0.0);
    for_each_task(n_trials, threads, [&](std::uint64_t i) {
        RandomStream rng(seed_for(seed, i));
        int x = start;
        while (x != absorb_a && x != absorb_b) x = table.step(x, rng);
        hit[i] = (x == absorb_a) ? 1.0 : 0.0;
    });
    return mc_estimate(hit);
}

McEstimate escape_probability_mc(const ConductanceNetwork& net, int a, int b,
                                 std::uint64_t n_trials, std::uint64_t seed,
                                 int threads) {
    if (a == b) throw std::invalid_argument("terminals must differ");
    const WalkTable table(net);
    std::vector<double> hit(n_trials, 0.0);
    for_each_task(n_trials, threads, [&](std::uint64_t i) {
        RandomStream rng(seed_for(seed, i));
        int x = table.step(a, rng);
        while (x != a && x != b) x = table.step(x, rng);
        hit[i] = (x == b) ? 1.0 : 0.0;
    });
    return mc_estimate(hit);
}

ConductanceNetwork chain_network_from_env(const Environment1D& env,
                                          std::int64_t left,
                                          std::int64_t right) {
    if (!(left < 0 && 0 < right))
        throw std::invalid_argument("need left < 0 < right");
    if (!env.contains(left) || !env.contains(right))
        throw std::invalid_argument("chain range outside environment window");
    const auto n = static_cast<int>(right - left + 1);
    ConductanceNetwork net(n);
    double log_c = 0.0, lo = 0.0, hi = 0.0;
    for (std::int64_t x = left; x < right; ++x) {
        if (x > left) log_c -= std::log(env.rho(x));
        lo = std::min(lo, log_c);
        hi = std::max(hi, log_c);
        if (hi - lo > 200.0 || std::abs(log_c) > 200.0)
            throw ConductanceOverflow{hi - lo};
        net.add_edge(static_cast<int>(x - left),
                     static_cast<int>(x - left + 1), std::exp(log_c));
    }
    return net;
}

// ---- lattice balls ------------------------------------------------------

namespace {

struct Coord {
    int x[3];
};

double norm_of(const Coord& c, int d, BallNorm norm) {
    if (norm == BallNorm::l1) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += std::abs(c.x[k]);
        return s;
    }
    double s = 0.0;
    for (int k = 0; k < d; ++k)
        s += static_cast<double>(c.x[k]) * c.x[k];
    return std::sqrt(s);
}

}  // namespace

LatticeBall lattice_ball(int d, double r, double conductance, BallNorm norm,
                         std::int64_t max_sites) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1..3");
    if (!(r >= 1.0)) throw std::invalid_argument("radius must be >= 1");
    const int range = static_cast<int>(std::floor(r));
    const auto inside = [&](const Coord& c) {
        return norm_of(c, d, norm) <= r + 1e-9;
    };

    // Dense index over the bounding box; -1 marks outside-ball sites.
    const std::int64_t side = 2 * static_cast<std::int64_t>(range) + 1;
    std::int64_t box = 1;
    for (int k = 0; k < d; ++k) box *= side;
    if (box > max_sites)
        throw std::invalid_argument("lattice ball exceeds the site budget");
    const auto flat = [&](const Coord& c) {
        std::int64_t idx = 0;
        for (int k = 0; k < d; ++k) idx = idx * side + (c.x[k] + range);
        return idx;
    };

    std::vector<Coord> sites;
    std::vector<std::int32_t> index(static_cast<size_t>(box), -1);
    Coord c{{0, 0, 0}};
    const int zlo = d > 2 ? -range : 0, zhi = d > 2 ? range : 0;
    const int ylo = d > 1 ? -range : 0, yhi = d > 1 ? range : 0;
    for (int x = -range; x <= range; ++x)
        for (int y = ylo; y <= yhi; ++y)
            for (int z = zlo; z <= zhi; ++z) {
                c = Coord{{x, y, z}};
                if (!inside(c)) continue;
                index[static_cast<size_t>(flat(c))] =
                    static_cast<std::int32_t>(sites.size());
                sites.push_back(c);
            }

    // Boundary sites have at least one lattice neighbor outside the ball.
    std::vector<char> is_boundary(sites.size(), 0);
    for (size_t i = 0; i < sites.size(); ++i) {
        for (int k = 0; k < d && !is_boundary[i]; ++k) {
            for (int s = -1; s <= 1; s += 2) {
                Coord nb = sites[i];
                nb.x[k] += s;
                if (!inside(nb)) {
                    is_boundary[i] = 1;
                    break;
                }
            }
        }
    }

    LatticeBall ball;
    ball.n_sites = static_cast<std::int64_t>(sites.size());
    std::int64_t interior = 0;
    std::vector<int> node_of(sites.size(), -1);
    ConductanceNetwork net;
    for (size_t i = 0; i < sites.size(); ++i) {
        if (!is_boundary[i]) {
            node_of[i] = net.add_node();
            ++interior;
        } else {
            ++ball.n_boundary;
        }
    }
    const int ground = net.add_node();
    for (size_t i = 0; i < sites.size(); ++i)
        if (is_boundary[i]) node_of[i] = ground;

    Coord origin{{0, 0, 0}};
    const std::int32_t oidx = index[static_cast<size_t>(flat(origin))];
    if (oidx < 0 || is_boundary[static_cast<size_t>(oidx)])
        throw std::invalid_argument("radius too small: origin is boundary");
    ball.origin = node_of[static_cast<size_t>(oidx)];
    ball.ground = ground;

    for (size_t i = 0; i < sites.size(); ++i) {
        for (int k = 0; k < d; ++k) {
            Coord nb = sites[i];
            nb.x[k] += 1;  // positive directions only: each edge once
            if (!inside(nb)) continue;
            const std::int32_t j = index[static_cast<size_t>(flat(nb))];
            const int u = node_of[i], v = node_of[static_cast<size_t>(j)];
            if (u == v) continue;  // both grounded
            net.add_edge(u, v, conductance);
        }
    }
    ball.net = std::move(net);
    (void)interior;
    return ball;
}

std::vector<PolyaPoint> polya_escape_series(int d,
                                            const std::vector<double>& radii,
                                            double conductance, BallNorm norm,
                                            std::int64_t max_sites) {
    for (size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1]))
            throw std::invalid_argument("radii must be increasing");
    std::vector<PolyaPoint> out;
    out.reserve(radii.size());
    for (double r : radii) {
        const LatticeBall ball =
            lattice_ball(d, r, conductance, norm, max_sites);
        const double reff =
            effective_resistance(ball.net, ball.origin, ball.ground);
        out.push_back({r, reff, 1.0 / (2.0 * d * reff)});
    }
    return out;
}

}  // namespace rwre::net
