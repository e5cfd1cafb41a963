// Conductance networks and their harmonic analysis: the reversible walk
// with P_xy = C_xy / C_x, Dirichlet voltage solves (energy minimization),
// currents, effective resistance / conductance, escape probabilities, and
// the lattice-ball construction used for the dimension-dependent
// recurrence experiments.

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/environment.hpp"
#include "rwre/rng.hpp"

namespace rwre::net {

struct DisconnectedNetwork : std::runtime_error {
    DisconnectedNetwork()
        : std::runtime_error(
              "network has a component without a boundary node") {}
};

struct ConductanceOverflow : std::runtime_error {
    explicit ConductanceOverflow(double log_range)
        : std::runtime_error(
              "chain conductances exceed the floating-point range "
              "(use the log-domain passage solve instead)"),
          log_range(log_range) {}
    double log_range;
};

// Undirected weighted graph; parallel edges accumulate their conductances,
// which is equivalent for every quantity computed here.
class ConductanceNetwork {
  public:
    ConductanceNetwork() = default;
    explicit ConductanceNetwork(int n_nodes) : adj_(n_nodes) {}

    int add_node() {
        adj_.emplace_back();
        return static_cast<int>(adj_.size()) - 1;
    }

    void add_edge(int u, int v, double c);

    int node_count() const { return static_cast<int>(adj_.size()); }

    const std::map<int, double>& neighbors(int x) const { return adj_[x]; }

    double conductance(int u, int v) const {
        const auto it = adj_[u].find(v);
        return it == adj_[u].end() ? 0.0 : it->second;
    }

    // C_x = sum_z C_xz
    double node_conductance(int x) const {
        double c = 0.0;
        for (const auto& [y, cxy] : adj_[x]) c += cxy;
        return c;
    }

    bool is_connected() const;

    // Component labels from BFS; nodes in the same component share a label.
    std::vector<int> component_labels() const;

  private:
    std::vector<std::map<int, double>> adj_;
};

// Row-stochastic jump matrix P_xy = C_xy / C_x (dense; small networks).
// Throws DisconnectedNetwork when the graph is not connected.
std::vector<std::vector<double>> transition_matrix(
    const ConductanceNetwork& net);

struct HarmonicSolution {
    std::vector<double> voltages;  // per node
    std::vector<double> injected;  // external current into each boundary
                                   // node; zero at interior nodes
    // i_xy = C_xy (v_x - v_y)
    double edge_current(const ConductanceNetwork& net, int x, int y) const {
        return net.conductance(x, y) * (voltages[x] - voltages[y]);
    }
};

// Solves the Dirichlet problem: fixed voltages on the boundary nodes,
// interior voltages the conductance-weighted average of their neighbors
// (equivalently, minimizers of the dissipated energy). Direct sparse
// factorization; `tol` bounds the accepted relative Kirchhoff residual.
HarmonicSolution solve_dirichlet(const ConductanceNetwork& net,
                                 const std::map<int, double>& boundary,
                                 double tol = 1e-10);

// Max interior net-current imbalance of a solution (for residual checks).
double kirchhoff_residual(const ConductanceNetwork& net,
                          const HarmonicSolution& sol,
                          const std::map<int, double>& boundary);

double effective_resistance(const ConductanceNetwork& net, int a, int b);
double effective_conductance(const ConductanceNetwork& net, int a, int b);

// P(walker from a reaches b before returning to a) = C_eff / C_a.
double escape_probability(const ConductanceNetwork& net, int a, int b);

// MC frequency of hitting absorb_a before absorb_b starting from `start`,
// walking with the network's transition probabilities.
McEstimate hitting_probability_mc(const ConductanceNetwork& net, int start,
                                  int absorb_a, int absorb_b,
                                  std::uint64_t n_trials, std::uint64_t seed,
                                  int threads = 0);

// MC estimate of escape_probability: one forced step from a, then walk to
// absorption at a or b.
McEstimate escape_probability_mc(const ConductanceNetwork& net, int a, int b,
                                 std::uint64_t n_trials, std::uint64_t seed,
                                 int threads = 0);

// ---- birth-death chain bridge ----------------------------------------------

// Chain on [left, right] whose walk law equals the environment's quenched
// law: C_{x,x+1} = C_{x-1,x} / rho_x with C_{left,left+1} = 1. Node index
// of site x is x - left. Throws ConductanceOverflow when the conductance
// range leaves double precision (|log C| > 200).
ConductanceNetwork chain_network_from_env(const Environment1D& env,
                                          std::int64_t left,
                                          std::int64_t right);

// ---- lattice balls ---------------------------------------------------------

enum class BallNorm { euclidean, l1 };

struct LatticeBall {
    ConductanceNetwork net;
    int origin = 0;       // node index of the lattice origin
    int ground = 0;       // the merged boundary super-node
    std::int64_t n_sites = 0;     // lattice sites inside the ball
    std::int64_t n_boundary = 0;  // sites merged into the ground node
};

// Ball of radius r in Z^d (d = 1, 2, 3) with unit-conductance
// nearest-neighbor edges; sites with a neighbor outside the ball are
// merged into one grounded super-node (their edges to the interior are
// kept with multiplicity).
LatticeBall lattice_ball(int d, double r, double conductance = 1.0,
                         BallNorm norm = BallNorm::euclidean,
                         std::int64_t max_sites = 2'000'000);

struct PolyaPoint {
    double r;
    double r_eff;   // origin to grounded sphere
    double p_esc;   // 1 / (2 d R_eff)
};

// Exact escape-probability series p_esc(r) = 1/(2 d R_eff(r)).
std::vector<PolyaPoint> polya_escape_series(int d,
                                            const std::vector<double>& radii,
                                            double conductance = 1.0,
                                            BallNorm norm = BallNorm::euclidean,
                                            std::int64_t max_sites = 2'000'000);

}  // namespace rwre::net
