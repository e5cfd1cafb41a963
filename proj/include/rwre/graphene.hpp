// Random-resistor-network model of charge-puddle conduction in a
// charge-neutral sheet: an L x L checkerboard of +-1 doped plaquettes,
// each contributing one open cross-bond of conductance c (parity-selected
// by its sign) and one closed bond, plus weak axis-aligned leakage bonds
// gamma*c. Two-terminal conductance is measured between bus bars merging
// the first and last node columns.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwre/ensemble.hpp"
#include "rwre/network.hpp"

namespace rwre::graphene {

struct GrapheneLattice {
    int L = 0;            // plaquettes per side; nodes are (L+1)^2
    double c = 1.0;       // open-bond conductance
    double gamma = 0.0;   // leakage parameter (axis bonds = gamma * c)
    double p_doping = 0.0;  // E X = p, P(X=+1) = (1+p)/2
    std::uint64_t seed = 0;
    std::vector<std::int8_t> field;  // +-1 per plaquette, row-major (i*L+j)

    std::int8_t X(int i, int j) const {
        return field[static_cast<size_t>(i) * L + j];
    }
};

GrapheneLattice sample_lattice(int L, double c, double gamma, double p_doping,
                               std::uint64_t seed);

// Plaquette-grid text: L lines of L space-separated +-1 entries (row i per
// line, column j within). For fixture reuse.
std::string lattice_to_text(const GrapheneLattice& lat);
GrapheneLattice lattice_from_text(const std::string& text, double c,
                                  double gamma);

struct TerminalNetwork {
    net::ConductanceNetwork net;
    int source = 0;  // bus bar over node column i = 0
    int drain = 1;   // bus bar over node column i = L
};

// Realizes the lattice's bond rule: plaquette (i,j) opens its diagonal
// (i,j)-(i+1,j+1) with conductance c[1 + (-1)^{i+j} X_ij]/2 and its
// anti-diagonal (i,j+1)-(i+1,j) with the complementary c[1 - ...]/2;
// axis bonds carry gamma*c. Zero-conductance bonds are omitted.
TerminalNetwork build_network(const GrapheneLattice& lat);

// Source current with source = 1 V, drain = 0 V; 0 when the terminals are
// in different components (no error: this is a legitimate sample value).
double two_terminal_conductance(const GrapheneLattice& lat);
double two_terminal_conductance(const TerminalNetwork& tn);

struct SweepPoint {
    double parameter = 0.0;
    double mean = 0.0;
    double stderror = 0.0;
    std::uint64_t n = 0;
};
using ConductivityCurve = std::vector<SweepPoint>;

struct PowerLawFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    std::vector<double> residuals;  // log-space, per input point
};

struct NonpositiveMean : std::runtime_error {
    explicit NonpositiveMean(const std::string& what)
        : std::runtime_error(what) {}
};

// Disorder-averaged <C(L)> per size plus the log-log fit of
// <C(L)> = (a/L)^x.
struct ScalingResult {
    ConductivityCurve sizes;  // parameter = L
    PowerLawFit fit;
};

ScalingResult conductance_scaling(const std::vector<int>& Ls,
                                  std::uint64_t n_realizations, double c,
                                  double gamma, double p_doping,
                                  std::uint64_t seed, int threads = 0);

// Mean conductance vs gamma at p = 0 (the conductivity minimum curve).
ConductivityCurve sigma_min_curve(const std::vector<double>& gammas, int L,
                                  std::uint64_t n_realizations, double c,
                                  std::uint64_t seed, int threads = 0);

// Mean conductance vs doping p at fixed gamma.
ConductivityCurve doping_sweep(const std::vector<double>& p_grid, int L,
                               double gamma, std::uint64_t n_realizations,
                               double c, std::uint64_t seed, int threads = 0);

// -1 to 1 in steps of 0.0125 (161 points).
std::vector<double> default_doping_grid();

// Least squares on ln(mean) vs ln(L) for the decaying model (a/L)^x.
PowerLawFit fit_size_scaling(const std::vector<double>& Ls,
                             const std::vector<double>& means);

// Least squares on ln(sigma) vs ln(gamma): sigma = prefactor * gamma^alpha.
// The prefactor absorbs u*c*F(0).
PowerLawFit fit_leakage_exponent(const std::vector<double>& gammas,
                                 const std::vector<double>& means);

}  // namespace rwre::graphene
