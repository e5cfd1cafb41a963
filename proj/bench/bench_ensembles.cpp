// Serial-vs-OpenMP benchmark for the ensemble kernels. The parallel path
// must reproduce the serial reference bit-for-bit (asserted here), so the
// table is purely about throughput.
//
//   ./rwre_bench [threads]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "rwre/ensemble.hpp"
#include "rwre/graphene.hpp"
#include "rwre/walk.hpp"

using namespace rwre;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

template <typename Run, typename Same>
void bench_case(const char* name, Run&& run, Same&& same, int threads) {
    const auto t_serial = clock_type::now();
    const auto serial = run(1);
    const double s_serial = seconds_since(t_serial);

    const auto t_par = clock_type::now();
    const auto parallel = run(threads);
    const double s_par = seconds_since(t_par);

    const bool identical = same(serial, parallel);
    std::printf("%-34s %9.3f s %9.3f s %6.2fx  %s\n", name, s_serial, s_par,
                s_serial / s_par, identical ? "bit-identical" : "MISMATCH");
    if (!identical) std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
    const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
    std::printf("%-34s %11s %11s %7s\n", "kernel", "serial", "openmp",
                "speedup");

    const auto zero_speed =
        EnvironmentLaw::finite_support({{0.8, 0.5}, {0.3, 0.5}});
    bench_case(
        "walk ensemble 256 x 1e5 steps",
        [&](int t) { return position_ensemble(zero_speed, 100'000, 256, 7, true, t); },
        [](const PositionEnsemble& a, const PositionEnsemble& b) {
            return a.finals == b.finals;
        },
        threads);

    const auto recurrent =
        EnvironmentLaw::finite_support({{0.3, 0.5}, {0.7, 0.5}});
    bench_case(
        "sinai ensemble 24 x 8 x 2e5 steps",
        [&](int t) {
            return sinai_rescaled_ensemble(recurrent, 200'000, 24, 8, 7, t);
        },
        [](const SinaiEnsemble& a, const SinaiEnsemble& b) {
            return a.finals == b.finals && a.rescaled == b.rescaled;
        },
        threads);

    bench_case(
        "graphene disorder avg L=32 x 64",
        [&](int t) {
            return graphene::sigma_min_curve({0.05}, 32, 64, 1.0, 7, t);
        },
        [](const graphene::ConductivityCurve& a,
           const graphene::ConductivityCurve& b) {
            return a[0].mean == b[0].mean && a[0].stderror == b[0].stderror;
        },
        threads);

    return 0;
}
