#include "rwre/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "rwre/annealed.hpp"
#include "rwre/csvio.hpp"
#include "rwre/graphene.hpp"
#include "rwre/network.hpp"
#include "rwre/walk.hpp"

namespace rwre::exp {

namespace {

using nlohmann::json;

constexpr std::uint64_t kEnvTag = 0x656e76;
constexpr std::uint64_t kWalkTag = 0x776c6b;

// ---- config schema ---------------------------------------------------------

struct KeySpec {
    const char* name;
    bool required;
};

const std::map<std::string, std::vector<KeySpec>>& schema() {
    static const std::map<std::string, std::vector<KeySpec>> s = {
        {"classify", {{"law", true}}},
        {"simulate",
         {{"law", true}, {"n", true}, {"walks", true}, {"mode", false},
          {"emit", false}}},
        {"excursion",
         {{"law", true}, {"n_excursions", true}, {"cap", false},
          {"floor_depth", false}}},
        {"sinai",
         {{"law", true}, {"n", true}, {"n_env", true},
          {"walks_per_env", true}}},
        {"network",
         {{"edges", false}, {"edges_file", false}, {"node_a", true},
          {"node_b", true}, {"mc_trials", false}}},
        {"polya", {{"d", true}, {"radii", true}, {"norm", false}}},
        {"graphene-scaling",
         {{"sizes", true}, {"realizations", true}, {"gamma", false},
          {"p", false}, {"c", false}}},
        {"graphene-sweep",
         {{"sweep", true}, {"L", true}, {"realizations", true}, {"c", false},
          {"gammas", false}, {"p", false}, {"p_grid", false},
          {"gamma", false}, {"lattice_out", false}}},
        {"eq23-harness",
         {{"law", true}, {"n_envs", false}, {"ks", false}, {"trials", true},
          {"floor_depth", false}}},
    };
    return s;
}

[[noreturn]] void fail_key(const ParsedConfig& parsed, const std::string& key,
                           const std::string& msg) {
    std::ostringstream os;
    const auto it = parsed.key_lines.find(key);
    if (it != parsed.key_lines.end()) os << "config line " << it->second << ": ";
    os << msg;
    throw ConfigError(os.str());
}

double as_number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("key '" + key + "' must be a number");
    return j.get<double>();
}

std::uint64_t as_count(const json& j, const std::string& key) {
    const double v = as_number(j, key);
    if (!(v > 0.0) || v != std::floor(v))
        throw ConfigError("key '" + key + "' must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

// ---- metric helpers ---------------------------------------------------------

json num_or_tag(double v) {
    if (std::isinf(v)) return json(v > 0 ? "infinite" : "-infinite");
    if (std::isnan(v)) return json("nan");
    return json(v);
}

std::string fd(double v) { return io::format_double(v); }
std::string fi(std::int64_t v) { return std::to_string(v); }
std::string fu(std::uint64_t v) { return std::to_string(v); }

struct TableOut {
    io::CsvTable table;
    std::vector<std::string> legend;  // one line per column
};

struct RunOutput {
    json metrics = json::object();
    TableOut out;
};

// ---- experiment implementations ----------------------------------------------

RunOutput run_classify(const ExperimentConfig& cfg) {
    const EnvironmentLaw law = law_from_json(cfg.canonical.at("law"));
    const SolomonClass cls = classify_solomon(law);
    const double v = solomon_velocity(law);
    const auto k = critical_exponent(law);
    const double excursion = annealed_mean_excursion(law);

    RunOutput r;
    r.metrics["eta"] = cls.mean_log_rho;
    r.metrics["class"] = to_string(cls.kind);
    r.metrics["velocity"] = v;
    r.metrics["critical_exponent"] = k ? json(*k) : json("no-root");
    r.metrics["mean_rho"] = mean_rho(law);
    r.metrics["mean_inv_rho"] = mean_inv_rho(law);
    r.metrics["sigma_sq_log_rho"] = mean_sq_log_rho(law);
    r.metrics["mean_drift"] = mean_drift(law);
    r.metrics["annealed_mean_excursion"] = num_or_tag(excursion);

    r.out.table.columns = {"eta", "class", "velocity", "critical_exponent",
                           "mean_rho", "mean_inv_rho", "sigma_sq_log_rho",
                           "mean_drift", "annealed_mean_excursion"};
    r.out.legend = {
        "eta: E ln rho_0 (nats)",
        "class: transient-right | transient-left | recurrent",
        "velocity: almost-sure limit of X_n/n",
        "critical_exponent: root of E rho_0^k = 1, or no-root",
        "mean_rho: E rho_0",
        "mean_inv_rho: E rho_0^-1",
        "sigma_sq_log_rho: E ln^2 rho_0",
        "mean_drift: E(p_0 - q_0)",
        "annealed_mean_excursion: 2/(1 - E rho_0) or inf"};
    r.out.table.add_row({fd(cls.mean_log_rho), to_string(cls.kind), fd(v),
                         k ? fd(*k) : "no-root", fd(mean_rho(law)),
                         fd(mean_inv_rho(law)), fd(mean_sq_log_rho(law)),
                         fd(mean_drift(law)), fd(excursion)});
    return r;
}

RunOutput run_simulate(const ExperimentConfig& cfg) {
    const EnvironmentLaw law = law_from_json(cfg.canonical.at("law"));
    const auto n = as_count(cfg.canonical.at("n"), "n");
    const auto walks = as_count(cfg.canonical.at("walks"), "walks");
    const std::string mode = cfg.canonical.at("mode").get<std::string>();
    const std::string emit = cfg.canonical.at("emit").get<std::string>();
    const bool annealed = mode == "annealed";

    const PositionEnsemble ens =
        position_ensemble(law, n, walks, cfg.seed, annealed, cfg.threads);

    std::vector<double> vel(ens.finals.size());
    std::uint64_t positive = 0;
    std::vector<double> absf(ens.finals.size());
    for (size_t i = 0; i < ens.finals.size(); ++i) {
        vel[i] = static_cast<double>(ens.finals[i]) / static_cast<double>(n);
        absf[i] = std::abs(static_cast<double>(ens.finals[i]));
        if (ens.finals[i] > 0) ++positive;
    }
    const McEstimate v = mc_estimate(vel);

    RunOutput r;
    r.metrics["velocity_hat"] = v.mean;
    r.metrics["velocity_se"] = v.stderror;
    r.metrics["solomon_velocity"] = solomon_velocity(law);
    r.metrics["frac_positive"] =
        static_cast<double>(positive) / static_cast<double>(walks);
    r.metrics["median_abs_final"] = median_of(absf);

    if (emit == "finals") {
        r.out.table.columns = {"walk", "final"};
        r.out.legend = {"walk: task index",
                        "final: X_n for that walk's substream"};
        for (size_t i = 0; i < ens.finals.size(); ++i)
            r.out.table.add_row({fu(i), fi(ens.finals[i])});
        return r;
    }

    // Single-walk / environment exports share the ensemble's substreams;
    // per-site hashing makes the values window-independent.
    if (emit == "environment") {
        const std::int64_t half =
            static_cast<std::int64_t>(6.0 * std::sqrt(double(n))) + 64;
        const Environment1D env = Environment1D::sample(
            law, -half, half, seed_for(cfg.seed, kEnvTag, std::uint64_t{0}));
        r.out.table.columns = {"site", "p"};
        r.out.legend = {"site: lattice site", "p: right-jump probability"};
        for (std::int64_t x = env.lo(); x <= env.hi(); ++x)
            r.out.table.add_row({fi(x), fd(env.p(x))});
        return r;
    }
    if (walks != 1)
        throw ConfigError("emit = \"" + emit + "\" requires walks = 1");
    const std::int64_t half =
        static_cast<std::int64_t>(6.0 * std::sqrt(double(n))) + 64 +
        static_cast<std::int64_t>(
            std::ceil(std::abs(solomon_velocity(law)) * double(n)));
    const Environment1D env = Environment1D::sample(
        law, -half, half, seed_for(cfg.seed, kEnvTag, std::uint64_t{0}));
    const Trajectory traj = simulate_quenched(
        env, 0, n, seed_for(cfg.seed, kWalkTag, std::uint64_t{0}));
    if (emit == "trajectory") {
        r.out.table.columns = {"time", "position"};
        r.out.legend = {"time: step index", "position: X_t"};
        for (size_t t = 0; t < traj.positions.size(); ++t)
            r.out.table.add_row({fu(t), fi(traj.positions[t])});
        return r;
    }
    if (emit == "local-time") {
        const LocalTimeTable lt = local_time(traj);
        r.out.table.columns = {"site", "count"};
        r.out.legend = {"site: lattice site",
                        "count: visits in [0, n] (local time)"};
        for (const auto& [site, count] : lt.counts)
            r.out.table.add_row({fi(site), fu(count)});
        return r;
    }
    throw ConfigError("unknown emit kind '" + emit + "'");
}

RunOutput run_excursion(const ExperimentConfig& cfg) {
    const EnvironmentLaw law = law_from_json(cfg.canonical.at("law"));
    const auto n_exc = as_count(cfg.canonical.at("n_excursions"),
                                "n_excursions");
    const auto cap = as_count(cfg.canonical.at("cap"), "cap");
    const auto floor_depth =
        as_count(cfg.canonical.at("floor_depth"), "floor_depth");

    const Environment1D env = Environment1D::sample(
        law, -static_cast<std::int64_t>(floor_depth), 2,
        seed_for(cfg.seed, kEnvTag, std::uint64_t{0}));
    const ExcursionSample sample = left_excursions(
        env, n_exc, seed_for(cfg.seed, kWalkTag, std::uint64_t{0}), cap,
        cfg.threads);

    std::vector<double> durations(sample.durations.begin(),
                                  sample.durations.end());
    const McEstimate mc = mc_estimate(durations);

    RunOutput r;
    r.metrics["mc_mean"] = mc.mean;
    r.metrics["mc_se"] = mc.stderror;
    r.metrics["n_completed"] = mc.n;
    r.metrics["n_timeouts"] = sample.n_timeouts;
    try {
        const double omega1 = quenched_excursion_mean(env, 1);
        r.metrics["quenched_mean"] = omega1;
        r.metrics["mc_minus_quenched_in_se"] =
            mc.stderror > 0.0 ? (mc.mean - omega1) / mc.stderror : 0.0;
    } catch (const NotConvergent& e) {
        r.metrics["quenched_mean"] = "not-convergent";
        r.metrics["truncation_bound"] = e.bound;
    }

    std::map<std::uint64_t, std::uint64_t> histogram;
    for (std::uint64_t d : sample.durations) ++histogram[d];
    r.out.table.columns = {"duration", "count"};
    r.out.legend = {"duration: left-excursion length (even, >= 2)",
                    "count: excursions with that duration"};
    for (const auto& [d, cnt] : histogram)
        r.out.table.add_row({fu(d), fu(cnt)});
    return r;
}

RunOutput run_sinai(const ExperimentConfig& cfg) {
    const EnvironmentLaw law = law_from_json(cfg.canonical.at("law"));
    const auto n = as_count(cfg.canonical.at("n"), "n");
    const auto n_env = as_count(cfg.canonical.at("n_env"), "n_env");
    const auto wpe = as_count(cfg.canonical.at("walks_per_env"),
                              "walks_per_env");

    const SinaiEnsemble ens =
        sinai_rescaled_ensemble(law, n, n_env, wpe, cfg.seed, cfg.threads);

    std::vector<double> absf, absr;
    absf.reserve(ens.finals.size());
    absr.reserve(ens.rescaled.size());
    for (auto f : ens.finals) absf.push_back(std::abs(double(f)));
    for (auto x : ens.rescaled) absr.push_back(std::abs(x));

    RunOutput r;
    r.metrics["sigma_sq"] = ens.sigma_sq;
    r.metrics["median_abs_final"] = median_of(absf);
    r.metrics["median_abs_rescaled"] = median_of(absr);
    r.metrics["median_abs_env_median"] = [&] {
        std::vector<double> m;
        for (double x : ens.env_median_rescaled) m.push_back(std::abs(x));
        return median_of(m);
    }();

    r.out.table.columns = {"env", "walk", "final", "rescaled",
                           "env_median_rescaled"};
    r.out.legend = {"env: environment substream index",
                    "walk: walk substream index within env",
                    "final: X_n",
                    "rescaled: sigma_sq * X_n / ln^2 n",
                    "env_median_rescaled: median of rescaled within env"};
    for (std::uint64_t e = 0; e < ens.n_env; ++e)
        for (std::uint64_t w = 0; w < ens.n_walks_per_env; ++w) {
            const size_t i = e * ens.n_walks_per_env + w;
            r.out.table.add_row({fu(e), fu(w), fi(ens.finals[i]),
                                 fd(ens.rescaled[i]),
                                 fd(ens.env_median_rescaled[e])});
        }
    return r;
}

net::ConductanceNetwork network_from_config(const ExperimentConfig& cfg) {
    std::vector<std::array<double, 3>> edges;
    if (cfg.canonical.contains("edges_file")) {
        const std::string text = io::read_file(
            cfg.canonical.at("edges_file").get<std::string>());
        std::istringstream is(text);
        std::string line;
        bool first = true;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (first && line.find_first_not_of("uvconductae, \r") ==
                             std::string::npos) {
                first = false;
                continue;  // header row
            }
            first = false;
            std::array<double, 3> e{};
            char comma;
            std::istringstream ls(line);
            if (!(ls >> e[0] >> comma >> e[1] >> comma >> e[2]))
                throw ConfigError("bad edge row: " + line);
            edges.push_back(e);
        }
    } else if (cfg.canonical.contains("edges")) {
        for (const auto& e : cfg.canonical.at("edges")) {
            if (!e.is_array() || e.size() != 3)
                throw ConfigError("edges entries must be [u, v, conductance]");
            edges.push_back({e[0].get<double>(), e[1].get<double>(),
                             e[2].get<double>()});
        }
    } else {
        throw ConfigError("network experiment needs 'edges' or 'edges_file'");
    }
    int max_node = 0;
    for (const auto& e : edges)
        max_node = std::max({max_node, int(e[0]), int(e[1])});
    net::ConductanceNetwork net(max_node + 1);
    for (const auto& e : edges)
        net.add_edge(int(e[0]), int(e[1]), e[2]);
    return net;
}

RunOutput run_network(const ExperimentConfig& cfg) {
    const net::ConductanceNetwork network = network_from_config(cfg);
    const int a = static_cast<int>(as_number(cfg.canonical.at("node_a"),
                                             "node_a"));
    const int b = static_cast<int>(as_number(cfg.canonical.at("node_b"),
                                             "node_b"));
    const auto mc_trials = cfg.canonical.at("mc_trials").get<std::uint64_t>();

    const auto sol = net::solve_dirichlet(network, {{a, 1.0}, {b, 0.0}});
    const double ia = sol.injected[a];
    const double reff = 1.0 / ia;

    RunOutput r;
    r.metrics["r_eff"] = reff;
    r.metrics["c_eff"] = ia;
    r.metrics["p_esc"] = ia / network.node_conductance(a);
    r.metrics["kirchhoff_residual"] =
        net::kirchhoff_residual(network, sol, {{a, 1.0}, {b, 0.0}});
    if (mc_trials > 0) {
        const McEstimate mc = net::escape_probability_mc(
            network, a, b, mc_trials, seed_for(cfg.seed, kWalkTag),
            cfg.threads);
        r.metrics["mc_p_esc"] = mc.mean;
        r.metrics["mc_p_esc_se"] = mc.stderror;
    }

    r.out.table.columns = {"node", "voltage"};
    r.out.legend = {"node: network node index",
                    "voltage: solved potential (v_a = 1, v_b = 0)"};
    for (int x = 0; x < network.node_count(); ++x)
        r.out.table.add_row({fi(x), fd(sol.voltages[x])});
    return r;
}

RunOutput run_polya(const ExperimentConfig& cfg) {
    const int d = static_cast<int>(as_number(cfg.canonical.at("d"), "d"));
    std::vector<double> radii;
    for (const auto& r : cfg.canonical.at("radii"))
        radii.push_back(r.get<double>());
    const std::string norm_name = cfg.canonical.at("norm").get<std::string>();
    const net::BallNorm norm = norm_name == "l1" ? net::BallNorm::l1
                                                 : net::BallNorm::euclidean;

    const auto series = net::polya_escape_series(d, radii, 1.0, norm);

    bool monotone = true;
    for (size_t i = 1; i < series.size(); ++i)
        monotone = monotone && series[i].p_esc <= series[i - 1].p_esc + 1e-12;

    RunOutput r;
    r.metrics["d"] = d;
    r.metrics["r_eff_last"] = series.back().r_eff;
    r.metrics["p_esc_last"] = series.back().p_esc;
    r.metrics["p_esc_monotone"] = monotone;

    r.out.table.columns = {"r", "R_eff", "p_esc"};
    r.out.legend = {"r: ball radius",
                    "R_eff: effective resistance origin -> grounded sphere",
                    "p_esc: 1 / (2 d R_eff)"};
    for (const auto& pt : series)
        r.out.table.add_row({fd(pt.r), fd(pt.r_eff), fd(pt.p_esc)});
    return r;
}

RunOutput run_graphene_scaling(const ExperimentConfig& cfg) {
    std::vector<int> sizes;
    for (const auto& L : cfg.canonical.at("sizes"))
        sizes.push_back(L.get<int>());
    const auto realizations =
        as_count(cfg.canonical.at("realizations"), "realizations");
    const double gamma = as_number(cfg.canonical.at("gamma"), "gamma");
    const double p = as_number(cfg.canonical.at("p"), "p");
    const double c = as_number(cfg.canonical.at("c"), "c");

    const auto result = graphene::conductance_scaling(
        sizes, realizations, c, gamma, p, cfg.seed, cfg.threads);

    bool decreasing = true;
    for (size_t i = 1; i < result.sizes.size(); ++i)
        decreasing = decreasing &&
                     result.sizes[i].mean < result.sizes[i - 1].mean;

    RunOutput r;
    r.metrics["exponent"] = result.fit.exponent;
    r.metrics["prefactor"] = result.fit.prefactor;
    double max_resid = 0.0;
    for (double res : result.fit.residuals)
        max_resid = std::max(max_resid, std::abs(res));
    r.metrics["max_abs_log_residual"] = max_resid;
    r.metrics["strictly_decreasing"] = decreasing;

    r.out.table.columns = {"L", "mean", "stderr", "n"};
    r.out.legend = {"L: lattice size (plaquettes per side)",
                    "mean: disorder-averaged two-terminal conductance",
                    "stderr: standard error of the mean",
                    "n: realizations"};
    for (const auto& pt : result.sizes)
        r.out.table.add_row(
            {fd(pt.parameter), fd(pt.mean), fd(pt.stderror), fu(pt.n)});
    return r;
}

RunOutput run_graphene_sweep(const ExperimentConfig& cfg) {
    const std::string sweep = cfg.canonical.at("sweep").get<std::string>();
    const int L = static_cast<int>(as_number(cfg.canonical.at("L"), "L"));
    const auto realizations =
        as_count(cfg.canonical.at("realizations"), "realizations");
    const double c = as_number(cfg.canonical.at("c"), "c");

    RunOutput r;
    graphene::ConductivityCurve curve;
    if (sweep == "gamma") {
        std::vector<double> gammas;
        for (const auto& g : cfg.canonical.at("gammas"))
            gammas.push_back(g.get<double>());
        curve = graphene::sigma_min_curve(gammas, L, realizations, c,
                                          cfg.seed, cfg.threads);
        std::vector<double> means;
        for (const auto& pt : curve) means.push_back(pt.mean);
        try {
            const auto fit = graphene::fit_leakage_exponent(gammas, means);
            r.metrics["alpha"] = fit.exponent;
            r.metrics["prefactor"] = fit.prefactor;
        } catch (const graphene::NonpositiveMean&) {
            r.metrics["alpha"] = "undefined";
        }
    } else if (sweep == "p") {
        const double gamma = as_number(cfg.canonical.at("gamma"), "gamma");
        std::vector<double> grid;
        if (cfg.canonical.contains("p_grid"))
            for (const auto& p : cfg.canonical.at("p_grid"))
                grid.push_back(p.get<double>());
        else
            grid = graphene::default_doping_grid();
        curve = graphene::doping_sweep(grid, L, gamma, realizations, c,
                                       cfg.seed, cfg.threads);
        size_t argmin = 0;
        for (size_t i = 1; i < curve.size(); ++i)
            if (curve[i].mean < curve[argmin].mean) argmin = i;
        r.metrics["argmin_p"] = curve[argmin].parameter;
        r.metrics["min_mean"] = curve[argmin].mean;
    } else {
        throw ConfigError("sweep must be \"gamma\" or \"p\"");
    }

    if (cfg.canonical.contains("lattice_out")) {
        const auto lat = graphene::sample_lattice(
            L, c,
            sweep == "gamma" ? curve.front().parameter
                             : as_number(cfg.canonical.at("gamma"), "gamma"),
            sweep == "p" ? curve.front().parameter : 0.0,
            seed_for(cfg.seed, 0x677261, std::uint64_t{0}, std::uint64_t{0}));
        io::write_file_atomic(
            cfg.canonical.at("lattice_out").get<std::string>(),
            graphene::lattice_to_text(lat), cfg.force);
    }

    r.out.table.columns = {sweep == "gamma" ? "gamma" : "p", "mean", "stderr",
                           "n"};
    r.out.legend = {std::string(sweep == "gamma" ? "gamma" : "p") +
                        ": swept parameter",
                    "mean: disorder-averaged two-terminal conductance",
                    "stderr: standard error of the mean",
                    "n: realizations"};
    for (const auto& pt : curve)
        r.out.table.add_row(
            {fd(pt.parameter), fd(pt.mean), fd(pt.stderror), fu(pt.n)});
    return r;
}

RunOutput run_eq23(const ExperimentConfig& cfg) {
    const EnvironmentLaw law = law_from_json(cfg.canonical.at("law"));
    const auto n_envs = as_count(cfg.canonical.at("n_envs"), "n_envs");
    const auto trials = as_count(cfg.canonical.at("trials"), "trials");
    const auto floor_depth =
        as_count(cfg.canonical.at("floor_depth"), "floor_depth");
    std::vector<std::int64_t> ks;
    for (const auto& k : cfg.canonical.at("ks"))
        ks.push_back(k.get<std::int64_t>());
    std::int64_t kmax = 3;
    for (auto k : ks) {
        if (k < 3) throw ConfigError("ks entries must be >= 3");
        kmax = std::max(kmax, k);
    }

    RunOutput r;
    r.out.table.columns = {"env",     "k",         "exact",   "mc",
                           "mc_se",   "n_truncated", "formula",
                           "formula_rel_dev", "mc_minus_exact_in_se"};
    r.out.legend = {
        "env: environment substream index",
        "k: target site",
        "exact: chain-network Dirichlet solve of p_0 P_1(hit k before 0)",
        "mc: Monte Carlo estimate (walks from 0 to return or to k)",
        "mc_se: standard error of mc",
        "n_truncated: walks cut at the window floor (count as returns)",
        "formula: printed passage formula p_0 / W_k",
        "formula_rel_dev: (formula - exact) / exact",
        "mc_minus_exact_in_se: (mc - exact) / mc_se"};

    double max_abs_z = 0.0, max_rel = 0.0, min_rel = 0.0;
    for (std::uint64_t e = 0; e < n_envs; ++e) {
        const Environment1D env = Environment1D::sample(
            law, -static_cast<std::int64_t>(floor_depth), kmax,
            seed_for(cfg.seed, kEnvTag, e));
        const auto chain = net::chain_network_from_env(env, -1, kmax);
        for (size_t ki = 0; ki < ks.size(); ++ki) {
            const std::int64_t k = ks[ki];
            const auto sol = net::solve_dirichlet(
                chain, {{static_cast<int>(0 - (-1)), 0.0},
                        {static_cast<int>(k - (-1)), 1.0}});
            const double exact = env.p(0) * sol.voltages[2];  // site 1
            const HitBeforeReturn mc = hit_before_return_mc(
                env, k, trials, seed_for(cfg.seed, kWalkTag, e, ki),
                cfg.threads);
            const double formula = passage_formula(env, k);
            const double z = mc.estimate.stderror > 0.0
                                 ? (mc.estimate.mean - exact) /
                                       mc.estimate.stderror
                                 : 0.0;
            const double rel = (formula - exact) / exact;
            max_abs_z = std::max(max_abs_z, std::abs(z));
            max_rel = std::max(max_rel, rel);
            min_rel = std::min(min_rel, rel);
            r.out.table.add_row({fu(e), fi(k), fd(exact),
                                 fd(mc.estimate.mean),
                                 fd(mc.estimate.stderror),
                                 fu(mc.n_truncated), fd(formula), fd(rel),
                                 fd(z)});
        }
    }
    r.metrics["max_abs_mc_z"] = max_abs_z;
    r.metrics["max_formula_rel_dev"] = max_rel;
    r.metrics["min_formula_rel_dev"] = min_rel;
    return r;
}

RunOutput dispatch(const ExperimentConfig& cfg) {
    if (cfg.experiment == "classify") return run_classify(cfg);
    if (cfg.experiment == "simulate") return run_simulate(cfg);
    if (cfg.experiment == "excursion") return run_excursion(cfg);
    if (cfg.experiment == "sinai") return run_sinai(cfg);
    if (cfg.experiment == "network") return run_network(cfg);
    if (cfg.experiment == "polya") return run_polya(cfg);
    if (cfg.experiment == "graphene-scaling") return run_graphene_scaling(cfg);
    if (cfg.experiment == "graphene-sweep") return run_graphene_sweep(cfg);
    if (cfg.experiment == "eq23-harness") return run_eq23(cfg);
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

void apply_defaults(ExperimentConfig& cfg) {
    json& c = cfg.canonical;
    const auto set_default = [&](const char* key, json value) {
        if (!c.contains(key)) c[key] = std::move(value);
    };
    if (cfg.experiment == "simulate") {
        set_default("mode", "annealed");
        set_default("emit", "finals");
        const std::string mode = c.at("mode").get<std::string>();
        if (mode != "annealed" && mode != "quenched")
            throw ConfigError("mode must be \"annealed\" or \"quenched\"");
    } else if (cfg.experiment == "excursion") {
        set_default("cap", json(kDefaultExcursionCap));
        set_default("floor_depth", json(10'000));
    } else if (cfg.experiment == "network") {
        set_default("mc_trials", json(0));
    } else if (cfg.experiment == "polya") {
        set_default("norm", "euclidean");
    } else if (cfg.experiment == "graphene-scaling") {
        set_default("gamma", json(0.0));
        set_default("p", json(0.0));
        set_default("c", json(1.0));
    } else if (cfg.experiment == "graphene-sweep") {
        set_default("c", json(1.0));
        const std::string sweep = c.at("sweep").get<std::string>();
        if (sweep == "gamma" && !c.contains("gammas"))
            throw ConfigError("gamma sweep needs a 'gammas' array");
        if (sweep == "p") set_default("gamma", json(0.0));
    } else if (cfg.experiment == "eq23-harness") {
        set_default("n_envs", json(20));
        set_default("ks", json::array({3, 5, 8}));
        set_default("floor_depth", json(10'000));
    }
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, keys] : schema()) k.push_back(name);
        return k;
    }();
    return kinds;
}

ExperimentConfig validate_config(
    const ParsedConfig& parsed,
    const std::optional<std::string>& expect_experiment,
    const std::optional<std::uint64_t>& seed_override,
    const std::optional<std::string>& out_override,
    const std::optional<std::string>& format_override,
    const std::optional<int>& threads_override, bool force) {
    const json& v = parsed.values;
    if (!v.is_object()) throw ConfigError("config must be a table");

    ExperimentConfig cfg;
    cfg.force = force;

    // experiment kind: from config, or implied by the subcommand
    if (v.contains("experiment")) {
        if (!v.at("experiment").is_string())
            fail_key(parsed, "experiment", "experiment must be a string");
        cfg.experiment = v.at("experiment").get<std::string>();
    } else if (expect_experiment) {
        cfg.experiment = *expect_experiment;
    } else {
        throw ConfigError("config is missing the 'experiment' key");
    }
    const auto sit = schema().find(cfg.experiment);
    if (sit == schema().end())
        fail_key(parsed, "experiment",
                 "unknown experiment '" + cfg.experiment + "'");
    if (expect_experiment && *expect_experiment != cfg.experiment) {
        // `graphene` subcommand accepts both graphene kinds.
        const bool graphene_alias =
            *expect_experiment == "graphene" &&
            cfg.experiment.rfind("graphene-", 0) == 0;
        if (!graphene_alias)
            throw ConfigError("config experiment '" + cfg.experiment +
                              "' does not match subcommand '" +
                              *expect_experiment + "'");
    }

    // reject unknown keys
    static const std::set<std::string> common = {
        "experiment", "seed", "out", "format", "threads"};
    for (const auto& [key, value] : v.items()) {
        if (common.count(key)) continue;
        bool known = false;
        for (const auto& ks : sit->second) known = known || key == ks.name;
        if (!known) fail_key(parsed, key, "unknown key '" + key + "'");
    }
    for (const auto& ks : sit->second)
        if (ks.required && !v.contains(ks.name))
            throw ConfigError(std::string("missing required key '") + ks.name +
                              "'");

    // seed: mandatory, no wall-clock fallback
    if (seed_override) {
        cfg.seed = *seed_override;
    } else if (v.contains("seed")) {
        if (!v.at("seed").is_number_unsigned() &&
            !v.at("seed").is_number_integer())
            fail_key(parsed, "seed", "seed must be a nonnegative integer");
        cfg.seed = v.at("seed").get<std::uint64_t>();
    } else {
        throw ConfigError("seed is mandatory (config key or --seed)");
    }

    cfg.out = out_override ? *out_override
                           : v.value("out", std::string{});
    cfg.format = format_override ? *format_override
                                 : v.value("format", std::string{"csv"});
    if (cfg.format != "csv" && cfg.format != "json")
        throw ConfigError("format must be \"csv\" or \"json\"");
    cfg.threads = threads_override
                      ? *threads_override
                      : static_cast<int>(v.value("threads", 0));
    if (cfg.threads < 0) throw ConfigError("threads must be >= 0");

    cfg.canonical = v;
    for (const auto& key : common) cfg.canonical.erase(key);
    cfg.canonical["experiment"] = cfg.experiment;
    cfg.canonical["seed"] = cfg.seed;
    cfg.canonical["threads"] = cfg.threads;
    cfg.canonical["format"] = cfg.format;
    apply_defaults(cfg);

    // Fail fast on malformed counts (negative, fractional, zero).
    for (const auto& [key, value] : cfg.canonical.items()) {
        static const std::set<std::string> counts = {
            "n", "walks", "n_excursions", "cap", "floor_depth", "n_env",
            "walks_per_env", "realizations", "trials", "n_envs",
            "mc_trials"};
        if (counts.count(key) && key != "mc_trials")
            (void)as_count(value, key);
        if (key == "mc_trials") {
            if ((!value.is_number_integer() && !value.is_number_unsigned()) ||
                value.get<double>() < 0.0)
                throw ConfigError("mc_trials must be a nonnegative integer");
        }
    }
    return cfg;
}

RunRecord run(const ExperimentConfig& cfg) {
    RunOutput output = dispatch(cfg);

    RunRecord rec;
    rec.record["artifact_version"] = kArtifactVersion;
    rec.record["substream_scheme"] = kSubstreamScheme;
    rec.record["experiment"] = cfg.experiment;
    rec.record["config"] = cfg.canonical;
    rec.record["metrics"] = output.metrics;

    if (!cfg.out.empty()) {
        if (cfg.format == "json") {
            json table;
            table["columns"] = output.out.table.columns;
            auto rows = json::array();
            for (const auto& row : output.out.table.rows)
                rows.push_back(row);
            table["rows"] = rows;
            json full = rec.record;
            full["table"] = table;
            io::write_file_atomic(cfg.out, full.dump(2) + "\n", cfg.force);
        } else {
            io::write_file_atomic(cfg.out, output.out.table.to_string(),
                                  cfg.force);
            std::ostringstream legend;
            legend << "experiment = " << cfg.experiment << "\n";
            legend << "master_seed = " << cfg.seed << "\n";
            legend << "substreams = " << kSubstreamScheme << "\n";
            legend << "artifact_version = " << kArtifactVersion << "\n";
            for (const auto& line : output.out.legend)
                legend << line << "\n";
            io::write_file_atomic(cfg.out + ".legend.txt", legend.str(),
                                  cfg.force);
            io::write_file_atomic(cfg.out + ".record.json",
                                  rec.record.dump(2) + "\n", cfg.force);
        }
    }
    return rec;
}

ReplayReport replay(const std::filesystem::path& record_path,
                    std::optional<int> threads_override) {
    json record;
    try {
        record = json::parse(io::read_file(record_path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("record: ") + e.what());
    }
    if (!record.contains("config") || !record.contains("metrics"))
        throw ConfigError("record lacks a config echo or metrics");

    ReplayReport report;
    report.recorded_version = record.value("artifact_version", "?");
    report.version_mismatch = report.recorded_version != kArtifactVersion;

    ParsedConfig parsed;
    parsed.values = record.at("config");
    ExperimentConfig cfg = validate_config(parsed, std::nullopt, std::nullopt,
                                           std::nullopt, std::nullopt,
                                           threads_override);
    cfg.out.clear();  // replay never writes

    const RunRecord fresh = run(cfg);
    const json& expected = record.at("metrics");
    const json& actual = fresh.metrics();

    report.all_pass = true;
    for (const auto& [name, value] : expected.items()) {
        MetricCheck check;
        check.name = name;
        check.expected = value.dump();
        check.actual = actual.contains(name) ? actual.at(name).dump()
                                             : std::string("<missing>");
        check.pass = check.expected == check.actual;
        report.all_pass = report.all_pass && check.pass;
        report.checks.push_back(std::move(check));
    }
    for (const auto& [name, value] : actual.items()) {
        if (!expected.contains(name)) {
            report.checks.push_back(
                {name, "<missing>", value.dump(), false});
            report.all_pass = false;
        }
    }
    return report;
}

}  // namespace rwre::exp
