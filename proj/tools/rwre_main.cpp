// Command-line experiment runner. One config per invocation; outputs are
// written atomically and embed the master seed so any record can be
// replayed bit-identically.
//
// Exit codes: 0 success, 2 configuration/usage error, 3 runtime error,
// 4 replay mismatch.

#include <chrono>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rwre/csvio.hpp"
#include "rwre/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitReplayMismatch = 4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> threads;
    bool force = false;
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "experiment config file")
        ->required();
    cmd->add_option("--seed", flags.seed, "master seed (overrides config)");
    cmd->add_option("--out", flags.out, "output path (overrides config)");
    cmd->add_option("--format", flags.format, "csv or json (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", flags.threads,
                    "worker threads (0 = runtime default)");
    cmd->add_flag("--force", flags.force, "replace existing output files");
}

int run_subcommand(const std::string& kind, const CommonFlags& flags) {
    const std::string text = rwre::io::read_file(flags.config_path);
    const rwre::exp::ParsedConfig parsed = rwre::exp::parse_config_text(text);
    const rwre::exp::ExperimentConfig cfg = rwre::exp::validate_config(
        parsed, kind, flags.seed, flags.out, flags.format, flags.threads,
        flags.force);

    const auto t0 = std::chrono::steady_clock::now();
    const rwre::exp::RunRecord record = rwre::exp::run(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    const double secs =
        std::chrono::duration<double>(t1 - t0).count();

    std::cout << "experiment " << cfg.experiment << " seed " << cfg.seed
              << " done in " << secs << " s\n";
    for (const auto& [name, value] : record.metrics().items())
        std::cout << "  " << name << " = " << value.dump() << "\n";
    if (!cfg.out.empty()) std::cout << "wrote " << cfg.out << "\n";
    return kExitOk;
}

int run_replay(const std::string& record_path,
               const std::optional<int>& threads) {
    const rwre::exp::ReplayReport report =
        rwre::exp::replay(record_path, threads);
    if (report.version_mismatch)
        std::cout << "warning: record version " << report.recorded_version
                  << " differs from artifact version "
                  << rwre::exp::kArtifactVersion << "\n";
    for (const auto& check : report.checks) {
        std::cout << (check.pass ? "PASS " : "FAIL ") << check.name;
        if (!check.pass)
            std::cout << " expected " << check.expected << " got "
                      << check.actual;
        std::cout << "\n";
    }
    std::cout << (report.all_pass ? "replay: all metrics match\n"
                                  : "replay: metric mismatch\n");
    return report.all_pass ? kExitOk : kExitReplayMismatch;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk-in-random-environment experiment runner"};
    app.require_subcommand(1);

    // One subcommand per experiment family; `graphene` accepts both the
    // scaling and sweep experiment kinds from the config.
    const std::vector<std::pair<std::string, std::string>> families = {
        {"classify", "law classification and closed-form quantities"},
        {"simulate", "final-position ensembles / trajectory export"},
        {"excursion", "left-excursion durations, MC vs quenched solve"},
        {"sinai", "recurrent-law rescaled position ensemble"},
        {"network", "conductance network solve from an edge list"},
        {"polya", "lattice-ball escape probability series"},
        {"graphene", "random-resistor-network conductance experiments"},
        {"eq23", "passage-before-return three-way comparison"},
    };
    std::map<std::string, CommonFlags> flags;
    std::map<CLI::App*, std::string> kinds;
    for (const auto& [name, help] : families) {
        CLI::App* cmd = app.add_subcommand(name, help);
        attach_common(cmd, flags[name]);
        if (name == "graphene")
            kinds[cmd] = "graphene";  // resolved from config
        else if (name == "eq23")
            kinds[cmd] = "eq23-harness";
        else
            kinds[cmd] = name;
    }

    std::string replay_path;
    std::optional<int> replay_threads;
    CLI::App* replay_cmd =
        app.add_subcommand("replay", "re-run a record and verify metrics");
    replay_cmd->add_option("record", replay_path, "run record (json)")
        ->required();
    replay_cmd->add_option("--threads", replay_threads,
                           "worker threads (0 = runtime default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (replay_cmd->parsed()) return run_replay(replay_path, replay_threads);
        for (auto& [cmd, kind] : kinds)
            if (cmd->parsed()) return run_subcommand(kind, flags[cmd->get_name()]);
        std::cerr << "no subcommand selected\n";
        return kExitConfig;
    } catch (const rwre::exp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
