// Reproducible experiment runner behind the CLI: validated configs,
// deterministic substream-seeded runs, plot-ready CSV + JSON run records,
// and replay verification (same config + seed => bit-identical metrics).

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rwre/config.hpp"

namespace rwre::exp {

inline constexpr char kArtifactVersion[] = "0.1.0";

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json canonical;  // validated config with defaults applied
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out;     // empty: do not write files
    std::string format;  // "csv" | "json"
    bool force = false;
};

// Validates a parsed config against the experiment's key schema; rejects
// unknown keys (with line numbers for the text format), applies defaults,
// and resolves CLI overrides.
ExperimentConfig validate_config(
    const ParsedConfig& parsed,
    const std::optional<std::string>& expect_experiment = std::nullopt,
    const std::optional<std::uint64_t>& seed_override = std::nullopt,
    const std::optional<std::string>& out_override = std::nullopt,
    const std::optional<std::string>& format_override = std::nullopt,
    const std::optional<int>& threads_override = std::nullopt,
    bool force = false);

struct RunRecord {
    nlohmann::json record;  // version, scheme, config echo, metrics, table

    const nlohmann::json& metrics() const { return record.at("metrics"); }
};

// Runs the experiment and, when cfg.out is set, writes outputs atomically:
// format csv  -> <out> (table), <out>.legend.txt, <out>.record.json
// format json -> <out> (record with the table embedded)
RunRecord run(const ExperimentConfig& cfg);

struct MetricCheck {
    std::string name;
    std::string expected;  // canonical serialization
    std::string actual;
    bool pass = false;
};

struct ReplayReport {
    bool all_pass = false;
    bool version_mismatch = false;
    std::string recorded_version;
    std::vector<MetricCheck> checks;
};

// Re-runs the record's embedded config and compares every metric for
// bit-identical equality. Never writes files.
ReplayReport replay(const std::filesystem::path& record_path,
                    std::optional<int> threads_override = std::nullopt);

// Known experiment kinds (config `experiment` values).
const std::vector<std::string>& experiment_kinds();

}  // namespace rwre::exp
