#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpslab/diagnostics.hpp"
#include "tpslab/dynamics.hpp"
#include "tpslab/models.hpp"
#include "tpslab/tps.hpp"
#include "tpslab/types.hpp"

namespace tpslab::scenario {

inline constexpr const char* kVersion = "0.1.0";

struct Finding {
    errc code = errc::config_invalid;
    std::string field;
    std::string message;

    // insufficient_horizon is advisory; everything else blocks execution
    bool blocking() const { return code != errc::insufficient_horizon; }
};

struct StateSpec {
    enum class Kind { basis, amplitudes, haar };
    Kind kind = Kind::basis;
    int index = 1;  // 1-based basis index
    std::vector<cx> amplitudes;
    std::uint64_t seed = 0;
};

struct ModelConfig {
    enum class Kind { xx_chain, central_spin, gue };
    Kind kind = Kind::gue;
    int sites = 0;                  // xx_chain / central_spin (bath sites)
    double field = 0.0;             // xx_chain
    std::vector<double> couplings;  // central_spin, empty -> 1/n
    int dim = 0;                    // gue
    std::uint64_t seed = 0;         // gue

    int dimension() const;
    std::string describe() const;
};

struct TpsConfig {
    enum class Kind { tps1, tps2, site, fermion_mode, frame_file };
    Kind kind = Kind::tps1;
    int m = 0;
    int n = 0;
    std::vector<int> assignment;  // optional; 1-based grid cells per eigenindex
    int site = 1;
    int mode = 1;
    std::string path;
};

struct GridConfig {
    double t_max = 0.0;           // explicit horizon, or
    double t_max_over_gap = 0.0;  // multiple of 1/gap_min, resolved at run time
    int samples = 0;

    bool used() const { return samples > 0; }
};

struct DiagnosticConfig {
    std::string name;
    std::string params_json;  // raw object, parsed strictly by the handler
};

struct ScenarioConfig {
    std::string name;
    std::string description;
    ModelConfig model;
    TpsConfig tps;
    StateSpec system_state;
    StateSpec bath_state;
    GridConfig grid;
    std::vector<DiagnosticConfig> diagnostics;
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    int max_dim = 4096;
};

// Strict parse: unknown keys are errors and every message names the failing
// field ("tps.m", "diagnostics[2].window.lo", ...).
ScenarioConfig parse_config(const std::string& json_text);

// Canonical serialization; parse(serialize(cfg)) == cfg and the config hash
// is computed over this form.
std::string serialize_config(const ScenarioConfig& cfg);

// Static checks (factorization, ranges, schema cross-references) plus the
// grid horizon probe where a time average is requested with an explicit
// t_max. Does not execute diagnostics.
std::vector<Finding> validate(const ScenarioConfig& cfg);

struct RunRecord {
    std::string config_hash;
    std::string version = kVersion;
    double wall_ms = 0.0;
    std::vector<std::string> files;
    diagnostics::DiagnosticsReport report;
    bool ok = true;
    std::string error;
};

// Build model -> spectrum -> TPS -> states -> dynamics -> diagnostics, write
// report.json, trajectory CSVs and run_record.json under cfg.output_dir.
// Identical (config, seed) pairs produce byte-identical report.json; workers
// only parallelizes trajectory sampling and never changes results.
RunRecord run_scenario(const ScenarioConfig& cfg, int workers = 1);

// One run per axis value; the axis is a dot path into the template JSON and
// must already exist there. Values are JSON scalars in text form. Failures
// are recorded and do not stop the sweep. Writes summary.csv under out_dir.
std::vector<RunRecord> sweep(const std::string& template_json, const std::string& axis,
                             const std::vector<std::string>& values, const std::string& out_dir,
                             int workers = 1);

// Bundled scenario library (TPSLAB_SCENARIO_DIR, overridable with the
// environment variable of the same name).
std::string scenario_dir();
std::vector<std::string> bundled_scenario_names();

// Accepts a bundled scenario name or a path to a config file.
std::string load_scenario_text(const std::string& name_or_path);

std::uint64_t fnv1a64(const std::string& text);

} // namespace tpslab::scenario
