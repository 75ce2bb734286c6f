#include "tpslab/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tpslab/rng.hpp"

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace tpslab::scenario {

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

namespace {

[[noreturn]] void bad_config(const std::string& field, const std::string& msg) {
    fail(errc::config_invalid, field + ": " + msg);
}

// Strict object reader: every key must be consumed, leftovers are errors
// that name the offending field.
class Reader {
  public:
    Reader(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) bad_config(path_, "expected an object");
    }

    std::string path() const { return path_; }
    std::string sub(const std::string& key) const { return path_ + "." + key; }

    bool has(const std::string& key) const { return j_.contains(key); }

    const ojson& raw(const std::string& key) {
        if (!j_.contains(key)) bad_config(sub(key), "missing required field");
        seen_.insert(key);
        return j_.at(key);
    }

    const ojson* maybe(const std::string& key) {
        if (!j_.contains(key)) return nullptr;
        seen_.insert(key);
        return &j_.at(key);
    }

    std::string str(const std::string& key) {
        const ojson& v = raw(key);
        if (!v.is_string()) bad_config(sub(key), "expected a string");
        return v.get<std::string>();
    }

    std::string str_or(const std::string& key, const std::string& def) {
        return has(key) ? str(key) : def;
    }

    double num(const std::string& key) {
        const ojson& v = raw(key);
        if (!v.is_number()) bad_config(sub(key), "expected a number");
        return v.get<double>();
    }

    double num_or(const std::string& key, double def) { return has(key) ? num(key) : def; }

    long long integer(const std::string& key) {
        const ojson& v = raw(key);
        if (!v.is_number_integer() && !v.is_number_unsigned())
            bad_config(sub(key), "expected an integer");
        return v.get<long long>();
    }

    long long integer_or(const std::string& key, long long def) {
        return has(key) ? integer(key) : def;
    }

    std::uint64_t uinteger_or(const std::string& key, std::uint64_t def) {
        if (!has(key)) return def;
        const long long v = integer(key);
        if (v < 0) bad_config(sub(key), "expected a non-negative integer");
        return static_cast<std::uint64_t>(v);
    }

    void done() {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) bad_config(sub(it.key()), "unknown field");
    }

  private:
    const ojson& j_;
    std::string path_;
    std::set<std::string> seen_;
};

StateSpec parse_state(const ojson& j, const std::string& path) {
    Reader r(j, path);
    StateSpec s;
    const std::string type = r.str("type");
    if (type == "basis") {
        s.kind = StateSpec::Kind::basis;
        s.index = static_cast<int>(r.integer("index"));
        if (s.index < 1) bad_config(r.sub("index"), "basis index is 1-based");
    } else if (type == "amplitudes") {
        s.kind = StateSpec::Kind::amplitudes;
        const ojson& vals = r.raw("values");
        if (!vals.is_array() || vals.empty())
            bad_config(r.sub("values"), "expected a non-empty array of [re, im] pairs");
        for (const auto& pair : vals) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
                !pair[1].is_number())
                bad_config(r.sub("values"), "expected [re, im] number pairs");
            s.amplitudes.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    } else if (type == "haar") {
        s.kind = StateSpec::Kind::haar;
        s.seed = r.uinteger_or("seed", 0);
    } else {
        bad_config(r.sub("type"), "unknown state type '" + type + "'");
    }
    r.done();
    return s;
}

ojson state_to_json(const StateSpec& s) {
    ojson j;
    switch (s.kind) {
        case StateSpec::Kind::basis:
            j["type"] = "basis";
            j["index"] = s.index;
            break;
        case StateSpec::Kind::amplitudes: {
            j["type"] = "amplitudes";
            ojson vals = ojson::array();
            for (const cx& a : s.amplitudes) vals.push_back(ojson::array({a.real(), a.imag()}));
            j["values"] = std::move(vals);
            break;
        }
        case StateSpec::Kind::haar:
            j["type"] = "haar";
            j["seed"] = s.seed;
            break;
    }
    return j;
}

ModelConfig parse_model(const ojson& j) {
    Reader r(j, "model");
    ModelConfig m;
    const std::string type = r.str("type");
    if (type == "xx_chain") {
        m.kind = ModelConfig::Kind::xx_chain;
        m.sites = static_cast<int>(r.integer("sites"));
        m.field = r.num_or("field", 0.0);
    } else if (type == "central_spin") {
        m.kind = ModelConfig::Kind::central_spin;
        m.sites = static_cast<int>(r.integer("bath_sites"));
        if (const ojson* g = r.maybe("couplings")) {
            if (!g->is_array()) bad_config("model.couplings", "expected an array of numbers");
            for (const auto& v : *g) {
                if (!v.is_number()) bad_config("model.couplings", "expected numbers");
                m.couplings.push_back(v.get<double>());
            }
        }
    } else if (type == "gue") {
        m.kind = ModelConfig::Kind::gue;
        m.dim = static_cast<int>(r.integer("dim"));
        m.seed = r.uinteger_or("seed", 0);
    } else {
        bad_config("model.type", "unknown model type '" + type + "'");
    }
    r.done();
    return m;
}

TpsConfig parse_tps(const ojson& j) {
    Reader r(j, "tps");
    TpsConfig t;
    const std::string type = r.str("type");
    if (type == "tps1" || type == "tps2") {
        t.kind = type == "tps1" ? TpsConfig::Kind::tps1 : TpsConfig::Kind::tps2;
        t.m = static_cast<int>(r.integer("m"));
        t.n = static_cast<int>(r.integer("n"));
        if (const ojson* a = r.maybe("assignment")) {
            if (!a->is_array()) bad_config("tps.assignment", "expected an array of integers");
            for (const auto& v : *a) {
                if (!v.is_number_integer())
                    bad_config("tps.assignment", "expected integers (1-based cells)");
                t.assignment.push_back(v.get<int>());
            }
        }
    } else if (type == "site") {
        t.kind = TpsConfig::Kind::site;
        t.site = static_cast<int>(r.integer("site"));
    } else if (type == "fermion_mode") {
        t.kind = TpsConfig::Kind::fermion_mode;
        t.mode = static_cast<int>(r.integer("mode"));
    } else if (type == "frame_file") {
        t.kind = TpsConfig::Kind::frame_file;
        t.path = r.str("path");
    } else {
        bad_config("tps.type", "unknown tps type '" + type + "'");
    }
    r.done();
    return t;
}

const std::set<std::string> kDiagnosticNames = {
    "equilibration_metric",
    "frozen_max_distance",
    "unitary_reduced_check",
    "system_isi",
    "bath_isi",
    "eth_statistic",
    "edh_statistic",
    "quasiclassicality",
    "mutual_unbiasedness_dft",
    "max_second_schmidt",
    "free_fermion_spectrum_dev",
    "diagonal_vs_time_average",
    "tps1_closed_form_max_residual",
    "tps2_closed_form_max_residual",
    "gibbs_fit",
};

const std::set<std::string> kGridDiagnostics = {
    "equilibration_metric",
    "frozen_max_distance",
    "unitary_reduced_check",
};

} // namespace

int ModelConfig::dimension() const {
    switch (kind) {
        case Kind::xx_chain: return sites >= 1 && sites < 31 ? 1 << sites : 0;
        case Kind::central_spin: return sites >= 0 && sites < 30 ? 1 << (sites + 1) : 0;
        case Kind::gue: return dim;
    }
    return 0;
}

std::string ModelConfig::describe() const {
    char buf[160];
    switch (kind) {
        case Kind::xx_chain:
            std::snprintf(buf, sizeof(buf), "xx_chain N=%d h=%.15g", sites, field);
            return buf;
        case Kind::central_spin: {
            std::string out = "central_spin N=" + std::to_string(sites);
            if (couplings.empty()) {
                out += " g=1/n";
            } else {
                out += " g=[";
                for (std::size_t i = 0; i < couplings.size(); ++i) {
                    std::snprintf(buf, sizeof(buf), "%s%.15g", i ? "," : "", couplings[i]);
                    out += buf;
                }
                out += "]";
            }
            return out;
        }
        case Kind::gue:
            std::snprintf(buf, sizeof(buf), "gue d=%d seed=%llu", dim,
                          static_cast<unsigned long long>(seed));
            return buf;
    }
    return "?";
}

ScenarioConfig parse_config(const std::string& json_text) {
    ojson root;
    try {
        root = ojson::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::config_invalid, std::string("config is not valid JSON: ") + e.what());
    }
    Reader r(root, "config");

    ScenarioConfig cfg;
    cfg.name = r.str("name");
    if (cfg.name.empty()) bad_config("name", "must not be empty");
    cfg.description = r.str_or("description", "");
    cfg.model = parse_model(r.raw("model"));
    cfg.tps = parse_tps(r.raw("tps"));

    if (const ojson* init = r.maybe("initial_state")) {
        Reader ir(*init, "initial_state");
        if (const ojson* s = ir.maybe("system"))
            cfg.system_state = parse_state(*s, "initial_state.system");
        if (const ojson* b = ir.maybe("bath"))
            cfg.bath_state = parse_state(*b, "initial_state.bath");
        ir.done();
    }

    if (const ojson* g = r.maybe("grid")) {
        Reader gr(*g, "grid");
        cfg.grid.t_max = gr.num_or("t_max", 0.0);
        cfg.grid.t_max_over_gap = gr.num_or("t_max_over_gap", 0.0);
        cfg.grid.samples = static_cast<int>(gr.integer("samples"));
        gr.done();
        if ((cfg.grid.t_max > 0.0) == (cfg.grid.t_max_over_gap > 0.0))
            bad_config("grid", "set exactly one of t_max, t_max_over_gap (positive)");
        if (cfg.grid.samples < 1) bad_config("grid.samples", "must be >= 1");
    }

    if (const ojson* diags = r.maybe("diagnostics")) {
        if (!diags->is_array()) bad_config("diagnostics", "expected an array");
        for (std::size_t i = 0; i < diags->size(); ++i) {
            const ojson& d = (*diags)[i];
            const std::string where = "diagnostics[" + std::to_string(i) + "]";
            if (!d.is_object() || !d.contains("name") || !d.at("name").is_string())
                bad_config(where, "expected an object with a string 'name'");
            DiagnosticConfig dc;
            dc.name = d.at("name").get<std::string>();
            if (!kDiagnosticNames.count(dc.name))
                bad_config(where + ".name", "unknown diagnostic '" + dc.name + "'");
            ojson params = d;
            params.erase("name");
            dc.params_json = params.dump();
            cfg.diagnostics.push_back(std::move(dc));
        }
    }

    cfg.output_dir = r.str_or("output", "out");
    cfg.seed = r.uinteger_or("seed", 0);
    cfg.max_dim = static_cast<int>(r.integer_or("max_dim", 4096));
    r.done();
    return cfg;
}

std::string serialize_config(const ScenarioConfig& cfg) {
    ojson j;
    j["name"] = cfg.name;
    if (!cfg.description.empty()) j["description"] = cfg.description;

    ojson model;
    switch (cfg.model.kind) {
        case ModelConfig::Kind::xx_chain:
            model["type"] = "xx_chain";
            model["sites"] = cfg.model.sites;
            model["field"] = cfg.model.field;
            break;
        case ModelConfig::Kind::central_spin:
            model["type"] = "central_spin";
            model["bath_sites"] = cfg.model.sites;
            if (!cfg.model.couplings.empty()) model["couplings"] = cfg.model.couplings;
            break;
        case ModelConfig::Kind::gue:
            model["type"] = "gue";
            model["dim"] = cfg.model.dim;
            model["seed"] = cfg.model.seed;
            break;
    }
    j["model"] = std::move(model);

    ojson tps;
    switch (cfg.tps.kind) {
        case TpsConfig::Kind::tps1:
        case TpsConfig::Kind::tps2:
            tps["type"] = cfg.tps.kind == TpsConfig::Kind::tps1 ? "tps1" : "tps2";
            tps["m"] = cfg.tps.m;
            tps["n"] = cfg.tps.n;
            if (!cfg.tps.assignment.empty()) tps["assignment"] = cfg.tps.assignment;
            break;
        case TpsConfig::Kind::site:
            tps["type"] = "site";
            tps["site"] = cfg.tps.site;
            break;
        case TpsConfig::Kind::fermion_mode:
            tps["type"] = "fermion_mode";
            tps["mode"] = cfg.tps.mode;
            break;
        case TpsConfig::Kind::frame_file:
            tps["type"] = "frame_file";
            tps["path"] = cfg.tps.path;
            break;
    }
    j["tps"] = std::move(tps);

    ojson init;
    init["system"] = state_to_json(cfg.system_state);
    init["bath"] = state_to_json(cfg.bath_state);
    j["initial_state"] = std::move(init);

    if (cfg.grid.used()) {
        ojson grid;
        if (cfg.grid.t_max > 0.0) grid["t_max"] = cfg.grid.t_max;
        if (cfg.grid.t_max_over_gap > 0.0) grid["t_max_over_gap"] = cfg.grid.t_max_over_gap;
        grid["samples"] = cfg.grid.samples;
        j["grid"] = std::move(grid);
    }

    ojson diags = ojson::array();
    for (const auto& d : cfg.diagnostics) {
        ojson item;
        item["name"] = d.name;
        const ojson params = ojson::parse(d.params_json);
        for (auto it = params.begin(); it != params.end(); ++it) item[it.key()] = it.value();
        diags.push_back(std::move(item));
    }
    j["diagnostics"] = std::move(diags);

    j["output"] = cfg.output_dir;
    j["seed"] = cfg.seed;
    j["max_dim"] = cfg.max_dim;
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// validation
// ---------------------------------------------------------------------------

namespace {

// (m, n) implied by the config, when they can be known without I/O
std::optional<std::pair<int, int>> implied_split(const ScenarioConfig& cfg) {
    const int d = cfg.model.dimension();
    switch (cfg.tps.kind) {
        case TpsConfig::Kind::tps1:
        case TpsConfig::Kind::tps2: return std::pair{cfg.tps.m, cfg.tps.n};
        case TpsConfig::Kind::site:
        case TpsConfig::Kind::fermion_mode:
            return d >= 4 ? std::optional(std::pair{2, d / 2}) : std::nullopt;
        case TpsConfig::Kind::frame_file: return std::nullopt;
    }
    return std::nullopt;
}

int qubit_count(const ScenarioConfig& cfg) {
    switch (cfg.model.kind) {
        case ModelConfig::Kind::xx_chain: return cfg.model.sites;
        case ModelConfig::Kind::central_spin: return cfg.model.sites + 1;
        case ModelConfig::Kind::gue: return -1;
    }
    return -1;
}

void check_state_spec(const StateSpec& s, int dim, const std::string& field,
                      std::vector<Finding>& findings) {
    if (s.kind == StateSpec::Kind::basis && dim > 0 && (s.index < 1 || s.index > dim))
        findings.push_back({errc::config_invalid, field,
                            "basis index " + std::to_string(s.index) + " outside 1.." +
                                std::to_string(dim)});
    if (s.kind == StateSpec::Kind::amplitudes) {
        if (dim > 0 && static_cast<int>(s.amplitudes.size()) != dim) {
            findings.push_back({errc::config_invalid, field,
                                "amplitude count " + std::to_string(s.amplitudes.size()) +
                                    " != dimension " + std::to_string(dim)});
            return;
        }
        double norm2 = 0.0;
        for (const cx& a : s.amplitudes) norm2 += std::norm(a);
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
            findings.push_back({errc::config_invalid, field, "amplitudes are not normalized"});
    }
}

} // namespace

std::vector<Finding> validate(const ScenarioConfig& cfg) {
    std::vector<Finding> findings;
    auto add = [&](errc code, const std::string& field, const std::string& msg) {
        findings.push_back({code, field, msg});
    };

    // model ranges
    switch (cfg.model.kind) {
        case ModelConfig::Kind::xx_chain:
            if (cfg.model.sites < 2 || cfg.model.sites > 12)
                add(errc::config_invalid, "model.sites", "xx_chain needs 2 <= sites <= 12");
            break;
        case ModelConfig::Kind::central_spin:
            if (cfg.model.sites < 1 || cfg.model.sites > 11)
                add(errc::config_invalid, "model.bath_sites",
                    "central_spin needs 1 <= bath_sites <= 11");
            if (!cfg.model.couplings.empty() &&
                static_cast<int>(cfg.model.couplings.size()) != cfg.model.sites)
                add(errc::config_invalid, "model.couplings", "length must equal bath_sites");
            break;
        case ModelConfig::Kind::gue:
            if (cfg.model.dim < 2 || cfg.model.dim > 4096)
                add(errc::config_invalid, "model.dim", "gue needs 2 <= dim <= 4096");
            break;
    }
    const int d = cfg.model.dimension();
    if (d > cfg.max_dim)
        add(errc::dimension_overflow, "model",
            "dimension " + std::to_string(d) + " exceeds max_dim " + std::to_string(cfg.max_dim));

    // tps cross-checks
    switch (cfg.tps.kind) {
        case TpsConfig::Kind::tps2:
            if (cfg.tps.n % 2 != 0)
                add(errc::odd_bath_dimension, "tps.n", "tps2 needs an even bath dimension");
            [[fallthrough]];
        case TpsConfig::Kind::tps1:
            if (cfg.tps.m < 2 || cfg.tps.n < 2 || cfg.tps.m * cfg.tps.n != d)
                add(errc::bad_factorization, "tps",
                    "cannot split dimension " + std::to_string(d) + " as " +
                        std::to_string(cfg.tps.m) + " x " + std::to_string(cfg.tps.n));
            if (!cfg.tps.assignment.empty()) {
                bool ok = static_cast<int>(cfg.tps.assignment.size()) == d;
                std::set<int> cells(cfg.tps.assignment.begin(), cfg.tps.assignment.end());
                ok = ok && static_cast<int>(cells.size()) == d &&
                     *cells.begin() == 1 && *cells.rbegin() == d;
                if (!ok)
                    add(errc::config_invalid, "tps.assignment",
                        "must be a permutation of 1.." + std::to_string(d));
            }
            break;
        case TpsConfig::Kind::site: {
            const int q = qubit_count(cfg);
            if (q < 2)
                add(errc::config_invalid, "tps", "site tps needs a spin model");
            else if (cfg.tps.site < 1 || cfg.tps.site > q)
                add(errc::index_out_of_range, "tps.site",
                    "site " + std::to_string(cfg.tps.site) + " outside 1.." + std::to_string(q));
            break;
        }
        case TpsConfig::Kind::fermion_mode:
            if (cfg.model.kind != ModelConfig::Kind::xx_chain)
                add(errc::config_invalid, "tps", "fermion_mode tps needs the xx_chain model");
            else if (cfg.tps.mode < 1 || cfg.tps.mode > cfg.model.sites)
                add(errc::index_out_of_range, "tps.mode",
                    "mode " + std::to_string(cfg.tps.mode) + " outside 1.." +
                        std::to_string(cfg.model.sites));
            break;
        case TpsConfig::Kind::frame_file:
            if (cfg.tps.path.empty())
                add(errc::config_invalid, "tps.path", "must not be empty");
            break;
    }

    const auto split = implied_split(cfg);
    if (split) {
        check_state_spec(cfg.system_state, split->first, "initial_state.system", findings);
        check_state_spec(cfg.bath_state, split->second, "initial_state.bath", findings);
    }

    // diagnostics
    bool wants_grid = false;
    bool wants_equilibration = false;
    for (std::size_t i = 0; i < cfg.diagnostics.size(); ++i) {
        const auto& diag = cfg.diagnostics[i];
        const std::string field = "diagnostics[" + std::to_string(i) + "]";
        if (kGridDiagnostics.count(diag.name)) wants_grid = true;
        if (diag.name == "equilibration_metric") wants_equilibration = true;
        if (diag.name == "free_fermion_spectrum_dev" &&
            cfg.model.kind != ModelConfig::Kind::xx_chain)
            add(errc::config_invalid, field, "free_fermion_spectrum_dev needs the xx_chain model");
        if (diag.name == "tps1_closed_form_max_residual" &&
            cfg.tps.kind != TpsConfig::Kind::tps1)
            add(errc::config_invalid, field, "needs a tps1 bipartition");
        if ((diag.name == "tps2_closed_form_max_residual") &&
            cfg.tps.kind != TpsConfig::Kind::tps2)
            add(errc::config_invalid, field, "needs a tps2 bipartition");
        if (diag.name == "unitary_reduced_check" || diag.name == "gibbs_fit") {
            if (cfg.tps.kind != TpsConfig::Kind::tps1 && cfg.tps.kind != TpsConfig::Kind::tps2 &&
                cfg.tps.kind != TpsConfig::Kind::fermion_mode)
                add(errc::config_invalid, field, "needs an eigenbasis-induced bipartition");
        }
    }
    if (wants_grid && !cfg.grid.used())
        add(errc::config_invalid, "grid", "required by the requested diagnostics");

    // horizon probe: only meaningful for an explicit t_max on a time average
    if (wants_equilibration && cfg.grid.used() && cfg.grid.t_max > 0.0 && findings.empty()) {
        const CMat h = [&]() -> CMat {
            switch (cfg.model.kind) {
                case ModelConfig::Kind::xx_chain:
                    return models::build_xx_chain({cfg.model.sites, cfg.model.field});
                case ModelConfig::Kind::central_spin:
                    return models::build_central_spin({cfg.model.sites, cfg.model.couplings});
                case ModelConfig::Kind::gue:
                    return models::build_random_gue({cfg.model.dim, cfg.model.seed});
            }
            return CMat();
        }();
        const auto spec = qla::eig_hermitian(h);
        if (!dynamics::horizon_sufficient({cfg.grid.t_max, cfg.grid.samples}, spec)) {
            const double gap = qla::min_nonzero_gap(spec);
            char buf[128];
            std::snprintf(buf, sizeof(buf), "t_max %.6g below 50/gap_min = %.6g",
                          cfg.grid.t_max, 50.0 / gap);
            add(errc::insufficient_horizon, "grid.t_max", buf);
        }
    }

    return findings;
}

// ---------------------------------------------------------------------------
// execution
// ---------------------------------------------------------------------------

namespace {

struct RunContext {
    explicit RunContext(const ScenarioConfig& c) : cfg(c) {}

    const ScenarioConfig& cfg;
    CMat hamiltonian;
    qla::SpectralDecomposition spec;
    std::optional<models::FreeFermionSpectrum> fermion;
    tps::TpsDescriptor tps;
    CVec system_state;
    CVec bath_state;
    std::optional<dynamics::TimeGrid> grid;
    int workers = 1;
    diagnostics::DiagnosticsReport report;
    std::optional<dynamics::Trajectory> trajectory;  // cached for the csv

    CVec psi0() const { return tps::embed_product({system_state, bath_state}, tps); }
};

CVec resolve_state(const StateSpec& s, int dim, std::uint64_t scenario_seed,
                   const std::string& field) {
    switch (s.kind) {
        case StateSpec::Kind::basis: {
            if (s.index < 1 || s.index > dim)
                bad_config(field, "basis index " + std::to_string(s.index) + " outside 1.." +
                                      std::to_string(dim));
            CVec v = CVec::Zero(dim);
            v(s.index - 1) = 1.0;
            return v;
        }
        case StateSpec::Kind::amplitudes: {
            if (static_cast<int>(s.amplitudes.size()) != dim)
                bad_config(field, "amplitude count != dimension");
            CVec v(dim);
            for (int i = 0; i < dim; ++i) v(i) = s.amplitudes[i];
            if (std::abs(v.norm() - 1.0) > 1e-12) bad_config(field, "not normalized");
            return v;
        }
        case StateSpec::Kind::haar: {
            rng::Stream stream(scenario_seed + s.seed, rng::kStreamStates);
            return rng::haar_unit_vector(dim, stream);
        }
    }
    bad_config(field, "unhandled state kind");
}

tps::GridAssignment assignment_from_config(const std::vector<int>& one_based, int dim) {
    if (one_based.empty()) return tps::GridAssignment::identity(dim);
    tps::GridAssignment a;
    a.cell_of.reserve(one_based.size());
    for (int c : one_based) a.cell_of.push_back(c - 1);
    a.validate(dim);
    return a;
}

void build_context(RunContext& ctx) {
    const ScenarioConfig& cfg = ctx.cfg;
    switch (cfg.model.kind) {
        case ModelConfig::Kind::xx_chain:
            ctx.hamiltonian = models::build_xx_chain({cfg.model.sites, cfg.model.field});
            break;
        case ModelConfig::Kind::central_spin:
            ctx.hamiltonian = models::build_central_spin({cfg.model.sites, cfg.model.couplings});
            break;
        case ModelConfig::Kind::gue:
            ctx.hamiltonian = models::build_random_gue({cfg.model.dim, cfg.model.seed});
            break;
    }
    ctx.spec = qla::eig_hermitian(ctx.hamiltonian);

    const int d = ctx.spec.dim();
    switch (cfg.tps.kind) {
        case TpsConfig::Kind::tps1:
            ctx.tps = tps::tps1_from_spectrum(
                ctx.spec, assignment_from_config(cfg.tps.assignment, d), cfg.tps.m, cfg.tps.n);
            break;
        case TpsConfig::Kind::tps2:
            ctx.tps = tps::tps2_from_spectrum(
                ctx.spec, assignment_from_config(cfg.tps.assignment, d), cfg.tps.m, cfg.tps.n);
            break;
        case TpsConfig::Kind::site:
            ctx.tps = tps::site_tps(qubit_count(cfg), cfg.tps.site);
            break;
        case TpsConfig::Kind::fermion_mode:
            ctx.fermion = models::xx_free_fermion_oracle({cfg.model.sites, cfg.model.field});
            ctx.tps = tps::fermion_mode_tps(ctx.fermion->modes, cfg.tps.mode);
            break;
        case TpsConfig::Kind::frame_file:
            ctx.tps = tps::load_json(cfg.tps.path);
            if (ctx.tps.dim() != d)
                bad_config("tps.path", "frame dimension " + std::to_string(ctx.tps.dim()) +
                                           " != model dimension " + std::to_string(d));
            break;
    }

    ctx.system_state =
        resolve_state(cfg.system_state, ctx.tps.m, cfg.seed, "initial_state.system");
    ctx.bath_state = resolve_state(cfg.bath_state, ctx.tps.n, cfg.seed, "initial_state.bath");

    if (cfg.grid.used()) {
        double t_max = cfg.grid.t_max;
        if (t_max <= 0.0) {
            const double gap = qla::min_nonzero_gap(ctx.spec);
            if (!std::isfinite(gap))
                bad_config("grid.t_max_over_gap", "spectrum has no nonzero gap to scale by");
            t_max = cfg.grid.t_max_over_gap / gap;
        }
        ctx.grid = dynamics::TimeGrid{t_max, cfg.grid.samples};
    }
}

const dynamics::Trajectory& ensure_trajectory(RunContext& ctx) {
    if (!ctx.trajectory) {
        if (!ctx.grid) bad_config("grid", "trajectory diagnostics need a grid");
        ctx.trajectory =
            dynamics::reduced_trajectory(ctx.psi0(), ctx.spec, ctx.tps, *ctx.grid, ctx.workers);
    }
    return *ctx.trajectory;
}

diagnostics::ObservableSet parse_observables(Reader& r, int m) {
    diagnostics::ObservableSet obs;
    const std::string type = r.str("observables");
    if (type == "pauli_z") {
        if (m != 2) bad_config(r.sub("observables"), "pauli_z needs a 2-dimensional system");
        obs.operators = {models::pauli(models::Axis::z)};
    } else if (type == "pauli_x") {
        if (m != 2) bad_config(r.sub("observables"), "pauli_x needs a 2-dimensional system");
        obs.operators = {models::pauli(models::Axis::x)};
    } else if (type == "basis_projectors") {
        for (int i = 0; i < m; ++i) {
            CMat p = CMat::Zero(m, m);
            p(i, i) = 1.0;
            obs.operators.push_back(p);
        }
    } else {
        bad_config(r.sub("observables"),
                   "unknown observable set '" + type +
                       "' (pauli_z | pauli_x | basis_projectors)");
    }
    obs.epsilon = r.num_or("epsilon", 0.1);
    return obs;
}

std::vector<CVec> parse_state_family(Reader& r, const std::string& key, int dim,
                                     std::uint64_t scenario_seed, bool allow_halves) {
    const ojson& j = r.raw(key);
    Reader fr(j, r.sub(key));
    const std::string type = fr.str("type");
    std::vector<CVec> states;
    if (type == "basis") {
        const ojson& idx = fr.raw("indices");
        if (!idx.is_array() || idx.empty())
            bad_config(fr.sub("indices"), "expected a non-empty integer array");
        for (const auto& v : idx) {
            if (!v.is_number_integer()) bad_config(fr.sub("indices"), "expected integers");
            const int i = v.get<int>();
            if (i < 1 || i > dim)
                bad_config(fr.sub("indices"),
                           "index " + std::to_string(i) + " outside 1.." + std::to_string(dim));
            CVec e = CVec::Zero(dim);
            e(i - 1) = 1.0;
            states.push_back(std::move(e));
        }
    } else if (type == "full_basis") {
        for (int i = 0; i < dim; ++i) {
            CVec e = CVec::Zero(dim);
            e(i) = 1.0;
            states.push_back(std::move(e));
        }
    } else if (type == "haar") {
        const int count = static_cast<int>(fr.integer_or("count", 16));
        if (count < 2) bad_config(fr.sub("count"), "need at least 2 samples");
        rng::Stream stream(scenario_seed + fr.uinteger_or("seed", 0), rng::kStreamBathSamples);
        for (int k = 0; k < count; ++k) states.push_back(rng::haar_unit_vector(dim, stream));
    } else if (type == "subspace_halves" && allow_halves) {
        if (dim % 2 != 0) bad_config(fr.sub("type"), "subspace_halves needs an even dimension");
        const int count = static_cast<int>(fr.integer_or("count", 8));
        if (count < 1) bad_config(fr.sub("count"), "need at least 1 sample per half");
        rng::Stream stream(scenario_seed + fr.uinteger_or("seed", 0), rng::kStreamBathSamples);
        for (int offset : {0, dim / 2}) {
            for (int k = 0; k < count; ++k) {
                const CVec inner = rng::haar_unit_vector(dim / 2, stream);
                CVec chi = CVec::Zero(dim);
                for (int j = 0; j < dim / 2; ++j) chi(offset + j) = inner(j);
                states.push_back(std::move(chi));
            }
        }
    } else {
        bad_config(fr.sub("type"), "unknown state family '" + type + "'");
    }
    fr.done();
    return states;
}

using Handler = std::function<void(RunContext&, Reader&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"equilibration_metric",
         [](RunContext& ctx, Reader& r) {
             r.done();
             const auto& traj = ensure_trajectory(ctx);
             const CMat avg = dynamics::diagonal_ensemble(ctx.psi0(), ctx.spec, ctx.tps);
             ctx.report.add("equilibration_metric",
                            diagnostics::equilibration_metric(traj, avg),
                            "time-averaged trace distance to the diagonal ensemble");
         }},
        {"frozen_max_distance",
         [](RunContext& ctx, Reader& r) {
             r.done();
             const auto& traj = ensure_trajectory(ctx);
             double worst = 0.0;
             for (const CMat& rho : traj.reduced_states)
                 worst = std::max(worst,
                                  qla::trace_distance(rho, traj.reduced_states.front()));
             ctx.report.add("frozen_max_distance", worst,
                            "max_t trace distance of the reduced state from its t=0 value");
         }},
        {"unitary_reduced_check",
         [](RunContext& ctx, Reader& r) {
             const int j = static_cast<int>(r.integer_or("j", 1));
             r.done();
             if (j < 1 || j > ctx.tps.n)
                 bad_config("unitary_reduced_check.j", "bath column outside 1..n");
             if (!ctx.grid) bad_config("grid", "unitary_reduced_check needs a grid");

             CVec chi = CVec::Zero(ctx.tps.n);
             chi(j - 1) = 1.0;
             const CVec psi0 = tps::embed_product({ctx.system_state, chi}, ctx.tps);
             ctx.trajectory = dynamics::reduced_trajectory(psi0, ctx.spec, ctx.tps, *ctx.grid,
                                                           ctx.workers);

             double purity_min = 1.0;
             for (const CMat& rho : ctx.trajectory->reduced_states)
                 purity_min = std::min(purity_min, qla::purity(rho));
             ctx.report.add("purity_min", purity_min,
                            "lowest reduced-state purity along the trajectory");

             const CMat hs = dynamics::conditional_system_hamiltonian(ctx.spec, ctx.tps, j - 1);
             const auto hs_spec = qla::eig_hermitian(hs);
             double worst = 0.0;
             for (std::size_t k = 0; k < ctx.trajectory->times.size(); ++k) {
                 const CVec phi_t =
                     dynamics::evolve_state(ctx.system_state, hs_spec, ctx.trajectory->times[k]);
                 worst = std::max(worst,
                                  qla::trace_distance(ctx.trajectory->reduced_states[k],
                                                      phi_t * phi_t.adjoint()));
             }
             ctx.report.add("conditional_max_dev", worst,
                            "max_t trace distance from the conditional-hamiltonian evolution");
         }},
        {"system_isi",
         [](RunContext& ctx, Reader& r) {
             const auto states =
                 parse_state_family(r, "states", ctx.tps.m, ctx.cfg.seed, false);
             r.done();
             ctx.report.add("system_isi",
                            diagnostics::system_isi(ctx.spec, ctx.tps, ctx.bath_state, states),
                            "max pairwise distance of equilibrium states over system inputs");
         }},
        {"bath_isi",
         [](RunContext& ctx, Reader& r) {
             const auto states = parse_state_family(r, "states", ctx.tps.n, ctx.cfg.seed, true);
             r.done();
             ctx.report.add("bath_isi",
                            diagnostics::bath_isi(ctx.spec, ctx.tps, ctx.system_state, states),
                            "max pairwise distance of equilibrium states over bath inputs");
         }},
        {"eth_statistic",
         [](RunContext& ctx, Reader& r) {
             const ojson& w = r.raw("window");
             Reader wr(w, "eth_statistic.window");
             const std::string type = wr.str("type");
             double lo = 0.0, hi = 0.0;
             if (type == "full") {
                 lo = ctx.spec.eigenvalues(0);
                 hi = ctx.spec.eigenvalues(ctx.spec.dim() - 1);
             } else if (type == "interval") {
                 lo = wr.num("lo");
                 hi = wr.num("hi");
             } else if (type == "index_range") {
                 const int a = static_cast<int>(wr.integer("lo"));
                 const int b = static_cast<int>(wr.integer("hi"));
                 if (a < 1 || b > ctx.spec.dim() || a >= b)
                     bad_config("eth_statistic.window", "need 1 <= lo < hi <= d");
                 lo = ctx.spec.eigenvalues(a - 1);
                 hi = ctx.spec.eigenvalues(b - 1);
             } else {
                 bad_config("eth_statistic.window.type", "full | interval | index_range");
             }
             wr.done();
             r.done();
             char buf[96];
             std::snprintf(buf, sizeof(buf), "window [%.6g, %.6g]", lo, hi);
             ctx.report.add("eth_statistic", diagnostics::eth_statistic(ctx.spec, ctx.tps, lo, hi),
                            buf);
         }},
        {"edh_statistic",
         [](RunContext& ctx, Reader& r) {
             const auto obs = parse_observables(r, ctx.tps.m);
             r.done();
             const auto res = diagnostics::edh_statistic(ctx.spec, ctx.tps, obs);
             char buf[64];
             std::snprintf(buf, sizeof(buf), "epsilon %.6g", obs.epsilon);
             ctx.report.add("edh_max_variance", res.max_variance, buf);
             ctx.report.add("edh_max_mixedness", res.max_mixedness,
                            "1 - purity of the worst reduced eigenstate");
         }},
        {"quasiclassicality",
         [](RunContext& ctx, Reader& r) {
             CVec state = ctx.system_state;
             if (const ojson* s = r.maybe("state"))
                 state = resolve_state(parse_state(*s, "quasiclassicality.state"), ctx.tps.m,
                                       ctx.cfg.seed, "quasiclassicality.state");
             const auto obs = parse_observables(r, ctx.tps.m);
             r.done();
             const auto res = diagnostics::quasiclassicality(state, obs);
             ctx.report.add("quasiclassicality_max_variance", res.max_variance, "");
             ctx.report.add("quasiclassicality_in_set", res.in_set ? 1.0 : 0.0,
                            "1 if max variance < epsilon");
         }},
        {"mutual_unbiasedness_dft",
         [](RunContext& ctx, Reader& r) {
             const ojson& dims = r.raw("dims");
             if (!dims.is_array() || dims.empty())
                 bad_config("mutual_unbiasedness_dft.dims", "expected a non-empty integer array");
             r.done();
             for (const auto& v : dims) {
                 if (!v.is_number_integer() || v.get<int>() < 2)
                     bad_config("mutual_unbiasedness_dft.dims", "expected integers >= 2");
                 const int m = v.get<int>();
                 const CMat id = CMat::Identity(m, m);
                 const CMat image = qla::dft_frame(m, -1);
                 ctx.report.add("mutual_unbiasedness_dft_m" + std::to_string(m),
                                diagnostics::mutual_unbiasedness(id, image),
                                "basis vs its dft image");
             }
         }},
        {"max_second_schmidt",
         [](RunContext& ctx, Reader& r) {
             r.done();
             double worst = 0.0;
             for (int l = 0; l < ctx.spec.dim(); ++l) {
                 const auto sf = tps::schmidt(ctx.spec.frame.col(l), ctx.tps);
                 if (sf.coefficients.size() > 1)
                     worst = std::max(worst, sf.coefficients(1));
             }
             ctx.report.add("max_second_schmidt", worst,
                            "largest second schmidt coefficient over all eigenstates");
         }},
        {"free_fermion_spectrum_dev",
         [](RunContext& ctx, Reader& r) {
             r.done();
             if (!ctx.fermion)
                 ctx.fermion =
                     models::xx_free_fermion_oracle({ctx.cfg.model.sites, ctx.cfg.model.field});
             double worst = 0.0;
             for (int l = 0; l < ctx.spec.dim(); ++l)
                 worst = std::max(worst,
                                  std::abs(ctx.spec.eigenvalues(l) - ctx.fermion->many_body[l]));
             ctx.report.add("free_fermion_spectrum_dev", worst,
                            "max |dense eigenvalue - free-fermion oracle| after sorting");
         }},
        {"diagonal_vs_time_average",
         [](RunContext& ctx, Reader& r) {
             const double factor = r.num_or("t_max_over_gap", 200.0);
             const int samples = static_cast<int>(r.integer_or("samples", 4096));
             r.done();
             if (samples < 2)
                 bad_config("diagonal_vs_time_average.samples", "needs samples >= 2");
             if (factor < 50.0)
                 fail(errc::insufficient_horizon,
                      "diagonal_vs_time_average.t_max_over_gap: need at least 50 periods of "
                      "the slowest frequency, got " +
                          std::to_string(factor));
             const double gap = qla::min_nonzero_gap(ctx.spec);
             if (!std::isfinite(gap))
                 bad_config("diagonal_vs_time_average", "spectrum has no nonzero gap");
             const dynamics::TimeGrid grid{factor / gap, samples};
             const CVec psi0 = ctx.psi0();
             const CMat diag = dynamics::diagonal_ensemble(psi0, ctx.spec, ctx.tps);
             const CMat numeric = dynamics::numeric_time_average(psi0, ctx.spec, ctx.tps, grid);
             char buf[96];
             std::snprintf(buf, sizeof(buf), "t_max=%.6g samples=%d", grid.t_max, samples);
             ctx.report.add("diagonal_vs_time_average", qla::trace_distance(diag, numeric), buf);
         }},
        {"tps1_closed_form_max_residual",
         [](RunContext& ctx, Reader& r) {
             const int count = static_cast<int>(r.integer_or("count", 20));
             const std::uint64_t seed = r.uinteger_or("seed", 0);
             const int j = static_cast<int>(r.integer_or("j", 1));
             r.done();
             if (count < 1) bad_config("tps1_closed_form_max_residual.count", "need >= 1");
             if (j < 1 || j > ctx.tps.n)
                 bad_config("tps1_closed_form_max_residual.j", "bath column outside 1..n");

             rng::Stream stream(ctx.cfg.seed + seed, rng::kStreamStates);
             CVec chi = CVec::Zero(ctx.tps.n);
             chi(j - 1) = 1.0;
             double worst = 0.0;
             for (int k = 0; k < count; ++k) {
                 const CVec phi = rng::haar_unit_vector(ctx.tps.m, stream);
                 const CVec psi0 = tps::embed_product({phi, chi}, ctx.tps);
                 const CMat avg = dynamics::diagonal_ensemble(psi0, ctx.spec, ctx.tps);
                 CMat closed = CMat::Zero(ctx.tps.m, ctx.tps.m);
                 for (int i = 0; i < ctx.tps.m; ++i) closed(i, i) = std::norm(phi(i));
                 worst = std::max(worst, qla::max_abs(avg - closed));
             }
             char buf[64];
             std::snprintf(buf, sizeof(buf), "%d random system states", count);
             ctx.report.add("tps1_closed_form_max_residual", worst, buf);
         }},
        {"tps2_closed_form_max_residual",
         [](RunContext& ctx, Reader& r) {
             const int count = static_cast<int>(r.integer_or("count", 20));
             const std::uint64_t seed = r.uinteger_or("seed", 0);
             r.done();
             if (count < 1) bad_config("tps2_closed_form_max_residual.count", "need >= 1");

             const int m = ctx.tps.m, n = ctx.tps.n;
             const CMat ftilde = qla::dft_frame(m, -1);
             rng::Stream stream(ctx.cfg.seed + seed, rng::kStreamStates);
             double worst = 0.0;
             for (int k = 0; k < count; ++k) {
                 const CVec phi = rng::haar_unit_vector(m, stream);
                 const CVec chi = rng::haar_unit_vector(n, stream);
                 const CVec psi0 = tps::embed_product({phi, chi}, ctx.tps);
                 const CMat avg = dynamics::diagonal_ensemble(psi0, ctx.spec, ctx.tps);

                 double w1 = 0.0;
                 for (int j = 0; j < n / 2; ++j) w1 += std::norm(chi(j));
                 CMat closed = CMat::Zero(m, m);
                 for (int i = 0; i < m; ++i) closed(i, i) += w1 * std::norm(phi(i));
                 for (int i = 0; i < m; ++i) {
                     const cx overlap = ftilde.col(i).dot(phi);
                     closed += (1.0 - w1) * std::norm(overlap) *
                               (ftilde.col(i) * ftilde.col(i).adjoint());
                 }
                 worst = std::max(worst, qla::max_abs(avg - closed));
             }
             char buf[64];
             std::snprintf(buf, sizeof(buf), "%d random product states", count);
             ctx.report.add("tps2_closed_form_max_residual", worst, buf);
         }},
        {"gibbs_fit",
         [](RunContext& ctx, Reader& r) {
             const int j = static_cast<int>(r.integer_or("j", 1));
             r.done();
             if (j < 1 || j > ctx.tps.n) bad_config("gibbs_fit.j", "bath column outside 1..n");
             const CMat heff = dynamics::conditional_system_hamiltonian(ctx.spec, ctx.tps, j - 1);
             const CMat avg = dynamics::diagonal_ensemble(ctx.psi0(), ctx.spec, ctx.tps);
             const auto fit = diagnostics::gibbs_fit(avg, heff);
             char buf[64];
             std::snprintf(buf, sizeof(buf), "conditional hamiltonian, bath column %d", j);
             ctx.report.add("gibbs_beta", fit.beta, buf);
             ctx.report.add("gibbs_residual", fit.residual, buf);
         }},
    };
    return table;
}

void write_text_file(const fs::path& path, const std::string& text,
                     std::vector<std::string>& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot open " + path.string() + " for writing");
    out << text;
    manifest.push_back(path.filename().string());
}

std::string trajectory_csv(const dynamics::Trajectory& traj, int m) {
    std::ostringstream out;
    out << "t";
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out << ",rho_" << i << "_" << j << "_re,rho_" << i << "_" << j << "_im";
    out << "\n";
    char buf[64];
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.15g", traj.times[k]);
        out << buf;
        const CMat& rho = traj.reduced_states[k];
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                std::snprintf(buf, sizeof(buf), ",%.15g,%.15g",
                              diagnostics::quantize15(rho(i, j).real()),
                              diagnostics::quantize15(rho(i, j).imag()));
                out << buf;
            }
        out << "\n";
    }
    return out.str();
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

RunRecord run_scenario(const ScenarioConfig& cfg, int workers) {
    const auto t0 = std::chrono::steady_clock::now();

    RunRecord record;
    {
        // hash the scientific configuration; where the files land is not part
        // of its identity
        ScenarioConfig canonical = cfg;
        canonical.output_dir.clear();
        record.config_hash = hash_hex(fnv1a64(serialize_config(canonical)));
    }

    const auto findings = validate(cfg);
    for (const auto& f : findings)
        if (f.blocking()) fail(f.code, f.field + ": " + f.message);

    RunContext ctx(cfg);
    ctx.workers = std::max(1, workers);
    build_context(ctx);

    ctx.report.label = cfg.name;
    ctx.report.model = cfg.model.describe();
    ctx.report.tps_label = ctx.tps.label;
    ctx.report.seed = cfg.seed;
    if (ctx.grid) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "t_max=%.15g samples=%d", ctx.grid->t_max,
                      ctx.grid->samples);
        ctx.report.grid = buf;
    }
    for (const auto& f : findings)
        ctx.report.warnings.push_back(std::string(errc_name(f.code)) + " " + f.field + ": " +
                                      f.message);

    for (const auto& diag : cfg.diagnostics) {
        const ojson params = ojson::parse(diag.params_json);
        Reader r(params, diag.name);
        handlers().at(diag.name)(ctx, r);
    }

    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "report.json", ctx.report.to_json() + "\n", record.files);
    if (ctx.trajectory)
        write_text_file(out_dir / ("trajectory_" + ctx.tps.label + ".csv"),
                        trajectory_csv(*ctx.trajectory, ctx.tps.m), record.files);

    record.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ojson rr;
    rr["config_hash"] = record.config_hash;
    rr["version"] = record.version;
    rr["wall_ms"] = record.wall_ms;
    rr["files"] = record.files;
    {
        std::ofstream out(out_dir / "run_record.json", std::ios::binary);
        if (!out) fail(errc::io_error, "cannot write run_record.json");
        out << rr.dump(2) << "\n";
    }
    record.files.push_back("run_record.json");
    record.report = std::move(ctx.report);
    return record;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

namespace {

std::string sanitize_token(const std::string& token) {
    std::string out;
    for (char c : token)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
                   ? c
                   : '_';
    return out;
}

} // namespace

std::vector<RunRecord> sweep(const std::string& template_json, const std::string& axis,
                             const std::vector<std::string>& values, const std::string& out_dir,
                             int workers) {
    ojson root;
    try {
        root = ojson::parse(template_json);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::config_invalid, std::string("template is not valid JSON: ") + e.what());
    }

    // resolve the axis path (dot-separated keys, integers index arrays) and
    // require the final key to exist
    std::vector<std::string> parts;
    std::istringstream ss(axis);
    for (std::string part; std::getline(ss, part, '.');) parts.push_back(part);
    if (parts.empty()) fail(errc::config_invalid, "axis: empty path");

    auto descend = [](ojson* node, const std::string& part) -> ojson* {
        if (node->is_object() && node->contains(part)) return &(*node)[part];
        if (node->is_array() && !part.empty() &&
            part.find_first_not_of("0123456789") == std::string::npos) {
            const std::size_t idx = std::stoul(part);
            if (idx < node->size()) return &(*node)[idx];
        }
        return nullptr;
    };

    ojson* cursor = &root;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        cursor = descend(cursor, parts[i]);
        if (!cursor)
            fail(errc::config_invalid, "axis: '" + parts[i] + "' not found in template");
    }
    if (!cursor->is_object() || !cursor->contains(parts.back()))
        fail(errc::config_invalid, "axis: '" + parts.back() + "' not found in template");

    std::vector<RunRecord> records(values.size());
    auto run_one = [&](std::size_t i) {
        ojson copy = root;
        ojson* leaf = &copy;
        for (std::size_t p = 0; p + 1 < parts.size(); ++p) leaf = descend(leaf, parts[p]);
        ojson parsed_value;
        try {
            parsed_value = ojson::parse(values[i]);
        } catch (const nlohmann::json::exception&) {
            parsed_value = values[i];
        }
        (*leaf)[parts.back()] = parsed_value;
        copy["output"] = out_dir + "/" + sanitize_token(axis) + "=" + sanitize_token(values[i]);
        try {
            records[i] = run_scenario(parse_config(copy.dump()));
        } catch (const std::exception& e) {
            records[i].ok = false;
            records[i].error = e.what();
        }
    };

    workers = std::max(
        1, std::min<int>(workers, static_cast<int>(values.empty() ? 1 : values.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&]() {
                for (std::size_t i = next.fetch_add(1); i < values.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    // aggregated summary: axis value vs every scalar result
    std::vector<std::string> columns;
    for (const auto& rec : records) {
        if (!rec.ok) continue;
        for (const auto& e : rec.report.entries)
            if (std::find(columns.begin(), columns.end(), e.name) == columns.end())
                columns.push_back(e.name);
    }
    std::ostringstream csv;
    csv << axis << ",status";
    for (const auto& c : columns) csv << "," << c;
    csv << "\n";
    char buf[64];
    for (std::size_t i = 0; i < values.size(); ++i) {
        csv << values[i] << "," << (records[i].ok ? "ok" : "error");
        for (const auto& c : columns) {
            csv << ",";
            if (records[i].ok) {
                if (const auto* e = records[i].report.find(c)) {
                    std::snprintf(buf, sizeof(buf), "%.15g", e->value);
                    csv << buf;
                }
            }
        }
        csv << "\n";
    }
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write summary.csv");
    out << csv.str();

    return records;
}

// ---------------------------------------------------------------------------
// bundled scenarios
// ---------------------------------------------------------------------------

std::string scenario_dir() {
    if (const char* env = std::getenv("TPSLAB_SCENARIO_DIR")) return env;
#ifdef TPSLAB_SCENARIO_DIR
    return TPSLAB_SCENARIO_DIR;
#else
    return "scenarios";
#endif
}

std::vector<std::string> bundled_scenario_names() {
    std::vector<std::string> names;
    const fs::path dir(scenario_dir());
    if (!fs::is_directory(dir)) return names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            names.push_back(entry.path().stem().string());
    std::sort(names.begin(), names.end());
    return names;
}

std::string load_scenario_text(const std::string& name_or_path) {
    fs::path candidate(name_or_path);
    if (!fs::is_regular_file(candidate)) {
        candidate = fs::path(scenario_dir()) / (name_or_path + ".json");
        if (!fs::is_regular_file(candidate))
            fail(errc::io_error,
                 "no config file or bundled scenario named '" + name_or_path + "'");
    }
    std::ifstream in(candidate);
    if (!in) fail(errc::io_error, "cannot open " + candidate.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace tpslab::scenario
