#pragma once

#include "brc/basin.hpp"
#include "brc/digest.hpp"
#include "brc/dynamics.hpp"
#include "brc/hyperopt.hpp"
#include "brc/reservoir.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MachineSection {
    std::size_t n = 500;
    double beta = 10.0;
    std::size_t train_listen = 10;
    std::uint64_t seed_index = 0;          // which matrix draw of the "matrices" substream
    std::optional<Hyperparams> hyperparams;  // absent: run `search` first
    bool operator==(const MachineSection&) const = default;
};

struct SearchSection {
    SearchStrategy strategy = SearchStrategy::Surrogate;
    std::size_t trial_budget = 300;
    Range p{0.0, 1.0};
    Range lambda{0.0, 3.0};
    Range sigma{0.0, 3.0};
    Range alpha_leak{0.0, 1.0};
    Range eta{1e-10, 1e-2};
    std::size_t validation_listen = 10;
    std::size_t validation_horizon = 1490;
    std::size_t tau = 10;
    std::size_t realizations = 50;
    bool operator==(const SearchSection&) const = default;
};

struct NoiseSweepSection {
    std::vector<double> amplitudes;
    std::size_t realizations = 10;
    std::size_t nx = 25;
    std::size_t ny = 25;
    bool operator==(const NoiseSweepSection&) const = default;
};

/// One experiment, fully reproducible from this structure and the code.
struct ExperimentConfig {
    std::string experiment_id;
    std::uint64_t master_seed = 1;
    SystemParams system = SwingParams{};
    DatasetSpec dataset;           // system and classification mirror the fields below
    MachineSection machine;
    SearchSection search;
    GridSpec grid;
    InferenceSpec inference;
    bool noisy_guides = true;      // guiding series from the noisy plant when D0 > 0
    ClassificationSpec ground_truth;
    std::optional<NoiseSweepSection> noise_sweep;
    std::string output_dir;

    std::size_t dimension() const { return state_dimension(system); }

    SearchSpace search_space() const {
        SearchSpace s;
        s.p = search.p;
        s.lambda = search.lambda;
        s.sigma = search.sigma;
        s.alpha_leak = search.alpha_leak;
        s.eta = search.eta;
        s.n = machine.n;
        s.d = dimension();
        s.trial_budget = search.trial_budget;
        s.beta = machine.beta;
        return s;
    }

    EvaluationSpec evaluation() const {
        return {machine.train_listen, search.validation_listen, search.validation_horizon, search.tau,
                search.realizations};
    }

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        if (experiment_id.empty()) fail("experiment_id: must not be empty");
        for (char c : experiment_id)
            if (c == ' ' || c == '\t' || c == '\n') fail("experiment_id: must not contain whitespace");
        std::visit([&](const auto& p) {
            try {
                p.validate();
            } catch (const std::exception& e) {
                fail(std::string("system: ") + e.what());
            }
        }, system);
        try {
            dataset.validate();
        } catch (const std::exception& e) {
            fail(std::string("dataset: ") + e.what());
        }
        if (dataset.system != system || dataset.classification != ground_truth)
            fail("dataset: internal mirror of system/ground_truth out of sync");
        if (machine.n < 1) fail("machine.n: must be >= 1");
        if (!(machine.beta > 0.0)) fail("machine.beta: must be > 0");
        if (machine.train_listen < 1 || machine.train_listen >= dataset.series_length)
            fail("machine.train_listen: must be in [1, dataset.series_length)");
        if (machine.hyperparams) {
            if (machine.hyperparams->n != machine.n || machine.hyperparams->d != dimension())
                fail("machine.hyperparams: n/d disagree with machine.n and the system dimension");
            try {
                machine.hyperparams->validate();
            } catch (const std::exception& e) {
                fail(std::string("machine.hyperparams: ") + e.what());
            }
        }
        try {
            search_space().validate();
        } catch (const std::exception& e) {
            fail(std::string("search: ") + e.what());
        }
        if (search.validation_listen < 1) fail("search.validation_listen: must be >= 1");
        if (search.validation_listen + search.validation_horizon > dataset.series_length)
            fail("search.validation_horizon: validation_listen + validation_horizon exceeds dataset.series_length");
        if (search.tau > dataset.series_length) fail("search.tau: longer than the series");
        if (search.realizations < 1) fail("search.realizations: must be >= 1");
        if (grid.base.size() != dimension()) fail("grid.base: must have one entry per state variable");
        try {
            grid.validate();
        } catch (const std::exception& e) {
            fail(std::string("grid: ") + e.what());
        }
        if (inference.guide_length < 1) fail("inference.guide_length: must be >= 1");
        if (inference.classification.horizon < 1) fail("inference.horizon: must be >= 1");
        if (inference.batch < 1) fail("inference.batch: must be >= 1");
        if (inference.classification.tail > inference.classification.horizon)
            fail("inference.tail: longer than the horizon");
        if (ground_truth.horizon < 1) fail("ground_truth.horizon: must be >= 1");
        if (ground_truth.tail > ground_truth.horizon + 1) fail("ground_truth.tail: longer than the horizon");
        const bool swing = std::holds_alternative<SwingParams>(system);
        if (!swing && (inference.classification.tail < 1 || ground_truth.tail < 1))
            fail("inference.tail/ground_truth.tail: chaotic systems need a tail >= 1");
        if (noise_sweep) {
            if (!swing) fail("noise_sweep: only defined for the swing system");
            if (noise_sweep->amplitudes.empty()) fail("noise_sweep.amplitudes: must not be empty");
            for (double a : noise_sweep->amplitudes)
                if (!(a >= 0.0)) fail("noise_sweep.amplitudes: amplitudes must be >= 0");
            if (noise_sweep->realizations < 1) fail("noise_sweep.realizations: must be >= 1");
            if (noise_sweep->nx < 1 || noise_sweep->ny < 1) fail("noise_sweep.nx/ny: must be >= 1");
        }
    }

    bool operator==(const ExperimentConfig&) const = default;
};

// ---------------------------------------------------------------------------
// JSON mapping
// ---------------------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

/// Typed, path-aware view of one JSON object; rejects unknown keys on close().
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(where() + "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(where(key) + "missing required field");
        return j_.at(key);
    }

    Section child(const std::string& key) { return Section(raw(key), join(key)); }

    double number(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
        return v.get<double>();
    }
    double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

    std::uint64_t integer(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
            throw ConfigError(where(key) + "expected a non-negative integer");
        return v.get<std::uint64_t>();
    }
    std::uint64_t integer(const std::string& key, std::uint64_t fallback) { return has(key) ? integer(key) : fallback; }

    std::string text(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
        return v.get<std::string>();
    }
    std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

    bool flag(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
        return v.get<bool>();
    }

    Range range(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw ConfigError(where(key) + "expected [lo, hi]");
        return {v[0].get<double>(), v[1].get<double>()};
    }
    Range range(const std::string& key, Range fallback) { return has(key) ? range(key) : fallback; }

    std::vector<double> numbers(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) throw ConfigError(where(key + "[" + std::to_string(i) + "]") + "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    std::vector<bool> flags(const std::string& key) {
        const auto& v = raw(key);
        if (!v.is_array()) throw ConfigError(where(key) + "expected an array of booleans");
        std::vector<bool> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_boolean()) throw ConfigError(where(key + "[" + std::to_string(i) + "]") + "expected true or false");
            out.push_back(v[i].get<bool>());
        }
        return out;
    }

    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    std::string where(const std::string& key = "") const {
        const std::string p = key.empty() ? path_ : join(key);
        return (p.empty() ? std::string("config") : p) + ": ";
    }

    void close() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + "unknown field");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

inline SystemParams system_from_json(Section s) {
    const std::string type = s.text("type");
    SystemParams out;
    if (type == "swing") {
        SwingParams p;
        p.input_power = s.number("input_power", p.input_power);
        p.damping = s.number("damping", p.damping);
        p.state_damping = s.number("state_damping", p.state_damping);
        p.noise_amplitude = s.number("noise_amplitude", p.noise_amplitude);
        out = p;
    } else if (type == "chua") {
        ChuaParams p;
        p.c1 = s.number("c1", p.c1);
        p.c2 = s.number("c2", p.c2);
        p.c3 = s.number("c3", p.c3);
        p.m0 = s.number("m0", p.m0);
        p.m1 = s.number("m1", p.m1);
        out = p;
    } else if (type == "duffing") {
        DuffingParams p;
        p.dissipation = s.number("dissipation", p.dissipation);
        p.drive_amplitude = s.number("drive_amplitude", p.drive_amplitude);
        p.drive_frequency = s.number("drive_frequency", p.drive_frequency);
        out = p;
    } else {
        throw ConfigError(s.where("type") + "expected one of swing, chua, duffing");
    }
    s.close();
    return out;
}

inline json system_to_json(const SystemParams& system) {
    json j;
    j["type"] = std::string(system_name(system));
    if (const auto* p = std::get_if<SwingParams>(&system)) {
        j["input_power"] = p->input_power;
        j["damping"] = p->damping;
        j["state_damping"] = p->state_damping;
        j["noise_amplitude"] = p->noise_amplitude;
    } else if (const auto* c = std::get_if<ChuaParams>(&system)) {
        j["c1"] = c->c1;
        j["c2"] = c->c2;
        j["c3"] = c->c3;
        j["m0"] = c->m0;
        j["m1"] = c->m1;
    } else {
        const auto& d = std::get<DuffingParams>(system);
        j["dissipation"] = d.dissipation;
        j["drive_amplitude"] = d.drive_amplitude;
        j["drive_frequency"] = d.drive_frequency;
    }
    return j;
}

inline ClassificationSpec classification_from_json(Section s) {
    ClassificationSpec c;
    c.horizon = s.integer("horizon");
    c.tail = s.integer("tail", 0);
    s.close();
    return c;
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::Section;
    Section root(j, "");
    ExperimentConfig c;
    c.experiment_id = root.text("experiment_id");
    c.master_seed = root.integer("master_seed");
    c.system = detail::system_from_json(root.child("system"));
    c.ground_truth = detail::classification_from_json(root.child("ground_truth"));
    const std::size_t dim = state_dimension(c.system);

    {
        Section s = root.child("dataset");
        auto& d = c.dataset;
        d.system = c.system;
        d.classification = c.ground_truth;
        const auto& ranges = s.raw("ic_ranges");
        if (!ranges.is_array()) throw ConfigError(s.where("ic_ranges") + "expected an array of [lo, hi]");
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const auto& r = ranges[i];
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                throw ConfigError(s.where("ic_ranges[" + std::to_string(i) + "]") + "expected [lo, hi]");
            d.ic_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
        }
        d.per_label = s.integer("per_label");
        d.series_length = s.integer("series_length");
        d.dt = s.number("dt");
        d.max_draws = s.integer("max_draws", d.max_draws);
        {
            Section n = s.child("normalization");
            const std::string scheme = n.text("scheme");
            if (scheme == "arctan") {
                d.normalization.scheme = NormalizationSpec::Scheme::Arctan;
            } else if (scheme == "minmax") {
                d.normalization.scheme = NormalizationSpec::Scheme::MinMax;
                d.normalization.minmax_components = n.flags("components");
                if (d.normalization.minmax_components.size() != dim)
                    throw ConfigError(n.where("components") + "needs one entry per state variable");
            } else {
                throw ConfigError(n.where("scheme") + "expected arctan or minmax");
            }
            n.close();
        }
        const auto& labels = s.raw("labels");
        if (!labels.is_array() || labels.empty()) throw ConfigError(s.where("labels") + "expected a non-empty array");
        for (std::size_t i = 0; i < labels.size(); ++i) {
            try {
                d.labels.push_back(label_from_string(labels[i].get<std::string>()));
            } catch (const std::exception&) {
                throw ConfigError(s.where("labels[" + std::to_string(i) + "]") + "unknown asymptotic label");
            }
        }
        s.close();
    }
    {
        Section s = root.child("machine");
        auto& m = c.machine;
        m.n = s.integer("n");
        m.beta = s.number("beta");
        m.train_listen = s.integer("train_listen");
        m.seed_index = s.integer("seed_index", 0);
        if (s.has("hyperparams")) {
            Section h = s.child("hyperparams");
            Hyperparams hp;
            hp.n = m.n;
            hp.d = dim;
            hp.p = h.number("p");
            hp.lambda = h.number("lambda");
            hp.sigma = h.number("sigma");
            hp.alpha_leak = h.number("alpha_leak");
            hp.eta = h.number("eta");
            h.close();
            m.hyperparams = hp;
        }
        s.close();
    }
    if (root.has("search")) {
        Section s = root.child("search");
        auto& r = c.search;
        const std::string strategy = s.text("strategy", "surrogate");
        if (strategy == "random") r.strategy = SearchStrategy::Random;
        else if (strategy == "surrogate") r.strategy = SearchStrategy::Surrogate;
        else throw ConfigError(s.where("strategy") + "expected random or surrogate");
        r.trial_budget = s.integer("trial_budget", r.trial_budget);
        r.p = s.range("p", r.p);
        r.lambda = s.range("lambda", r.lambda);
        r.sigma = s.range("sigma", r.sigma);
        r.alpha_leak = s.range("alpha_leak", r.alpha_leak);
        r.eta = s.range("eta", r.eta);
        r.validation_listen = s.integer("validation_listen", r.validation_listen);
        r.validation_horizon = s.integer("validation_horizon", r.validation_horizon);
        r.tau = s.integer("tau", r.tau);
        r.realizations = s.integer("realizations", r.realizations);
        s.close();
    }
    {
        Section s = root.child("grid");
        auto& g = c.grid;
        g.x_index = s.integer("x_index");
        g.y_index = s.integer("y_index");
        g.x_name = s.text("x_name");
        g.y_name = s.text("y_name");
        g.x = s.range("x");
        g.y = s.range("y");
        g.nx = s.integer("nx");
        g.ny = s.integer("ny");
        g.base = s.numbers("base");
        s.close();
    }
    {
        Section s = root.child("inference");
        auto& i = c.inference;
        i.guide_length = s.integer("guide_length");
        i.classification.horizon = s.integer("horizon");
        i.classification.tail = s.integer("tail", 0);
        i.batch = s.integer("batch", i.batch);
        c.noisy_guides = s.flag("noisy_guides", true);
        s.close();
    }
    if (root.has("noise_sweep")) {
        Section s = root.child("noise_sweep");
        NoiseSweepSection n;
        n.amplitudes = s.numbers("amplitudes");
        n.realizations = s.integer("realizations", n.realizations);
        n.nx = s.integer("nx", n.nx);
        n.ny = s.integer("ny", n.ny);
        s.close();
        c.noise_sweep = n;
    }
    c.output_dir = root.text("output_dir", "");
    root.close();
    c.validate();
    return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    using detail::range_json;
    json j;
    j["experiment_id"] = c.experiment_id;
    j["master_seed"] = c.master_seed;
    j["system"] = detail::system_to_json(c.system);
    j["ground_truth"] = {{"horizon", c.ground_truth.horizon}, {"tail", c.ground_truth.tail}};

    json d;
    d["ic_ranges"] = json::array();
    for (const auto& r : c.dataset.ic_ranges) d["ic_ranges"].push_back(range_json(r));
    d["per_label"] = c.dataset.per_label;
    d["series_length"] = c.dataset.series_length;
    d["dt"] = c.dataset.dt;
    d["max_draws"] = c.dataset.max_draws;
    if (c.dataset.normalization.scheme == NormalizationSpec::Scheme::Arctan) {
        d["normalization"] = {{"scheme", "arctan"}};
    } else {
        json comps = json::array();
        for (bool b : c.dataset.normalization.minmax_components) comps.push_back(b);
        d["normalization"] = {{"scheme", "minmax"}, {"components", comps}};
    }
    d["labels"] = json::array();
    for (auto l : c.dataset.labels) d["labels"].push_back(std::string(to_string(l)));
    j["dataset"] = d;

    json m;
    m["n"] = c.machine.n;
    m["beta"] = c.machine.beta;
    m["train_listen"] = c.machine.train_listen;
    m["seed_index"] = c.machine.seed_index;
    if (c.machine.hyperparams) {
        const auto& h = *c.machine.hyperparams;
        m["hyperparams"] = {{"p", h.p}, {"lambda", h.lambda}, {"sigma", h.sigma}, {"alpha_leak", h.alpha_leak},
                            {"eta", h.eta}};
    }
    j["machine"] = m;

    const auto& s = c.search;
    j["search"] = {{"strategy", s.strategy == SearchStrategy::Random ? "random" : "surrogate"},
                   {"trial_budget", s.trial_budget},
                   {"p", range_json(s.p)},
                   {"lambda", range_json(s.lambda)},
                   {"sigma", range_json(s.sigma)},
                   {"alpha_leak", range_json(s.alpha_leak)},
                   {"eta", range_json(s.eta)},
                   {"validation_listen", s.validation_listen},
                   {"validation_horizon", s.validation_horizon},
                   {"tau", s.tau},
                   {"realizations", s.realizations}};

    const auto& g = c.grid;
    j["grid"] = {{"x_index", g.x_index}, {"y_index", g.y_index}, {"x_name", g.x_name}, {"y_name", g.y_name},
                 {"x", range_json(g.x)},  {"y", range_json(g.y)},  {"nx", g.nx},         {"ny", g.ny},
                 {"base", g.base}};
    j["inference"] = {{"guide_length", c.inference.guide_length},
                      {"horizon", c.inference.classification.horizon},
                      {"tail", c.inference.classification.tail},
                      {"batch", c.inference.batch},
                      {"noisy_guides", c.noisy_guides}};
    if (c.noise_sweep)
        j["noise_sweep"] = {{"amplitudes", c.noise_sweep->amplitudes},
                            {"realizations", c.noise_sweep->realizations},
                            {"nx", c.noise_sweep->nx},
                            {"ny", c.noise_sweep->ny}};
    j["output_dir"] = c.output_dir;
    return j;
}

inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& c) { return config_to_json(c).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

/// Digest of the canonical (key-sorted, compact) serialization; independent of
/// file formatting. The master seed is part of it.
inline std::string config_digest(const ExperimentConfig& c) {
    return Digest().update(config_to_json(c).dump()).hex();
}

/// Output root: explicit flag, else $BRC_OUTPUT_ROOT, else the config's own
/// output_dir, else "out/<experiment_id>".
inline std::string resolve_output_dir(const ExperimentConfig& c, const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("BRC_OUTPUT_ROOT"); env && *env)
        return std::string(env) + "/" + c.experiment_id;
    if (!c.output_dir.empty()) return c.output_dir;
    return "out/" + c.experiment_id;
}

// ---------------------------------------------------------------------------
// Reference experiments
// ---------------------------------------------------------------------------

namespace detail {

inline Hyperparams reference_hp(std::size_t d, double p, double lambda, double sigma, double alpha, double eta) {
    return Hyperparams{500, p, lambda, sigma, alpha, eta, d};
}

inline ExperimentConfig swing_base(std::string id, double damping, double noise, std::size_t m,
                                   std::size_t length, double beta, Hyperparams hp) {
    ExperimentConfig c;
    c.experiment_id = std::move(id);
    c.master_seed = 1;
    c.system = SwingParams{0.4, damping, 0.7, noise};
    c.ground_truth = {1500, 0};
    auto& d = c.dataset;
    d.system = c.system;
    d.classification = c.ground_truth;
    d.ic_ranges = {{-3.0, 3.0}, {-4.0, 2.0}};
    d.per_label = m;
    d.series_length = length;
    d.dt = 0.05;
    d.normalization.scheme = NormalizationSpec::Scheme::Arctan;
    d.labels = {AsymptoticLabel::Operating, AsymptoticLabel::PositiveDiverging, AsymptoticLabel::NegativeDiverging};
    c.machine = {500, beta, 10, 0, hp};
    c.search.validation_listen = 10;
    c.search.validation_horizon = length - 10;
    c.grid = GridSpec{};
    c.inference.guide_length = 10;
    c.inference.classification = {1500, 0};
    c.output_dir = "";
    return c;
}

}  // namespace detail

/// One config per reference experiment, with its reference hyperparameters.
inline std::vector<ExperimentConfig> bundle_configs() {
    using detail::reference_hp;
    using detail::swing_base;
    std::vector<ExperimentConfig> out;

    out.push_back(swing_base("swing-D0.39", 0.39, 0.0, 3, 1500, 10.0,
                             reference_hp(2, 0.480, 0.033, 2.917, 0.574, 3.458e-4)));

    auto reduced = swing_base("swing-D0.39-reduced", 0.39, 0.0, 2, 1500, 15.0,
                              reference_hp(2, 0.804, 0.852, 2.690, 0.965, 1.552e-4));
    reduced.noise_sweep = NoiseSweepSection{{0.0, 1e-5, 1e-4, 1e-3, 2e-3, 1e-2, 1e-1}, 10, 25, 25};
    out.push_back(reduced);

    out.push_back(swing_base("swing-D0.39-noisy", 0.39, 1e-5, 2, 1500, 12.0,
                             reference_hp(2, 0.404, 0.752, 2.637, 0.738, 8.341e-4)));

    // Operating state and positive divergence only.
    for (auto [id, noise, hp] : {std::tuple{"swing-D0.06", 0.0, reference_hp(2, 0.758, 0.046, 1.689, 0.586, 6.91e-5)},
                                 std::tuple{"swing-D0.06-noisy", 1e-2,
                                            reference_hp(2, 0.854, 0.086, 2.401, 0.489, 9.161e-5)}}) {
        auto c = swing_base(id, 0.06, noise, 5, 1000, 30.0, hp);
        c.dataset.labels = {AsymptoticLabel::Operating, AsymptoticLabel::PositiveDiverging};
        c.ground_truth = {2000, 0};
        c.dataset.classification = c.ground_truth;
        c.inference.classification = {2000, 0};
        out.push_back(c);
    }

    {
        ExperimentConfig c;
        c.experiment_id = "chua";
        c.master_seed = 1;
        c.system = ChuaParams{};
        c.ground_truth = {10000, 1000};
        auto& d = c.dataset;
        d.system = c.system;
        d.classification = c.ground_truth;
        d.ic_ranges = {{-2.0, 2.0}, {-0.5, 0.5}, {0.0, 0.0}};
        d.per_label = 5;
        d.series_length = 3000;
        d.dt = 0.05;
        d.normalization = {NormalizationSpec::Scheme::MinMax, {true, false, true}};
        d.labels = {AsymptoticLabel::AttractorLeft, AsymptoticLabel::AttractorRight};
        c.machine = {500, 20.0, 20, 0, reference_hp(3, 0.7691, 0.300, 2.763, 0.424, 1.1e-3)};
        c.search.trial_budget = 400;
        c.search.validation_listen = 20;
        c.search.validation_horizon = 2980;
        c.grid = GridSpec{0, 1, "x", "y", {-2.0, 2.0}, {-0.5, 0.5}, 100, 100, {0.0, 0.0, 0.0}};
        c.inference.guide_length = 10;
        c.inference.classification = {10000, 1000};
        out.push_back(c);
    }
    {
        ExperimentConfig c;
        c.experiment_id = "duffing";
        c.master_seed = 1;
        c.system = DuffingParams{};
        // Ground truth averages a longer tail than the prediction criterion.
        c.ground_truth = {10000, 2000};
        auto& d = c.dataset;
        d.system = c.system;
        d.classification = c.ground_truth;
        d.ic_ranges = {{-2.0, 2.0}, {-2.0, 2.0}};
        d.per_label = 5;
        d.series_length = 300;
        d.dt = 0.01;
        d.normalization = {NormalizationSpec::Scheme::MinMax, {true, true}};
        d.labels = {AsymptoticLabel::AttractorLeft, AsymptoticLabel::AttractorRight};
        c.machine = {500, 25.0, 20, 0, reference_hp(2, 0.995, 0.501, 0.607, 0.631, 1.9e-3)};
        c.search.trial_budget = 400;
        c.search.validation_listen = 20;
        c.search.validation_horizon = 280;
        c.grid = GridSpec{0, 1, "x", "y", {-2.0, 2.0}, {-2.0, 2.0}, 100, 100, {0.0, 0.0}};
        c.inference.guide_length = 10;
        c.inference.classification = {10000, 100};
        out.push_back(c);
    }
    for (auto& c : out) c.validate();
    return out;
}

inline ExperimentConfig bundled_config(const std::string& id) {
    for (auto& c : bundle_configs())
        if (c.experiment_id == id) return c;
    throw ConfigError("no bundled config named '" + id + "'");
}

}  // namespace brc
