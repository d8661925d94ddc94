// brc: command-line driver for the balanced reservoir-computing experiments.

#include "brc/config.hpp"
#include "brc/experiment.hpp"
#include "brc/machine_io.hpp"
#include "brc/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace brc;

namespace {

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::size_t workers = default_workers();
    std::string out;
    std::string machine;
};

struct Context {
    ExperimentConfig cfg;
    fs::path out;
    std::string digest;
};

Context open_context(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config is required");
    Context c;
    c.cfg = load_config(o.config);
    if (o.seed) c.cfg.master_seed = *o.seed;
    c.digest = config_digest(c.cfg);
    c.out = resolve_output_dir(c.cfg, o.out);
    fs::create_directories(c.out);
    write_file(c.out / "config.json", [&](std::ostream& os) { os << serialize_config(c.cfg); });
    return c;
}

void say(const std::string& s) { std::cout << s << std::endl; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

TrainedMachine obtain_machine(const Options& o, const Context& c, const DatasetPair& data) {
    if (o.machine.empty()) return train_from_config(c.cfg, data);
    TrainedMachine m = load_machine(o.machine);
    if (m.provenance.data_digest != data_digest(data))
        throw std::runtime_error("machine '" + o.machine + "' was trained on different data (data digest " +
                                 m.provenance.data_digest + " vs " + data_digest(data) + ")");
    return m;
}

int cmd_gen_data(const Options& o) {
    const Context c = open_context(o);
    const DatasetPair data = make_datasets(c.cfg);
    for (auto [name, set] : {std::pair{"training", &data.training}, std::pair{"testing", &data.testing}})
        write_file(c.out / "data" / (std::string(name) + ".csv"), [&](std::ostream& os) {
            write_dataset_csv(os, *set, data.normalizer, c.digest, c.cfg.master_seed);
        });
    say("datasets written to " + (c.out / "data").string() + " (data digest " + data_digest(data) + ")");
    return 0;
}

int cmd_search(const Options& o) {
    const Context c = open_context(o);
    const DatasetPair data = make_datasets(c.cfg);
    const SearchResult result = run_search(c.cfg, data, o.workers);
    write_file(c.out / "trials.csv",
               [&](std::ostream& os) { write_trial_log(os, result.trials, c.digest, c.cfg.master_seed); });
    const TrialRecord& best = result.best_trial();
    const TrainedMachine machine = machine_from_trial(c.cfg, data, best);
    const fs::path path = c.out / "machine-best.txt";
    save_machine(path.string(), machine);
    const auto& h = best.hyperparams;
    char buf[256];
    std::snprintf(buf, sizeof buf, "best trial %zu: p=%.4g lambda=%.4g sigma=%.4g alpha=%.4g eta=%.4g delta_e=%.6g",
                  best.candidate_id, h.p, h.lambda, h.sigma, h.alpha_leak, h.eta, best.report.delta_e);
    say(buf);
    say("best machine: " + path.string());
    return 0;
}

int cmd_train(const Options& o) {
    const Context c = open_context(o);
    const DatasetPair data = make_datasets(c.cfg);
    const TrainedMachine machine = train_from_config(c.cfg, data);
    const fs::path path = c.out / "machine.txt";
    save_machine(path.string(), machine);
    say("machine: " + path.string());
    return 0;
}

void write_basin_outputs(const fs::path& dir, const std::string& stem, const BasinMap& map) {
    write_file(dir / (stem + ".csv"), [&](std::ostream& os) { write_basin_csv(os, map); });
    write_file(dir / (stem + "-truth.pgm"), [&](std::ostream& os) { write_pgm(os, map.grid, map.truth); });
    if (!map.predicted.empty())
        write_file(dir / (stem + "-predicted.pgm"), [&](std::ostream& os) { write_pgm(os, map.grid, map.predicted); });
}

int cmd_ground_truth(const Options& o) {
    const Context c = open_context(o);
    const BasinMap map = run_ground_truth(c.cfg, o.workers);
    write_basin_outputs(c.out, "ground-truth", map);
    say("ground truth: " + (c.out / "ground-truth.csv").string() + " (undecided cells: " +
        std::to_string(map.count(map.truth, AsymptoticLabel::Undecided)) + ")");
    return 0;
}

int cmd_infer_basin(const Options& o) {
    const Context c = open_context(o);
    const DatasetPair data = make_datasets(c.cfg);
    const TrainedMachine machine = obtain_machine(o, c, data);
    const BasinMap truth = run_ground_truth(c.cfg, o.workers);
    const BasinMap map = run_inference(c.cfg, machine, data.normalizer, truth.truth, o.workers);
    write_basin_outputs(c.out, "basin", map);
    nlohmann::json summary{{"experiment_id", c.cfg.experiment_id},
                           {"config_digest", c.digest},
                           {"master_seed", c.cfg.master_seed},
                           {"accuracy", map.accuracy},
                           {"cells", map.grid.cells()},
                           {"undecided_predictions", map.count(map.predicted, AsymptoticLabel::Undecided)},
                           {"mean_error_distance_to_boundary", mean_error_distance_to_boundary(map)}};
    write_file(c.out / "summary.json", [&](std::ostream& os) { os << summary.dump(2) << '\n'; });
    say("accuracy " + fmt("%.4f", map.accuracy) + " on " + std::to_string(map.grid.nx) + "x" +
        std::to_string(map.grid.ny) + " grid; map: " + (c.out / "basin.csv").string());
    return 0;
}

int cmd_sweep_noise(const Options& o, std::vector<double> amplitudes, std::size_t realizations) {
    const Context c = open_context(o);
    if (amplitudes.empty() && c.cfg.noise_sweep) amplitudes = c.cfg.noise_sweep->amplitudes;
    if (realizations == 0) realizations = c.cfg.noise_sweep ? c.cfg.noise_sweep->realizations : 10;
    const auto rows = noise_sweep(c.cfg, amplitudes, realizations, o.workers, sweep_grid(c.cfg), say);
    write_file(c.out / "noise-sweep.csv",
               [&](std::ostream& os) { write_noise_sweep_csv(os, rows, c.digest, c.cfg.master_seed); });
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "D0=%-8g mean %.4f variance %.2e (%zu realizations)", r.amplitude,
                      r.mean_accuracy, r.variance, r.realizations_used);
        say(buf);
        for (const auto& f : r.failures) say("  failed " + f);
    }
    return 0;
}

int cmd_verify() {
    bool ok = true;
    run_invariant_suite([&](const CheckResult& r) {
        ok = ok && r.passed;
        say(std::string(r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail);
    });
    return ok ? 0 : 1;
}

int cmd_write_configs(const std::string& dir) {
    for (const auto& c : bundle_configs())
        write_file(fs::path(dir) / (c.experiment_id + ".json"), [&](std::ostream& os) { os << serialize_config(c); });
    say("wrote " + std::to_string(bundle_configs().size()) + " configs to " + dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced reservoir computing: basin inference for multistable systems"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub, bool machine) {
        sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "override the master seed");
        sub->add_option("--workers", o.workers, "worker threads (default: core count)")->check(CLI::PositiveNumber);
        sub->add_option("--out", o.out, "output directory (default: $BRC_OUTPUT_ROOT/<id> or the config's)");
        if (machine) sub->add_option("--machine", o.machine, "reuse a saved machine file")->check(CLI::ExistingFile);
    };
    auto* gen = app.add_subcommand("gen-data", "write training and testing datasets");
    common(gen, false);
    auto* srch = app.add_subcommand("search", "hyperparameter search: trial log and best machine");
    common(srch, false);
    auto* train = app.add_subcommand("train", "train with the config's explicit hyperparameters");
    common(train, false);
    auto* infer = app.add_subcommand("infer-basin", "predict the basin map and score it against ground truth");
    common(infer, true);
    auto* sweep = app.add_subcommand("sweep-noise", "accuracy versus intrinsic-noise amplitude");
    common(sweep, false);
    std::vector<double> amplitudes;
    std::size_t realizations = 0;
    sweep->add_option("--amplitudes", amplitudes, "noise amplitudes (default: config)");
    sweep->add_option("--realizations", realizations, "realizations per amplitude (default: config)");
    auto* gt = app.add_subcommand("ground-truth", "model-simulation basin map");
    common(gt, false);
    auto* verify = app.add_subcommand("verify", "run the invariant suite");
    auto* configs = app.add_subcommand("write-configs", "write the bundled reference configs");
    std::string config_dir = "configs";
    configs->add_option("--out", config_dir, "target directory");

    CLI11_PARSE(app, argc, argv);
    for (auto* sub : {gen, srch, train, infer, sweep, gt})
        if (sub->parsed() && sub->count("--seed")) o.seed = seed;

    try {
        if (gen->parsed()) return cmd_gen_data(o);
        if (srch->parsed()) return cmd_search(o);
        if (train->parsed()) return cmd_train(o);
        if (infer->parsed()) return cmd_infer_basin(o);
        if (sweep->parsed()) return cmd_sweep_noise(o, amplitudes, realizations);
        if (gt->parsed()) return cmd_ground_truth(o);
        if (verify->parsed()) return cmd_verify();
        if (configs->parsed()) return cmd_write_configs(config_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
