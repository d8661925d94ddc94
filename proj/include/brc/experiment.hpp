#pragma once

#include "brc/basin.hpp"
#include "brc/config.hpp"
#include "brc/digest.hpp"
#include "brc/hyperopt.hpp"
#include "brc/machine.hpp"
#include "brc/machine_io.hpp"
#include "brc/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

// Stage substreams of the master seed.
inline RandomStream stage_stream(const ExperimentConfig& cfg, std::string_view stage) {
    return RandomStream(cfg.master_seed).substream(stage);
}

inline DatasetPair make_datasets(const ExperimentConfig& cfg) {
    return generate_dataset(cfg.dataset, stage_stream(cfg, "data"));
}

inline std::string data_digest(const DatasetPair& data) {
    Digest d;
    for (const auto* set : {&data.training, &data.testing}) {
        d.update(static_cast<std::uint64_t>(set->normalized.size()));
        for (const auto& s : set->normalized) d.update(s);
    }
    return d.hex();
}

inline Provenance make_provenance(const ExperimentConfig& cfg, const DatasetPair& data) {
    return {cfg.experiment_id, data_digest(data), config_digest(cfg), cfg.master_seed};
}

inline MatrixSeeds machine_seeds(const ExperimentConfig& cfg) {
    return MatrixSeeds::from(stage_stream(cfg, "matrices").substream(cfg.machine.seed_index));
}

inline TrainedMachine train_from_config(const ExperimentConfig& cfg, const DatasetPair& data,
                                        const Hyperparams& hp) {
    return train_machine(hp, machine_seeds(cfg), data.training.normalized, cfg.machine.train_listen,
                         cfg.machine.beta, make_provenance(cfg, data));
}

inline TrainedMachine train_from_config(const ExperimentConfig& cfg, const DatasetPair& data) {
    if (!cfg.machine.hyperparams)
        throw ConfigError("machine.hyperparams: required for training (run `search` to find them)");
    return train_from_config(cfg, data, *cfg.machine.hyperparams);
}

inline SearchResult run_search(const ExperimentConfig& cfg, const DatasetPair& data, std::size_t workers) {
    return search(cfg.search_space(), data.training.normalized, data.testing.normalized, cfg.evaluation(),
                  cfg.search.strategy, stage_stream(cfg, "search"), workers);
}

/// Rebuilds the machine of a logged trial (trial matrices, config training data).
inline TrainedMachine machine_from_trial(const ExperimentConfig& cfg, const DatasetPair& data,
                                         const TrialRecord& trial) {
    return train_machine(trial.hyperparams, trial.seeds, data.training.normalized, cfg.machine.train_listen,
                         cfg.machine.beta, make_provenance(cfg, data));
}

/// Noise-free model-simulation oracle on the config grid.
inline BasinMap run_ground_truth(const ExperimentConfig& cfg, std::size_t workers, const GridSpec* grid = nullptr) {
    BasinMap map = ground_truth_basin(without_noise(cfg.system), cfg.dataset.dt, grid ? *grid : cfg.grid,
                                      cfg.ground_truth, RandomStream(), workers);
    map.config_digest = config_digest(cfg);
    map.master_seed = cfg.master_seed;
    return map;
}

inline BasinMap run_inference(const ExperimentConfig& cfg, const TrainedMachine& machine,
                              const Normalizer& normalizer, std::vector<AsymptoticLabel> truth,
                              std::size_t workers, const GridSpec* grid = nullptr) {
    const SystemParams guides = cfg.noisy_guides ? cfg.system : without_noise(cfg.system);
    BasinMap map = infer_basin(machine, guides, grid ? *grid : cfg.grid, normalizer, cfg.inference,
                               std::move(truth), stage_stream(cfg, "grid"), workers);
    map.config_digest = config_digest(cfg);
    map.master_seed = cfg.master_seed;
    return map;
}

// ---------------------------------------------------------------------------
// Noise sweep
// ---------------------------------------------------------------------------

struct NoiseSweepRow {
    double amplitude = 0.0;
    double mean_accuracy = 0.0;
    double variance = 0.0;
    std::size_t realizations_used = 0;
    std::vector<double> accuracies;  // per realization, NaN for a failed one
    std::vector<std::string> failures;
};

/// Accuracy versus intrinsic-noise amplitude. Realization r uses the same
/// seeds at every amplitude (data, matrices and inference streams come from
/// the master seed's "noise-sweep" substream r), so amplitudes are compared
/// on matched draws. Failures are logged and excluded from the mean.
inline std::vector<NoiseSweepRow> noise_sweep(const ExperimentConfig& cfg, std::span<const double> amplitudes,
                                              std::size_t realizations, std::size_t workers,
                                              const GridSpec& grid,
                                              const std::function<void(const std::string&)>& log = {}) {
    if (amplitudes.empty()) throw std::invalid_argument("noise_sweep: amplitudes must not be empty");
    if (realizations < 1) throw std::invalid_argument("noise_sweep: realizations must be >= 1");
    if (!std::holds_alternative<SwingParams>(cfg.system))
        throw std::invalid_argument("noise_sweep: only defined for the swing system");
    if (!cfg.machine.hyperparams) throw ConfigError("machine.hyperparams: required for the noise sweep");

    const BasinMap truth = run_ground_truth(cfg, workers, &grid);
    const RandomStream sweep = stage_stream(cfg, "noise-sweep");
    std::vector<NoiseSweepRow> rows;
    for (double amplitude : amplitudes) {
        NoiseSweepRow row;
        row.amplitude = amplitude;
        for (std::size_t r = 0; r < realizations; ++r) {
            ExperimentConfig c = cfg;
            std::get<SwingParams>(c.system).noise_amplitude = amplitude;
            c.dataset.system = c.system;
            const RandomStream rs = sweep.substream(r);
            try {
                const DatasetPair data = generate_dataset(c.dataset, rs.substream("data"));
                const TrainedMachine machine =
                    train_machine(*c.machine.hyperparams, MatrixSeeds::from(rs.substream("matrices")),
                                  data.training.normalized, c.machine.train_listen, c.machine.beta,
                                  make_provenance(c, data));
                const SystemParams guides = c.noisy_guides ? c.system : without_noise(c.system);
                const BasinMap map = infer_basin(machine, guides, grid, data.normalizer, c.inference, truth.truth,
                                                 rs.substream("grid"), workers);
                row.accuracies.push_back(map.accuracy);
            } catch (const std::exception& e) {
                row.accuracies.push_back(std::numeric_limits<double>::quiet_NaN());
                row.failures.push_back("realization " + std::to_string(r) + ": " + e.what());
            }
            if (log) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "D0=%g realization %zu accuracy %.4f", amplitude, r,
                              row.accuracies.back());
                log(buf);
            }
        }
        double sum = 0.0;
        for (double a : row.accuracies)
            if (std::isfinite(a)) sum += a, ++row.realizations_used;
        if (row.realizations_used > 0) {
            row.mean_accuracy = sum / static_cast<double>(row.realizations_used);
            double ss = 0.0;
            for (double a : row.accuracies)
                if (std::isfinite(a)) ss += (a - row.mean_accuracy) * (a - row.mean_accuracy);
            row.variance = row.realizations_used > 1 ? ss / static_cast<double>(row.realizations_used - 1) : 0.0;
        } else {
            row.mean_accuracy = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline GridSpec sweep_grid(const ExperimentConfig& cfg) {
    GridSpec g = cfg.grid;
    if (cfg.noise_sweep) {
        g.nx = cfg.noise_sweep->nx;
        g.ny = cfg.noise_sweep->ny;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Artifact writers. Every file opens with "# config_digest" / "# master_seed".
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void provenance_header(std::ostream& os, const std::string& digest, std::uint64_t seed) {
    os << "# config_digest=" << digest << "\n# master_seed=" << seed << '\n';
}

}  // namespace detail

/// One row per sample: series index, label, step, time, raw state, normalized state.
inline void write_dataset_csv(std::ostream& os, const Dataset& set, const Normalizer& normalizer,
                              const std::string& digest, std::uint64_t seed) {
    detail::provenance_header(os, digest, seed);
    os << "# normalizer=";
    for (std::size_t k = 0; k < normalizer.dimension(); ++k) {
        const auto& m = normalizer.maps()[k];
        if (k) os << ';';
        switch (m.kind) {
            case ComponentMap::Kind::Arctan: os << "arctan"; break;
            case ComponentMap::Kind::Identity: os << "identity"; break;
            case ComponentMap::Kind::MinMax: os << "minmax(" << detail::fmt17(m.lo) << ',' << detail::fmt17(m.hi) << ')'; break;
        }
    }
    os << '\n';
    const std::size_t dim = set.raw.empty() ? 0 : set.raw.front().dimension();
    os << "series,label,step,t";
    for (std::size_t k = 0; k < dim; ++k) os << ",raw" << k;
    for (std::size_t k = 0; k < dim; ++k) os << ",norm" << k;
    os << '\n';
    for (std::size_t s = 0; s < set.raw.size(); ++s) {
        const auto& raw = set.raw[s];
        const auto& norm = set.normalized[s];
        for (std::size_t i = 0; i < raw.size(); ++i) {
            os << s << ',' << to_string(set.labels[s]) << ',' << i << ',' << detail::fmt17(raw.time(i));
            for (std::size_t k = 0; k < dim; ++k) os << ',' << detail::fmt17(raw.samples()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
            for (std::size_t k = 0; k < dim; ++k) os << ',' << detail::fmt17(norm.samples()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
            os << '\n';
        }
    }
}

/// BasinMap CSV. The predicted column is omitted for a ground-truth-only map.
inline void write_basin_csv(std::ostream& os, const BasinMap& map) {
    detail::provenance_header(os, map.config_digest, map.master_seed);
    const auto& g = map.grid;
    os << "# grid=" << g.x_name << '[' << detail::fmt17(g.x.lo) << ',' << detail::fmt17(g.x.hi) << "]x" << g.nx << ' '
       << g.y_name << '[' << detail::fmt17(g.y.lo) << ',' << detail::fmt17(g.y.hi) << "]x" << g.ny << '\n';
    const bool predicted = !map.predicted.empty();
    if (predicted) os << "# accuracy=" << detail::fmt17(map.accuracy) << '\n';
    os << g.x_name << ',' << g.y_name << ",true_label";
    if (predicted) os << ",predicted_label";
    os << '\n';
    for (std::size_t cell = 0; cell < g.cells(); ++cell) {
        os << detail::fmt17(g.x_at(cell)) << ',' << detail::fmt17(g.y_at(cell)) << ',' << to_string(map.truth[cell]);
        if (predicted) os << ',' << to_string(map.predicted[cell]);
        os << '\n';
    }
}

/// Fixed label -> gray level used in the PGM layers.
inline unsigned char label_gray(AsymptoticLabel label) {
    switch (label) {
        case AsymptoticLabel::Operating: return 40;
        case AsymptoticLabel::PositiveDiverging: return 120;
        case AsymptoticLabel::NegativeDiverging: return 200;
        case AsymptoticLabel::AttractorLeft: return 80;
        case AsymptoticLabel::AttractorRight: return 170;
        case AsymptoticLabel::Undecided: return 255;
    }
    return 255;
}

/// Binary PGM (P5, maxval 255), top row = largest y.
inline void write_pgm(std::ostream& os, const GridSpec& grid, std::span<const AsymptoticLabel> layer) {
    if (layer.size() != grid.cells()) throw std::invalid_argument("write_pgm: layer does not match the grid");
    os << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
    for (std::size_t row = 0; row < grid.ny; ++row) {
        const std::size_t iy = grid.ny - 1 - row;
        for (std::size_t ix = 0; ix < grid.nx; ++ix) os.put(static_cast<char>(label_gray(layer[iy * grid.nx + ix])));
    }
}

inline void write_noise_sweep_csv(std::ostream& os, std::span<const NoiseSweepRow> rows, const std::string& digest,
                                  std::uint64_t seed) {
    detail::provenance_header(os, digest, seed);
    os << "D0,mean_accuracy,variance,realizations_used\n";
    for (const auto& r : rows)
        os << detail::fmt17(r.amplitude) << ',' << detail::fmt17(r.mean_accuracy) << ',' << detail::fmt17(r.variance)
           << ',' << r.realizations_used << '\n';
}

inline void write_trial_log(std::ostream& os, std::span<const TrialRecord> trials, const std::string& digest,
                            std::uint64_t seed) {
    detail::provenance_header(os, digest, seed);
    write_trial_log_header(os);
    for (const auto& t : trials) write_trial_row(os, t);
}

/// Writes through `writer` into `path`, creating parent directories.
template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    writer(os);
    if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace brc
