#pragma once

#include "brc/dynamics.hpp"
#include "brc/machine.hpp"
#include "brc/parallel.hpp"
#include "brc/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Range&) const = default;
};

/// When a trajectory counts as settled: the swing criterion is read after
/// `horizon` iterations, the chaotic criterion averages x over the last
/// `tail` of `horizon` iterations.
struct ClassificationSpec {
    std::size_t horizon = 1500;
    std::size_t tail = 0;
    bool operator==(const ClassificationSpec&) const = default;
};

inline AsymptoticLabel label_trajectory(const SystemParams& system, const Trajectory& traj,
                                        const ClassificationSpec& cls) {
    if (std::holds_alternative<SwingParams>(system)) {
        if (traj.diverged)
            return traj.divergence_sign > 0 ? AsymptoticLabel::PositiveDiverging
                                            : AsymptoticLabel::NegativeDiverging;
        return classify_swing(Normalizer::arctan(2).apply(traj.series), cls.horizon + 1);
    }
    if (traj.diverged) return AsymptoticLabel::Undecided;
    return classify_chaotic(traj.series, cls.tail);
}

/// Brute-force model simulation of one initial condition.
inline AsymptoticLabel simulate_label(const SystemParams& system, const Eigen::VectorXd& ic, double dt,
                                      const ClassificationSpec& cls,
                                      std::optional<std::uint64_t> noise_seed = std::nullopt) {
    IntegrateOptions opts;
    opts.noise_seed = noise_seed;
    return label_trajectory(system, integrate(system, ic, dt, cls.horizon, opts), cls);
}

inline SystemParams without_noise(SystemParams system) {
    if (auto* swing = std::get_if<SwingParams>(&system)) swing->noise_amplitude = 0.0;
    return system;
}

inline bool is_noisy(const SystemParams& system) {
    const auto* swing = std::get_if<SwingParams>(&system);
    return swing && swing->noise_amplitude > 0.0;
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct NormalizationSpec {
    enum class Scheme { Arctan, MinMax };
    Scheme scheme = Scheme::Arctan;
    /// Components mapped into [-1, 1] under MinMax; the rest are kept unchanged.
    std::vector<bool> minmax_components;

    Normalizer fit(const std::vector<TimeSeries>& raw) const {
        if (scheme == Scheme::Arctan) return Normalizer::arctan(raw.front().dimension());
        return Normalizer::fit_minmax(raw, minmax_components);
    }
    bool operator==(const NormalizationSpec&) const = default;
};

struct DatasetSpec {
    SystemParams system = SwingParams{};
    std::vector<Range> ic_ranges;
    std::size_t per_label = 3;
    std::size_t series_length = 1500;
    double dt = 0.05;
    NormalizationSpec normalization;
    ClassificationSpec classification;
    std::vector<AsymptoticLabel> labels;
    std::size_t max_draws = 10000;

    bool operator==(const DatasetSpec&) const = default;

    void validate() const {
        if (per_label < 1) throw std::invalid_argument("dataset: per_label (m) must be >= 1");
        if (series_length < 2) throw std::invalid_argument("dataset: series_length must be >= 2");
        if (!(dt > 0.0)) throw std::invalid_argument("dataset: dt must be positive");
        if (labels.empty()) throw std::invalid_argument("dataset: no target labels");
        if (ic_ranges.size() != state_dimension(system))
            throw std::invalid_argument("dataset: ic_ranges must cover every state variable");
        for (const auto& r : ic_ranges)
            if (!(r.hi >= r.lo)) throw std::invalid_argument("dataset: empty ic range");
    }
};

struct Dataset {
    std::vector<Eigen::VectorXd> initial_conditions;
    std::vector<AsymptoticLabel> labels;
    std::vector<TimeSeries> raw;
    std::vector<TimeSeries> normalized;
};

struct DatasetPair {
    Dataset training;
    Dataset testing;
    Normalizer normalizer;
};

namespace detail {

inline Dataset sample_labeled_series(const DatasetSpec& spec, RandomStream stream) {
    Dataset out;
    std::vector<std::size_t> have(spec.labels.size(), 0);
    const std::size_t steps = std::max(spec.series_length - 1, spec.classification.horizon);
    const std::size_t wanted = spec.per_label * spec.labels.size();
    RandomStream ic_stream = stream.substream("initial-conditions");
    for (std::size_t draw = 0; draw < spec.max_draws && out.raw.size() < wanted; ++draw) {
        Eigen::VectorXd ic(static_cast<Eigen::Index>(spec.ic_ranges.size()));
        for (std::size_t k = 0; k < spec.ic_ranges.size(); ++k)
            ic[static_cast<Eigen::Index>(k)] = ic_stream.uniform(spec.ic_ranges[k].lo, spec.ic_ranges[k].hi);
        IntegrateOptions opts;
        if (is_noisy(spec.system)) opts.noise_seed = stream.substream("noise").substream(draw).key();
        const Trajectory traj = integrate(spec.system, ic, spec.dt, steps, opts);
        const AsymptoticLabel label = label_trajectory(spec.system, traj, spec.classification);
        const auto it = std::find(spec.labels.begin(), spec.labels.end(), label);
        if (it == spec.labels.end()) continue;
        auto& count = have[static_cast<std::size_t>(it - spec.labels.begin())];
        if (count == spec.per_label) continue;
        ++count;

        // Guard-truncated (diverged) runs are held at their last state; in
        // normalized units the state has already saturated.
        Eigen::MatrixXd samples(traj.series.dimension(), static_cast<Eigen::Index>(spec.series_length));
        const std::size_t kept = std::min(spec.series_length, traj.series.size());
        samples.leftCols(static_cast<Eigen::Index>(kept)) =
            traj.series.samples().leftCols(static_cast<Eigen::Index>(kept));
        for (std::size_t k = kept; k < spec.series_length; ++k)
            samples.col(static_cast<Eigen::Index>(k)) = traj.series.sample(traj.series.size() - 1);
        out.initial_conditions.push_back(ic);
        out.labels.push_back(label);
        out.raw.emplace_back(spec.dt, 0.0, std::move(samples));
    }
    for (std::size_t i = 0; i < spec.labels.size(); ++i)
        if (have[i] < spec.per_label)
            throw std::runtime_error("dataset: label '" + std::string(to_string(spec.labels[i])) +
                                     "' unreachable after " + std::to_string(spec.max_draws) + " draws");
    return out;
}

}  // namespace detail

/// Rejection-samples initial conditions until every target label has
/// `per_label` series. Training and testing use disjoint substreams; the
/// normalizer is fit on the training set only and then applied to both.
inline DatasetPair generate_dataset(const DatasetSpec& spec, const RandomStream& data_stream) {
    spec.validate();
    DatasetPair pair;
    pair.training = detail::sample_labeled_series(spec, data_stream.substream("training"));
    pair.testing = detail::sample_labeled_series(spec, data_stream.substream("testing"));
    pair.normalizer = spec.normalization.fit(pair.training.raw);
    for (auto* set : {&pair.training, &pair.testing})
        for (const auto& s : set->raw) set->normalized.push_back(pair.normalizer.apply(s));
    return pair;
}

// ---------------------------------------------------------------------------
// Grids and basin maps
// ---------------------------------------------------------------------------

/// Rectangular grid over two state variables; the other variables take their
/// value from `base`. Cells are numbered row-major: cell = iy * nx + ix.
struct GridSpec {
    std::size_t x_index = 0;
    std::size_t y_index = 1;
    std::string x_name = "theta";
    std::string y_name = "omega";
    Range x{-3.0, 3.0};
    Range y{-4.0, 2.0};
    std::size_t nx = 100;
    std::size_t ny = 100;
    std::vector<double> base{0.0, 0.0};

    std::size_t cells() const noexcept { return nx * ny; }

    static double axis_value(const Range& r, std::size_t i, std::size_t count) {
        if (count <= 1) return 0.5 * (r.lo + r.hi);
        return r.lo + (r.hi - r.lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    double x_at(std::size_t cell) const { return axis_value(x, cell % nx, nx); }
    double y_at(std::size_t cell) const { return axis_value(y, cell / nx, ny); }

    Eigen::VectorXd initial_condition(std::size_t cell) const {
        Eigen::VectorXd ic = Eigen::Map<const Eigen::VectorXd>(base.data(), static_cast<Eigen::Index>(base.size()));
        ic[static_cast<Eigen::Index>(x_index)] = x_at(cell);
        ic[static_cast<Eigen::Index>(y_index)] = y_at(cell);
        return ic;
    }

    void validate() const {
        if (nx < 1 || ny < 1) throw std::invalid_argument("grid: empty grid");
        if (x_index >= base.size() || y_index >= base.size() || x_index == y_index)
            throw std::invalid_argument("grid: axis indices do not match the base state");
    }
    bool operator==(const GridSpec&) const = default;
};

struct BasinMap {
    GridSpec grid;
    std::vector<AsymptoticLabel> truth;
    std::vector<AsymptoticLabel> predicted;  // empty for a ground-truth-only map
    double accuracy = 1.0;
    std::string config_digest;
    std::uint64_t master_seed = 0;

    std::size_t count(const std::vector<AsymptoticLabel>& layer, AsymptoticLabel label) const {
        return static_cast<std::size_t>(std::count(layer.begin(), layer.end(), label));
    }
};

/// Fraction of cells whose labels agree; an Undecided on either side is a mismatch.
inline double basin_accuracy(std::span<const AsymptoticLabel> truth,
                             std::span<const AsymptoticLabel> predicted) {
    if (truth.size() != predicted.size() || truth.empty())
        throw std::invalid_argument("basin_accuracy: layer sizes differ or are empty");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (truth[i] == predicted[i] && truth[i] != AsymptoticLabel::Undecided) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

inline BasinMap ground_truth_basin(const SystemParams& system, double dt, const GridSpec& grid,
                                   const ClassificationSpec& cls, const RandomStream& noise_stream = RandomStream(),
                                   std::size_t workers = 1) {
    grid.validate();
    BasinMap map;
    map.grid = grid;
    map.truth.resize(grid.cells());
    const bool noisy = is_noisy(system);
    parallel_for(grid.cells(), workers, [&](std::size_t cell) {
        std::optional<std::uint64_t> seed;
        if (noisy) seed = noise_stream.substream(cell).key();
        map.truth[cell] = simulate_label(system, grid.initial_condition(cell), dt, cls, seed);
    });
    return map;
}

struct InferenceSpec {
    std::size_t guide_length = 10;
    ClassificationSpec classification;  // closed-loop horizon (and tail for chaotic systems)
    std::size_t batch = 128;
    bool operator==(const InferenceSpec&) const = default;
};

/// Normalized l-point guiding series from the true (possibly noisy) system.
inline TimeSeries guiding_series(const SystemParams& system, const Eigen::VectorXd& ic, double dt,
                                 std::size_t length, const Normalizer& normalizer,
                                 std::optional<std::uint64_t> noise_seed) {
    if (length < 1) throw std::invalid_argument("guiding_series: length must be >= 1");
    if (length == 1)
        return normalizer.apply(TimeSeries(dt, 0.0, Eigen::MatrixXd(ic)));
    IntegrateOptions opts;
    opts.noise_seed = noise_seed;
    Trajectory traj = integrate(system, ic, dt, length - 1, opts);
    Eigen::MatrixXd samples(traj.series.dimension(), static_cast<Eigen::Index>(length));
    const std::size_t kept = traj.series.size();
    samples.leftCols(static_cast<Eigen::Index>(kept)) = traj.series.samples();
    for (std::size_t k = kept; k < length; ++k)
        samples.col(static_cast<Eigen::Index>(k)) = traj.series.sample(kept - 1);
    return normalizer.apply(TimeSeries(dt, 0.0, std::move(samples)));
}

/// Label of a closed-loop prediction under the same criteria as ground truth.
inline AsymptoticLabel classify_prediction(const SystemParams& system, const TimeSeries& predicted,
                                           const ClassificationSpec& cls, const Normalizer& normalizer) {
    if (std::holds_alternative<SwingParams>(system)) return classify_swing(predicted, cls.horizon);
    return classify_chaotic(predicted, cls.tail, normalizer.forward(0, 0.0));
}

/// Predicted labels for every grid cell: listen to the guiding series, run the
/// closed loop, classify. `stream` seeds the per-cell reservoir initial states
/// and (for noisy systems) the guiding-series noise.
inline std::vector<AsymptoticLabel> predict_basin_labels(const TrainedMachine& machine,
                                                         const SystemParams& system, const GridSpec& grid,
                                                         const Normalizer& normalizer,
                                                         const InferenceSpec& spec, const RandomStream& stream,
                                                         std::size_t workers = 1) {
    grid.validate();
    if (spec.batch < 1) throw std::invalid_argument("infer_basin: batch must be >= 1");
    const std::size_t cells = grid.cells();
    const std::size_t batches = (cells + spec.batch - 1) / spec.batch;
    const std::size_t steps = spec.classification.horizon;
    const bool noisy = is_noisy(system);
    const RandomStream init_stream = stream.substream("reservoir-init");
    const RandomStream noise_stream = stream.substream("guiding-noise");
    std::vector<AsymptoticLabel> labels(cells, AsymptoticLabel::Undecided);

    parallel_for(batches, workers, [&](std::size_t b) {
        const std::size_t first = b * spec.batch;
        const std::size_t count = std::min(spec.batch, cells - first);
        std::vector<TimeSeries> guides;
        guides.reserve(count);
        Eigen::MatrixXd init(static_cast<Eigen::Index>(machine.n()), static_cast<Eigen::Index>(count));
        for (std::size_t j = 0; j < count; ++j) {
            const std::size_t cell = first + j;
            std::optional<std::uint64_t> seed;
            if (noisy) seed = noise_stream.substream(cell).key();
            guides.push_back(guiding_series(system, grid.initial_condition(cell), machine.dt,
                                            spec.guide_length, normalizer, seed));
            init.col(static_cast<Eigen::Index>(j)) = random_states(machine.n(), 1, init_stream.substream(cell));
        }
        std::vector<Eigen::MatrixXd> outputs(count, Eigen::MatrixXd(static_cast<Eigen::Index>(machine.d()),
                                                                    static_cast<Eigen::Index>(steps)));
        const auto flagged = guided_closed_loop_batch(
            machine, init, guides, steps, [&](std::size_t k, const Eigen::MatrixXd& v) {
                for (std::size_t j = 0; j < count; ++j)
                    outputs[j].col(static_cast<Eigen::Index>(k)) = v.col(static_cast<Eigen::Index>(j));
            });
        for (std::size_t j = 0; j < count; ++j) {
            if (flagged[j]) continue;
            const TimeSeries predicted(machine.dt, 0.0, std::move(outputs[j]));
            labels[first + j] = classify_prediction(system, predicted, spec.classification, normalizer);
        }
    });
    return labels;
}

inline BasinMap infer_basin(const TrainedMachine& machine, const SystemParams& system, const GridSpec& grid,
                            const Normalizer& normalizer, const InferenceSpec& spec,
                            std::vector<AsymptoticLabel> truth, const RandomStream& stream,
                            std::size_t workers = 1) {
    if (truth.size() != grid.cells())
        throw std::invalid_argument("infer_basin: ground truth does not match the grid");
    BasinMap map;
    map.grid = grid;
    map.truth = std::move(truth);
    map.predicted = predict_basin_labels(machine, system, grid, normalizer, spec, stream, workers);
    map.accuracy = basin_accuracy(map.truth, map.predicted);
    map.config_digest = machine.provenance.config_digest;
    map.master_seed = machine.provenance.master_seed;
    return map;
}

/// Mean grid-index distance from each misclassified cell to the nearest cell
/// on a true basin boundary (a cell with a 4-neighbour of a different label).
/// Returns 0 when nothing is misclassified.
inline double mean_error_distance_to_boundary(const BasinMap& map) {
    const auto& g = map.grid;
    std::vector<std::pair<double, double>> boundary;
    for (std::size_t cell = 0; cell < g.cells(); ++cell) {
        const std::size_t ix = cell % g.nx, iy = cell / g.nx;
        const auto label = map.truth[cell];
        const bool edge = (ix > 0 && map.truth[cell - 1] != label) ||
                          (ix + 1 < g.nx && map.truth[cell + 1] != label) ||
                          (iy > 0 && map.truth[cell - g.nx] != label) ||
                          (iy + 1 < g.ny && map.truth[cell + g.nx] != label);
        if (edge) boundary.emplace_back(static_cast<double>(ix), static_cast<double>(iy));
    }
    double total = 0.0;
    std::size_t wrong = 0;
    for (std::size_t cell = 0; cell < g.cells(); ++cell) {
        if (map.predicted[cell] == map.truth[cell] && map.truth[cell] != AsymptoticLabel::Undecided) continue;
        ++wrong;
        const double ix = static_cast<double>(cell % g.nx), iy = static_cast<double>(cell / g.nx);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [bx, by] : boundary) best = std::min(best, std::hypot(ix - bx, iy - by));
        total += std::isfinite(best) ? best : std::hypot(double(g.nx), double(g.ny));
    }
    return wrong == 0 ? 0.0 : total / static_cast<double>(wrong);
}

}  // namespace brc
