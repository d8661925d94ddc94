#pragma once

#include "brc/reservoir.hpp"
#include "brc/time_series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

struct Provenance {
    std::string experiment_id;
    std::string data_digest;
    std::string config_digest;
    std::uint64_t master_seed = 0;
    bool operator==(const Provenance&) const = default;
};

/// Hyperparameters, fixed random matrices and trained readout. Immutable once
/// trained; share it freely across workers.
struct TrainedMachine {
    Hyperparams hyperparams;
    ReservoirMatrices matrices;
    Eigen::MatrixXd readout;  // d x n
    double beta = 0.0;
    double dt = 1.0;          // sampling step of the data the machine was trained on
    Provenance provenance;

    std::size_t n() const noexcept { return hyperparams.n; }
    std::size_t d() const noexcept { return hyperparams.d; }
};

inline constexpr double kClosedLoopClamp = 1.5;

/// Features V (n x L) and targets U (d x L) of the working stage: every series
/// is listened to for `listen_length` points from a fresh random state, and
/// each later state r(t) is paired with the sample u(t) it should reproduce.
struct TrainingRecord {
    Eigen::MatrixXd features;
    Eigen::MatrixXd targets;
};

inline TrainingRecord collect_training_record(const ReservoirMatrices& mat, double alpha_leak,
                                              std::span<const TimeSeries> series,
                                              std::size_t listen_length, RandomStream init_stream) {
    if (series.empty()) throw std::invalid_argument("training: no series");
    if (listen_length < 1) throw std::invalid_argument("training: listen length must be >= 1");
    const auto n = static_cast<Eigen::Index>(mat.n());
    const auto d = static_cast<Eigen::Index>(mat.d());

    Eigen::Index total = 0;
    for (const auto& s : series) {
        if (s.dimension() != mat.d()) throw std::invalid_argument("training: series dimension mismatch");
        if (s.size() <= listen_length)
            throw std::invalid_argument("training: series shorter than the listening stage");
        total += static_cast<Eigen::Index>(s.size() - listen_length);
    }

    TrainingRecord rec{Eigen::MatrixXd(n, total), Eigen::MatrixXd(d, total)};
    const Eigen::MatrixXd init = random_states(mat.n(), series.size(), init_stream);

    // One batch over all series; columns retire as their series run out.
    const auto count = static_cast<Eigen::Index>(series.size());
    std::size_t longest = 0;
    for (const auto& s : series) longest = std::max(longest, s.size());
    std::vector<Eigen::Index> offset(series.size());
    for (std::size_t j = 1; j < series.size(); ++j)
        offset[j] = offset[j - 1] + static_cast<Eigen::Index>(series[j - 1].size() - listen_length);

    Eigen::MatrixXd states = init;
    Eigen::MatrixXd inputs(d, count);
    BatchStepper stepper(mat, alpha_leak);
    for (std::size_t k = 0; k + 1 < longest; ++k) {
        for (Eigen::Index j = 0; j < count; ++j) {
            const auto& s = series[static_cast<std::size_t>(j)];
            inputs.col(j) = k + 1 < s.size() ? Eigen::VectorXd(s.sample(k)) : Eigen::VectorXd::Zero(d);
        }
        stepper.step(states, inputs);
        const std::size_t t = k + 1;  // states now hold r(t)
        if (t < listen_length) continue;
        for (Eigen::Index j = 0; j < count; ++j) {
            const auto& s = series[static_cast<std::size_t>(j)];
            if (t >= s.size()) continue;
            const Eigen::Index col = offset[static_cast<std::size_t>(j)] + static_cast<Eigen::Index>(t - listen_length);
            rec.features.col(col) = states.col(j);
            rec.targets.col(col) = s.sample(t);
        }
    }
    rec.features = state_transform(rec.features);
    return rec;
}

inline TrainedMachine train_machine(const Hyperparams& hp, const MatrixSeeds& seeds,
                                    std::span<const TimeSeries> training, std::size_t listen_length,
                                    double beta, Provenance provenance = {}) {
    TrainedMachine m;
    m.hyperparams = hp;
    m.matrices = build_matrices(hp, seeds);
    const auto rec = collect_training_record(m.matrices, hp.alpha_leak, training, listen_length,
                                             RandomStream(seeds.init_state).substream("training"));
    m.readout = train_readout(rec.features, rec.targets, hp.eta);
    m.beta = beta;
    m.dt = training.front().dt();
    m.provenance = std::move(provenance);
    return m;
}

/// Clamped readout; non-finite components are left as they are so callers can flag them.
inline Eigen::VectorXd machine_output(const TrainedMachine& m, const ReservoirState& state) {
    Eigen::VectorXd v = m.readout * state_transform(state);
    for (auto& x : v)
        if (std::isfinite(x)) x = std::clamp(x, -kClosedLoopClamp, kClosedLoopClamp);
    return v;
}

struct ClosedLoopResult {
    TimeSeries series;
    bool flagged = false;  // non-finite feedback; series truncated before it
};

/// Autonomous run: each output v(t + dt) = W_out r~(t + dt) is fed back as the
/// next input. `last_output` is the first value fed in (typically the last
/// measured sample of the guiding series, with `seed_state` the reservoir
/// state just before it).
inline ClosedLoopResult predict_closed_loop(const TrainedMachine& m, const ReservoirState& seed_state,
                                            const Eigen::VectorXd& last_output, std::size_t steps,
                                            double t0 = 0.0) {
    if (static_cast<std::size_t>(seed_state.size()) != m.n() ||
        static_cast<std::size_t>(last_output.size()) != m.d())
        throw std::invalid_argument("predict_closed_loop: dimension mismatch");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.d()), static_cast<Eigen::Index>(steps));
    ReservoirState r = seed_state;
    Eigen::VectorXd u = last_output;
    ClosedLoopResult res;
    std::size_t written = 0;
    for (; written < steps; ++written) {
        r = reservoir_step(r, u, m.matrices, m.hyperparams.alpha_leak);
        u = machine_output(m, r);
        if (!u.allFinite()) {
            res.flagged = true;
            break;
        }
        out.col(static_cast<Eigen::Index>(written)) = u;
    }
    out.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(written));
    res.series = TimeSeries(m.dt, t0, std::move(out));
    return res;
}

/// Batched guiding + closed loop. Column j of `guides` (all of equal length l)
/// drives reservoir copy j through its first l - 1 samples from `init.col(j)`;
/// the last guiding sample then starts the autonomous loop of `steps` outputs.
/// `on_output(k, outputs)` sees the d x B output block after each loop step.
template <typename OnOutput>
std::vector<bool> guided_closed_loop_batch(const TrainedMachine& m, const Eigen::MatrixXd& init,
                                           std::span<const TimeSeries> guides, std::size_t steps,
                                           OnOutput&& on_output) {
    const auto batch = static_cast<Eigen::Index>(guides.size());
    if (init.cols() != batch || static_cast<std::size_t>(init.rows()) != m.n())
        throw std::invalid_argument("guided_closed_loop_batch: init shape mismatch");
    if (guides.empty()) return {};
    const std::size_t l = guides.front().size();
    if (l < 1) throw std::invalid_argument("guided_closed_loop_batch: empty guiding series");
    for (const auto& g : guides)
        if (g.size() != l || g.dimension() != m.d())
            throw std::invalid_argument("guided_closed_loop_batch: guiding series shape mismatch");

    const auto d = static_cast<Eigen::Index>(m.d());
    Eigen::MatrixXd states = init;
    Eigen::MatrixXd inputs(d, batch);
    BatchStepper stepper(m.matrices, m.hyperparams.alpha_leak);
    for (std::size_t k = 0; k < l; ++k) {
        for (Eigen::Index j = 0; j < batch; ++j) inputs.col(j) = guides[static_cast<std::size_t>(j)].sample(k);
        if (k + 1 < l) stepper.step(states, inputs);
    }
    std::vector<bool> flagged(guides.size(), false);
    Eigen::MatrixXd outputs(d, batch);
    Eigen::MatrixXd features(states.rows(), batch);
    for (std::size_t k = 0; k < steps; ++k) {
        stepper.step(states, inputs);
        features = states;
        for (Eigen::Index i = 1; i < features.rows(); i += 2) features.row(i) = features.row(i).array().square();
        outputs.noalias() = m.readout * features;
        for (Eigen::Index j = 0; j < batch; ++j) {
            if (!outputs.col(j).allFinite()) {
                flagged[static_cast<std::size_t>(j)] = true;
                outputs.col(j).setZero();
            }
        }
        outputs = outputs.cwiseMax(-kClosedLoopClamp).cwiseMin(kClosedLoopClamp);
        on_output(k, static_cast<const Eigen::MatrixXd&>(outputs));
        inputs = outputs;
    }
    return flagged;
}

}  // namespace brc
