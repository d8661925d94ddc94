#pragma once

#include "brc/machine.hpp"
#include "brc/reservoir.hpp"
#include "brc/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace brc {

struct ErrorReport {
    double delta_e_p = 0.0;
    double delta_e_s = 0.0;
    double beta = 1.0;
    double delta_e = 0.0;
    std::size_t realizations = 0;
};

/// delta_e = delta_e_p + beta * delta_e_s
inline double balanced_error(double delta_e_p, double delta_e_s, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("balanced_error: beta must be > 0");
    if (delta_e_p < 0.0 || delta_e_s < 0.0)
        throw std::invalid_argument("balanced_error: errors must be non-negative");
    return delta_e_p + beta * delta_e_s;
}

inline ErrorReport make_report(double delta_e_p, double delta_e_s, double beta, std::size_t realizations) {
    return {delta_e_p, delta_e_s, beta, balanced_error(delta_e_p, delta_e_s, beta), realizations};
}

/// beta ~ delta_e_p / delta_e_s, kept to one significant figure. The leading
/// digit is rounded to the nearest half so ratios like 25 or 15 survive.
inline double suggest_beta(double delta_e_p_sample, double delta_e_s_sample) {
    if (!(delta_e_s_sample > 0.0))
        throw std::domain_error("suggest_beta: zero synchronization error, supply beta manually");
    if (!(delta_e_p_sample > 0.0)) throw std::invalid_argument("suggest_beta: prediction error must be > 0");
    const double ratio = delta_e_p_sample / delta_e_s_sample;
    // Round off representation noise first so 0.4 / 0.016 lands on 25, not 25.000000000000004.
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", ratio);
    const double clean = std::strtod(buf, nullptr);
    double decade = std::pow(10.0, std::floor(std::log10(clean)));
    double mantissa = std::round(2.0 * clean / decade) / 2.0;
    if (mantissa >= 10.0) {
        mantissa /= 10.0;
        decade *= 10.0;
    }
    return mantissa * decade;
}

/// Time-averaged L2 distance between closed-loop predictions and ground truth,
/// averaged over the test series. Each series guides the reservoir with its
/// first `listen_length` points; outputs are compared over the next `horizon`
/// samples.
inline double prediction_error(const TrainedMachine& machine, std::span<const TimeSeries> test_series,
                               std::size_t listen_length, std::size_t horizon, const RandomStream& stream) {
    if (test_series.empty()) throw std::invalid_argument("prediction_error: no test series");
    if (listen_length < 1 || horizon < 1)
        throw std::invalid_argument("prediction_error: listen length and horizon must be >= 1");
    for (const auto& s : test_series)
        if (s.size() < listen_length + horizon)
            throw std::invalid_argument("prediction_error: test series shorter than l + horizon");

    std::vector<TimeSeries> guides;
    guides.reserve(test_series.size());
    for (const auto& s : test_series) guides.push_back(s.slice(0, listen_length));
    const Eigen::MatrixXd init = random_states(machine.n(), test_series.size(), stream.substream("validation-init"));

    std::vector<double> sums(test_series.size(), 0.0);
    guided_closed_loop_batch(machine, init, guides, horizon, [&](std::size_t k, const Eigen::MatrixXd& v) {
        for (std::size_t j = 0; j < test_series.size(); ++j)
            sums[j] += (v.col(static_cast<Eigen::Index>(j)) - test_series[j].sample(listen_length + k)).norm();
    });
    double total = 0.0;
    for (double s : sums) total += s / static_cast<double>(horizon);
    return total / static_cast<double>(test_series.size());
}

/// Mean final-state distance between reservoir copies started from independent
/// random states in [-1, 1]^n and driven by the same tau-step window. Each
/// realization draws its window (series and offset) from `drives`.
inline double sync_error(const ReservoirMatrices& mat, double alpha_leak, std::span<const TimeSeries> drives,
                         std::size_t tau, std::size_t realizations, const RandomStream& stream) {
    if (realizations < 1) throw std::invalid_argument("sync_error: realizations must be >= 1");
    if (drives.empty()) throw std::invalid_argument("sync_error: no drive series");
    for (const auto& s : drives)
        if (s.size() < tau) throw std::invalid_argument("sync_error: drive shorter than tau");

    const auto r = static_cast<Eigen::Index>(realizations);
    const auto d = static_cast<Eigen::Index>(mat.d());
    Eigen::MatrixXd states(static_cast<Eigen::Index>(mat.n()), 2 * r);
    std::vector<std::pair<std::size_t, std::size_t>> windows(realizations);
    for (std::size_t i = 0; i < realizations; ++i) {
        RandomStream rs = stream.substream(i);
        states.col(static_cast<Eigen::Index>(2 * i)) = random_states(mat.n(), 1, rs.substream("first"));
        states.col(static_cast<Eigen::Index>(2 * i + 1)) = random_states(mat.n(), 1, rs.substream("second"));
        RandomStream window = rs.substream("window");
        const std::size_t series = static_cast<std::size_t>(window.next_u64() % drives.size());
        const std::size_t span = drives[series].size() - tau + 1;
        windows[i] = {series, static_cast<std::size_t>(window.next_u64() % span)};
    }
    BatchStepper stepper(mat, alpha_leak);
    Eigen::MatrixXd inputs(d, 2 * r);
    for (std::size_t k = 0; k < tau; ++k) {
        for (std::size_t i = 0; i < realizations; ++i) {
            const auto& [series, offset] = windows[i];
            const auto u = drives[series].sample(offset + k);
            inputs.col(static_cast<Eigen::Index>(2 * i)) = u;
            inputs.col(static_cast<Eigen::Index>(2 * i + 1)) = u;
        }
        stepper.step(states, inputs);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < realizations; ++i)
        total += (states.col(static_cast<Eigen::Index>(2 * i)) - states.col(static_cast<Eigen::Index>(2 * i + 1))).norm();
    return total / static_cast<double>(realizations);
}

/// Spearman rank correlation (average ranks for ties).
inline double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need two equal samples");
    auto ranks = [](std::span<const double> v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) ma += ra[i], mb += rb[i];
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace brc
