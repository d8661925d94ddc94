#pragma once

#include "brc/basin.hpp"
#include "brc/machine.hpp"
#include "brc/objective.hpp"
#include "brc/parallel.hpp"
#include "brc/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

struct SearchSpace {
    Range p{0.0, 1.0};
    Range lambda{0.0, 3.0};
    Range sigma{0.0, 3.0};
    Range alpha_leak{0.0, 1.0};
    Range eta{1e-10, 1e-2};
    std::size_t n = 500;
    std::size_t d = 2;
    std::size_t trial_budget = 300;
    double beta = 10.0;

    void validate() const {
        auto check = [](const Range& r, double lo, double hi, const char* name) {
            if (!(r.lo < r.hi)) throw std::invalid_argument(std::string("search space: empty range for ") + name);
            if (r.lo < lo || r.hi > hi)
                throw std::invalid_argument(std::string("search space: range for ") + name + " leaves its domain");
        };
        check(p, 0.0, 1.0, "p");
        check(lambda, 0.0, std::numeric_limits<double>::infinity(), "lambda");
        check(sigma, 0.0, std::numeric_limits<double>::infinity(), "sigma");
        check(alpha_leak, 0.0, 1.0, "alpha_leak");
        check(eta, 0.0, std::numeric_limits<double>::infinity(), "eta");
        if (!(eta.lo > 0.0)) throw std::invalid_argument("search space: eta range must be positive (log-sampled)");
        if (trial_budget < 1) throw std::invalid_argument("search space: trial_budget must be >= 1");
        if (!(beta > 0.0)) throw std::invalid_argument("search space: beta must be > 0");
    }

    bool contains(const Hyperparams& hp) const {
        auto in = [](const Range& r, double v) { return v > r.lo && v < r.hi; };
        return in(p, hp.p) && in(lambda, hp.lambda) && in(sigma, hp.sigma) && in(alpha_leak, hp.alpha_leak) &&
               hp.eta >= eta.lo && hp.eta <= eta.hi && hp.n == n && hp.d == d;
    }

    /// Unit-cube coordinates: linear for p, lambda, sigma, alpha; log10 for eta.
    std::array<double, 5> to_unit(const Hyperparams& hp) const {
        return {(hp.p - p.lo) / (p.hi - p.lo), (hp.lambda - lambda.lo) / (lambda.hi - lambda.lo),
                (hp.sigma - sigma.lo) / (sigma.hi - sigma.lo),
                (hp.alpha_leak - alpha_leak.lo) / (alpha_leak.hi - alpha_leak.lo),
                (std::log10(hp.eta) - std::log10(eta.lo)) / (std::log10(eta.hi) - std::log10(eta.lo))};
    }

    Hyperparams from_unit(std::array<double, 5> u) const {
        // Open intervals: keep a hair away from the excluded endpoints.
        for (auto& x : u) x = std::clamp(x, 1e-9, 1.0 - 1e-9);
        Hyperparams hp;
        hp.n = n;
        hp.d = d;
        hp.p = p.lo + u[0] * (p.hi - p.lo);
        hp.lambda = lambda.lo + u[1] * (lambda.hi - lambda.lo);
        hp.sigma = sigma.lo + u[2] * (sigma.hi - sigma.lo);
        hp.alpha_leak = alpha_leak.lo + u[3] * (alpha_leak.hi - alpha_leak.lo);
        hp.eta = std::pow(10.0, std::log10(eta.lo) + u[4] * (std::log10(eta.hi) - std::log10(eta.lo)));
        return hp;
    }

    /// Uniform in p, lambda, sigma, alpha; log-uniform in eta.
    Hyperparams sample(RandomStream& stream) const {
        std::array<double, 5> u{};
        for (auto& x : u) x = stream.uniform();
        return from_unit(u);
    }
};

/// How a candidate is scored: the training listen length, the guiding length
/// and closed-loop horizon for delta_e_p on the test set, and the window
/// length and realization count for delta_e_s on the training set.
struct EvaluationSpec {
    std::size_t train_listen = 10;
    std::size_t validation_listen = 10;
    std::size_t validation_horizon = 1490;
    std::size_t tau = 10;
    std::size_t realizations = 50;
    bool operator==(const EvaluationSpec&) const = default;
};

struct TrialRecord {
    std::size_t candidate_id = 0;
    Hyperparams hyperparams;
    MatrixSeeds seeds;
    ErrorReport report;
    std::string machine_file;
    double wall_seconds = 0.0;
    bool failed = false;
};

/// Orders by delta_e, then by candidate id.
inline bool trial_less(const TrialRecord& a, const TrialRecord& b) {
    if (a.report.delta_e != b.report.delta_e) return a.report.delta_e < b.report.delta_e;
    return a.candidate_id < b.candidate_id;
}

inline ErrorReport failed_report(double beta, std::size_t realizations) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, beta, inf, realizations};
}

/// Build, train on `train`, score delta_e_s on `train` and delta_e_p on `test`.
/// Training failures yield an infinite-delta_e record rather than an exception.
inline TrialRecord evaluate_candidate(const Hyperparams& hp, std::span<const TimeSeries> train,
                                      std::span<const TimeSeries> test, double beta, const EvaluationSpec& eval,
                                      const RandomStream& trial_stream, std::size_t candidate_id = 0) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.candidate_id = candidate_id;
    rec.hyperparams = hp;
    rec.seeds = MatrixSeeds::from(trial_stream.substream("matrices"));
    try {
        const TrainedMachine machine = train_machine(hp, rec.seeds, train, eval.train_listen, beta);
        if (!machine.readout.allFinite()) throw std::domain_error("non-finite readout");
        const double es = sync_error(machine.matrices, hp.alpha_leak, train, eval.tau, eval.realizations,
                                     trial_stream.substream("sync"));
        const double ep = prediction_error(machine, test, eval.validation_listen, eval.validation_horizon,
                                           trial_stream.substream("prediction"));
        rec.report = make_report(ep, es, beta, eval.realizations);
    } catch (const std::domain_error&) {
        rec.report = failed_report(beta, eval.realizations);
        rec.failed = true;
    } catch (const std::runtime_error&) {
        // every adjacency redraw had zero spectral radius
        rec.report = failed_report(beta, eval.realizations);
        rec.failed = true;
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

enum class SearchStrategy { Random, Surrogate };

struct SearchResult {
    std::vector<TrialRecord> trials;  // ordered by candidate_id
    std::size_t best = 0;             // index into trials

    const TrialRecord& best_trial() const { return trials.at(best); }
};

inline std::size_t surrogate_warmup(std::size_t budget) {
    return std::min(budget, std::max<std::size_t>(20, budget / 10));
}

namespace detail {

/// Full quadratic feature map over the unit cube: 1, x_i, x_i x_j (i <= j).
inline Eigen::VectorXd quadratic_features(const std::array<double, 5>& x) {
    Eigen::VectorXd f(21);
    Eigen::Index k = 0;
    f[k++] = 1.0;
    for (double v : x) f[k++] = v;
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j) f[k++] = x[i] * x[j];
    return f;
}

/// Proposes the next point: fit a ridge-regularized quadratic to the trials
/// closest to the incumbent, then take the best of a fixed set of candidate
/// points inside the trust box around it.
inline std::array<double, 5> propose_refinement(const SearchSpace& space, std::span<const TrialRecord> trials,
                                                const TrialRecord& incumbent, double radius,
                                                RandomStream& stream) {
    const auto center = space.to_unit(incumbent.hyperparams);
    std::vector<std::pair<double, std::size_t>> by_distance;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        if (!std::isfinite(trials[i].report.delta_e)) continue;
        const auto u = space.to_unit(trials[i].hyperparams);
        double dist = 0.0;
        for (std::size_t k = 0; k < 5; ++k) dist += (u[k] - center[k]) * (u[k] - center[k]);
        by_distance.emplace_back(dist, i);
    }
    std::sort(by_distance.begin(), by_distance.end());
    const std::size_t used = std::min<std::size_t>(by_distance.size(), 42);

    std::vector<std::array<double, 5>> candidates(256);
    for (auto& c : candidates)
        for (std::size_t k = 0; k < 5; ++k)
            c[k] = std::clamp(center[k] + radius * (2.0 * stream.uniform() - 1.0), 0.0, 1.0);
    if (used < 8) return candidates.front();

    Eigen::MatrixXd x(static_cast<Eigen::Index>(used), 21);
    Eigen::VectorXd y(static_cast<Eigen::Index>(used));
    for (std::size_t r = 0; r < used; ++r) {
        const auto& t = trials[by_distance[r].second];
        x.row(static_cast<Eigen::Index>(r)) = quadratic_features(space.to_unit(t.hyperparams)).transpose();
        y[static_cast<Eigen::Index>(r)] = std::log(t.report.delta_e + 1e-12);
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += 1e-3;
    const Eigen::VectorXd coef = gram.ldlt().solve(x.transpose() * y);
    if (!coef.allFinite()) return candidates.front();

    std::size_t best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double v = quadratic_features(candidates[i]).dot(coef);
        if (v < best_value) {
            best_value = v;
            best = i;
        }
    }
    return candidates[best];
}

}  // namespace detail

/// Minimizes delta_e over the space. Random: independent draws. Surrogate: the
/// same random warmup of max(20, budget / 10) draws, then sequential
/// quadratic-surrogate refinement in a trust box around the incumbent (the box
/// grows after an improvement and shrinks otherwise).
inline SearchResult search(const SearchSpace& space, std::span<const TimeSeries> train,
                           std::span<const TimeSeries> test, const EvaluationSpec& eval, SearchStrategy strategy,
                           const RandomStream& search_stream, std::size_t workers = 1) {
    space.validate();
    SearchResult result;
    const std::size_t budget = space.trial_budget;
    const std::size_t warmup = strategy == SearchStrategy::Random ? budget : surrogate_warmup(budget);
    RandomStream sampler = search_stream.substream("sampler");
    std::vector<Hyperparams> initial(warmup);
    for (auto& hp : initial) hp = space.sample(sampler);

    const RandomStream trial_streams = search_stream.substream("trials");
    result.trials.resize(warmup);
    parallel_for(warmup, workers, [&](std::size_t i) {
        result.trials[i] = evaluate_candidate(initial[i], train, test, space.beta, eval, trial_streams.substream(i), i);
    });

    auto incumbent = [&] {
        return static_cast<std::size_t>(
            std::min_element(result.trials.begin(), result.trials.end(), trial_less) - result.trials.begin());
    };
    RandomStream proposals = search_stream.substream("refinement");
    double radius = 0.2;
    for (std::size_t id = warmup; id < budget; ++id) {
        const std::size_t inc = incumbent();
        const auto u = detail::propose_refinement(space, result.trials, result.trials[inc], radius, proposals);
        result.trials.push_back(
            evaluate_candidate(space.from_unit(u), train, test, space.beta, eval, trial_streams.substream(id), id));
        if (trial_less(result.trials.back(), result.trials[inc]))
            radius = std::min(0.5, radius * 1.5);
        else
            radius = std::max(0.02, radius * 0.8);
    }
    result.best = incumbent();
    return result;
}

inline void write_trial_log_header(std::ostream& os) {
    os << "candidate_id,p,lambda,sigma,alpha_leak,eta,delta_e_p,delta_e_s,beta,delta_e\n";
}

inline void write_trial_row(std::ostream& os, const TrialRecord& t) {
    char buf[512];
    const auto& h = t.hyperparams;
    const auto& r = t.report;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t.candidate_id, h.p,
                  h.lambda, h.sigma, h.alpha_leak, h.eta, r.delta_e_p, r.delta_e_s, r.beta, r.delta_e);
    os << buf;
}

}  // namespace brc
