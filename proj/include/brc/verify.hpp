#pragma once

#include "brc/basin.hpp"
#include "brc/dynamics.hpp"
#include "brc/objective.hpp"
#include "brc/reservoir.hpp"
#include "brc/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace brc {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline std::string printf_string(const char* fmt, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, fmt, a, b);
    return buf;
}

}  // namespace detail

/// Ridge readout against the augmented least-squares problem
/// min ||U - W V||^2 + eta ||W||^2, solved by QR on [V^T; sqrt(eta) I].
inline CheckResult check_ridge_oracle(std::size_t instances = 40) {
    RandomStream rs(0x51D6E);
    double worst = 0.0;
    for (std::size_t t = 0; t < instances; ++t) {
        const auto n = static_cast<Eigen::Index>(2 + rs.next_u64() % 19);   // 2..20
        const auto l = static_cast<Eigen::Index>(1 + rs.next_u64() % 50);   // 1..50
        const auto d = static_cast<Eigen::Index>(1 + rs.next_u64() % 3);
        const double eta = std::pow(10.0, rs.uniform(-6.0, 0.0));
        Eigen::MatrixXd v(n, l), u(d, l);
        for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = rs.uniform(-1.0, 1.0);
        for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = rs.uniform(-1.0, 1.0);
        const Eigen::MatrixXd w = train_readout(v, u, eta);

        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(l + n, n);
        a.topRows(l) = v.transpose();
        a.bottomRows(n).diagonal().setConstant(std::sqrt(eta));
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(l + n, d);
        b.topRows(l) = u.transpose();
        const Eigen::MatrixXd oracle = a.colPivHouseholderQr().solve(b).transpose();
        worst = std::max(worst, (w - oracle).norm() / std::max(oracle.norm(), 1e-300));
    }
    return {"ridge readout matches augmented least squares (n<=20, L<=50)", worst <= 1e-8,
            detail::printf_string("max relative error %.3e (tolerance 1e-8)", worst)};
}

/// Rescaled spectral radius checked through a different solver on A^T.
inline CheckResult check_spectral_radius() {
    RandomStream rs(0x5BEC);
    double worst = 0.0;
    const std::size_t sizes[] = {50, 200, 500};
    for (std::size_t n : sizes) {
        for (int k = 0; k < 2; ++k) {
            Hyperparams hp{n, rs.uniform(0.05, 0.95), rs.uniform(0.01, 2.99), 1.0, 0.5, 1e-4, 2};
            const auto mat = build_matrices(hp, MatrixSeeds{rs.next_u64(), rs.next_u64(), rs.next_u64()});
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(mat.adjacency.transpose().cast<std::complex<double>>(),
                                                           false);
            const double rho = ces.eigenvalues().cwiseAbs().maxCoeff();
            worst = std::max(worst, std::abs(rho - hp.lambda));
        }
    }
    return {"rescaled spectral radius equals lambda", worst <= 1e-6,
            detail::printf_string("max |rho - lambda| %.3e (tolerance 1e-6)", worst)};
}

/// Endpoint error of a smooth swing trajectory at dt, dt/2, dt/4 against a
/// dt = 1e-5 reference.
inline CheckResult check_rk4_order() {
    const SwingParams p{};
    const SwingField field{p};
    const double horizon = 5.0;
    auto endpoint = [&](double dt) {
        Eigen::Vector2d s(0.5, 0.5);
        const auto steps = static_cast<long>(std::llround(horizon / dt));
        double t = 0.0;
        for (long k = 0; k < steps; ++k, t += dt) s = rk4_step(field, s, t, dt);
        return s;
    };
    const Eigen::Vector2d reference = endpoint(1e-5);
    const double e1 = (endpoint(0.2) - reference).norm();
    const double e2 = (endpoint(0.1) - reference).norm();
    const double e3 = (endpoint(0.05) - reference).norm();
    const double order = std::min(std::log2(e1 / e2), std::log2(e2 / e3));
    return {"RK4 convergence order on a smooth swing trajectory", order >= 3.5 && e1 / e2 >= 12.0 && e2 / e3 >= 12.0,
            detail::printf_string("measured order %.3f (floor 3.5), error ratio %.2f", order, e2 / e3)};
}

inline CheckResult check_chua_symmetry() {
    RandomStream rs(0xC4A);
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
        Eigen::VectorXd ic(3);
        ic << rs.uniform(-2, 2), rs.uniform(-0.5, 0.5), rs.uniform(-1, 1);
        const auto a = integrate(ChuaParams{}, ic, 0.05, 3000);
        const auto b = integrate(ChuaParams{}, -ic, 0.05, 3000);
        if (a.diverged || b.diverged || a.series.size() != b.series.size()) return {"Chua odd symmetry", false, "diverged"};
        worst = std::max(worst, (a.series.samples() + b.series.samples()).cwiseAbs().maxCoeff());
    }
    return {"Chua odd symmetry over 3000 steps", worst <= 1e-9,
            detail::printf_string("max |x(s0) + x(-s0)| %.3e (tolerance 1e-9)", worst)};
}

/// Every component stays in [-1, 1] after updates from [-1, 1]^n, over random
/// hyperparameters and large inputs: `updates` reservoir-state updates total.
inline CheckResult check_boundedness(std::size_t updates = 1000000) {
    RandomStream rs(0xB0);
    const std::size_t batch = 1000, steps = 10;
    std::size_t done = 0, violations = 0;
    while (done < updates) {
        Hyperparams hp{20, rs.uniform(0.05, 0.95), rs.uniform(0.01, 2.99), rs.uniform(0.01, 2.99),
                       rs.uniform(0.01, 1.0), 1e-4, 2};
        const auto mat = build_matrices(hp, MatrixSeeds{rs.next_u64(), rs.next_u64(), rs.next_u64()});
        Eigen::MatrixXd states = random_states(hp.n, batch, rs.substream(done));
        BatchStepper stepper(mat, hp.alpha_leak);
        Eigen::MatrixXd inputs(2, static_cast<Eigen::Index>(batch));
        for (std::size_t k = 0; k < steps; ++k) {
            for (Eigen::Index i = 0; i < inputs.size(); ++i) inputs.data()[i] = rs.uniform(-50.0, 50.0);
            stepper.step(states, inputs);
            violations += static_cast<std::size_t>((states.array().abs() > 1.0).count());
            done += batch;
        }
    }
    return {"reservoir state boundedness under fuzzed updates", violations == 0,
            detail::printf_string("%.0f updates, %.0f components outside [-1,1]", static_cast<double>(done),
                                  static_cast<double>(violations))};
}

inline CheckResult check_noise_determinism() {
    Eigen::VectorXd ic(2);
    ic << 0.3, -0.7;
    IntegrateOptions opts;
    opts.noise_seed = 77;
    const SwingParams noisy{0.4, 0.39, 0.7, 1e-3};
    const auto a = integrate(noisy, ic, 0.05, 500, opts);
    const auto b = integrate(noisy, ic, 0.05, 500, opts);
    const auto clean = integrate(SwingParams{}, ic, 0.05, 500);
    auto zero = opts;
    const auto c = integrate(SwingParams{}, ic, 0.05, 500, zero);
    const bool ok = a.series == b.series && c.series == clean.series && !(a.series == clean.series);
    return {"noisy integration is seed-deterministic; D0 = 0 matches the deterministic path", ok, ok ? "ok" : "mismatch"};
}

inline CheckResult check_arctan_normalization() {
    const Normalizer n = Normalizer::arctan(1);
    bool ok = n.forward(0, 0.0) == 0.0 && std::abs(n.forward(0, 1.0) - 0.5) < 1e-15;
    double prev = -1.0;
    for (double v = -1e3; v <= 1e3; v += 0.37) {
        const double f = n.forward(0, v);
        ok = ok && f > prev && f < 1.0 && f > -1.0 && n.forward(0, -v) == -f;
        prev = f;
    }
    return {"arctan normalization is odd, monotone, into (-1, 1)", ok, ok ? "ok" : "violated"};
}

/// sync_error(2 tau) <= sync_error(tau) in a contractive reservoir.
inline CheckResult check_sync_monotone() {
    Hyperparams hp{200, 0.48, 0.5, 1.0, 0.5, 1e-4, 2};
    const auto mat = build_matrices(hp, MatrixSeeds{1, 2, 3});
    Eigen::MatrixXd drive(2, 200);
    for (Eigen::Index k = 0; k < drive.cols(); ++k) drive.col(k) << std::sin(0.1 * k), std::cos(0.07 * k);
    const std::vector<TimeSeries> drives{TimeSeries(0.05, 0.0, drive)};
    const double e0 = sync_error(mat, hp.alpha_leak, drives, 0, 50, RandomStream(4));
    const double e1 = sync_error(mat, hp.alpha_leak, drives, 10, 50, RandomStream(4));
    const double e2 = sync_error(mat, hp.alpha_leak, drives, 20, 50, RandomStream(4));
    return {"synchronization error shrinks with tau (lambda < 1)", e2 <= e1 && e1 < e0,
            detail::printf_string("tau=10: %.3e, tau=20: %.3e", e1, e2)};
}

/// The invariants behind `verify`; criterion-level oracles come first.
inline std::vector<CheckResult> run_invariant_suite(const std::function<void(const CheckResult&)>& report = {}) {
    std::vector<std::function<CheckResult()>> checks{
        [] { return check_ridge_oracle(); },   [] { return check_spectral_radius(); },
        [] { return check_rk4_order(); },      [] { return check_chua_symmetry(); },
        [] { return check_boundedness(); },    [] { return check_noise_determinism(); },
        [] { return check_arctan_normalization(); }, [] { return check_sync_monotone(); },
    };
    std::vector<CheckResult> out;
    for (auto& c : checks) {
        CheckResult r;
        try {
            r = c();
        } catch (const std::exception& e) {
            r = {"(check threw)", false, e.what()};
        }
        if (report) report(r);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace brc
