#pragma once

#include "brc/rng.hpp"
#include "brc/time_series.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace brc {

/// Machine hyperparameters. `d` is the input/output dimension.
struct Hyperparams {
    std::size_t n = 500;
    double p = 0.5;
    double lambda = 0.5;
    double sigma = 1.0;
    double alpha_leak = 0.5;
    double eta = 1e-4;
    std::size_t d = 2;

    void validate() const {
        if (n < 1) throw std::invalid_argument("hyperparams: n must be >= 1");
        if (d < 1) throw std::invalid_argument("hyperparams: d must be >= 1");
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("hyperparams: p must lie in (0, 1]");
        if (!(lambda > 0.0 && std::isfinite(lambda)))
            throw std::invalid_argument("hyperparams: lambda must be > 0");
        if (!(sigma > 0.0 && std::isfinite(sigma)))
            throw std::invalid_argument("hyperparams: sigma must be > 0");
        if (!(alpha_leak > 0.0 && alpha_leak <= 1.0))
            throw std::invalid_argument("hyperparams: alpha_leak must lie in (0, 1]");
        if (!(eta >= 0.0 && std::isfinite(eta)))
            throw std::invalid_argument("hyperparams: eta must be >= 0");
    }
    bool operator==(const Hyperparams&) const = default;
};

struct MatrixSeeds {
    std::uint64_t input = 0;
    std::uint64_t adjacency = 0;
    std::uint64_t init_state = 0;

    /// Fans one stream out into the three independent substreams.
    static MatrixSeeds from(const RandomStream& stream) {
        return {stream.substream("input-matrix").key(), stream.substream("adjacency").key(),
                stream.substream("initial-states").key()};
    }
    bool operator==(const MatrixSeeds&) const = default;
};

struct ReservoirMatrices {
    Eigen::MatrixXd input_weights;  // n x d
    Eigen::MatrixXd adjacency;      // n x n, structural zeros stored densely
    MatrixSeeds seeds;

    std::size_t n() const noexcept { return static_cast<std::size_t>(adjacency.rows()); }
    std::size_t d() const noexcept { return static_cast<std::size_t>(input_weights.cols()); }
};

using ReservoirState = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Spectral radius
// ---------------------------------------------------------------------------

/// Largest eigenvalue modulus via a real Schur (Hessenberg-QR) decomposition.
inline double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("spectral_radius: matrix not square");
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_radius: eigenvalue iteration did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Scales `a` so its spectral radius equals `target`.
inline Eigen::MatrixXd rescale_spectral_radius(const Eigen::MatrixXd& a, double target) {
    const double rho = spectral_radius(a);
    if (!(rho > 0.0)) throw std::domain_error("rescale_spectral_radius: zero spectral radius");
    if (rho == target) return a;
    return a * (target / rho);
}

inline Eigen::MatrixXd draw_input_matrix(std::size_t n, std::size_t d, double sigma,
                                         RandomStream stream) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = stream.uniform(-sigma, sigma);
    return w;
}

/// Erdos-Renyi weighted adjacency: each entry is nonzero with probability p and
/// then uniform on [-1, 1]. Entries are drawn in row-major order.
inline Eigen::MatrixXd draw_adjacency(std::size_t n, double p, RandomStream stream) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (stream.uniform() < p) a(i, j) = stream.uniform(-1.0, 1.0);
    return a;
}

inline ReservoirMatrices build_matrices(const Hyperparams& hp, const MatrixSeeds& seeds) {
    hp.validate();
    ReservoirMatrices m;
    m.seeds = seeds;
    m.input_weights = draw_input_matrix(hp.n, hp.d, hp.sigma, RandomStream(seeds.input));
    const RandomStream adjacency_stream(seeds.adjacency);
    constexpr int kMaxRedraws = 64;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        const auto stream = attempt == 0 ? adjacency_stream
                                         : adjacency_stream.substream(static_cast<std::uint64_t>(attempt));
        Eigen::MatrixXd a = draw_adjacency(hp.n, hp.p, stream);
        const double rho = spectral_radius(a);
        if (rho > 0.0) {
            m.adjacency = a * (hp.lambda / rho);
            return m;
        }
    }
    throw std::runtime_error("build_matrices: every adjacency draw had zero spectral radius");
}

// ---------------------------------------------------------------------------
// State update and readout features
// ---------------------------------------------------------------------------

/// tanh through the vectorized exponential, 1 - 2 / (e^{2x} + 1). Absolute
/// error stays below 4e-16 and it saturates to +-1 without overflow traps;
/// the libm tanh for doubles is scalar and dominates the step cost.
template <typename Derived>
auto saturating_tanh(const Eigen::ArrayBase<Derived>& x) {
    return 1.0 - 2.0 / ((2.0 * x).exp() + 1.0);
}

/// r' = (1 - alpha) r + alpha tanh(A r + W_in u)
inline ReservoirState reservoir_step(const ReservoirState& state, const Eigen::VectorXd& u,
                                     const ReservoirMatrices& mat, double alpha_leak) {
    if (state.size() != mat.adjacency.rows() || u.size() != mat.input_weights.cols())
        throw std::invalid_argument("reservoir_step: dimension mismatch");
    Eigen::VectorXd drive = mat.adjacency * state;
    drive.noalias() += mat.input_weights * u;
    return (1.0 - alpha_leak) * state + alpha_leak * saturating_tanh(drive.array()).matrix();
}

/// Odd nodes (1-based) pass through, even nodes are squared. Works column-wise
/// on a batch of states.
template <typename Derived>
Eigen::MatrixXd state_transform(const Eigen::MatrixBase<Derived>& states) {
    Eigen::MatrixXd out = states;
    for (Eigen::Index i = 1; i < out.rows(); i += 2) out.row(i) = out.row(i).array().square();
    return out;
}

/// Column-batched reservoir update. Each column of `states` is an independent
/// reservoir copy driven by the matching column of `inputs`.
class BatchStepper {
public:
    BatchStepper(const ReservoirMatrices& mat, double alpha_leak)
        : mat_(&mat), alpha_(alpha_leak) {}

    void step(Eigen::MatrixXd& states, const Eigen::MatrixXd& inputs) {
        drive_.resize(states.rows(), states.cols());
        drive_.noalias() = mat_->adjacency * states;
        drive_.noalias() += mat_->input_weights * inputs;
        states.array() = (1.0 - alpha_) * states.array() + alpha_ * saturating_tanh(drive_.array());
    }

private:
    const ReservoirMatrices* mat_;
    double alpha_;
    Eigen::MatrixXd drive_;
};

inline Eigen::MatrixXd random_states(std::size_t n, std::size_t count, RandomStream stream) {
    Eigen::MatrixXd r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count));
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, j) = stream.uniform(-1.0, 1.0);
    return r;
}

struct ListenResult {
    ReservoirState final_state;
    Eigen::MatrixXd history;  // n x drive length; column k follows input k
};

/// Open-loop (teacher-forced) drive.
inline ListenResult listen(const ReservoirMatrices& mat, double alpha_leak,
                           const ReservoirState& init, const TimeSeries& drive) {
    if (drive.empty()) throw std::invalid_argument("listen: empty drive");
    if (drive.dimension() != mat.d() || static_cast<std::size_t>(init.size()) != mat.n())
        throw std::invalid_argument("listen: dimension mismatch");
    ListenResult out;
    out.history.resize(init.size(), static_cast<Eigen::Index>(drive.size()));
    ReservoirState r = init;
    for (std::size_t k = 0; k < drive.size(); ++k) {
        r = reservoir_step(r, drive.sample(k), mat, alpha_leak);
        out.history.col(static_cast<Eigen::Index>(k)) = r;
    }
    out.final_state = std::move(r);
    return out;
}

// ---------------------------------------------------------------------------
// Ridge readout
// ---------------------------------------------------------------------------

/// Gram-form accumulator for W_out = U V^T (V V^T + eta I)^{-1}.
class RidgeAccumulator {
public:
    RidgeAccumulator(std::size_t n, std::size_t d)
        : gram_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))),
          cross_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d))) {}

    /// Adds columns of transformed states V and targets U.
    void add(const Eigen::MatrixXd& features, const Eigen::MatrixXd& targets) {
        if (features.cols() != targets.cols() || features.rows() != gram_.rows() ||
            targets.rows() != cross_.cols())
            throw std::invalid_argument("train_readout: dimension mismatch");
        gram_.selfadjointView<Eigen::Lower>().rankUpdate(features);
        cross_.noalias() += features * targets.transpose();
        samples_ += static_cast<std::size_t>(features.cols());
    }

    std::size_t samples() const noexcept { return samples_; }
    Eigen::MatrixXd gram() const { return gram_.selfadjointView<Eigen::Lower>(); }
    const Eigen::MatrixXd& cross() const noexcept { return cross_; }

    Eigen::MatrixXd solve(double eta) const {
        if (samples_ == 0) throw std::invalid_argument("train_readout: no training samples");
        if (!(eta >= 0.0)) throw std::invalid_argument("train_readout: eta must be >= 0");
        Eigen::MatrixXd system = gram();
        system.diagonal().array() += eta;
        if (eta == 0.0) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
            if (qr.rank() < system.rows())
                throw std::domain_error("train_readout: singular state matrix with eta = 0");
            return qr.solve(cross_).transpose();
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
        if (ldlt.info() != Eigen::Success)
            throw std::domain_error("train_readout: ridge system factorization failed");
        return ldlt.solve(cross_).transpose();
    }

private:
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    std::size_t samples_ = 0;
};

/// W_out (d x n) from state matrix V (n x L) and targets U (d x L).
inline Eigen::MatrixXd train_readout(const Eigen::MatrixXd& states, const Eigen::MatrixXd& targets,
                                     double eta) {
    if (states.cols() < 1) throw std::invalid_argument("train_readout: L must be >= 1");
    RidgeAccumulator acc(static_cast<std::size_t>(states.rows()), static_cast<std::size_t>(targets.rows()));
    acc.add(states, targets);
    return acc.solve(eta);
}

/// Relative residual of the ridge normal equations W (V V^T + eta I) = U V^T.
inline double normal_equation_residual(const Eigen::MatrixXd& readout, const Eigen::MatrixXd& gram,
                                       const Eigen::MatrixXd& cross, double eta) {
    Eigen::MatrixXd lhs = readout * gram + eta * readout;
    const double scale = std::max(cross.norm(), std::numeric_limits<double>::min());
    return (lhs - cross.transpose()).norm() / scale;
}

}  // namespace brc
