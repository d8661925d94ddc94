#pragma once

#include "brc/rng.hpp"
#include "brc/time_series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

namespace brc {

// ---------------------------------------------------------------------------
// System parameters
// ---------------------------------------------------------------------------

/// Generalized swing model of a grid-following converter:
///   theta' = omega
///   omega' = I - sin(theta) - (alpha cos(theta) - D) omega [+ D0 xi(t)]
struct SwingParams {
    double input_power = 0.4;
    double damping = 0.39;
    double state_damping = 0.7;
    double noise_amplitude = 0.0;

    void validate() const {
        if (!(input_power > 0.0)) throw std::invalid_argument("swing: input_power must be > 0");
        if (!(damping > 0.0)) throw std::invalid_argument("swing: damping must be > 0");
        if (!(state_damping > 0.0)) throw std::invalid_argument("swing: state_damping must be > 0");
        if (!(noise_amplitude >= 0.0)) throw std::invalid_argument("swing: noise_amplitude must be >= 0");
    }
    bool operator==(const SwingParams&) const = default;
};

/// Chua circuit with the piecewise-linear diode characteristic g(x).
struct ChuaParams {
    double c1 = 15.6;
    double c2 = 1.0;
    double c3 = 33.0;
    double m0 = -8.0 / 7.0;
    double m1 = -5.0 / 7.0;

    void validate() const {
        for (double v : {c1, c2, c3, m0, m1})
            if (!std::isfinite(v)) throw std::invalid_argument("chua: parameters must be finite");
    }
    bool operator==(const ChuaParams&) const = default;
};

/// Periodically driven double-well Duffing oscillator.
struct DuffingParams {
    double dissipation = 0.5;
    double drive_amplitude = 0.38;
    double drive_frequency = 1.0;

    void validate() const {
        if (!(dissipation > 0.0)) throw std::invalid_argument("duffing: dissipation must be > 0");
        if (!(drive_amplitude >= 0.0)) throw std::invalid_argument("duffing: drive_amplitude must be >= 0");
        if (!(drive_frequency > 0.0)) throw std::invalid_argument("duffing: drive_frequency must be > 0");
    }
    bool operator==(const DuffingParams&) const = default;
};

using SystemParams = std::variant<SwingParams, ChuaParams, DuffingParams>;

inline std::size_t state_dimension(const SystemParams& system) {
    return std::holds_alternative<ChuaParams>(system) ? 3 : 2;
}

inline std::string_view system_name(const SystemParams& system) {
    switch (system.index()) {
        case 0: return "swing";
        case 1: return "chua";
        default: return "duffing";
    }
}

// ---------------------------------------------------------------------------
// Vector fields
// ---------------------------------------------------------------------------

struct SwingField {
    using State = Eigen::Vector2d;
    SwingParams params;

    State operator()(double /*t*/, const State& s) const {
        const double theta = s[0], omega = s[1];
        return {omega, params.input_power - std::sin(theta) -
                           (params.state_damping * std::cos(theta) - params.damping) * omega};
    }
};

inline double chua_diode(const ChuaParams& p, double x) {
    return p.m1 * x + 0.5 * (p.m0 - p.m1) * (std::abs(x + 1.0) - std::abs(x - 1.0));
}

struct ChuaField {
    using State = Eigen::Vector3d;
    ChuaParams params;

    State operator()(double /*t*/, const State& s) const {
        const double x = s[0], y = s[1], z = s[2];
        // Standard Chua coupling (x driven by y). Coupling x to z instead
        // leaves no bounded attractor at these parameters.
        return {params.c1 * (y - x - chua_diode(params, x)), params.c2 * (x - y + z),
                -params.c3 * y};
    }
};

struct DuffingField {
    using State = Eigen::Vector2d;
    DuffingParams params;

    State operator()(double t, const State& s) const {
        const double x = s[0], y = s[1];
        return {y, -params.dissipation * y + x - x * x * x +
                       params.drive_amplitude * std::sin(params.drive_frequency * t)};
    }
};

/// Classical fourth-order Runge-Kutta step.
template <typename Rhs, typename State>
State rk4_step(const Rhs& rhs, const State& state, double t, double dt) {
    const State k1 = rhs(t, state);
    const State k2 = rhs(t + 0.5 * dt, State(state + 0.5 * dt * k1));
    const State k3 = rhs(t + 0.5 * dt, State(state + 0.5 * dt * k2));
    const State k4 = rhs(t + dt, State(state + dt * k3));
    return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Raised when a trajectory turns non-finite without tripping the overflow guard.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

struct IntegrateOptions {
    double t0 = 0.0;
    /// Required when the system carries a positive noise amplitude.
    std::optional<std::uint64_t> noise_seed;
    /// Integration stops once the guarded quantity exceeds this magnitude
    /// (|omega| for the swing model, max |x_i| otherwise).
    double overflow_guard = 1e6;
};

struct Trajectory {
    TimeSeries series;
    bool diverged = false;
    /// Sign of the guarded quantity when the guard fired (swing: sign of omega).
    int divergence_sign = 0;
};

namespace detail {

template <typename Field>
Trajectory integrate_field(const Field& field, const Eigen::VectorXd& ic, double dt,
                           std::size_t steps, const IntegrateOptions& opts, double noise_amplitude,
                           bool guard_second_component) {
    using State = typename Field::State;
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
    if (steps < 1) throw std::invalid_argument("integrate: steps must be >= 1");
    if (static_cast<Eigen::Index>(ic.size()) != State::RowsAtCompileTime)
        throw std::invalid_argument("integrate: initial condition has dimension " +
                                    std::to_string(ic.size()));

    std::optional<RandomStream> noise;
    if (noise_amplitude > 0.0) {
        if (!opts.noise_seed)
            throw std::invalid_argument("integrate: noisy system requires a noise seed");
        noise.emplace(RandomStream(*opts.noise_seed).substream("integration-noise"));
    }
    const double noise_scale = noise_amplitude * std::sqrt(dt);

    Eigen::MatrixXd samples(State::RowsAtCompileTime, static_cast<Eigen::Index>(steps + 1));
    State s = ic;
    samples.col(0) = s;
    Trajectory out;
    std::size_t written = 1;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t = opts.t0 + dt * static_cast<double>(k - 1);
        s = rk4_step(field, s, t, dt);
        if (noise) s[1] += noise_scale * noise->normal();

        const double guarded = guard_second_component ? s[1] : s.cwiseAbs().maxCoeff();
        if (std::isfinite(guarded) && std::abs(guarded) > opts.overflow_guard) {
            samples.col(static_cast<Eigen::Index>(k)) = s;
            written = k + 1;
            out.diverged = true;
            out.divergence_sign = guarded > 0.0 ? 1 : -1;
            break;
        }
        if (!s.allFinite()) throw IntegrationError("integrate: non-finite state", k);
        samples.col(static_cast<Eigen::Index>(k)) = s;
        written = k + 1;
    }
    samples.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(written));
    out.series = TimeSeries(dt, opts.t0, std::move(samples));
    return out;
}

}  // namespace detail

/// Integrates `steps` RK4 steps from `ic`, returning steps + 1 samples unless the
/// overflow guard truncates the run. Swing noise uses a split scheme: one RK4
/// step of the deterministic field, then omega += D0 sqrt(dt) N(0, 1).
inline Trajectory integrate(const SystemParams& system, const Eigen::VectorXd& ic, double dt,
                            std::size_t steps, const IntegrateOptions& opts = {}) {
    return std::visit(
        [&](const auto& p) -> Trajectory {
            p.validate();
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SwingParams>)
                return detail::integrate_field(SwingField{p}, ic, dt, steps, opts,
                                               p.noise_amplitude, true);
            else if constexpr (std::is_same_v<P, ChuaParams>)
                return detail::integrate_field(ChuaField{p}, ic, dt, steps, opts, 0.0, false);
            else
                return detail::integrate_field(DuffingField{p}, ic, dt, steps, opts, 0.0, false);
        },
        system);
}

// ---------------------------------------------------------------------------
// Asymptotic labels
// ---------------------------------------------------------------------------

enum class AsymptoticLabel {
    Operating,
    PositiveDiverging,
    NegativeDiverging,
    AttractorLeft,
    AttractorRight,
    Undecided,
};

inline std::string_view to_string(AsymptoticLabel label) {
    switch (label) {
        case AsymptoticLabel::Operating: return "operating";
        case AsymptoticLabel::PositiveDiverging: return "positive_diverging";
        case AsymptoticLabel::NegativeDiverging: return "negative_diverging";
        case AsymptoticLabel::AttractorLeft: return "attractor_left";
        case AsymptoticLabel::AttractorRight: return "attractor_right";
        case AsymptoticLabel::Undecided: return "undecided";
    }
    return "undecided";
}

inline AsymptoticLabel label_from_string(std::string_view s) {
    for (auto l : {AsymptoticLabel::Operating, AsymptoticLabel::PositiveDiverging,
                   AsymptoticLabel::NegativeDiverging, AsymptoticLabel::AttractorLeft,
                   AsymptoticLabel::AttractorRight, AsymptoticLabel::Undecided})
        if (to_string(l) == s) return l;
    throw std::invalid_argument("unknown asymptotic label '" + std::string(s) + "'");
}

inline constexpr double kOperatingThreshold = 1e-2;
inline constexpr double kDivergingThreshold = 0.99;

/// Swing criterion on the normalized frequency omega' after `horizon` samples.
inline AsymptoticLabel classify_swing(const TimeSeries& normalized, std::size_t horizon) {
    if (horizon < 1 || normalized.size() < horizon || normalized.dimension() < 2)
        throw std::invalid_argument("classify_swing: series does not cover the horizon");
    const double omega = normalized.sample(horizon - 1)[1];
    if (std::abs(omega) < kOperatingThreshold) return AsymptoticLabel::Operating;
    if (omega > kDivergingThreshold) return AsymptoticLabel::PositiveDiverging;
    if (omega < -kDivergingThreshold) return AsymptoticLabel::NegativeDiverging;
    return AsymptoticLabel::Undecided;
}

/// Sign of the mean of x over the last `tail` samples, measured against `origin`
/// (the image of x = 0 when the series is normalized).
inline AsymptoticLabel classify_chaotic(const TimeSeries& series, std::size_t tail,
                                        double origin = 0.0) {
    if (tail < 1 || series.size() < tail)
        throw std::invalid_argument("classify_chaotic: series shorter than tail");
    const auto x = series.component(0).tail(static_cast<Eigen::Index>(tail));
    if (!x.allFinite()) return AsymptoticLabel::Undecided;
    const double mean = x.mean();
    if (mean < origin) return AsymptoticLabel::AttractorLeft;
    if (mean > origin) return AsymptoticLabel::AttractorRight;
    return AsymptoticLabel::Undecided;
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

struct ComponentMap {
    enum class Kind { Arctan, MinMax, Identity };
    Kind kind = Kind::Identity;
    double lo = -1.0;
    double hi = 1.0;

    double forward(double v) const {
        switch (kind) {
            case Kind::Arctan: return 2.0 * std::atan(v) / std::numbers::pi;
            case Kind::MinMax: return 2.0 * (v - lo) / (hi - lo) - 1.0;
            case Kind::Identity: return v;
        }
        return v;
    }
    double inverse(double v) const {
        switch (kind) {
            case Kind::Arctan: return std::tan(0.5 * std::numbers::pi * v);
            case Kind::MinMax: return lo + 0.5 * (v + 1.0) * (hi - lo);
            case Kind::Identity: return v;
        }
        return v;
    }
    bool operator==(const ComponentMap&) const = default;
};

/// Per-variable normalization; MinMax bounds are frozen when the normalizer is fit.
class Normalizer {
public:
    Normalizer() = default;
    explicit Normalizer(std::vector<ComponentMap> maps) : maps_(std::move(maps)) {
        for (const auto& m : maps_)
            if (m.kind == ComponentMap::Kind::MinMax && !(m.hi > m.lo && std::isfinite(m.hi - m.lo)))
                throw std::invalid_argument("normalize: minmax bounds have zero width");
    }

    static Normalizer arctan(std::size_t dimension) {
        return Normalizer(std::vector<ComponentMap>(dimension, {ComponentMap::Kind::Arctan}));
    }
    static Normalizer identity(std::size_t dimension) {
        return Normalizer(std::vector<ComponentMap>(dimension, {ComponentMap::Kind::Identity}));
    }

    /// MinMax for the flagged components with bounds from the pooled extrema of
    /// `series`; identity elsewhere.
    static Normalizer fit_minmax(const std::vector<TimeSeries>& series,
                                 const std::vector<bool>& minmax_components) {
        if (series.empty()) throw std::invalid_argument("normalize: no series to fit");
        const std::size_t d = series.front().dimension();
        if (minmax_components.size() != d)
            throw std::invalid_argument("normalize: component mask does not match dimension");
        std::vector<ComponentMap> maps(d);
        for (std::size_t k = 0; k < d; ++k) {
            if (!minmax_components[k]) continue;
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& s : series) {
                if (s.empty()) continue;
                lo = std::min(lo, s.component(k).minCoeff());
                hi = std::max(hi, s.component(k).maxCoeff());
            }
            maps[k] = {ComponentMap::Kind::MinMax, lo, hi};
        }
        return Normalizer(std::move(maps));
    }

    std::size_t dimension() const noexcept { return maps_.size(); }
    const std::vector<ComponentMap>& maps() const noexcept { return maps_; }

    double forward(std::size_t k, double v) const { return maps_.at(k).forward(v); }
    double inverse(std::size_t k, double v) const { return maps_.at(k).inverse(v); }

    TimeSeries apply(const TimeSeries& series) const {
        check(series);
        Eigen::MatrixXd out = series.samples();
        for (std::size_t k = 0; k < maps_.size(); ++k) {
            const auto& m = maps_[k];
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                out(static_cast<Eigen::Index>(k), j) = m.forward(out(static_cast<Eigen::Index>(k), j));
        }
        return TimeSeries(series.dt(), series.t0(), std::move(out));
    }

    TimeSeries invert(const TimeSeries& series) const {
        check(series);
        Eigen::MatrixXd out = series.samples();
        for (std::size_t k = 0; k < maps_.size(); ++k) {
            const auto& m = maps_[k];
            for (Eigen::Index j = 0; j < out.cols(); ++j)
                out(static_cast<Eigen::Index>(k), j) = m.inverse(out(static_cast<Eigen::Index>(k), j));
        }
        return TimeSeries(series.dt(), series.t0(), std::move(out));
    }

    bool operator==(const Normalizer&) const = default;

private:
    void check(const TimeSeries& series) const {
        if (series.dimension() != maps_.size())
            throw std::invalid_argument("normalize: series dimension " +
                                        std::to_string(series.dimension()) + " vs normalizer " +
                                        std::to_string(maps_.size()));
    }

    std::vector<ComponentMap> maps_;
};

}  // namespace brc
