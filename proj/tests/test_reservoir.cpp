#include "brc/machine.hpp"
#include "brc/reservoir.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace brc;

namespace {

ReservoirMatrices scalar_matrices(double a, double w) {
    ReservoirMatrices m;
    m.adjacency = Eigen::MatrixXd::Constant(1, 1, a);
    m.input_weights = Eigen::MatrixXd::Constant(1, 1, w);
    return m;
}

const Hyperparams kSwingHp{500, 0.480, 0.033, 2.917, 0.574, 3.458e-4, 2};

TrainedMachine small_machine(std::uint64_t seed) {
    Hyperparams hp{40, 0.3, 0.4, 0.8, 0.6, 1e-6, 2};
    std::vector<TimeSeries> train;
    for (int s = 0; s < 3; ++s) {
        Eigen::MatrixXd m(2, 300);
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            m.col(k) << 0.5 * std::sin(0.1 * k + s), 0.5 * std::cos(0.1 * k + s);
        train.emplace_back(0.05, 0.0, m);
    }
    return train_machine(hp, MatrixSeeds::from(RandomStream(seed)), train, 10, 10.0);
}

}  // namespace

TEST(SpectralRadius, DiagonalRescale) {
    Eigen::MatrixXd a(2, 2);
    a << 2, 0, 0, 1;
    Eigen::MatrixXd expected(2, 2);
    expected << 0.5, 0, 0, 0.25;
    EXPECT_LT((rescale_spectral_radius(a, 0.5) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpectralRadius, AlreadyAtTargetIsUnchanged) {
    const Eigen::MatrixXd a = 0.7 * Eigen::MatrixXd::Identity(3, 3);
    EXPECT_EQ(rescale_spectral_radius(a, 0.7), a);
    EXPECT_THROW(rescale_spectral_radius(Eigen::MatrixXd::Zero(2, 2), 0.5), std::domain_error);
}

TEST(BuildMatrices, DensityAndRadius) {
    const auto mat = build_matrices(kSwingHp, MatrixSeeds{1, 2, 3});
    const double density = static_cast<double>((mat.adjacency.array() != 0.0).count()) /
                           static_cast<double>(mat.adjacency.size());
    EXPECT_NEAR(density, 0.480, 0.05);
    EXPECT_NEAR(spectral_radius(mat.adjacency), 0.033, 1e-10);
    EXPECT_LE(mat.input_weights.cwiseAbs().maxCoeff(), 2.917);
    EXPECT_EQ(mat.input_weights.rows(), 500);
    EXPECT_EQ(mat.input_weights.cols(), 2);
}

TEST(BuildMatrices, SeedDeterminism) {
    Hyperparams hp = kSwingHp;
    hp.n = 60;
    const auto a = build_matrices(hp, MatrixSeeds{4, 5, 6});
    const auto b = build_matrices(hp, MatrixSeeds{4, 5, 6});
    const auto c = build_matrices(hp, MatrixSeeds{4, 7, 6});
    EXPECT_EQ(a.adjacency, b.adjacency);
    EXPECT_EQ(a.input_weights, b.input_weights);
    EXPECT_NE(a.adjacency, c.adjacency);
    EXPECT_EQ(a.input_weights, c.input_weights);
}

TEST(BuildMatrices, RejectsBadHyperparams) {
    Hyperparams hp = kSwingHp;
    hp.alpha_leak = 0.0;
    EXPECT_THROW(build_matrices(hp, {}), std::invalid_argument);
    hp = kSwingHp;
    hp.p = 1.5;
    EXPECT_THROW(build_matrices(hp, {}), std::invalid_argument);
}

TEST(ReservoirStep, ZeroIsFixed) {
    const auto mat = build_matrices(Hyperparams{20, 0.5, 0.5, 1.0, 0.5, 1e-4, 2}, MatrixSeeds{1, 2, 3});
    EXPECT_EQ(reservoir_step(Eigen::VectorXd::Zero(20), Eigen::VectorXd::Zero(2), mat, 0.5),
              Eigen::VectorXd::Zero(20));
}

TEST(ReservoirStep, ScalarHandValue) {
    const auto mat = scalar_matrices(0.2, 0.3);
    const auto r = reservoir_step(Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 1.0), mat, 0.5);
    EXPECT_NEAR(r[0], 0.25 + 0.5 * std::tanh(0.4), 1e-15);
    EXPECT_NEAR(r[0], 0.439974, 5e-7);
}

TEST(ReservoirStep, LeakFreeIsPureTanh) {
    auto mat = scalar_matrices(0.0, 1.7);
    const auto r = reservoir_step(Eigen::VectorXd::Constant(1, 0.9), Eigen::VectorXd::Constant(1, 0.3), mat, 1.0);
    EXPECT_NEAR(r[0], std::tanh(1.7 * 0.3), 4e-16);
}

TEST(SaturatingTanh, MatchesLibmAndSaturates) {
    Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(200001, -40.0, 40.0);
    const Eigen::ArrayXd y = saturating_tanh(x);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - std::tanh(x[i])));
    EXPECT_LT(worst, 4e-16);
    Eigen::ArrayXd big(4);
    big << 1e300, -1e300, 800.0, -800.0;
    const Eigen::ArrayXd s = saturating_tanh(big);
    EXPECT_EQ(s[0], 1.0);
    EXPECT_EQ(s[1], -1.0);
    EXPECT_EQ(s[2], 1.0);
    EXPECT_EQ(s[3], -1.0);
}

TEST(StateTransform, Examples) {
    EXPECT_EQ(state_transform(Eigen::Vector4d(1, 1, 1, 1)), Eigen::MatrixXd(Eigen::Vector4d(1, 1, 1, 1)));
    EXPECT_EQ(state_transform(Eigen::Vector2d(-0.5, -0.5)), Eigen::MatrixXd(Eigen::Vector2d(-0.5, 0.25)));
    EXPECT_EQ(state_transform(Eigen::Vector3d::Zero()), Eigen::MatrixXd(Eigen::Vector3d::Zero()));
}

TEST(BatchStepper, MatchesSingleStep) {
    const Hyperparams hp{30, 0.4, 0.9, 1.2, 0.7, 1e-4, 2};
    const auto mat = build_matrices(hp, MatrixSeeds{7, 8, 9});
    Eigen::MatrixXd states = random_states(30, 5, RandomStream(1));
    Eigen::MatrixXd inputs = random_states(2, 5, RandomStream(2));
    const Eigen::MatrixXd before = states;
    BatchStepper(mat, hp.alpha_leak).step(states, inputs);
    for (Eigen::Index j = 0; j < 5; ++j)
        EXPECT_LT((states.col(j) - reservoir_step(before.col(j), inputs.col(j), mat, hp.alpha_leak)).norm(), 1e-14);
}

TEST(Listen, ZeroDriveZeroInit) {
    const auto mat = build_matrices(Hyperparams{20, 0.5, 0.5, 1.0, 0.5, 1e-4, 2}, MatrixSeeds{1, 2, 3});
    const auto res = listen(mat, 0.5, Eigen::VectorXd::Zero(20), TimeSeries(0.05, 0.0, Eigen::MatrixXd::Zero(2, 10)));
    EXPECT_EQ(res.history, Eigen::MatrixXd::Zero(20, 10));
    EXPECT_EQ(res.final_state, Eigen::VectorXd::Zero(20));
    EXPECT_THROW(listen(mat, 0.5, Eigen::VectorXd::Zero(20), TimeSeries::empty(2, 0.05)), std::invalid_argument);
}

TEST(Listen, EchoProperty) {
    const auto mat = build_matrices(kSwingHp, MatrixSeeds{11, 12, 13});
    Eigen::MatrixXd drive(2, 10);
    for (Eigen::Index k = 0; k < 10; ++k) drive.col(k) << 0.2 * std::sin(0.3 * k), 0.1 * k / 10.0;
    const TimeSeries d(0.05, 0.0, drive);
    const Eigen::MatrixXd init = random_states(500, 2, RandomStream(99));
    const auto a = listen(mat, kSwingHp.alpha_leak, init.col(0), d);
    const auto b = listen(mat, kSwingHp.alpha_leak, init.col(1), d);
    const double before = (init.col(0) - init.col(1)).norm();
    const double after = (a.final_state - b.final_state).norm();
    EXPECT_LT(after, 1e-2 * before);
}

TEST(Ridge, ScalarFormula) {
    const auto w = train_readout(Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 4.0), 1.0);
    EXPECT_NEAR(w(0, 0), 1.6, 1e-15);
}

TEST(Ridge, InterpolatesWithoutRegularization) {
    const Eigen::MatrixXd v = random_states(6, 6, RandomStream(21)) + 3.0 * Eigen::MatrixXd::Identity(6, 6);
    const Eigen::MatrixXd u = random_states(2, 6, RandomStream(22));
    const auto w = train_readout(v, u, 0.0);
    EXPECT_LT((w * v - u).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Ridge, RankDeficientWithoutRegularizationIsAnError) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(3, 5);
    v.row(0).setOnes();
    EXPECT_THROW(train_readout(v, Eigen::MatrixXd::Ones(1, 5), 0.0), std::domain_error);
    EXPECT_NO_THROW(train_readout(v, Eigen::MatrixXd::Ones(1, 5), 1e-6));
}

TEST(Ridge, ShrinksWithEta) {
    const Eigen::MatrixXd v = random_states(8, 30, RandomStream(31));
    const Eigen::MatrixXd u = random_states(2, 30, RandomStream(32));
    double prev = std::numeric_limits<double>::infinity();
    for (double eta : {1e-6, 1e-3, 1e-1, 1.0, 10.0}) {
        const double norm = train_readout(v, u, eta).norm();
        EXPECT_LT(norm, prev);
        prev = norm;
    }
}

TEST(Ridge, NormalEquationResidual) {
    const Eigen::MatrixXd v = random_states(50, 400, RandomStream(41));
    const Eigen::MatrixXd u = random_states(2, 400, RandomStream(42));
    RidgeAccumulator acc(50, 2);
    acc.add(v.leftCols(150), u.leftCols(150));
    acc.add(v.rightCols(250), u.rightCols(250));
    const auto w = acc.solve(1e-4);
    EXPECT_LE(normal_equation_residual(w, v * v.transpose(), v * u.transpose(), 1e-4), 1e-8);
    EXPECT_LT((w - train_readout(v, u, 1e-4)).norm(), 1e-9);
}

TEST(ClosedLoop, ZeroStepsIsEmpty) {
    const auto m = small_machine(1);
    const auto res = predict_closed_loop(m, Eigen::VectorXd::Zero(40), Eigen::Vector2d(0.1, 0.2), 0);
    EXPECT_TRUE(res.series.empty());
    EXPECT_EQ(res.series.dimension(), 2u);
    EXPECT_FALSE(res.flagged);
}

TEST(ClosedLoop, Deterministic) {
    const auto m = small_machine(2);
    const Eigen::VectorXd seed = random_states(40, 1, RandomStream(5));
    const auto a = predict_closed_loop(m, seed, Eigen::Vector2d(0.1, 0.2), 200);
    const auto b = predict_closed_loop(m, seed, Eigen::Vector2d(0.1, 0.2), 200);
    ASSERT_EQ(a.series.size(), 200u);
    EXPECT_EQ(a.series, b.series);
    EXPECT_LE(a.series.samples().cwiseAbs().maxCoeff(), kClosedLoopClamp);
}

TEST(ClosedLoop, BatchAgreesWithSingleRun) {
    const auto m = small_machine(3);
    const Eigen::MatrixXd init = random_states(40, 2, RandomStream(8));
    std::vector<TimeSeries> guides;
    for (int j = 0; j < 2; ++j) {
        Eigen::MatrixXd g(2, 10);
        for (Eigen::Index k = 0; k < 10; ++k) g.col(k) << 0.5 * std::sin(0.1 * k + j), 0.5 * std::cos(0.1 * k + j);
        guides.emplace_back(0.05, 0.0, g);
    }
    Eigen::MatrixXd batch0(2, 50);
    guided_closed_loop_batch(m, init, guides, 50,
                             [&](std::size_t k, const Eigen::MatrixXd& v) { batch0.col(Eigen::Index(k)) = v.col(0); });
    const auto heard = listen(m.matrices, m.hyperparams.alpha_leak, init.col(0), guides[0].slice(0, 9));
    const auto single = predict_closed_loop(m, heard.final_state, guides[0].sample(9), 50);
    EXPECT_LT((single.series.samples() - batch0).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Training, RecordPairsStatesWithNextSamples) {
    const Hyperparams hp{10, 0.5, 0.5, 1.0, 0.5, 1e-4, 2};
    const auto mat = build_matrices(hp, MatrixSeeds{1, 2, 3});
    Eigen::MatrixXd s(2, 25);
    for (Eigen::Index k = 0; k < 25; ++k) s.col(k) << 0.01 * k, -0.02 * k;
    const std::vector<TimeSeries> series{TimeSeries(0.05, 0.0, s), TimeSeries(0.05, 0.0, s.leftCols(15))};
    const auto rec = collect_training_record(mat, hp.alpha_leak, series, 5, RandomStream(4));
    ASSERT_EQ(rec.features.cols(), 20 + 10);
    EXPECT_EQ(rec.targets.col(0), s.col(5));
    EXPECT_EQ(rec.targets.col(20), s.col(5));
    // open-loop check for the first series
    const Eigen::MatrixXd init = random_states(10, 2, RandomStream(4));
    const auto heard = listen(mat, hp.alpha_leak, init.col(0), series[0].slice(0, 5));
    EXPECT_LT((rec.features.col(0) - state_transform(heard.final_state)).norm(), 1e-14);
}
