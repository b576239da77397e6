#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "scb/simlab.hpp"
#include "test_support.hpp"

using namespace scb;
using scb::testing::throws_kind;

namespace {

/// Value, slope and curvature at `knot` of the piece on one side (side = -1 or +1):
/// a quintic through six points strictly on that side, evaluated at the knot.
/// Exact for the polynomial connectors.
Eigen::Vector3d one_sided_jet(double knot, int side, double step = 1e-3) {
    Eigen::Matrix<double, 6, 6> v;
    Eigen::Matrix<double, 6, 1> f;
    for (int k = 0; k < 6; ++k) {
        const double s = side * (k + 1) * step;
        for (int m = 0; m < 6; ++m) v(k, m) = std::pow(s, m);
        f(k) = bump(knot + s);
    }
    const Eigen::Matrix<double, 6, 1> c = v.fullPivLu().solve(f);
    return {c(0), c(1), 2.0 * c(2)};
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows) {
    const Eigen::MatrixXd c = rows.rowwise() - rows.colwise().mean();
    return c.transpose() * c / static_cast<double>(rows.rows() - 1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Bump

TEST(Bump, PieceValues) {
    EXPECT_DOUBLE_EQ(bump(0.5), 0.2);
    EXPECT_EQ(bump(0.3), 0.0);
    EXPECT_EQ(bump(0.7), 0.0);
    EXPECT_EQ(bump(0.4), 0.0);
    EXPECT_EQ(bump(0.6000001), 0.0);
    EXPECT_DOUBLE_EQ(bump(0.47), 0.2 * std::exp(-0.03 * 0.03));
}

TEST(Bump, MaximumAtCentre) {
    double best = 0.0, arg = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double x = k / 100000.0;
        if (bump(x) > best) best = bump(x), arg = x;
        EXPECT_GE(bump(x), -1e-15);
    }
    EXPECT_DOUBLE_EQ(best, 0.2);
    EXPECT_DOUBLE_EQ(arg, 0.5);
}

TEST(Bump, TwiceContinuouslyDifferentiable) {
    const auto hump = [](double x) { return 0.2 * std::exp(-(x - 0.5) * (x - 0.5)); };
    const auto hump_d1 = [&](double x) { return -2.0 * (x - 0.5) * hump(x); };
    const auto hump_d2 = [&](double x) { return (4.0 * (x - 0.5) * (x - 0.5) - 2.0) * hump(x); };
    for (double knot : {0.4, 0.45, 0.55, 0.6}) {
        const Eigen::Vector3d left = one_sided_jet(knot, -1);
        const Eigen::Vector3d right = one_sided_jet(knot, +1);
        EXPECT_NEAR(left(0), right(0), 1e-9) << knot;
        EXPECT_NEAR(left(1), right(1), 1e-6) << knot;
        EXPECT_NEAR(left(2), right(2), 1e-3) << knot;
        const bool inner = knot == 0.45 || knot == 0.55;
        EXPECT_NEAR(left(0), inner ? hump(knot) : 0.0, 1e-9);
        EXPECT_NEAR(left(1), inner ? hump_d1(knot) : 0.0, 1e-6);
        EXPECT_NEAR(left(2), inner ? hump_d2(knot) : 0.0, 1e-3);
    }
}

TEST(Bump, AlternativeIsNullPlusScaledBump) {
    const auto h0 = gen_model3(30, 40, 99, false);
    const auto hn = gen_model3(30, 40, 99, true);
    const double scale = std::log(30.0) / std::sqrt(30.0);
    for (Eigen::Index j = 0; j < 40; ++j) {
        const double x = h0.design.grid().point(static_cast<std::size_t>(j))[0];
        EXPECT_LT((hn.values.col(j) - h0.values.col(j)).array().abs().maxCoeff() - scale * bump(x), 1e-14);
        EXPECT_NEAR((hn.values.col(j) - h0.values.col(j)).mean(), scale * bump(x), 1e-14);
    }
    EXPECT_DOUBLE_EQ(model3_mean(0.5, 30, true), 0.5 + scale * 0.2);
    EXPECT_DOUBLE_EQ(model3_mean(0.2, 30, true), 0.2);
}

// ---------------------------------------------------------------------------
// Models 1 and 3

TEST(ModelOne, ColumnMeans) {
    const std::size_t n = 400;
    const auto s = gen_model1(n, 30, 1);
    const Eigen::VectorXd means = s.column_means();
    for (std::size_t j = 0; j < 30; ++j) {
        const double x = s.design.grid().point(j)[0];
        EXPECT_NEAR(means(static_cast<Eigen::Index>(j)), 10 * std::pow(x, 3) - 15 * std::pow(x, 4) + 6 * std::pow(x, 5),
                    3.0 * 0.25 / std::sqrt(static_cast<double>(n)));
    }
    EXPECT_DOUBLE_EQ(model1_mean(0.5), 0.5);
    EXPECT_DOUBLE_EQ(model1_mean(1.0), 1.0);
}

TEST(ModelOne, CovarianceMatchesOrnsteinUhlenbeck) {
    const auto s = gen_model1(5000, 20, 2);
    const Eigen::MatrixXd c = sample_covariance(s.values);
    ModelGenerator gen(ModelId::M1, 5000, 20);
    EXPECT_LT((c - gen.data_covariance()).cwiseAbs().maxCoeff(), 0.01);
    // Design spacing 0.05: neighbouring points have correlation 0.9.
    EXPECT_NEAR(ou_covariance(0.3, 0.35) / ou_covariance(0.3, 0.3), 0.9, 1e-12);
    EXPECT_NEAR(c(6, 7) / std::sqrt(c(6, 6) * c(7, 7)), 0.9, 0.01);
}

TEST(ModelOne, DrawsAreSeedDeterministic) {
    ModelGenerator gen(ModelId::M1, 5, 10);
    EXPECT_EQ(gen.draw(3).values, gen.draw(3).values);
    EXPECT_NE(gen.draw(3).values, gen.draw(4).values);
    // Curve i does not depend on n.
    ModelGenerator bigger(ModelId::M1, 8, 10);
    EXPECT_EQ(bigger.draw(3).values.topRows(5), gen.draw(3).values);
}

// ---------------------------------------------------------------------------
// Model 2

TEST(ModelTwo, CentredProcess) {
    const std::size_t n = 100000;
    const auto s = gen_model2(n, 10, 5);
    ModelGenerator gen(ModelId::M2, n, 10);
    const Eigen::VectorXd z_mean = s.column_means() - gen.mean_on(s.design.grid());
    EXPECT_LT(z_mean.cwiseAbs().maxCoeff(), 0.01);
}

TEST(ModelTwo, StandardDeviationRange) {
    double lo = 1.0, hi = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        const double x = k / 10000.0;
        const double sd = std::sqrt(model2_covariance(x, x) + kModel2NoiseSd * kModel2NoiseSd);
        lo = std::min(lo, sd);
        hi = std::max(hi, sd);
    }
    EXPECT_NEAR(lo, 0.295, 5e-4);
    EXPECT_NEAR(hi, 0.348, 5e-4);
}

TEST(ModelTwo, FactorVarianceMatchesMonteCarlo) {
    const std::size_t n = 200000;
    const auto s = gen_model2(n, 10, 6);
    const Eigen::MatrixXd c = sample_covariance(s.values);
    for (std::size_t j = 0; j < 10; ++j) {
        const double x = s.design.grid().point(j)[0];
        const double analytic = 2.0 * std::pow(std::numbers::sqrt2 / 6.0, 2) * std::pow(std::sin(std::numbers::pi * x), 2) +
                                4.0 / 9.0 * (x - 0.5) * (x - 0.5);
        EXPECT_NEAR(model2_covariance(x, x), analytic, 1e-15);
        const auto jj = static_cast<Eigen::Index>(j);
        EXPECT_NEAR(c(jj, jj) - kModel2NoiseSd * kModel2NoiseSd, analytic, 0.02 * analytic) << x;
    }
    ModelGenerator gen(ModelId::M2, n, 10);
    const Eigen::MatrixXd r = gen.data_covariance();
    for (Eigen::Index a = 0; a < 10; ++a)
        for (Eigen::Index b = 0; b < 10; ++b)
            EXPECT_NEAR(c(a, b), r(a, b), 0.02 * std::sqrt(r(a, a) * r(b, b))) << a << "," << b;
}

TEST(ModelTwo, MeanHasSharpPeakNearOrigin) {
    double best = 0.0, arg = 0.0;
    for (int k = 0; k <= 100000; ++k) {
        const double x = k / 100000.0;
        if (model2_mean(x) > best) best = model2_mean(x), arg = x;
    }
    EXPECT_NEAR(arg, 0.058, 5e-4);
}

// ---------------------------------------------------------------------------
// Experiment harness

TEST(Experiment, BinomialStandardError) {
    // Margins at 50000 and 5000 replications: 0.000975 and 0.00308.
    EXPECT_NEAR(binomial_standard_error(0.05, 50000), std::sqrt(0.0475 / 50000), 1e-15);
    EXPECT_NEAR(binomial_standard_error(0.05, 50000), 0.0009, 1e-4);
    EXPECT_NEAR(binomial_standard_error(0.05, 5000), 0.0031, 1e-4);
    EXPECT_TRUE(std::isnan(binomial_standard_error(0.5, 0)));
}

TEST(Experiment, ZeroReplicationsGiveEmptyRows) {
    ModelSpec spec;
    spec.reps = 0;
    const auto table = run_experiment(spec, {ExperimentMethod::NormalScb, ExperimentMethod::PlrtKnown});
    ASSERT_EQ(table.rows.size(), 2u);
    EXPECT_EQ(table.rows[0].completed, 0u);
    EXPECT_EQ(table.rows[0].failures, 0u);
    EXPECT_TRUE(std::isnan(table.rows[0].rate));
    EXPECT_FALSE(table.rows[0].failure_flag);
}

TEST(Experiment, DeterministicAcrossThreadCounts) {
    ModelSpec spec;
    spec.model = ModelId::M3Hn;
    spec.n = 20;
    spec.p = 30;
    spec.h = 0.08;
    spec.reps = 12;
    spec.paths = 1000;
    spec.bootstraps = 50;
    spec.seed = 17;
    const std::vector<ExperimentMethod> methods{ExperimentMethod::NormalScb, ExperimentMethod::BootstrapScb,
                                                ExperimentMethod::GofScb, ExperimentMethod::PlrtNonparametric,
                                                ExperimentMethod::PlrtAr1, ExperimentMethod::PlrtKnown};
    spec.threads = 1;
    const auto a = run_experiment(spec, methods);
    spec.threads = 4;
    const auto b = run_experiment(spec, methods);
    ASSERT_EQ(a.rows.size(), methods.size());
    for (std::size_t k = 0; k < methods.size(); ++k) {
        EXPECT_EQ(a.rows[k].hits, b.rows[k].hits);
        EXPECT_EQ(a.rows[k].completed, b.rows[k].completed);
        const double ta = a.rows[k].median_threshold, tb = b.rows[k].median_threshold;
        EXPECT_TRUE(ta == tb || (std::isnan(ta) && std::isnan(tb))) << to_string(methods[k]);
        EXPECT_GE(a.rows[k].rate, 0.0);
        EXPECT_LE(a.rows[k].rate, 1.0);
        EXPECT_DOUBLE_EQ(a.rows[k].standard_error, binomial_standard_error(a.rows[k].rate, a.rows[k].completed));
        if (methods[k] == ExperimentMethod::PlrtKnown) {
            EXPECT_TRUE(std::isnan(a.rows[k].median_threshold));
        }
    }
}

TEST(Experiment, ValidatesSpec) {
    ModelSpec spec;
    spec.n = 1;
    EXPECT_TRUE(throws_kind([&] { run_experiment(spec, {ExperimentMethod::NormalScb}); }, ErrorKind::InvalidArgument));
    spec.n = 20;
    spec.h = 0.01;
    EXPECT_TRUE(throws_kind([&] { run_experiment(spec, {ExperimentMethod::NormalScb}); }, ErrorKind::IllPosed));
    spec.h = 0.1;
    spec.level = 1.0;
    EXPECT_TRUE(throws_kind([&] { run_experiment(spec, {ExperimentMethod::NormalScb}); }, ErrorKind::InvalidArgument));
}

TEST(Experiment, ParsesNames) {
    EXPECT_EQ(parse_model_id("M3-hn"), ModelId::M3Hn);
    EXPECT_EQ(parse_model_id("1"), ModelId::M1);
    EXPECT_EQ(parse_method("PLRT-known"), ExperimentMethod::PlrtKnown);
    for (auto m : {ExperimentMethod::NormalScb, ExperimentMethod::BootstrapScb, ExperimentMethod::GofScb,
                   ExperimentMethod::PlrtNonparametric, ExperimentMethod::PlrtAr1, ExperimentMethod::PlrtKnown})
        EXPECT_EQ(parse_method(to_string(m)), m);
    for (auto m : {ModelId::M1, ModelId::M2, ModelId::M3H0, ModelId::M3Hn}) EXPECT_EQ(parse_model_id(to_string(m)), m);
    EXPECT_TRUE(throws_kind([] { parse_model_id("4"); }, ErrorKind::Parse));
    EXPECT_TRUE(throws_kind([] { parse_method("wild"); }, ErrorKind::Parse));
}

TEST(Experiment, ModelOneSmallRunCoverage) {
    ModelSpec spec;
    spec.n = 20;
    spec.p = 20;
    spec.h = 0.1;
    spec.reps = 300;
    spec.seed = 4;
    const auto row = run_experiment(spec, {ExperimentMethod::NormalScb}).rows.at(0);
    EXPECT_EQ(row.completed, 300u);
    EXPECT_NEAR(row.rate, 0.957, 4.0 * binomial_standard_error(0.957, 300));
    EXPECT_NEAR(row.median_threshold, 3.11, 0.15);
}

// ---------------------------------------------------------------------------
// Reference thresholds

TEST(KnownThreshold, MonotoneInLevel) {
    const auto eval = default_eval_grid();
    const SmoothingSetup setup{50, 0.05, Kernel::epanechnikov()};
    const double strict = known_R_threshold(ModelId::M1, eval, 0.05, 13000, 1, setup).threshold;
    const double loose = known_R_threshold(ModelId::M1, eval, 0.5, 13000, 1, setup).threshold;
    EXPECT_LT(loose, strict);
    EXPECT_GT(strict, 2.55);
    EXPECT_LT(strict, 2.80);
}

TEST(KnownThreshold, SmoothingLowersRawThreshold) {
    const auto eval = default_eval_grid();
    const auto raw = known_R_threshold(ModelId::M1, eval, 0.05, 13000, 2);
    const auto smoothed = known_R_threshold(ModelId::M1, eval, 0.05, 13000, 2, SmoothingSetup{50, 0.05});
    EXPECT_GT(raw.threshold - 3.0 * raw.standard_error, smoothed.threshold + 3.0 * smoothed.standard_error);
}
