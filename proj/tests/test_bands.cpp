#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "scb/bands.hpp"
#include "scb/rng.hpp"
#include "scb/simlab.hpp"
#include "test_support.hpp"

using namespace scb;
using scb::testing::throws_kind;

namespace {

const Kernel kEpa = Kernel::epanechnikov();

ScbOptions options_with_seed(std::uint64_t seed, std::size_t paths = 4000) {
    ScbOptions o;
    o.seed = seed;
    o.paths = paths;
    return o;
}

/// Pointwise scan: covered iff |curve - center| <= half_width at every point.
bool covered_by_scan(const BandResult& band, const Eigen::VectorXd& curve) {
    for (Eigen::Index a = 0; a < curve.size(); ++a)
        if (!(curve(a) >= band.lower()(a) && curve(a) <= band.upper()(a))) return false;
    return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// Normal band

TEST(NormalScb, StructureAndSymmetry) {
    const auto s = gen_model1(30, 50, 1);
    const auto band = normal_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, options_with_seed(2));
    EXPECT_EQ(band.method, BandMethod::Normal);
    EXPECT_DOUBLE_EQ(band.level, 0.95);
    EXPECT_GT(band.threshold, 0.0);
    EXPECT_EQ(band.provenance.paths, 4000u);
    for (Eigen::Index a = 0; a < band.half_width.values.size(); ++a) {
        EXPECT_GE(band.half_width.values(a), 0.0);
        EXPECT_LE(band.lower()(a), band.upper()(a));
        // Both edges come from one half-width vector, so the band is symmetric
        // about its center exactly; recovered widths agree up to rounding.
        EXPECT_EQ(band.upper()(a), band.center.values(a) + band.half_width.values(a));
        EXPECT_EQ(band.lower()(a), band.center.values(a) - band.half_width.values(a));
        EXPECT_NEAR(band.upper()(a) - band.center.values(a), band.center.values(a) - band.lower()(a),
                    4.0 * std::numeric_limits<double>::epsilon() * (std::abs(band.center.values(a)) + band.half_width.values(a)));
    }
}

TEST(NormalScb, HalfWidthIsThresholdTimesSigmaOverRootN) {
    const auto s = gen_model1(25, 40, 3);
    const auto state = prepare_normal_scb(s, default_eval_grid(), Bandwidth(0.08), kEpa, options_with_seed(4));
    const auto band = state.band(0.05);
    const Eigen::VectorXd expected = band.threshold * state.sigma / std::sqrt(25.0);
    EXPECT_LT((band.half_width.values - expected).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(band.threshold, state.sup.quantile(0.05));
    const Eigen::VectorXd sd =
        empirical_variance(state.fit.curve_smooths, state.fit.mean.values).cwiseSqrt();
    EXPECT_LT((state.sigma - sd).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(NormalScb, HigherLevelBandContainsLower) {
    const auto s = gen_model1(20, 30, 5);
    const auto state = prepare_normal_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(6));
    const auto b95 = state.band(0.05);
    const auto b99 = state.band(0.01);
    EXPECT_GE(b99.threshold, b95.threshold);
    for (Eigen::Index a = 0; a < b95.center.values.size(); ++a) {
        EXPECT_LE(b99.lower()(a), b95.lower()(a));
        EXPECT_GE(b99.upper()(a), b95.upper()(a));
    }
}

TEST(NormalScb, ScalingEquivariance) {
    const auto s = gen_model1(20, 30, 7);
    FunctionalSample scaled{s.design, 3.5 * s.values};
    const auto eval = default_eval_grid();
    const auto a = normal_scb(s, eval, Bandwidth(0.1), kEpa, options_with_seed(8));
    const auto b = normal_scb(scaled, eval, Bandwidth(0.1), kEpa, options_with_seed(8));
    EXPECT_NEAR(a.threshold, b.threshold, 1e-12);
    EXPECT_LT((3.5 * a.center.values - b.center.values).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((3.5 * a.half_width.values - b.half_width.values).cwiseAbs().maxCoeff(), 1e-12);
    ModelGenerator gen(ModelId::M1, 20, 30);
    const Eigen::VectorXd truth = gen.mean_on(eval);
    EXPECT_EQ(covers(a, truth), covers(b, 3.5 * truth));
}

TEST(NormalScb, DeterministicAcrossThreads) {
    const auto s = gen_model1(20, 50, 9);
    auto o = options_with_seed(10);
    o.threads = 1;
    const auto a = normal_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, o);
    o.threads = 8;
    const auto b = normal_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, o);
    EXPECT_EQ(a.threshold, b.threshold);
    EXPECT_EQ(a.half_width.values, b.half_width.values);
}

TEST(NormalScb, DegenerateInputs) {
    const auto one = gen_model1(1, 20, 1);
    std::string message;
    EXPECT_TRUE(throws_kind([&] { normal_scb(one, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(1)); },
                            ErrorKind::Degenerate, &message));
    EXPECT_NE(message.find("n >= 2 required"), std::string::npos);

    FunctionalSample copies{one.design, one.values.replicate(5, 1)};
    EXPECT_TRUE(throws_kind([&] { normal_scb(copies, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(1)); },
                            ErrorKind::Degenerate));
    const auto s = gen_model1(5, 20, 1);
    EXPECT_TRUE(throws_kind([&] { normal_scb(s, default_eval_grid(), Bandwidth(0.01), kEpa, options_with_seed(1)); },
                            ErrorKind::IllPosed));
}

// ---------------------------------------------------------------------------
// Coverage checker

TEST(Coverage, AgreesWithPointwiseScan) {
    const auto s = gen_model1(15, 30, 11);
    const auto band = normal_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(12));
    RandomStream rs(5, 0);
    for (int t = 0; t < 300; ++t) {
        Eigen::VectorXd curve = band.center.values;
        const double scale = 1.5 * rs.uniform();
        for (Eigen::Index a = 0; a < curve.size(); ++a)
            curve(a) += scale * (2.0 * rs.uniform() - 1.0) * band.half_width.values(a);
        EXPECT_EQ(covers(band, curve), covered_by_scan(band, curve));
    }
    EXPECT_TRUE(covers(band, band.center.values + 0.999 * band.half_width.values));
    EXPECT_FALSE(covers(band, band.center.values - 1.001 * band.half_width.values));
    EXPECT_EQ(band_excess(band, band.center.values), 0.0);
}

TEST(Coverage, ZeroHalfWidth) {
    BandResult band;
    band.center = DiscretizedCurve(Grid::equispaced(3), Eigen::Vector3d(1.0, 2.0, 3.0));
    band.half_width = DiscretizedCurve(Grid::equispaced(3), Eigen::Vector3d(0.5, 0.0, 0.5));
    EXPECT_TRUE(covers(band, Eigen::Vector3d(1.2, 2.0, 3.4)));
    EXPECT_TRUE(std::isinf(band_excess(band, Eigen::Vector3d(1.0, 2.1, 3.0))));
}

// ---------------------------------------------------------------------------
// Bootstrap

TEST(BootstrapScb, SingleResampleIsItsOwnQuantile) {
    const auto s = gen_model1(10, 30, 13);
    BootstrapOptions o;
    o.resamples = 1;
    o.seed = 3;
    const auto a = bootstrap_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, o);
    o.gamma = 0.5;
    const auto b = bootstrap_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, o);
    EXPECT_GT(a.threshold, 0.0);
    EXPECT_EQ(a.threshold, b.threshold);
}

TEST(BootstrapScb, DeterministicAcrossThreads) {
    const auto s = gen_model2(10, 50, 14);
    BootstrapOptions o;
    o.resamples = 300;
    o.seed = 15;
    o.threads = 1;
    const auto a = bootstrap_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, o);
    o.threads = 8;
    const auto b = bootstrap_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, o);
    EXPECT_EQ(a.threshold, b.threshold);
    EXPECT_EQ(a.half_width.values, b.half_width.values);
    EXPECT_EQ(a.method, BandMethod::Bootstrap);
    // Half-width uses the original sigma_hat.
    const auto normal = prepare_normal_scb(s, default_eval_grid(), Bandwidth(0.05), kEpa, options_with_seed(1));
    EXPECT_LT((a.half_width.values - a.threshold * normal.sigma / std::sqrt(10.0)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(BootstrapScb, TwoCurvesNeedRedraws) {
    // With n = 2 a resample repeats one curve with probability 1/2; such draws
    // have zero spread and must be redrawn.
    const auto s = gen_model1(2, 20, 16);
    BootstrapOptions o;
    o.resamples = 50;
    o.seed = 17;
    const auto band = bootstrap_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, o);
    EXPECT_TRUE(std::isfinite(band.threshold));
    EXPECT_GT(band.threshold, 0.0);
}

// ---------------------------------------------------------------------------
// Two-sample comparison

TEST(TwoSample, SameSampleNeverRejects) {
    const auto s = gen_model1(20, 40, 18);
    const auto r = two_sample_scb(s, s, default_eval_grid(), Bandwidth(0.1), Bandwidth(0.1), kEpa, options_with_seed(19));
    EXPECT_FALSE(r.reject);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.band.center.values.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(r.band.method, BandMethod::TwoSample);
}

TEST(TwoSample, HalfWidthFromSummedVariances) {
    const auto a = gen_model1(20, 40, 20);
    const auto b = gen_model1(30, 40, 21);
    auto o = options_with_seed(22);
    o.shrinkage = ShrinkageSpec::none();
    const auto eval = default_eval_grid();
    const auto r = two_sample_scb(a, b, eval, Bandwidth(0.1), Bandwidth(0.1), kEpa, o);
    const auto fa = fit_mean(a, eval, Bandwidth(0.1), kEpa);
    const auto fb = fit_mean(b, eval, Bandwidth(0.1), kEpa);
    const Eigen::VectorXd var = empirical_variance(fa.curve_smooths, fa.mean.values) / 20.0 +
                                empirical_variance(fb.curve_smooths, fb.mean.values) / 30.0;
    EXPECT_LT((r.band.half_width.values - r.band.threshold * var.cwiseSqrt()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((r.band.center.values - (fa.mean.values - fb.mean.values)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(r.reject, !covers(r.band, Eigen::VectorXd::Zero(eval.size())));
}

TEST(TwoSample, ShiftedMeansReject) {
    ModelGenerator gen(ModelId::M1, 50, 50);
    int rejections = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const auto a = gen.draw(40000 + rep);
        auto b = gen.draw(50000 + rep);
        b.values.array() += 1.0;
        rejections += two_sample_scb(a, b, default_eval_grid(), Bandwidth(0.05), Bandwidth(0.05), kEpa,
                                     options_with_seed(rep, 2000))
                          .reject;
    }
    EXPECT_GE(rejections, 198);
}

TEST(TwoSample, GridMismatch) {
    const auto a = gen_model1(5, 20, 1);
    const auto b = gen_model1(5, 30, 1);
    EXPECT_TRUE(throws_kind([&] { two_sample_scb(a, b, default_eval_grid(), Bandwidth(0.1), Bandwidth(0.1), kEpa, options_with_seed(1)); },
                            ErrorKind::InvalidArgument));
}

// ---------------------------------------------------------------------------
// Prediction

TEST(Prediction, OmitsRootN) {
    const auto s = gen_model1(16, 30, 23);
    const auto state = prepare_normal_scb(s, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(24));
    const auto mean_band = state.band(0.05);
    const auto pred = prediction_band(s, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(24));
    EXPECT_EQ(pred.method, BandMethod::Prediction);
    EXPECT_LT((pred.half_width.values - 4.0 * mean_band.half_width.values).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Prediction, GaussianCurvesNearNominal) {
    ModelGenerator gen(ModelId::M1, 50, 50);
    double total = 0.0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const auto band = prediction_band(gen.draw(100 + r), default_eval_grid(), Bandwidth(0.05), kEpa,
                                          options_with_seed(r, 0));
        total += prediction_coverage(band, gen.draw(5000 + r), Bandwidth(0.05), kEpa);
    }
    EXPECT_GE(total / reps, 0.94);
    EXPECT_LE(total / reps, 0.96);
}

TEST(Prediction, SkewedCurvesUnderCover) {
    ModelGenerator gen(ModelId::M2, 50, 50);
    double total = 0.0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const auto band = prediction_band(gen.draw(100 + r), default_eval_grid(), Bandwidth(0.05), kEpa,
                                          options_with_seed(r, 0));
        total += prediction_coverage(band, gen.draw(5000 + r), Bandwidth(0.05), kEpa);
    }
    EXPECT_LT(total / reps, 0.94);
}

TEST(Prediction, IdenticalTrainingCurvesDegenerate) {
    const auto one = gen_model1(1, 20, 1);
    FunctionalSample copies{one.design, one.values.replicate(4, 1)};
    EXPECT_TRUE(throws_kind([&] { prediction_band(copies, default_eval_grid(), Bandwidth(0.1), kEpa, options_with_seed(1)); },
                            ErrorKind::Degenerate));
}

TEST(SplitHalf, TrivialCandidateSets) {
    const auto s = gen_model1(20, 30, 25);
    const auto single = split_half_bandwidth(s, default_eval_grid(), {0.12}, kEpa, options_with_seed(1, 1000));
    EXPECT_EQ(single.bandwidth[0], 0.12);
    const auto filtered = split_half_bandwidth(s, default_eval_grid(), {0.001, 0.2}, kEpa, options_with_seed(1, 1000));
    EXPECT_EQ(filtered.bandwidth[0], 0.2);
    EXPECT_EQ(filtered.warnings.size(), 1u);
    EXPECT_TRUE(throws_kind([&] { split_half_bandwidth(s, default_eval_grid(), {}, kEpa, options_with_seed(1)); },
                            ErrorKind::InvalidArgument));
    const auto small = gen_model1(3, 30, 25);
    EXPECT_TRUE(throws_kind([&] { split_half_bandwidth(small, default_eval_grid(), {0.1}, kEpa, options_with_seed(1)); },
                            ErrorKind::Degenerate));
}

TEST(SplitHalf, ChosenBandwidthCoversNewCurves) {
    ModelGenerator train_gen(ModelId::M1, 40, 50);
    ModelGenerator test_gen(ModelId::M1, 200, 50);
    const std::vector<double> candidates{0.04, 0.05, 0.07, 0.1, 0.15, 0.2, 0.3};
    int close = 0;
    for (int r = 0; r < 100; ++r) {
        const auto train = train_gen.draw(300 + r);
        const auto o = options_with_seed(r, 2000);
        const auto pick = split_half_bandwidth(train, default_eval_grid(), candidates, kEpa, o);
        const auto band = prediction_band(train, default_eval_grid(), pick.bandwidth, kEpa, o);
        const double coverage = prediction_coverage(band, test_gen.draw(9000 + r), pick.bandwidth, kEpa);
        close += std::abs(coverage - 0.95) <= 0.05;
    }
    EXPECT_GE(close, 80);
}
