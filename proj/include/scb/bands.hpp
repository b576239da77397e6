#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scb/core_model.hpp"
#include "scb/gauss_sup.hpp"
#include "scb/moments.hpp"
#include "scb/smoother.hpp"

namespace scb {

enum class BandMethod { Normal, Bootstrap, TwoSample, Prediction, Residual };

std::string to_string(BandMethod method);

struct BandProvenance {
    std::vector<double> bandwidth;  ///< per-sample bandwidths (two entries for two-sample bands)
    std::string kernel;
    std::size_t paths = 0;  ///< sup-norm paths or bootstrap resamples
    std::uint64_t seed = 0;
};

/// center +/- half_width on an evaluation grid.
struct BandResult {
    DiscretizedCurve center;
    DiscretizedCurve half_width;
    double threshold = 0.0;
    double level = 0.95;  ///< 1 - gamma
    BandMethod method = BandMethod::Normal;
    BandProvenance provenance;
    double shrinkage_lambda = 0.0;
    double clipped_mass = 0.0;
    double threshold_standard_error = 0.0;

    Eigen::VectorXd lower() const { return center.values - half_width.values; }
    Eigen::VectorXd upper() const { return center.values + half_width.values; }
};

/// max_x |curve - center| / half_width; points with zero half-width count as
/// infinite excess unless the curve matches the center there.
double band_excess(const BandResult& band, const Eigen::VectorXd& curve);

/// A curve is covered iff band_excess <= 1.
inline bool covers(const BandResult& band, const Eigen::VectorXd& curve) { return band_excess(band, curve) <= 1.0; }

struct ScbOptions {
    double gamma = 0.05;
    std::size_t paths = 0;  ///< 0 selects default_path_count(p)
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ShrinkageSpec shrinkage = ShrinkageSpec::estimated();
};

/// Everything the normal band needs before a level is picked: the mean fit,
/// sigma-hat, the shrunk correlation, and a simulated sup-norm sample.
/// Bands at several levels built from one state share the simulated sample.
struct NormalScbState {
    MeanFit fit;
    Eigen::VectorXd sigma;
    CorrelationField correlation;
    double shrinkage_lambda = 0.0;
    SupNormSample sup;
    std::size_t n = 0;
    BandProvenance provenance;

    /// center +/- c_gamma sigma / sqrt(n)
    BandResult band(double gamma) const;
    /// center +/- c_gamma sigma (no sqrt(n)), for predicting new curves.
    BandResult prediction(double gamma) const;
};

NormalScbState prepare_normal_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h,
                                  const Kernel& kernel, const ScbOptions& options);

BandResult normal_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h, const Kernel& kernel,
                      const ScbOptions& options);

struct BootstrapOptions {
    double gamma = 0.05;
    std::size_t resamples = 2500;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Naive curve bootstrap: resample the smoothed curves, record
/// z* = sqrt(n) max |(mu* - mu_hat) / sigma*|, and take the ceil((1-gamma)B)-th
/// order statistic as the threshold. Resamples with a zero sigma* are redrawn up
/// to 100 times.
BandResult bootstrap_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h,
                         const Kernel& kernel, const BootstrapOptions& options);

struct TwoSampleResult {
    BandResult band;     ///< band for mu_a - mu_b
    bool reject = false;  ///< zero leaves the band somewhere
    double statistic = 0.0;  ///< max |mu_a - mu_b| / sigma_diff, comparable to band.threshold
};

/// Difference band with covariance R_a/n_a + R_b/n_b; each sample's covariance is
/// shrunk separately per options.shrinkage. `options.gamma` is the test level alpha.
TwoSampleResult two_sample_scb(const FunctionalSample& a, const FunctionalSample& b, const EvalGrid& eval,
                               const Bandwidth& h_a, const Bandwidth& h_b, const Kernel& kernel,
                               const ScbOptions& options);

BandResult prediction_band(const FunctionalSample& train, const EvalGrid& eval, const Bandwidth& h,
                           const Kernel& kernel, const ScbOptions& options);

/// Fraction of curves in `test`, smoothed with the band's bandwidth, that stay
/// inside the band at every eval point.
double prediction_coverage(const BandResult& band, const FunctionalSample& test, const Bandwidth& h,
                           const Kernel& kernel);

struct SplitHalfResult {
    Bandwidth bandwidth{1.0};
    std::vector<double> candidates;  ///< sorted ascending
    std::vector<double> coverages;   ///< NaN where the candidate failed
    std::vector<std::string> warnings;
};

/// Builds prediction bands on a seeded half of the training curves and keeps the
/// candidate whose coverage of the other half is closest to 1 - gamma.
SplitHalfResult split_half_bandwidth(const FunctionalSample& train, const EvalGrid& eval,
                                     std::vector<double> candidates, const Kernel& kernel, const ScbOptions& options);

}  // namespace scb
