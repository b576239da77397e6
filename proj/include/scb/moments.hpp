#pragma once

#include <optional>

#include <Eigen/Dense>

#include "scb/core_model.hpp"

namespace scb {

/// Symmetric table C(x_a, x_b) on a grid.
struct CovarianceField {
    Grid grid;
    Eigen::MatrixXd table;
};

/// Symmetric table with unit diagonal and entries in [-1,1].
struct CorrelationField {
    Grid grid;
    Eigen::MatrixXd table;
};

/// Shrinkage toward the identity correlation. `lambda` empty means "estimate it
/// from the data" with the Schafer-Strimmer analytic intensity.
struct ShrinkageSpec {
    std::optional<double> lambda;

    static ShrinkageSpec estimated() { return {}; }
    static ShrinkageSpec fixed(double l);
    static ShrinkageSpec none() { return fixed(0.0); }
};

/// Pointwise sample variance with divisor n - 1 of the rows of `curves` (n x m)
/// around `mean`. Throws Error(Degenerate) for n < 2.
Eigen::VectorXd empirical_variance(const Eigen::MatrixXd& curves, const Eigen::VectorXd& mean);

/// Empirical correlation of the rows of `curves`, clipped to [-1,1] with an exact
/// unit diagonal. Throws Error(Degenerate) naming the first zero-variance point.
CorrelationField empirical_correlation(const Grid& grid, const Eigen::MatrixXd& curves, const Eigen::VectorXd& mean,
                                       const Eigen::VectorXd& sigma);

/// Schafer-Strimmer intensity: sum of estimated variances of the off-diagonal
/// sample correlations over the sum of their squares, clipped to [0,1].
/// Rows of `units` are the n observations.
double estimate_shrinkage_intensity(const Eigen::MatrixXd& units);

/// (1 - lambda) * raw + lambda * I. Keeps symmetry and the unit diagonal exactly.
CorrelationField shrink_correlation(const CorrelationField& raw, double lambda);

/// Resolves the spec against data: a fixed lambda is returned clipped, an estimated
/// one is computed from `units`.
double resolve_shrinkage(const ShrinkageSpec& spec, const Eigen::MatrixXd& units);

/// Sample covariance across rows (divisor n - 1) with the correlation part shrunk
/// per `spec`; variances are kept. Returns the lambda used through `lambda_out`.
Eigen::MatrixXd shrunk_covariance(const Eigen::MatrixXd& units, const ShrinkageSpec& spec, double* lambda_out = nullptr);

/// p x p covariance of the raw data on the design grid, shrunk per `spec`.
CovarianceField empirical_data_covariance(const FunctionalSample& sample, const ShrinkageSpec& spec,
                                          double* lambda_out = nullptr);

struct PsdRepair {
    Eigen::MatrixXd matrix;
    double clipped_mass = 0.0;  ///< sum of |negative eigenvalues| removed
};

/// Symmetrizes, clips negative eigenvalues to zero, and symmetrizes again.
/// Throws Error(Numerical) for non-finite input.
PsdRepair psd_repair(const Eigen::MatrixXd& table);

CovarianceField psd_repair(const CovarianceField& field, double* clipped_mass = nullptr);

/// PSD repair followed by renormalizing the diagonal back to one.
CorrelationField psd_repair(const CorrelationField& field, double* clipped_mass = nullptr);

/// Standard deviations and correlation implied by a covariance table. Throws
/// Error(Degenerate) on a non-positive diagonal entry.
struct CovarianceSplit {
    Eigen::VectorXd sigma;
    CorrelationField correlation;
};
CovarianceSplit split_covariance(const CovarianceField& field);

}  // namespace scb
