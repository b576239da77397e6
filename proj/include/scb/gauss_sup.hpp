#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "scb/moments.hpp"

namespace scb {

/// Inputs for the Monte-Carlo sup-norm threshold of a centered Gaussian process
/// with the given correlation on a grid.
struct SupQuantileRequest {
    CorrelationField correlation;
    double gamma = 0.05;       ///< exceedance probability, in (0,1)
    std::size_t paths = 10000;  ///< N >= 100
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

/// Path counts by design size: 8000 (p <= 10), 10000 (p <= 20), 13000 otherwise.
std::size_t default_path_count(std::size_t p) noexcept;

/// Symmetric PSD square root of a repaired correlation matrix.
struct GaussianFactor {
    Eigen::MatrixXd root;
    double clipped_mass = 0.0;
};

GaussianFactor symmetric_root(const CorrelationField& correlation);

/// Sorted Monte-Carlo sample of sup_x |G(x)|. Quantiles at several levels read
/// off the same sample, so thresholds are monotone in the level.
class SupNormSample {
public:
    SupNormSample() = default;
    SupNormSample(std::vector<double> values, double clipped_mass);

    std::size_t size() const noexcept { return sorted_.size(); }
    const std::vector<double>& sorted() const noexcept { return sorted_; }
    double clipped_mass() const noexcept { return clipped_mass_; }

    /// The ceil((1 - gamma) N)-th order statistic.
    double quantile(double gamma) const;
    /// Binomial order-statistic standard error of quantile(gamma).
    double standard_error(double gamma) const;
    /// Fraction of simulated sup-norms strictly above t.
    double exceedance(double t) const;

private:
    std::vector<double> sorted_;
    double clipped_mass_ = 0.0;
};

struct SupQuantileResult {
    double threshold = 0.0;
    double standard_error = 0.0;
    std::size_t paths = 0;
    double clipped_mass = 0.0;
};

/// sup-abs values in path-index order; a pure function of the request (thread
/// count included out).
std::vector<double> simulate_sup_norms(const SupQuantileRequest& request);

/// Same values, sorted, with factor diagnostics.
SupNormSample sample_sup_norms(const SupQuantileRequest& request);

SupQuantileResult sup_quantile(const SupQuantileRequest& request);

}  // namespace scb
