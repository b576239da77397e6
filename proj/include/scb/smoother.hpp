#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scb/core_model.hpp"

namespace scb {

/// Kernel with support [-1,1]^d; product form for d = 2.
class Kernel {
public:
    enum class Type { Epanechnikov, TruncatedGaussian };

    static Kernel epanechnikov() { return Kernel(Type::Epanechnikov); }
    /// Standard normal density restricted to (-1,1) and renormalized to unit mass.
    static Kernel truncated_gaussian() { return Kernel(Type::TruncatedGaussian); }
    /// Accepts "epanechnikov", "epa", "gauss", "gaussian", "truncated-gaussian".
    static Kernel from_name(const std::string& name);

    Type type() const noexcept { return type_; }
    std::string name() const;

    /// One-dimensional profile; zero for |u| >= 1.
    double operator()(double u) const noexcept;
    double operator()(double u1, double u2) const noexcept { return (*this)(u1) * (*this)(u2); }

    friend bool operator==(const Kernel&, const Kernel&) = default;

private:
    explicit Kernel(Type t) : type_(t) {}
    Type type_;
};

/// Per-axis bandwidths h_1..h_d, all positive.
class Bandwidth {
public:
    explicit Bandwidth(double h);
    Bandwidth(double h1, double h2);

    int dim() const noexcept { return dim_; }
    double operator[](int k) const { return h_.at(static_cast<std::size_t>(k)); }
    /// h_1 * ... * h_d
    double volume() const noexcept { return dim_ == 1 ? h_[0] : h_[0] * h_[1]; }

    friend bool operator==(const Bandwidth&, const Bandwidth&) = default;

private:
    std::array<double, 2> h_{};
    int dim_ = 1;
};

/// Sparse local linear weights W_j(x) at one evaluation point.
struct WeightVector {
    Point x{};
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

/// Local linear weights at x, normalized to sum to one.
///
/// d = 1: w_j = (s_2 - (x_j - x) s_1) K((x_j - x)/h) / (p h), with
///        s_l = sum_j (x_j - x)^l K((x_j - x)/h) / (p h).
/// d = 2: the first row of the adjugate of the 3x3 local moment matrix, which
///        gives the cofactor weights directly.
///
/// Throws Error(IllPosed) when fewer than d + 1 design points are kernel-active at x
/// or the active points are collinear (d = 2). Moment sums use compensated summation.
WeightVector local_linear_weights(const Grid& design, const Point& x, const Bandwidth& h, const Kernel& kernel);

/// Dense m x p matrix whose row a holds W_j(eval point a).
Eigen::MatrixXd weight_matrix(const Grid& design, const Grid& eval, const Bandwidth& h, const Kernel& kernel);

/// p x p smoother matrix S evaluated at the design points themselves.
inline Eigen::MatrixXd smoother_matrix(const Grid& design, const Bandwidth& h, const Kernel& kernel) {
    return weight_matrix(design, design, h, kernel);
}

/// True when h is well posed at every eval point.
bool bandwidth_is_well_posed(const Grid& design, const Grid& eval, const Bandwidth& h, const Kernel& kernel);

DiscretizedCurve smooth_curve(std::span<const double> row, const DesignGrid& design, const EvalGrid& eval,
                              const Bandwidth& h, const Kernel& kernel);

struct MeanFit {
    DiscretizedCurve mean;         ///< smooth of the column means
    Eigen::MatrixXd curve_smooths;  ///< n x m, row i = smooth of curve i
    Eigen::MatrixXd weights;        ///< m x p
};

MeanFit fit_mean(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h, const Kernel& kernel);

struct CvResult {
    Bandwidth bandwidth{1.0};
    std::vector<double> candidates;  ///< sorted ascending
    std::vector<double> scores;      ///< NaN for ill-posed candidates
    std::vector<std::string> warnings;
};

/// Leave-one-curve-out cross-validation over candidate bandwidths (d = 1 scalar h,
/// applied to every axis when d = 2). Scores use the design points as evaluation
/// points; ties go to the smaller bandwidth.
CvResult cv_bandwidth(const FunctionalSample& sample, const Kernel& kernel, std::vector<double> candidates);

}  // namespace scb
