#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scb/bands.hpp"
#include "scb/core_model.hpp"
#include "scb/gauss_sup.hpp"
#include "scb/moments.hpp"
#include "scb/smoother.hpp"

namespace scb {

using BasisFunction = std::function<double(const Point&)>;

/// Covariance function R(x, x') evaluable anywhere in [0,1]^d.
using CovarianceFunction = std::function<double(const Point&, const Point&)>;

/// Equispaced trapezoidal rule on [0,1]^d with the design density folded into the
/// weights, so sum_q weight_q g(node_q) approximates the integral of g f.
struct Quadrature {
    Grid nodes;
    Eigen::VectorXd weights;
};

Quadrature density_quadrature(const std::vector<Density>& densities, std::size_t points_per_axis);

/// Span of L >= 1 basis functions, orthonormal under <g, h>_f = int g h f.
///
/// The Gram matrix is computed on construction by Simpson's rule with
/// `quadrature_points` (rounded up to odd) nodes per axis. If its
/// off-diagonal part exceeds 1e-6 relative to the diagonal, the functions are
/// orthogonalized (Cholesky form of Gram-Schmidt) and a warning is recorded.
/// Either way the stored basis is normalized under the same quadrature.
class BasisModel {
public:
    BasisModel(std::vector<BasisFunction> functions, std::vector<Density> densities,
               std::size_t quadrature_points = 0);

    /// Shifted Legendre polynomials of total degree <= degree on [0,1]^dim
    /// (tensor products for dim = 2).
    static BasisModel polynomial(int degree, int dim = 1);
    static BasisModel polynomial(int degree, std::vector<Density> densities);

    /// Columns of `values` tabulate basis functions at the points of `nodes`
    /// (d = 1); evaluation interpolates linearly and extends flat past the ends.
    static BasisModel tabulated(std::vector<double> nodes, const Eigen::MatrixXd& values,
                                Density density = Density::uniform());

    std::size_t size() const noexcept { return raw_.size(); }
    int dim() const noexcept { return static_cast<int>(densities_.size()); }
    const std::vector<Density>& densities() const noexcept { return densities_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    /// Gram matrix of the supplied functions before orthonormalization.
    const Eigen::MatrixXd& raw_gram() const noexcept { return raw_gram_; }
    std::size_t quadrature_points() const noexcept { return quadrature_points_; }

    /// Orthonormalized basis values at one point.
    Eigen::VectorXd evaluate(const Point& x) const;
    /// Rows are basis values at the grid points: size x L.
    Eigen::MatrixXd design_matrix(const Grid& grid) const;

private:
    Eigen::VectorXd evaluate_raw(const Point& x) const;

    std::vector<BasisFunction> raw_;
    std::vector<Density> densities_;
    Eigen::MatrixXd raw_gram_;
    Eigen::MatrixXd transform_;  ///< orthonormal = transform_ * raw
    std::vector<std::string> warnings_;
    std::size_t quadrature_points_ = 0;
};

/// Orthogonal projection onto the column span of `phi` (p x L). Throws
/// Error(Numerical) when the condition number of phi exceeds 1e10.
Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& phi);

struct LsFit {
    Eigen::VectorXd coefficients;  ///< in the orthonormalized basis
    Eigen::VectorXd fitted;        ///< fitted values at the design points
    Eigen::MatrixXd projection;    ///< p x p hat matrix P

    double operator()(const BasisModel& model, const Point& x) const { return model.evaluate(x).dot(coefficients); }
};

/// Least-squares fit of the averaged curve on the basis.
LsFit ls_fit(const Eigen::VectorXd& ybar, const Grid& design, const BasisModel& model);
LsFit ls_fit(const FunctionalSample& sample, const BasisModel& model);

/// r = W (I - P) ybar, where W is m x p and P is p x p.
Eigen::VectorXd residual_process(const Eigen::VectorXd& ybar, const Eigen::MatrixXd& projection,
                                 const Eigen::MatrixXd& weights);

DiscretizedCurve residual_process(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                                  const Bandwidth& h, const Kernel& kernel);

/// W (I - P) C (I - P) W^T for a p x p data covariance C.
Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& projection,
                                    const Eigen::MatrixXd& data_covariance);

/// Finite-sample covariance of sqrt(n) r with the (shrunk) empirical covariance of
/// the data plugged in.
CovarianceField gamma_n_plugin(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                               const Bandwidth& h, const Kernel& kernel,
                               const ShrinkageSpec& shrinkage = ShrinkageSpec::estimated(),
                               double* lambda_out = nullptr);

/// Large-sample covariance of sqrt(n) r:
///   R(x,x') + phi(x)^T B phi(x') - c(x)^T phi(x') - c(x')^T phi(x)
/// with B_kl = int int R phi_k phi_l f f and c_l(x) = int R(x,u) phi_l(u) f(u) du.
/// Integrals use the trapezoidal rule with `points_per_axis` nodes
/// (0 selects 400 for d = 1 and 40 for d = 2).
CovarianceField limit_gamma(const CovarianceFunction& covariance, const BasisModel& model, const EvalGrid& eval,
                            std::size_t points_per_axis = 0);

struct GofOptions {
    double alpha = 0.05;
    std::size_t paths = 0;  ///< 0 selects default_path_count(p)
    std::uint64_t seed = 0;
    unsigned threads = 1;
    ShrinkageSpec shrinkage = ShrinkageSpec::estimated();
};

struct GofReport {
    double statistic = 0.0;  ///< T
    double threshold = 0.0;  ///< c_alpha
    double alpha = 0.05;
    bool reject = false;
    BandResult band;  ///< r +/- c_alpha sigma_Gamma / sqrt(n), a band for mu - P mu
    double shrinkage_lambda = 0.0;
    double clipped_mass = 0.0;
    std::vector<std::string> warnings;
};

/// Quantities shared by reports at several levels.
struct GofState {
    DiscretizedCurve residual;
    Eigen::VectorXd sigma;  ///< sigma_Gamma on the eval grid
    CorrelationField correlation;
    SupNormSample sup;
    std::size_t n = 0;
    double statistic = 0.0;
    double shrinkage_lambda = 0.0;
    BandProvenance provenance;
    std::vector<std::string> warnings;

    GofReport report(double alpha) const;
};

GofState prepare_gof(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                     const Bandwidth& h, const Kernel& kernel, const GofOptions& options);

GofReport scb_gof_test(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                       const Bandwidth& h, const Kernel& kernel, const GofOptions& options);

}  // namespace scb
