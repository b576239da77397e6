#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "scb/core_model.hpp"
#include "scb/gof.hpp"
#include "scb/moments.hpp"
#include "scb/smoother.hpp"

namespace scb {

enum class CovarianceMode { Nonparametric, ParametricAr1, Known };

std::string to_string(CovarianceMode mode);

struct PlrtStatistic {
    double f = 0.0;  ///< RSS0 / RSS1 - 1
    double rss0 = 0.0;
    double rss1 = 0.0;
    /// (I - P)^T (I - P) - (1 + f)(I - S)^T (I - S); P(F >= f | H0) = P(z^T A z > 0).
    Eigen::MatrixXd quadratic_form;
};

/// Parametric fit via the hat matrix P, nonparametric fit via the p x p smoother S.
/// Throws Error(Degenerate) when RSS1 is zero.
PlrtStatistic plrt_statistic(const Eigen::VectorXd& ybar, const Eigen::MatrixXd& projection,
                             const Eigen::MatrixXd& smoother);

/// S is the local linear smoother at the design points with the given h and kernel.
PlrtStatistic plrt_statistic(const FunctionalSample& sample, const BasisModel& model, const Bandwidth& h,
                             const Kernel& kernel);

struct PlrtPvalue {
    double p_value = 1.0;
    std::array<double, 3> cumulants{};  ///< kappa_1..kappa_3 of z^T A z
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool normal_fallback = false;  ///< kappa_3 == 0: two-cumulant normal approximation
};

/// P(z^T A z > 0) for z ~ N(0, mean_covariance), using the a chi2_b + c fit to the
/// first three cumulants kappa_r = 2^(r-1) (r-1)! tr((A C)^r).
/// Throws Error(Degenerate) when kappa_2 <= 0.
PlrtPvalue plrt_pvalue(const Eigen::MatrixXd& quadratic_form, const Eigen::MatrixXd& mean_covariance);

/// Stationary AR(1) covariance sigma^2 rho^|j-k| on the design points. sigma^2 is the
/// average pointwise variance; rho is the pooled lag-1 autocovariance of the
/// centered curves over sigma^2, clipped to (-1, 1).
CovarianceField ar1_covariance_fit(const FunctionalSample& sample);

struct PlrtReport {
    double f = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;  ///< p_value < alpha
    CovarianceMode mode = CovarianceMode::Nonparametric;
    std::array<double, 3> cumulants{};
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool normal_fallback = false;
};

/// Full test. `known_covariance` (p x p, covariance of one curve) is required for
/// CovarianceMode::Known and ignored otherwise. The nonparametric mode uses the
/// unshrunk empirical covariance of the data.
PlrtReport plrt_test(const FunctionalSample& sample, const BasisModel& model, const Bandwidth& h,
                     const Kernel& kernel, CovarianceMode mode, double alpha = 0.05,
                     const std::optional<Eigen::MatrixXd>& known_covariance = std::nullopt);

/// Same test when the statistic and the per-curve covariance are already available.
PlrtReport plrt_report(const PlrtStatistic& statistic, const Eigen::MatrixXd& curve_covariance, std::size_t n,
                       CovarianceMode mode, double alpha);

}  // namespace scb
