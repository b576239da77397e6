#include "scb/plrt.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

#include "scb/errors.hpp"

namespace scb {

namespace {
constexpr double kRssFloor = 1e-24;
}  // namespace

std::string to_string(CovarianceMode mode) {
    switch (mode) {
        case CovarianceMode::Nonparametric: return "nonparametric";
        case CovarianceMode::ParametricAr1: return "parametric-ar1";
        case CovarianceMode::Known: return "known";
    }
    return "unknown";
}

PlrtStatistic plrt_statistic(const Eigen::VectorXd& ybar, const Eigen::MatrixXd& projection,
                             const Eigen::MatrixXd& smoother) {
    const auto p = ybar.size();
    require(projection.rows() == p && projection.cols() == p, "projection must be p x p");
    require(smoother.rows() == p && smoother.cols() == p, "smoother must be p x p");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd null_resid = id - projection;
    const Eigen::MatrixXd smooth_resid = id - smoother;

    PlrtStatistic out;
    out.rss0 = (null_resid * ybar).squaredNorm();
    out.rss1 = (smooth_resid * ybar).squaredNorm();
    // Residual sums at round-off level relative to the data count as exact zeros.
    const double floor = kRssFloor * ybar.squaredNorm();
    if (out.rss0 <= floor) out.rss0 = 0.0;
    if (!(out.rss1 > floor)) fail(ErrorKind::Degenerate, "smoother reproduces the data exactly (RSS1 = 0)");
    out.f = out.rss0 / out.rss1 - 1.0;
    const Eigen::MatrixXd a =
        null_resid.transpose() * null_resid - (1.0 + out.f) * (smooth_resid.transpose() * smooth_resid);
    out.quadratic_form = 0.5 * (a + a.transpose());
    return out;
}

PlrtStatistic plrt_statistic(const FunctionalSample& sample, const BasisModel& model, const Bandwidth& h,
                             const Kernel& kernel) {
    validate_sample(sample);
    const LsFit fit = ls_fit(sample, model);
    const Eigen::MatrixXd s = smoother_matrix(sample.design.grid(), h, kernel);
    return plrt_statistic(sample.column_means(), fit.projection, s);
}

PlrtPvalue plrt_pvalue(const Eigen::MatrixXd& quadratic_form, const Eigen::MatrixXd& mean_covariance) {
    require(quadratic_form.rows() == quadratic_form.cols() && quadratic_form.rows() == mean_covariance.rows() &&
                mean_covariance.rows() == mean_covariance.cols(),
            "quadratic form and covariance must be square of equal size");
    const Eigen::MatrixXd m1 = quadratic_form * mean_covariance;
    const Eigen::MatrixXd m2 = m1 * m1;
    PlrtPvalue out;
    out.cumulants[0] = m1.trace();
    out.cumulants[1] = 2.0 * m2.trace();
    out.cumulants[2] = 8.0 * (m2.cwiseProduct(m1.transpose())).sum();  // tr(m2 m1)
    const double k1 = out.cumulants[0];
    const double k2 = out.cumulants[1];
    const double k3 = out.cumulants[2];
    if (!(k2 > 0.0)) fail(ErrorKind::Degenerate, "quadratic form has zero variance (kappa_2 <= 0)");

    if (k3 == 0.0) {
        out.normal_fallback = true;
        const boost::math::normal_distribution<double> z;
        out.p_value = boost::math::cdf(boost::math::complement(z, -k1 / std::sqrt(k2)));
        return out;
    }
    out.a = k3 / (4.0 * k2);
    out.b = 8.0 * k2 * k2 * k2 / (k3 * k3);
    out.c = k1 - out.a * out.b;
    const boost::math::chi_squared_distribution<double> chi2(out.b);
    const double cut = -out.c / out.a;
    if (out.a > 0.0) {
        out.p_value = cut <= 0.0 ? 1.0 : boost::math::cdf(boost::math::complement(chi2, cut));
    } else {
        out.p_value = cut <= 0.0 ? 0.0 : boost::math::cdf(chi2, cut);
    }
    return out;
}

CovarianceField ar1_covariance_fit(const FunctionalSample& sample) {
    validate_sample(sample);
    if (sample.n() < 2) fail(ErrorKind::Degenerate, "n >= 2 required");
    if (sample.p() < 2) fail(ErrorKind::InvalidArgument, "AR(1) fit needs p >= 2");
    const Eigen::MatrixXd centered = sample.values.rowwise() - sample.values.colwise().mean();
    const auto n = static_cast<double>(sample.n());
    const auto p = static_cast<Eigen::Index>(sample.p());
    const double variance = centered.squaredNorm() / ((n - 1.0) * static_cast<double>(p));
    if (!(variance > 0.0)) fail(ErrorKind::Degenerate, "zero variance: every curve is identical");
    const double lag1 = centered.leftCols(p - 1).cwiseProduct(centered.rightCols(p - 1)).sum() /
                        ((n - 1.0) * static_cast<double>(p - 1));
    const double rho = std::clamp(lag1 / variance, -1.0 + 1e-12, 1.0 - 1e-12);
    Eigen::MatrixXd table(p, p);
    for (Eigen::Index j = 0; j < p; ++j)
        for (Eigen::Index k = 0; k < p; ++k) table(j, k) = variance * std::pow(rho, static_cast<double>(std::abs(j - k)));
    return {sample.design.grid(), table};
}

PlrtReport plrt_report(const PlrtStatistic& statistic, const Eigen::MatrixXd& curve_covariance, std::size_t n,
                       CovarianceMode mode, double alpha) {
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    require(n >= 1, "n >= 1 required");
    PlrtReport out;
    out.f = statistic.f;
    out.alpha = alpha;
    out.mode = mode;
    if (statistic.f <= -1.0 + 1e-12) {
        // RSS0 = 0: the data sit in the null span and nothing is more extreme.
        out.p_value = 1.0;
        return out;
    }
    const PlrtPvalue pv = plrt_pvalue(statistic.quadratic_form, curve_covariance / static_cast<double>(n));
    out.p_value = std::clamp(pv.p_value, 0.0, 1.0);
    out.reject = out.p_value < alpha;
    out.cumulants = pv.cumulants;
    out.a = pv.a;
    out.b = pv.b;
    out.c = pv.c;
    out.normal_fallback = pv.normal_fallback;
    return out;
}

PlrtReport plrt_test(const FunctionalSample& sample, const BasisModel& model, const Bandwidth& h,
                     const Kernel& kernel, CovarianceMode mode, double alpha,
                     const std::optional<Eigen::MatrixXd>& known_covariance) {
    const PlrtStatistic stat = plrt_statistic(sample, model, h, kernel);
    Eigen::MatrixXd cov;
    switch (mode) {
        case CovarianceMode::Nonparametric:
            cov = empirical_data_covariance(sample, ShrinkageSpec::none()).table;
            break;
        case CovarianceMode::ParametricAr1:
            cov = ar1_covariance_fit(sample).table;
            break;
        case CovarianceMode::Known:
            require(known_covariance.has_value(), "known covariance mode needs a covariance matrix");
            require(known_covariance->rows() == static_cast<Eigen::Index>(sample.p()) &&
                        known_covariance->cols() == static_cast<Eigen::Index>(sample.p()),
                    "known covariance must be p x p");
            cov = *known_covariance;
            break;
    }
    return plrt_report(stat, cov, sample.n(), mode, alpha);
}

}  // namespace scb
