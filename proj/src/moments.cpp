#include "scb/moments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "scb/errors.hpp"

namespace scb {

namespace {

void clip_correlation(Eigen::MatrixXd& r) {
    r = r.cwiseMax(-1.0).cwiseMin(1.0);
    r.diagonal().setOnes();
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& units) {
    const Eigen::RowVectorXd mean = units.colwise().mean();
    const Eigen::MatrixXd centered = units.rowwise() - mean;
    return (centered.transpose() * centered) / static_cast<double>(units.rows() - 1);
}

}  // namespace

ShrinkageSpec ShrinkageSpec::fixed(double l) {
    require(l >= 0.0 && l <= 1.0, "shrinkage intensity must lie in [0,1]");
    return ShrinkageSpec{l};
}

Eigen::VectorXd empirical_variance(const Eigen::MatrixXd& curves, const Eigen::VectorXd& mean) {
    if (curves.rows() < 2) fail(ErrorKind::Degenerate, "n >= 2 required for a variance estimate");
    require(curves.cols() == mean.size(), "mean length must match the number of grid points");
    const Eigen::MatrixXd centered = curves.rowwise() - mean.transpose();
    return centered.colwise().squaredNorm().transpose() / static_cast<double>(curves.rows() - 1);
}

CorrelationField empirical_correlation(const Grid& grid, const Eigen::MatrixXd& curves, const Eigen::VectorXd& mean,
                                       const Eigen::VectorXd& sigma) {
    const Eigen::Index n = curves.rows();
    if (n < 2) fail(ErrorKind::Degenerate, "n >= 2 required for a correlation estimate");
    require(curves.cols() == mean.size() && mean.size() == sigma.size(), "correlation inputs have mismatched sizes");
    for (Eigen::Index a = 0; a < sigma.size(); ++a)
        if (!(sigma(a) > 0.0)) {
            std::ostringstream msg;
            msg << "zero variance at grid point " << a << " (x=" << grid.point(static_cast<std::size_t>(a))[0] << ")";
            fail(ErrorKind::Degenerate, msg.str());
        }
    // (sum_i mu_i(x) mu_i(x') - n mu(x) mu(x')) / ((n - 1) sigma(x) sigma(x'))
    Eigen::MatrixXd r = curves.transpose() * curves - static_cast<double>(n) * mean * mean.transpose();
    r.array() /= static_cast<double>(n - 1) * (sigma * sigma.transpose()).array();
    r = 0.5 * (r + r.transpose()).eval();
    clip_correlation(r);
    return {grid, std::move(r)};
}

double estimate_shrinkage_intensity(const Eigen::MatrixXd& units) {
    const Eigen::Index n = units.rows();
    if (n < 2) fail(ErrorKind::Degenerate, "n >= 2 required to estimate a shrinkage intensity");
    const Eigen::RowVectorXd mean = units.colwise().mean();
    Eigen::MatrixXd xs = units.rowwise() - mean;
    for (Eigen::Index a = 0; a < xs.cols(); ++a) {
        const double sd = std::sqrt(xs.col(a).squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) xs.col(a) /= sd;
        else xs.col(a).setZero();
    }
    // w_kab = xs_ka xs_kb; r_ab = n wbar_ab / (n-1);
    // var(r_ab) = n / (n-1)^3 * sum_k (w_kab - wbar_ab)^2
    const double nd = static_cast<double>(n);
    const Eigen::MatrixXd wbar = xs.transpose() * xs / nd;
    const Eigen::MatrixXd xs2 = xs.array().square().matrix();
    const Eigen::MatrixXd w2bar = xs2.transpose() * xs2 / nd;
    double sum_var = 0.0;
    double sum_sq = 0.0;
    const double f = nd / std::pow(nd - 1.0, 3.0);
    for (Eigen::Index b = 0; b < xs.cols(); ++b)
        for (Eigen::Index a = 0; a < xs.cols(); ++a) {
            if (a == b) continue;
            sum_var += f * nd * (w2bar(a, b) - wbar(a, b) * wbar(a, b));
            const double r = nd * wbar(a, b) / (nd - 1.0);
            sum_sq += r * r;
        }
    if (sum_sq <= 0.0) return 1.0;
    return std::clamp(sum_var / sum_sq, 0.0, 1.0);
}

CorrelationField shrink_correlation(const CorrelationField& raw, double lambda) {
    lambda = std::clamp(lambda, 0.0, 1.0);
    CorrelationField out{raw.grid, (1.0 - lambda) * raw.table};
    out.table.diagonal().setOnes();
    return out;
}

double resolve_shrinkage(const ShrinkageSpec& spec, const Eigen::MatrixXd& units) {
    if (spec.lambda) return std::clamp(*spec.lambda, 0.0, 1.0);
    return estimate_shrinkage_intensity(units);
}

Eigen::MatrixXd shrunk_covariance(const Eigen::MatrixXd& units, const ShrinkageSpec& spec, double* lambda_out) {
    if (units.rows() < 2) fail(ErrorKind::Degenerate, "n >= 2 required for a covariance estimate");
    Eigen::MatrixXd cov = sample_covariance(units);
    const double lambda = resolve_shrinkage(spec, units);
    if (lambda_out) *lambda_out = lambda;
    if (lambda > 0.0) {
        // Off-diagonal covariances shrink by (1 - lambda); the diagonal is untouched.
        const Eigen::VectorXd diag = cov.diagonal();
        cov *= 1.0 - lambda;
        cov.diagonal() = diag;
    }
    return cov;
}

CovarianceField empirical_data_covariance(const FunctionalSample& sample, const ShrinkageSpec& spec, double* lambda_out) {
    validate_sample(sample);
    return {sample.design.grid(), shrunk_covariance(sample.values, spec, lambda_out)};
}

PsdRepair psd_repair(const Eigen::MatrixXd& table) {
    require(table.rows() == table.cols(), "psd_repair needs a square table");
    if (!table.allFinite()) fail(ErrorKind::Numerical, "psd_repair: table has non-finite entries");
    Eigen::MatrixXd sym = 0.5 * (table + table.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerical, "psd_repair: eigendecomposition failed");
    const Eigen::VectorXd values = eig.eigenvalues();
    if (values.minCoeff() >= 0.0) return {std::move(sym), 0.0};
    double clipped = 0.0;
    Eigen::VectorXd kept = values;
    for (Eigen::Index k = 0; k < kept.size(); ++k)
        if (kept(k) < 0.0) {
            clipped -= kept(k);
            kept(k) = 0.0;
        }
    Eigen::MatrixXd rebuilt = eig.eigenvectors() * kept.asDiagonal() * eig.eigenvectors().transpose();
    rebuilt = 0.5 * (rebuilt + rebuilt.transpose()).eval();
    return {std::move(rebuilt), clipped};
}

CovarianceField psd_repair(const CovarianceField& field, double* clipped_mass) {
    PsdRepair r = psd_repair(field.table);
    if (clipped_mass) *clipped_mass = r.clipped_mass;
    return {field.grid, std::move(r.matrix)};
}

CorrelationField psd_repair(const CorrelationField& field, double* clipped_mass) {
    PsdRepair r = psd_repair(field.table);
    if (clipped_mass) *clipped_mass = r.clipped_mass;
    if (r.clipped_mass > 0.0) {
        Eigen::VectorXd d = r.matrix.diagonal().cwiseMax(0.0).cwiseSqrt();
        for (Eigen::Index a = 0; a < d.size(); ++a)
            if (!(d(a) > 0.0)) fail(ErrorKind::Numerical, "psd_repair: correlation lost its diagonal");
        r.matrix.array() /= (d * d.transpose()).array();
    }
    clip_correlation(r.matrix);
    return {field.grid, std::move(r.matrix)};
}

CovarianceSplit split_covariance(const CovarianceField& field) {
    const Eigen::Index m = field.table.rows();
    Eigen::VectorXd sigma(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const double v = field.table(a, a);
        if (!(v > 0.0)) {
            std::ostringstream msg;
            msg << "non-positive variance " << v << " at grid point " << a;
            fail(ErrorKind::Degenerate, msg.str());
        }
        sigma(a) = std::sqrt(v);
    }
    Eigen::MatrixXd r = field.table.array() / (sigma * sigma.transpose()).array();
    r = 0.5 * (r + r.transpose()).eval();
    clip_correlation(r);
    return {std::move(sigma), CorrelationField{field.grid, std::move(r)}};
}

}  // namespace scb
