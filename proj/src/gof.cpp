#include "scb/gof.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <Eigen/SVD>

#include "scb/errors.hpp"

namespace scb {

namespace {

constexpr double kGramTolerance = 1e-6;
constexpr double kMaxCondition = 1e10;

std::size_t default_quadrature_points(int dim) { return dim == 1 ? 400 : 40; }

// Orthonormal shifted Legendre polynomial of degree k on [0,1].
double shifted_legendre(int k, double x) {
    const double t = 2.0 * x - 1.0;
    double prev = 1.0;
    double cur = t;
    if (k == 0) return 1.0;
    for (int j = 1; j < k; ++j) {
        const double next = ((2.0 * j + 1.0) * t * cur - j * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    return std::sqrt(2.0 * k + 1.0) * cur;
}

std::string point_label(const Point& x, int dim) {
    std::ostringstream os;
    os << "x=" << x[0];
    if (dim == 2) os << "," << x[1];
    return os.str();
}

}  // namespace

namespace {

// Equispaced product rule; Simpson weights when `simpson` is set (q must be odd).
Quadrature product_quadrature(const std::vector<Density>& densities, std::size_t q, bool simpson) {
    std::vector<Eigen::VectorXd> axis_weights;
    for (const Density& f : densities) {
        Eigen::VectorXd w(static_cast<Eigen::Index>(q));
        for (std::size_t k = 0; k < q; ++k) {
            const double t = static_cast<double>(k) / static_cast<double>(q - 1);
            const bool end = k == 0 || k + 1 == q;
            const double rule = simpson ? (end ? 1.0 : (k % 2 ? 4.0 : 2.0)) / 3.0 : (end ? 0.5 : 1.0);
            w(static_cast<Eigen::Index>(k)) = rule / static_cast<double>(q - 1) * f.pdf(t);
        }
        axis_weights.push_back(std::move(w));
    }
    if (densities.size() == 1) return {Grid::equispaced(q), axis_weights[0]};
    Eigen::VectorXd w(static_cast<Eigen::Index>(q * q));
    for (std::size_t a = 0; a < q; ++a)
        for (std::size_t b = 0; b < q; ++b)
            w(static_cast<Eigen::Index>(a * q + b)) =
                axis_weights[0](static_cast<Eigen::Index>(a)) * axis_weights[1](static_cast<Eigen::Index>(b));
    return {Grid::equispaced(q, q), w};
}

}  // namespace

Quadrature density_quadrature(const std::vector<Density>& densities, std::size_t points_per_axis) {
    require(densities.size() == 1 || densities.size() == 2, "quadrature needs one or two densities");
    require(points_per_axis >= 2, "quadrature needs at least two nodes per axis");
    return product_quadrature(densities, points_per_axis, false);
}

BasisModel::BasisModel(std::vector<BasisFunction> functions, std::vector<Density> densities,
                       std::size_t quadrature_points)
    : raw_(std::move(functions)), densities_(std::move(densities)) {
    require(!raw_.empty(), "a basis model needs at least one function");
    require(densities_.size() == 1 || densities_.size() == 2, "basis dimension must be 1 or 2");
    for (const auto& fn : raw_) require(static_cast<bool>(fn), "basis function is empty");
    quadrature_points_ = quadrature_points ? quadrature_points : default_quadrature_points(dim());

    // Simpson's rule keeps the quadrature error of smooth bases well below the
    // orthogonality tolerance.
    const Quadrature quad = product_quadrature(densities_, quadrature_points_ | 1u, true);
    const auto count = static_cast<Eigen::Index>(raw_.size());
    Eigen::MatrixXd values(static_cast<Eigen::Index>(quad.nodes.size()), count);
    for (std::size_t q = 0; q < quad.nodes.size(); ++q)
        values.row(static_cast<Eigen::Index>(q)) = evaluate_raw(quad.nodes.point(q)).transpose();
    if (!values.allFinite()) fail(ErrorKind::InvalidArgument, "basis function is not finite on [0,1]");
    raw_gram_ = values.transpose() * quad.weights.asDiagonal() * values;

    for (Eigen::Index k = 0; k < count; ++k)
        if (!(raw_gram_(k, k) > 0.0))
            fail(ErrorKind::Numerical, "basis function " + std::to_string(k + 1) + " has zero norm");
    double worst = 0.0;
    for (Eigen::Index k = 0; k < count; ++k)
        for (Eigen::Index l = 0; l < k; ++l)
            worst = std::max(worst, std::abs(raw_gram_(k, l)) / std::sqrt(raw_gram_(k, k) * raw_gram_(l, l)));

    if (worst <= kGramTolerance) {
        transform_ = raw_gram_.diagonal().cwiseSqrt().cwiseInverse().asDiagonal();
        return;
    }
    const Eigen::LLT<Eigen::MatrixXd> chol(raw_gram_);
    if (chol.info() != Eigen::Success) fail(ErrorKind::Numerical, "basis functions are linearly dependent");
    const Eigen::MatrixXd lower = chol.matrixL();
    transform_ = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(count, count));
    std::ostringstream msg;
    msg << "basis is not orthogonal under the design density (max relative inner product " << worst
        << "); orthonormalized by Gram-Schmidt";
    warnings_.push_back(msg.str());
}

BasisModel BasisModel::polynomial(int degree, int dim) {
    require(dim == 1 || dim == 2, "polynomial basis dimension must be 1 or 2");
    return polynomial(degree, std::vector<Density>(static_cast<std::size_t>(dim), Density::uniform()));
}

BasisModel BasisModel::polynomial(int degree, std::vector<Density> densities) {
    require(degree >= 0, "polynomial degree must be >= 0");
    std::vector<BasisFunction> fns;
    if (densities.size() == 1) {
        for (int k = 0; k <= degree; ++k) fns.emplace_back([k](const Point& x) { return shifted_legendre(k, x[0]); });
    } else {
        for (int total = 0; total <= degree; ++total)
            for (int a = total; a >= 0; --a) {
                const int b = total - a;
                fns.emplace_back(
                    [a, b](const Point& x) { return shifted_legendre(a, x[0]) * shifted_legendre(b, x[1]); });
            }
    }
    return BasisModel(std::move(fns), std::move(densities));
}

BasisModel BasisModel::tabulated(std::vector<double> nodes, const Eigen::MatrixXd& values, Density density) {
    require(nodes.size() >= 2, "tabulated basis needs at least two nodes");
    require(static_cast<Eigen::Index>(nodes.size()) == values.rows(), "tabulated basis: one row per node required");
    require(values.cols() >= 1, "tabulated basis needs at least one column");
    for (std::size_t k = 1; k < nodes.size(); ++k)
        require(nodes[k] > nodes[k - 1], "tabulated basis nodes must be strictly increasing");
    const auto shared_nodes = std::make_shared<const std::vector<double>>(std::move(nodes));
    std::vector<BasisFunction> fns;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
        auto column = std::make_shared<const std::vector<double>>(values.col(c).data(),
                                                                  values.col(c).data() + values.rows());
        fns.emplace_back([shared_nodes, column](const Point& x) {
            const auto& t = *shared_nodes;
            const auto& v = *column;
            if (x[0] <= t.front()) return v.front();
            if (x[0] >= t.back()) return v.back();
            const auto hi = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), x[0]) - t.begin());
            const std::size_t lo = hi - 1;
            const double s = (x[0] - t[lo]) / (t[hi] - t[lo]);
            return (1.0 - s) * v[lo] + s * v[hi];
        });
    }
    return BasisModel(std::move(fns), {std::move(density)});
}

Eigen::VectorXd BasisModel::evaluate_raw(const Point& x) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(raw_.size()));
    for (std::size_t k = 0; k < raw_.size(); ++k) out(static_cast<Eigen::Index>(k)) = raw_[k](x);
    return out;
}

Eigen::VectorXd BasisModel::evaluate(const Point& x) const { return transform_ * evaluate_raw(x); }

Eigen::MatrixXd BasisModel::design_matrix(const Grid& grid) const {
    require(grid.dim() == dim(), "grid dimension does not match the basis");
    Eigen::MatrixXd raw(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(raw_.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) raw.row(static_cast<Eigen::Index>(j)) = evaluate_raw(grid.point(j)).transpose();
    return raw * transform_.transpose();
}

namespace {

Eigen::JacobiSVD<Eigen::MatrixXd> checked_svd(const Eigen::MatrixXd& phi) {
    require(phi.rows() >= phi.cols(), "least squares needs at least as many design points as basis functions");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const double smallest = s(s.size() - 1);
    if (!(smallest > 0.0) || s(0) / smallest > kMaxCondition)
        fail(ErrorKind::Numerical, "basis design matrix is rank deficient (condition number above 1e10)");
    return svd;
}

}  // namespace

Eigen::MatrixXd projection_matrix(const Eigen::MatrixXd& phi) {
    const auto svd = checked_svd(phi);
    return svd.matrixU() * svd.matrixU().transpose();
}

LsFit ls_fit(const Eigen::VectorXd& ybar, const Grid& design, const BasisModel& model) {
    require(static_cast<std::size_t>(ybar.size()) == design.size(), "averaged curve length must match the design");
    const Eigen::MatrixXd phi = model.design_matrix(design);
    const auto svd = checked_svd(phi);
    LsFit fit;
    fit.coefficients = svd.solve(ybar);
    fit.fitted = phi * fit.coefficients;
    fit.projection = svd.matrixU() * svd.matrixU().transpose();
    return fit;
}

LsFit ls_fit(const FunctionalSample& sample, const BasisModel& model) {
    validate_sample(sample);
    return ls_fit(sample.column_means(), sample.design.grid(), model);
}

Eigen::VectorXd residual_process(const Eigen::VectorXd& ybar, const Eigen::MatrixXd& projection,
                                 const Eigen::MatrixXd& weights) {
    return weights * (ybar - projection * ybar);
}

DiscretizedCurve residual_process(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                                  const Bandwidth& h, const Kernel& kernel) {
    const LsFit fit = ls_fit(sample, model);
    const Eigen::MatrixXd w = weight_matrix(sample.design.grid(), eval, h, kernel);
    return {eval, w * (sample.column_means() - fit.fitted)};
}

Eigen::MatrixXd residual_covariance(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& projection,
                                    const Eigen::MatrixXd& data_covariance) {
    const Eigen::MatrixXd m = weights - weights * projection;
    const Eigen::MatrixXd g = m * data_covariance * m.transpose();
    return 0.5 * (g + g.transpose());
}

CovarianceField gamma_n_plugin(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                               const Bandwidth& h, const Kernel& kernel, const ShrinkageSpec& shrinkage,
                               double* lambda_out) {
    validate_sample(sample);
    if (sample.n() < 2) fail(ErrorKind::Degenerate, "n >= 2 required");
    const LsFit fit = ls_fit(sample, model);
    const Eigen::MatrixXd w = weight_matrix(sample.design.grid(), eval, h, kernel);
    const CovarianceField data = empirical_data_covariance(sample, shrinkage, lambda_out);
    return {eval, residual_covariance(w, fit.projection, data.table)};
}

CovarianceField limit_gamma(const CovarianceFunction& covariance, const BasisModel& model, const EvalGrid& eval,
                            std::size_t points_per_axis) {
    require(static_cast<bool>(covariance), "covariance function is empty");
    require(eval.dim() == model.dim(), "eval grid dimension does not match the basis");
    const Quadrature quad =
        density_quadrature(model.densities(), points_per_axis ? points_per_axis : default_quadrature_points(model.dim()));
    const auto q = static_cast<Eigen::Index>(quad.nodes.size());
    const auto m = static_cast<Eigen::Index>(eval.size());

    Eigen::MatrixXd r_qq(q, q);
    for (Eigen::Index a = 0; a < q; ++a)
        for (Eigen::Index b = 0; b <= a; ++b)
            r_qq(a, b) = r_qq(b, a) = covariance(quad.nodes.point(static_cast<std::size_t>(a)),
                                                  quad.nodes.point(static_cast<std::size_t>(b)));
    Eigen::MatrixXd r_xq(m, q);
    Eigen::MatrixXd r_xx(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const Point x = eval.point(static_cast<std::size_t>(a));
        for (Eigen::Index b = 0; b < q; ++b) r_xq(a, b) = covariance(x, quad.nodes.point(static_cast<std::size_t>(b)));
        for (Eigen::Index b = 0; b <= a; ++b) r_xx(a, b) = r_xx(b, a) = covariance(x, eval.point(static_cast<std::size_t>(b)));
    }

    const Eigen::MatrixXd phi_q = model.design_matrix(quad.nodes);
    const Eigen::MatrixXd phi_x = model.design_matrix(eval);
    const Eigen::MatrixXd weighted_phi = quad.weights.asDiagonal() * phi_q;
    const Eigen::MatrixXd double_integral = weighted_phi.transpose() * r_qq * weighted_phi;  // L x L
    const Eigen::MatrixXd single_integral = r_xq * weighted_phi;                              // m x L

    const Eigen::MatrixXd cross = single_integral * phi_x.transpose();
    Eigen::MatrixXd gamma = r_xx + phi_x * double_integral * phi_x.transpose() - cross - cross.transpose();
    gamma = 0.5 * (gamma + gamma.transpose());
    return {eval, gamma};
}

GofState prepare_gof(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                     const Bandwidth& h, const Kernel& kernel, const GofOptions& options) {
    validate_sample(sample);
    if (sample.n() < 2) fail(ErrorKind::Degenerate, "n >= 2 required");
    require(model.dim() == sample.design.dim(), "basis dimension does not match the design");

    GofState state;
    state.n = sample.n();
    state.warnings = model.warnings();
    const LsFit fit = ls_fit(sample, model);
    const Eigen::MatrixXd w = weight_matrix(sample.design.grid(), eval, h, kernel);
    state.residual = DiscretizedCurve(eval, residual_process(sample.column_means(), fit.projection, w));

    const CovarianceField data = empirical_data_covariance(sample, options.shrinkage, &state.shrinkage_lambda);
    const Eigen::MatrixXd gamma = residual_covariance(w, fit.projection, data.table);
    const double scale = data.table.diagonal().mean();
    for (Eigen::Index a = 0; a < gamma.rows(); ++a)
        if (!(gamma(a, a) > 1e-12 * scale))
            fail(ErrorKind::Degenerate, "residual process has zero variance at " +
                                            point_label(eval.point(static_cast<std::size_t>(a)), eval.dim()));
    const CovarianceSplit split = split_covariance({eval, gamma});
    state.sigma = split.sigma;
    state.correlation = split.correlation;

    SupQuantileRequest request;
    request.correlation = state.correlation;
    request.gamma = options.alpha;
    request.paths = options.paths ? options.paths : default_path_count(sample.p());
    request.seed = options.seed;
    request.threads = options.threads;
    state.sup = sample_sup_norms(request);

    state.statistic = std::sqrt(static_cast<double>(state.n)) *
                      (state.residual.values.cwiseAbs().array() / state.sigma.array()).maxCoeff();
    state.provenance.bandwidth = h.dim() == 1 ? std::vector<double>{h[0]} : std::vector<double>{h[0], h[1]};
    state.provenance.kernel = kernel.name();
    state.provenance.paths = request.paths;
    state.provenance.seed = options.seed;
    return state;
}

GofReport GofState::report(double alpha) const {
    GofReport out;
    out.alpha = alpha;
    out.statistic = statistic;
    out.threshold = sup.quantile(alpha);
    out.reject = statistic > out.threshold;
    out.band.center = residual;
    out.band.half_width = DiscretizedCurve(residual.grid, out.threshold * sigma / std::sqrt(static_cast<double>(n)));
    out.band.threshold = out.threshold;
    out.band.level = 1.0 - alpha;
    out.band.method = BandMethod::Residual;
    out.band.provenance = provenance;
    out.band.shrinkage_lambda = shrinkage_lambda;
    out.band.clipped_mass = sup.clipped_mass();
    out.band.threshold_standard_error = sup.standard_error(alpha);
    out.shrinkage_lambda = shrinkage_lambda;
    out.clipped_mass = sup.clipped_mass();
    out.warnings = warnings;
    return out;
}

GofReport scb_gof_test(const FunctionalSample& sample, const BasisModel& model, const EvalGrid& eval,
                       const Bandwidth& h, const Kernel& kernel, const GofOptions& options) {
    return prepare_gof(sample, model, eval, h, kernel, options).report(options.alpha);
}

}  // namespace scb
