#include "scb/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "scb/errors.hpp"

namespace scb {

namespace {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
        else comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// 1 / (Phi(1) - Phi(-1)) / sqrt(2 pi)
const double kTruncGaussNorm = 1.0 / (std::erf(1.0 / std::numbers::sqrt2) * std::sqrt(2.0 * std::numbers::pi));

/// Half-open index range [first, last) of axis points with |a_j - x| < h.
std::pair<std::size_t, std::size_t> window(std::span<const double> axis, double x, double h) {
    const auto first = std::upper_bound(axis.begin(), axis.end(), x - h);
    const auto last = std::lower_bound(first, axis.end(), x + h);
    return {static_cast<std::size_t>(first - axis.begin()), static_cast<std::size_t>(last - axis.begin())};
}

[[noreturn]] void ill_posed(const Point& x, int dim, const Bandwidth& h, std::size_t active, const char* why) {
    std::ostringstream msg;
    msg << "bandwidth h=" << h[0];
    if (dim == 2) msg << "," << h[1];
    msg << " is ill-posed at x=" << x[0];
    if (dim == 2) msg << "," << x[1];
    msg << ": " << active << " kernel-active design point(s)" << why;
    fail(ErrorKind::IllPosed, msg.str());
}

WeightVector weights_1d(const Grid& design, const Point& x, const Bandwidth& h, const Kernel& kernel) {
    const auto axis = design.axis(0);
    const double ph = static_cast<double>(design.size()) * h[0];
    const auto [first, last] = window(axis, x[0], h[0]);

    WeightVector out;
    out.x = x;
    std::vector<double> kval;
    CompensatedSum s0, s1, s2;
    for (std::size_t j = first; j < last; ++j) {
        const double d = axis[j] - x[0];
        const double k = kernel(d / h[0]);
        if (k <= 0.0) continue;
        out.index.push_back(j);
        kval.push_back(k);
        s0.add(k / ph);
        s1.add(d * k / ph);
        s2.add(d * d * k / ph);
    }
    if (out.index.size() < 2) ill_posed(x, 1, h, out.index.size(), ", need at least 2");
    const double S1 = s1.value();
    const double S2 = s2.value();
    const double denom = s0.value() * S2 - S1 * S1;
    if (!(denom > 1e-12 * s0.value() * S2)) ill_posed(x, 1, h, out.index.size(), ", local design is singular");

    out.weight.resize(out.index.size());
    CompensatedSum total;
    for (std::size_t a = 0; a < out.index.size(); ++a) {
        const double d = axis[out.index[a]] - x[0];
        out.weight[a] = (S2 - d * S1) * kval[a] / ph;
        total.add(out.weight[a]);
    }
    const double t = total.value();
    for (double& w : out.weight) w /= t;
    return out;
}

WeightVector weights_2d(const Grid& design, const Point& x, const Bandwidth& h, const Kernel& kernel) {
    const auto ax1 = design.axis(0);
    const auto ax2 = design.axis(1);
    const std::size_t p2 = ax2.size();
    const double phh = static_cast<double>(design.size()) * h[0] * h[1];
    const auto [f1, l1] = window(ax1, x[0], h[0]);
    const auto [f2, l2] = window(ax2, x[1], h[1]);

    WeightVector out;
    out.x = x;
    std::vector<double> kval;
    // s_kl for (k,l) in {00,01,02,11,12,22}
    CompensatedSum s00, s01, s02, s11, s12, s22;
    for (std::size_t j1 = f1; j1 < l1; ++j1) {
        const double d1 = ax1[j1] - x[0];
        const double k1 = kernel(d1 / h[0]);
        if (k1 <= 0.0) continue;
        for (std::size_t j2 = f2; j2 < l2; ++j2) {
            const double d2 = ax2[j2] - x[1];
            const double k = k1 * kernel(d2 / h[1]);
            if (k <= 0.0) continue;
            out.index.push_back(j1 * p2 + j2);
            kval.push_back(k);
            const double kw = k / phh;
            s00.add(kw);
            s01.add(d1 * kw);
            s02.add(d2 * kw);
            s11.add(d1 * d1 * kw);
            s12.add(d1 * d2 * kw);
            s22.add(d2 * d2 * kw);
        }
    }
    if (out.index.size() < 3) ill_posed(x, 2, h, out.index.size(), ", need at least 3");
    const double S00 = s00.value(), S01 = s01.value(), S02 = s02.value();
    const double S11 = s11.value(), S12 = s12.value(), S22 = s22.value();
    const double c0 = S11 * S22 - S12 * S12;
    const double c1 = S02 * S12 - S01 * S22;
    const double c2 = S01 * S12 - S02 * S11;
    const double det = S00 * c0 + S01 * c1 + S02 * c2;
    if (!(det > 1e-10 * S00 * S11 * S22)) ill_posed(x, 2, h, out.index.size(), ", active points are collinear");

    out.weight.resize(out.index.size());
    CompensatedSum total;
    for (std::size_t a = 0; a < out.index.size(); ++a) {
        const Point xj = design.point(out.index[a]);
        out.weight[a] = (c0 + c1 * (xj[0] - x[0]) + c2 * (xj[1] - x[1])) * kval[a] / phh;
        total.add(out.weight[a]);
    }
    const double t = total.value();
    for (double& w : out.weight) w /= t;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Kernel Kernel::from_name(const std::string& name) {
    if (name == "epanechnikov" || name == "epa") return epanechnikov();
    if (name == "gauss" || name == "gaussian" || name == "truncated-gaussian") return truncated_gaussian();
    fail(ErrorKind::InvalidArgument, "unknown kernel '" + name + "'");
}

std::string Kernel::name() const {
    return type_ == Type::Epanechnikov ? "epanechnikov" : "truncated-gaussian";
}

double Kernel::operator()(double u) const noexcept {
    const double a = std::abs(u);
    if (!(a < 1.0)) return 0.0;
    if (type_ == Type::Epanechnikov) return 0.75 * (1.0 - u * u);
    return kTruncGaussNorm * std::exp(-0.5 * u * u);
}

Bandwidth::Bandwidth(double h) : h_{h, h}, dim_(1) {
    if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorKind::InvalidArgument, "bandwidth must be positive");
}

Bandwidth::Bandwidth(double h1, double h2) : h_{h1, h2}, dim_(2) {
    if (!(h1 > 0.0) || !(h2 > 0.0) || !std::isfinite(h1) || !std::isfinite(h2))
        fail(ErrorKind::InvalidArgument, "bandwidth must be positive");
}

WeightVector local_linear_weights(const Grid& design, const Point& x, const Bandwidth& h, const Kernel& kernel) {
    require(design.dim() == 1 || design.dim() == 2, "design grid must have dimension 1 or 2");
    require(h.dim() == design.dim() || h.dim() == 1, "bandwidth dimension does not match the design");
    if (design.dim() == 1) return weights_1d(design, x, h, kernel);
    const Bandwidth hh = h.dim() == 2 ? h : Bandwidth(h[0], h[0]);
    return weights_2d(design, x, hh, kernel);
}

Eigen::MatrixXd weight_matrix(const Grid& design, const Grid& eval, const Bandwidth& h, const Kernel& kernel) {
    require(design.dim() == eval.dim(), "evaluation grid dimension does not match the design");
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eval.size()),
                                              static_cast<Eigen::Index>(design.size()));
    for (std::size_t a = 0; a < eval.size(); ++a) {
        const WeightVector wv = local_linear_weights(design, eval.point(a), h, kernel);
        for (std::size_t k = 0; k < wv.index.size(); ++k)
            w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(wv.index[k])) = wv.weight[k];
    }
    return w;
}

bool bandwidth_is_well_posed(const Grid& design, const Grid& eval, const Bandwidth& h, const Kernel& kernel) {
    try {
        for (std::size_t a = 0; a < eval.size(); ++a) local_linear_weights(design, eval.point(a), h, kernel);
        return true;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IllPosed) return false;
        throw;
    }
}

DiscretizedCurve smooth_curve(std::span<const double> row, const DesignGrid& design, const EvalGrid& eval,
                              const Bandwidth& h, const Kernel& kernel) {
    if (row.size() != design.size()) fail(ErrorKind::InvalidArgument, "row length must equal the design size");
    Eigen::VectorXd out(static_cast<Eigen::Index>(eval.size()));
    for (std::size_t a = 0; a < eval.size(); ++a) {
        const WeightVector wv = local_linear_weights(design.grid(), eval.point(a), h, kernel);
        double s = 0.0;
        for (std::size_t k = 0; k < wv.index.size(); ++k) s += wv.weight[k] * row[wv.index[k]];
        out(static_cast<Eigen::Index>(a)) = s;
    }
    return DiscretizedCurve(eval, std::move(out));
}

MeanFit fit_mean(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h, const Kernel& kernel) {
    validate_sample(sample);
    MeanFit fit;
    fit.weights = weight_matrix(sample.design.grid(), eval, h, kernel);
    fit.curve_smooths = sample.values * fit.weights.transpose();
    fit.mean = DiscretizedCurve(eval, fit.weights * sample.column_means());
    return fit;
}

CvResult cv_bandwidth(const FunctionalSample& sample, const Kernel& kernel, std::vector<double> candidates) {
    validate_sample(sample);
    if (candidates.empty()) fail(ErrorKind::InvalidArgument, "empty bandwidth candidate list");
    const auto n = static_cast<Eigen::Index>(sample.n());
    if (n < 2) fail(ErrorKind::Degenerate, "cross-validation needs n >= 2 curves");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    CvResult out;
    out.candidates = candidates;
    out.scores.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    const Grid& grid = sample.design.grid();
    std::ptrdiff_t best = -1;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Bandwidth h = grid.dim() == 1 ? Bandwidth(candidates[c]) : Bandwidth(candidates[c], candidates[c]);
        Eigen::MatrixXd S;
        try {
            S = smoother_matrix(grid, h, kernel);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::IllPosed) throw;
            out.warnings.push_back("skipping candidate h=" + std::to_string(candidates[c]) + ": " + e.what());
            continue;
        }
        // Smoother linearity: the fit without curve i is (sum_k S y_k - S y_i) / (n - 1).
        const Eigen::MatrixXd smoothed = sample.values * S.transpose();
        const Eigen::RowVectorXd total = smoothed.colwise().sum();
        double score = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::RowVectorXd loo = (total - smoothed.row(i)) / static_cast<double>(n - 1);
            score += (sample.values.row(i) - loo).squaredNorm();
        }
        out.scores[c] = score;
        if (best < 0 || score < out.scores[static_cast<std::size_t>(best)] * (1.0 - 1e-12)) best = static_cast<std::ptrdiff_t>(c);
    }
    if (best < 0) fail(ErrorKind::IllPosed, "every bandwidth candidate is ill-posed");
    const double hb = candidates[static_cast<std::size_t>(best)];
    out.bandwidth = grid.dim() == 1 ? Bandwidth(hb) : Bandwidth(hb, hb);
    return out;
}

}  // namespace scb
