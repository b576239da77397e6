#include "scb/bands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scb/errors.hpp"
#include "scb/parallel.hpp"
#include "scb/rng.hpp"

namespace scb {

namespace {

std::vector<double> bandwidth_vector(const Bandwidth& h) {
    if (h.dim() == 1) return {h[0]};
    return {h[0], h[1]};
}

void require_two_curves(const FunctionalSample& sample) {
    validate_sample(sample);
    if (sample.n() < 2) fail(ErrorKind::Degenerate, "n >= 2 required");
}

Eigen::VectorXd checked_sigma(const Eigen::VectorXd& variance, const Grid& grid) {
    for (Eigen::Index a = 0; a < variance.size(); ++a)
        if (!(variance(a) > 0.0))
            fail(ErrorKind::Degenerate, "zero variance at grid point " + std::to_string(a) + " (x=" +
                                            std::to_string(grid.point(static_cast<std::size_t>(a))[0]) + ")");
    return variance.cwiseSqrt();
}

BandResult assemble(const DiscretizedCurve& center, const Eigen::VectorXd& scale, double threshold, double gamma,
                    BandMethod method) {
    BandResult band;
    band.center = center;
    band.half_width = DiscretizedCurve(center.grid, threshold * scale);
    band.threshold = threshold;
    band.level = 1.0 - gamma;
    band.method = method;
    return band;
}

}  // namespace

std::string to_string(BandMethod method) {
    switch (method) {
        case BandMethod::Normal: return "normal";
        case BandMethod::Bootstrap: return "bootstrap";
        case BandMethod::TwoSample: return "two-sample";
        case BandMethod::Prediction: return "prediction";
        case BandMethod::Residual: return "residual";
    }
    return "unknown";
}

double band_excess(const BandResult& band, const Eigen::VectorXd& curve) {
    require(curve.size() == band.center.values.size(), "curve length must match the band grid");
    double worst = 0.0;
    for (Eigen::Index a = 0; a < curve.size(); ++a) {
        const double dev = std::abs(curve(a) - band.center.values(a));
        const double hw = band.half_width.values(a);
        if (hw > 0.0) worst = std::max(worst, dev / hw);
        else if (dev > 0.0) return std::numeric_limits<double>::infinity();
    }
    return worst;
}

NormalScbState prepare_normal_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h,
                                  const Kernel& kernel, const ScbOptions& options) {
    require_two_curves(sample);
    NormalScbState state;
    state.n = sample.n();
    state.fit = fit_mean(sample, eval, h, kernel);
    state.sigma = checked_sigma(empirical_variance(state.fit.curve_smooths, state.fit.mean.values), eval);
    const CorrelationField raw = empirical_correlation(eval, state.fit.curve_smooths, state.fit.mean.values, state.sigma);
    state.shrinkage_lambda = resolve_shrinkage(options.shrinkage, state.fit.curve_smooths);
    state.correlation = shrink_correlation(raw, state.shrinkage_lambda);

    SupQuantileRequest request;
    request.correlation = state.correlation;
    request.gamma = options.gamma;
    request.paths = options.paths ? options.paths : default_path_count(sample.p());
    request.seed = options.seed;
    request.threads = options.threads;
    state.sup = sample_sup_norms(request);
    state.provenance = {bandwidth_vector(h), kernel.name(), request.paths, options.seed};
    return state;
}

BandResult NormalScbState::band(double gamma) const {
    const double c = sup.quantile(gamma);
    BandResult b = assemble(fit.mean, sigma / std::sqrt(static_cast<double>(n)), c, gamma, BandMethod::Normal);
    b.provenance = provenance;
    b.shrinkage_lambda = shrinkage_lambda;
    b.clipped_mass = sup.clipped_mass();
    b.threshold_standard_error = sup.standard_error(gamma);
    return b;
}

BandResult NormalScbState::prediction(double gamma) const {
    const double c = sup.quantile(gamma);
    BandResult b = assemble(fit.mean, sigma, c, gamma, BandMethod::Prediction);
    b.provenance = provenance;
    b.shrinkage_lambda = shrinkage_lambda;
    b.clipped_mass = sup.clipped_mass();
    b.threshold_standard_error = sup.standard_error(gamma);
    return b;
}

BandResult normal_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h, const Kernel& kernel,
                      const ScbOptions& options) {
    return prepare_normal_scb(sample, eval, h, kernel, options).band(options.gamma);
}

BandResult bootstrap_scb(const FunctionalSample& sample, const EvalGrid& eval, const Bandwidth& h,
                         const Kernel& kernel, const BootstrapOptions& options) {
    require_two_curves(sample);
    require(options.gamma > 0.0 && options.gamma < 1.0, "level gamma must lie in (0,1)");
    require(options.resamples >= 1, "at least one bootstrap resample is required");
    const MeanFit fit = fit_mean(sample, eval, h, kernel);
    const Eigen::VectorXd sigma = checked_sigma(empirical_variance(fit.curve_smooths, fit.mean.values), eval);
    const auto n = static_cast<Eigen::Index>(sample.n());
    const Eigen::Index m = fit.curve_smooths.cols();
    const double root_n = std::sqrt(static_cast<double>(n));

    std::vector<double> z(options.resamples);
    parallel_for(options.resamples, options.threads, [&](std::size_t b) {
        const std::uint64_t seed_b = derive_seed(options.seed, StreamTag::Bootstrap, b);
        Eigen::MatrixXd resample(n, m);
        for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
            RandomStream stream(seed_b, attempt);
            for (Eigen::Index i = 0; i < n; ++i)
                resample.row(i) = fit.curve_smooths.row(static_cast<Eigen::Index>(stream.below(static_cast<std::uint64_t>(n))));
            const Eigen::VectorXd mean = resample.colwise().mean().transpose();
            const Eigen::VectorXd sd = empirical_variance(resample, mean).cwiseSqrt();
            if (!(sd.minCoeff() > 0.0)) continue;
            z[b] = root_n * ((mean - fit.mean.values).cwiseAbs().array() / sd.array()).maxCoeff();
            return;
        }
        fail(ErrorKind::Degenerate, "bootstrap resample " + std::to_string(b) + " has zero spread after 100 attempts");
    });
    const SupNormSample dist(std::move(z), 0.0);
    const double c = dist.quantile(options.gamma);
    BandResult band = assemble(fit.mean, sigma / root_n, c, options.gamma, BandMethod::Bootstrap);
    band.provenance = {bandwidth_vector(h), kernel.name(), options.resamples, options.seed};
    band.threshold_standard_error = dist.standard_error(options.gamma);
    return band;
}

TwoSampleResult two_sample_scb(const FunctionalSample& a, const FunctionalSample& b, const EvalGrid& eval,
                               const Bandwidth& h_a, const Bandwidth& h_b, const Kernel& kernel,
                               const ScbOptions& options) {
    require_two_curves(a);
    require_two_curves(b);
    if (!(a.design.grid() == b.design.grid())) fail(ErrorKind::InvalidArgument, "two-sample comparison needs a common design grid");
    const MeanFit fa = fit_mean(a, eval, h_a, kernel);
    const MeanFit fb = fit_mean(b, eval, h_b, kernel);
    double lambda_a = 0.0;
    double lambda_b = 0.0;
    const Eigen::MatrixXd ra = shrunk_covariance(fa.curve_smooths, options.shrinkage, &lambda_a);
    const Eigen::MatrixXd rb = shrunk_covariance(fb.curve_smooths, options.shrinkage, &lambda_b);
    const CovarianceField diff{eval, ra / static_cast<double>(a.n()) + rb / static_cast<double>(b.n())};
    const CovarianceSplit split = split_covariance(diff);

    SupQuantileRequest request;
    request.correlation = split.correlation;
    request.gamma = options.gamma;
    request.paths = options.paths ? options.paths : default_path_count(a.p());
    request.seed = options.seed;
    request.threads = options.threads;
    const SupNormSample sup = sample_sup_norms(request);
    const double c = sup.quantile(options.gamma);

    TwoSampleResult out;
    const DiscretizedCurve center(eval, fa.mean.values - fb.mean.values);
    out.band = assemble(center, split.sigma, c, options.gamma, BandMethod::TwoSample);
    out.band.provenance = {{h_a[0], h_b[0]}, kernel.name(), request.paths, options.seed};
    out.band.shrinkage_lambda = 0.5 * (lambda_a + lambda_b);
    out.band.clipped_mass = sup.clipped_mass();
    out.band.threshold_standard_error = sup.standard_error(options.gamma);
    out.statistic = (center.values.cwiseAbs().array() / split.sigma.array()).maxCoeff();
    out.reject = !covers(out.band, Eigen::VectorXd::Zero(center.values.size()));
    return out;
}

BandResult prediction_band(const FunctionalSample& train, const EvalGrid& eval, const Bandwidth& h,
                           const Kernel& kernel, const ScbOptions& options) {
    return prepare_normal_scb(train, eval, h, kernel, options).prediction(options.gamma);
}

double prediction_coverage(const BandResult& band, const FunctionalSample& test, const Bandwidth& h,
                           const Kernel& kernel) {
    validate_sample(test);
    const Eigen::MatrixXd w = weight_matrix(test.design.grid(), band.center.grid, h, kernel);
    const Eigen::MatrixXd smooth = test.values * w.transpose();
    std::size_t inside = 0;
    for (Eigen::Index i = 0; i < smooth.rows(); ++i)
        if (covers(band, smooth.row(i).transpose())) ++inside;
    return static_cast<double>(inside) / static_cast<double>(test.n());
}

SplitHalfResult split_half_bandwidth(const FunctionalSample& train, const EvalGrid& eval,
                                     std::vector<double> candidates, const Kernel& kernel,
                                     const ScbOptions& options) {
    validate_sample(train);
    if (candidates.empty()) fail(ErrorKind::InvalidArgument, "empty bandwidth candidate list");
    if (train.n() < 4) fail(ErrorKind::Degenerate, "split-half selection needs n >= 4 training curves");
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::vector<std::size_t> order(train.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream stream(derive_seed(options.seed, StreamTag::Split, 0), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[stream.below(i + 1)]);
    const std::size_t half = train.n() / 2;
    const FunctionalSample fit_half = select_rows(train, std::span(order).first(half));
    const FunctionalSample check_half = select_rows(train, std::span(order).subspan(half));

    SplitHalfResult out;
    out.candidates = candidates;
    out.coverages.assign(candidates.size(), std::numeric_limits<double>::quiet_NaN());
    std::ptrdiff_t best = -1;
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        const Bandwidth h = eval.dim() == 1 ? Bandwidth(candidates[c]) : Bandwidth(candidates[c], candidates[c]);
        try {
            const BandResult band = prediction_band(fit_half, eval, h, kernel, options);
            out.coverages[c] = prediction_coverage(band, check_half, h, kernel);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::IllPosed && e.kind() != ErrorKind::Degenerate) throw;
            out.warnings.push_back("skipping candidate h=" + std::to_string(candidates[c]) + ": " + e.what());
            continue;
        }
        const double gap = std::abs(out.coverages[c] - (1.0 - options.gamma));
        if (gap < best_gap - 1e-12) {
            best_gap = gap;
            best = static_cast<std::ptrdiff_t>(c);
        }
    }
    if (best < 0) fail(ErrorKind::IllPosed, "no bandwidth candidate produced a usable band");
    const double hb = candidates[static_cast<std::size_t>(best)];
    out.bandwidth = eval.dim() == 1 ? Bandwidth(hb) : Bandwidth(hb, hb);
    return out;
}

}  // namespace scb
