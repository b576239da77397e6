#include "scb/simlab.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "scb/bands.hpp"
#include "scb/errors.hpp"
#include "scb/gauss_sup.hpp"
#include "scb/parallel.hpp"
#include "scb/plrt.hpp"
#include "scb/rng.hpp"

namespace scb {

namespace {

const double kOuRate = 20.0 * std::log(0.9);

double hump(double x) noexcept { return 0.2 * std::exp(-(x - 0.5) * (x - 0.5)); }
double hump_d1(double x) noexcept { return -2.0 * (x - 0.5) * hump(x); }
double hump_d2(double x) noexcept { return (4.0 * (x - 0.5) * (x - 0.5) - 2.0) * hump(x); }

// Quintic q(s) = sum c_k s^k on [x0, x1] with s = x - x0, matching value, slope and
// curvature at both ends.
struct Quintic {
    double x0 = 0.0;
    std::array<double, 6> c{};

    double operator()(double x) const noexcept {
        const double s = x - x0;
        double v = 0.0;
        for (int k = 5; k >= 0; --k) v = v * s + c[static_cast<std::size_t>(k)];
        return v;
    }
};

Quintic hermite_quintic(double x0, double x1, const std::array<double, 3>& left, const std::array<double, 3>& right) {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> rhs;
    const double d = x1 - x0;
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = 2.0;
    for (int k = 0; k < 6; ++k) {
        m(3, k) = std::pow(d, k);
        if (k >= 1) m(4, k) = k * std::pow(d, k - 1);
        if (k >= 2) m(5, k) = k * (k - 1) * std::pow(d, k - 2);
    }
    rhs << left[0], left[1], left[2], right[0], right[1], right[2];
    const Eigen::Matrix<double, 6, 1> c = m.fullPivLu().solve(rhs);
    Quintic q;
    q.x0 = x0;
    for (int k = 0; k < 6; ++k) q.c[static_cast<std::size_t>(k)] = c(k);
    return q;
}

const Quintic& left_connector() {
    static const Quintic q = hermite_quintic(0.4, 0.45, {0.0, 0.0, 0.0}, {hump(0.45), hump_d1(0.45), hump_d2(0.45)});
    return q;
}

const Quintic& right_connector() {
    static const Quintic q = hermite_quintic(0.55, 0.6, {hump(0.55), hump_d1(0.55), hump_d2(0.55)}, {0.0, 0.0, 0.0});
    return q;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_gaussian_ou(ModelId model) noexcept { return model != ModelId::M2; }

}  // namespace

std::string to_string(ModelId model) {
    switch (model) {
        case ModelId::M1: return "1";
        case ModelId::M2: return "2";
        case ModelId::M3H0: return "3-h0";
        case ModelId::M3Hn: return "3-hn";
    }
    return "unknown";
}

ModelId parse_model_id(const std::string& text) {
    std::string s = lower(text);
    if (!s.empty() && s.front() == 'm') s.erase(0, 1);
    if (s == "1") return ModelId::M1;
    if (s == "2") return ModelId::M2;
    if (s == "3-h0" || s == "3h0" || s == "3") return ModelId::M3H0;
    if (s == "3-hn" || s == "3hn") return ModelId::M3Hn;
    fail(ErrorKind::Parse, "unknown model id '" + text + "'");
}

double model1_mean(double x) noexcept { return x * x * x * (10.0 - 15.0 * x + 6.0 * x * x); }

double model2_mean(double x) noexcept { return std::sin(8.0 * std::numbers::pi * x) * std::exp(-3.0 * x); }

double bump(double x) noexcept {
    if (x <= 0.4 || x > 0.6) return 0.0;
    if (x <= 0.45) return left_connector()(x);
    if (x <= 0.55) return hump(x);
    return right_connector()(x);
}

double model3_mean(double x, std::size_t n, bool alternative) noexcept {
    if (!alternative) return x;
    const auto nn = static_cast<double>(n);
    return x + std::log(nn) / std::sqrt(nn) * bump(x);
}

double ou_covariance(double x, double y) noexcept { return 0.0625 * std::exp(kOuRate * std::abs(x - y)); }

double model2_covariance(double x, double y) noexcept {
    const double pi = std::numbers::pi;
    return std::sin(pi * x) * std::sin(pi * y) / 9.0 + 4.0 / 9.0 * (x - 0.5) * (y - 0.5);
}

ModelGenerator::ModelGenerator(ModelId model, std::size_t n, std::size_t p)
    : model_(model), n_(n), design_(make_uniform_design(p)) {
    require(n >= 1, "model generator needs n >= 1");
    if (!is_gaussian_ou(model)) return;
    const auto pp = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd r(pp, pp);
    for (Eigen::Index a = 0; a < pp; ++a)
        for (Eigen::Index b = 0; b < pp; ++b)
            r(a, b) = ou_covariance(design_.grid().point(static_cast<std::size_t>(a))[0],
                                    design_.grid().point(static_cast<std::size_t>(b))[0]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerical, "OU covariance factorization failed");
    factor_ = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              eig.eigenvectors().transpose();
}

double ModelGenerator::mean(double x) const noexcept {
    switch (model_) {
        case ModelId::M1: return model1_mean(x);
        case ModelId::M2: return model2_mean(x);
        case ModelId::M3H0: return model3_mean(x, n_, false);
        case ModelId::M3Hn: return model3_mean(x, n_, true);
    }
    return 0.0;
}

Eigen::VectorXd ModelGenerator::mean_on(const Grid& grid) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) out(static_cast<Eigen::Index>(j)) = mean(grid.point(j)[0]);
    return out;
}

CovarianceFunction ModelGenerator::covariance() const {
    if (is_gaussian_ou(model_)) return [](const Point& x, const Point& y) { return ou_covariance(x[0], y[0]); };
    return [](const Point& x, const Point& y) { return model2_covariance(x[0], y[0]); };
}

Eigen::MatrixXd ModelGenerator::data_covariance() const {
    const auto p = static_cast<Eigen::Index>(design_.size());
    const CovarianceFunction cov = covariance();
    Eigen::MatrixXd out(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = 0; b < p; ++b)
            out(a, b) = cov(design_.grid().point(static_cast<std::size_t>(a)), design_.grid().point(static_cast<std::size_t>(b)));
    if (model_ == ModelId::M2) out.diagonal().array() += kModel2NoiseSd * kModel2NoiseSd;
    return out;
}

FunctionalSample ModelGenerator::draw(std::uint64_t seed) const {
    const auto p = static_cast<Eigen::Index>(design_.size());
    const auto n = static_cast<Eigen::Index>(n_);
    const Eigen::VectorXd mu = mean_on(design_.grid());
    FunctionalSample sample{design_, Eigen::MatrixXd(n, p)};
    const std::uint64_t base = derive_seed(seed, StreamTag::Data, 0);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        RandomStream stream(base, static_cast<std::uint64_t>(i));
        if (is_gaussian_ou(model_)) {
            for (Eigen::Index j = 0; j < p; ++j) z(j) = stream.normal();
            sample.values.row(i) = (mu + factor_ * z).transpose();
        } else {
            const double g = stream.normal();
            const double eta1 = g * g;
            const double eta2 = stream.exponential();
            for (Eigen::Index j = 0; j < p; ++j) {
                const double x = design_.grid().point(static_cast<std::size_t>(j))[0];
                const double process = std::numbers::sqrt2 / 6.0 * (eta1 - 1.0) * std::sin(std::numbers::pi * x) +
                                       2.0 / 3.0 * (eta2 - 1.0) * (x - 0.5);
                sample.values(i, j) = mu(j) + process + kModel2NoiseSd * stream.normal();
            }
        }
    }
    return sample;
}

FunctionalSample gen_model1(std::size_t n, std::size_t p, std::uint64_t seed) {
    return ModelGenerator(ModelId::M1, n, p).draw(seed);
}

FunctionalSample gen_model2(std::size_t n, std::size_t p, std::uint64_t seed) {
    return ModelGenerator(ModelId::M2, n, p).draw(seed);
}

FunctionalSample gen_model3(std::size_t n, std::size_t p, std::uint64_t seed, bool alternative) {
    return ModelGenerator(alternative ? ModelId::M3Hn : ModelId::M3H0, n, p).draw(seed);
}

std::string to_string(ExperimentMethod method) {
    switch (method) {
        case ExperimentMethod::NormalScb: return "normal-scb";
        case ExperimentMethod::BootstrapScb: return "bootstrap-scb";
        case ExperimentMethod::GofScb: return "gof-scb";
        case ExperimentMethod::PlrtNonparametric: return "plrt-np";
        case ExperimentMethod::PlrtAr1: return "plrt-ar1";
        case ExperimentMethod::PlrtKnown: return "plrt-known";
    }
    return "unknown";
}

ExperimentMethod parse_method(const std::string& text) {
    const std::string s = lower(text);
    if (s == "normal-scb" || s == "normal") return ExperimentMethod::NormalScb;
    if (s == "bootstrap-scb" || s == "bootstrap") return ExperimentMethod::BootstrapScb;
    if (s == "gof-scb" || s == "gof") return ExperimentMethod::GofScb;
    if (s == "plrt-np" || s == "plrt-nonparametric") return ExperimentMethod::PlrtNonparametric;
    if (s == "plrt-ar1" || s == "plrt-par") return ExperimentMethod::PlrtAr1;
    if (s == "plrt-known") return ExperimentMethod::PlrtKnown;
    fail(ErrorKind::Parse, "unknown method '" + text + "'");
}

bool reports_coverage(ExperimentMethod method) noexcept {
    return method == ExperimentMethod::NormalScb || method == ExperimentMethod::BootstrapScb;
}

void validate_spec(const ModelSpec& spec) {
    require(spec.n >= 2, "n >= 2 required");
    require(spec.p >= 2, "p >= 2 required");
    require(spec.h > 0.0 && std::isfinite(spec.h), "bandwidth must be positive");
    require(spec.level > 0.0 && spec.level < 1.0, "level must lie in (0,1)");
    require(spec.grid_size >= 1, "grid size must be positive");
    const DesignGrid design = make_uniform_design(spec.p);
    if (!bandwidth_is_well_posed(design.grid(), Grid::equispaced(spec.grid_size), Bandwidth(spec.h), spec.kernel))
        fail(ErrorKind::IllPosed, "bandwidth " + std::to_string(spec.h) + " is ill-posed for p=" + std::to_string(spec.p));
}

double binomial_standard_error(double rate, std::size_t reps) noexcept {
    if (reps == 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(rate * (1.0 - rate) / static_cast<double>(reps));
}

namespace {

struct Outcome {
    bool ok = false;
    bool hit = false;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double seconds = 0.0;
    std::string error;
};

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

ExperimentTable run_experiment(const ModelSpec& spec, const std::vector<ExperimentMethod>& methods) {
    validate_spec(spec);
    const ModelGenerator generator(spec.model, spec.n, spec.p);
    const EvalGrid eval = Grid::equispaced(spec.grid_size);
    const Eigen::VectorXd truth = generator.mean_on(eval);
    const Bandwidth h(spec.h);
    const BasisModel linear = BasisModel::polynomial(1);
    const Eigen::MatrixXd known_cov = generator.data_covariance();
    const std::size_t paths = spec.paths ? spec.paths : default_path_count(spec.p);

    std::vector<std::vector<Outcome>> outcomes(spec.reps, std::vector<Outcome>(methods.size()));
    parallel_for(spec.reps, spec.threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = derive_seed(spec.seed, StreamTag::Replication, r);
        const FunctionalSample sample = generator.draw(rep_seed);
        for (std::size_t k = 0; k < methods.size(); ++k) {
            Outcome& out = outcomes[r][k];
            const auto start = std::chrono::steady_clock::now();
            try {
                switch (methods[k]) {
                    case ExperimentMethod::NormalScb: {
                        ScbOptions opt;
                        opt.gamma = spec.level;
                        opt.paths = paths;
                        opt.seed = derive_seed(rep_seed, StreamTag::SupPaths, 0);
                        const BandResult band = normal_scb(sample, eval, h, spec.kernel, opt);
                        out.hit = covers(band, truth);
                        out.threshold = band.threshold;
                        break;
                    }
                    case ExperimentMethod::BootstrapScb: {
                        BootstrapOptions opt;
                        opt.gamma = spec.level;
                        opt.resamples = spec.bootstraps;
                        opt.seed = derive_seed(rep_seed, StreamTag::Bootstrap, 0);
                        const BandResult band = bootstrap_scb(sample, eval, h, spec.kernel, opt);
                        out.hit = covers(band, truth);
                        out.threshold = band.threshold;
                        break;
                    }
                    case ExperimentMethod::GofScb: {
                        GofOptions opt;
                        opt.alpha = spec.level;
                        opt.paths = paths;
                        opt.seed = derive_seed(rep_seed, StreamTag::SupPaths, 1);
                        const GofReport report = scb_gof_test(sample, linear, eval, h, spec.kernel, opt);
                        out.hit = report.reject;
                        out.threshold = report.threshold;
                        break;
                    }
                    case ExperimentMethod::PlrtNonparametric:
                    case ExperimentMethod::PlrtAr1:
                    case ExperimentMethod::PlrtKnown: {
                        const CovarianceMode mode = methods[k] == ExperimentMethod::PlrtNonparametric
                                                        ? CovarianceMode::Nonparametric
                                                        : methods[k] == ExperimentMethod::PlrtAr1 ? CovarianceMode::ParametricAr1
                                                                                                  : CovarianceMode::Known;
                        out.hit = plrt_test(sample, linear, h, spec.kernel, mode, spec.level, known_cov).reject;
                        break;
                    }
                }
                out.ok = true;
            } catch (const Error& e) {
                out.error = e.what();
            }
            out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    });

    ExperimentTable table;
    for (std::size_t k = 0; k < methods.size(); ++k) {
        ExperimentRow row;
        row.model = spec.model;
        row.n = spec.n;
        row.p = spec.p;
        row.h = spec.h;
        row.method = methods[k];
        row.level = spec.level;
        row.reps = spec.reps;
        std::vector<double> thresholds;
        for (std::size_t r = 0; r < spec.reps; ++r) {
            const Outcome& o = outcomes[r][k];
            row.wall_seconds += o.seconds;
            if (!o.ok) {
                if (row.failures++ == 0) row.first_failure = o.error;
                continue;
            }
            ++row.completed;
            if (o.hit) ++row.hits;
            if (std::isfinite(o.threshold)) thresholds.push_back(o.threshold);
        }
        row.rate = row.completed ? static_cast<double>(row.hits) / static_cast<double>(row.completed)
                                 : std::numeric_limits<double>::quiet_NaN();
        row.standard_error = binomial_standard_error(row.rate, row.completed);
        row.median_threshold = median(std::move(thresholds));
        row.failure_flag = static_cast<double>(row.failures) > 0.01 * static_cast<double>(row.reps);
        row.low_coverage_flag = reports_coverage(methods[k]) && row.completed > 0 && row.rate < 0.85;
        table.rows.push_back(std::move(row));
    }
    return table;
}

SupQuantileResult known_R_threshold(ModelId model, const EvalGrid& eval, double gamma, std::size_t paths,
                                    std::uint64_t seed, const std::optional<SmoothingSetup>& smoothing,
                                    unsigned threads) {
    require(eval.dim() == 1, "model covariances are one-dimensional");
    Eigen::MatrixXd cov;
    if (smoothing) {
        const ModelGenerator generator(model, 2, smoothing->p);
        const Eigen::MatrixXd w =
            weight_matrix(generator.design().grid(), eval, Bandwidth(smoothing->h), smoothing->kernel);
        cov = w * generator.data_covariance() * w.transpose();
    } else {
        const CovarianceFunction r = ModelGenerator(model, 2, 2).covariance();
        const auto m = static_cast<Eigen::Index>(eval.size());
        cov.resize(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                cov(a, b) = r(eval.point(static_cast<std::size_t>(a)), eval.point(static_cast<std::size_t>(b)));
    }
    const CovarianceSplit split = split_covariance({eval, 0.5 * (cov + cov.transpose())});
    SupQuantileRequest request;
    request.correlation = split.correlation;
    request.gamma = gamma;
    request.paths = paths;
    request.seed = seed;
    request.threads = threads;
    return sup_quantile(request);
}

}  // namespace scb
