#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scb/core_model.hpp"
#include "scb/gof.hpp"
#include "scb/smoother.hpp"

namespace scb {

/// Simulation models: 1 (polynomial trend, OU noise), 2 (oscillating trend,
/// skewed two-factor noise plus white noise), 3 (linear trend, OU noise) under
/// the null or the local alternative.
enum class ModelId { M1, M2, M3H0, M3Hn };

std::string to_string(ModelId model);
/// Accepts "1", "m1", "2", "m2", "3-h0", "m3-h0", "3-hn", "m3-hn" (case-insensitive).
ModelId parse_model_id(const std::string& text);

double model1_mean(double x) noexcept;
double model2_mean(double x) noexcept;
/// C^2 bump: zero outside [0.4, 0.6], 0.2 exp(-(x-0.5)^2) on (0.45, 0.55], quintic
/// Hermite connectors in between.
double bump(double x) noexcept;
/// x, plus n^(-1/2) log(n) bump(x) under the alternative.
double model3_mean(double x, std::size_t n, bool alternative) noexcept;

/// 0.25^2 exp(20 log(0.9) |x - x'|)
double ou_covariance(double x, double y) noexcept;
/// Covariance of the two-factor process of model 2 (without the white noise).
double model2_covariance(double x, double y) noexcept;
constexpr double kModel2NoiseSd = 0.1;

/// Draws samples of one model on x_j = (j - 0.5)/p. The Gaussian factor is the
/// symmetric square root of R on the design points, computed once.
class ModelGenerator {
public:
    ModelGenerator(ModelId model, std::size_t n, std::size_t p);

    ModelId model() const noexcept { return model_; }
    std::size_t n() const noexcept { return n_; }
    std::size_t p() const noexcept { return design_.size(); }
    const DesignGrid& design() const noexcept { return design_; }

    /// Curve i uses its own substream, so samples are a pure function of the seed.
    FunctionalSample draw(std::uint64_t seed) const;

    double mean(double x) const noexcept;
    Eigen::VectorXd mean_on(const Grid& grid) const;
    /// Covariance of one curve at the design points, measurement error included.
    Eigen::MatrixXd data_covariance() const;
    /// Covariance function of the random process part.
    CovarianceFunction covariance() const;

private:
    ModelId model_;
    std::size_t n_;
    DesignGrid design_;
    Eigen::MatrixXd factor_;  ///< p x p root for models 1 and 3
};

FunctionalSample gen_model1(std::size_t n, std::size_t p, std::uint64_t seed);
FunctionalSample gen_model2(std::size_t n, std::size_t p, std::uint64_t seed);
FunctionalSample gen_model3(std::size_t n, std::size_t p, std::uint64_t seed, bool alternative);

enum class ExperimentMethod { NormalScb, BootstrapScb, GofScb, PlrtNonparametric, PlrtAr1, PlrtKnown };

std::string to_string(ExperimentMethod method);
/// "normal-scb", "bootstrap-scb", "gof-scb", "plrt-np", "plrt-ar1", "plrt-known".
ExperimentMethod parse_method(const std::string& text);
/// True for band methods whose row reports coverage rather than rejection rate.
bool reports_coverage(ExperimentMethod method) noexcept;

struct ModelSpec {
    ModelId model = ModelId::M1;
    std::size_t n = 20;
    std::size_t p = 20;
    double h = 0.1;
    Kernel kernel = Kernel::epanechnikov();
    double level = 0.05;  ///< gamma for bands, alpha for tests
    std::size_t reps = 2000;
    std::uint64_t seed = 0;
    std::size_t grid_size = 100;
    std::size_t paths = 0;        ///< 0 selects default_path_count(p)
    std::size_t bootstraps = 500;
    unsigned threads = 1;
};

/// Throws Error(InvalidArgument) unless n >= 2, p >= 2, h > 0 and the level lies in (0,1),
/// and Error(IllPosed) when h leaves an eval point without enough design points.
void validate_spec(const ModelSpec& spec);

struct ExperimentRow {
    ModelId model = ModelId::M1;
    std::size_t n = 0;
    std::size_t p = 0;
    double h = 0.0;
    ExperimentMethod method = ExperimentMethod::NormalScb;
    double level = 0.05;
    std::size_t reps = 0;       ///< requested replications
    std::size_t completed = 0;  ///< replications without error
    std::size_t failures = 0;
    std::size_t hits = 0;       ///< covered or rejected
    double rate = 0.0;          ///< hits / completed (NaN if none completed)
    double standard_error = 0.0;
    double median_threshold = 0.0;  ///< NaN for PLRT rows
    bool failure_flag = false;      ///< more than 1% of replications failed
    bool low_coverage_flag = false;  ///< coverage row below 0.85
    double wall_seconds = 0.0;
    std::string first_failure;
};

struct ExperimentTable {
    std::vector<ExperimentRow> rows;
};

/// sqrt(r (1 - r) / reps)
double binomial_standard_error(double rate, std::size_t reps) noexcept;

/// Runs every method on the same simulated samples. Replication r uses the seed
/// derive_seed(spec.seed, Replication, r); results apart from wall time are
/// identical for any thread count.
ExperimentTable run_experiment(const ModelSpec& spec, const std::vector<ExperimentMethod>& methods);

/// Smoothing applied before the sup-norm, when the reference threshold should
/// describe the local linear estimator rather than the raw process.
struct SmoothingSetup {
    std::size_t p = 50;
    double h = 0.05;
    Kernel kernel = Kernel::epanechnikov();
};

/// Sup-norm threshold of the centered Gaussian process with the model's analytic
/// covariance on `eval`. With `smoothing`, the covariance is W C W^T where C is the
/// data covariance on the design of size smoothing->p, i.e. the exact covariance of
/// the smoothed curves.
SupQuantileResult known_R_threshold(ModelId model, const EvalGrid& eval, double gamma, std::size_t paths,
                                    std::uint64_t seed, const std::optional<SmoothingSetup>& smoothing = std::nullopt,
                                    unsigned threads = 1);

}  // namespace scb
