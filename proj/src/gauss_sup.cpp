#include "scb/gauss_sup.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "scb/errors.hpp"
#include "scb/parallel.hpp"
#include "scb/rng.hpp"

namespace scb {

namespace {

// Fixed chunking keeps every GEMM the same shape whatever the thread count.
constexpr std::size_t kChunk = 256;

std::size_t order_statistic_rank(double gamma, std::size_t n) {
    const double k = std::ceil((1.0 - gamma) * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

void check_request(const SupQuantileRequest& r) {
    require(r.gamma > 0.0 && r.gamma < 1.0, "level gamma must lie in (0,1)");
    require(r.paths >= 100, "at least 100 sample paths are required");
    require(r.correlation.table.rows() >= 1 && r.correlation.table.rows() == r.correlation.table.cols(),
            "correlation must be a nonempty square table");
}

std::vector<double> simulate_with_factor(const SupQuantileRequest& request, const Eigen::MatrixXd& root) {
    const Eigen::Index m = root.rows();
    const std::size_t n = request.paths;
    std::vector<double> sups(n);
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    parallel_for(chunks, request.threads, [&](std::size_t c) {
        const std::size_t first = c * kChunk;
        const auto cols = static_cast<Eigen::Index>(std::min(kChunk, n - first));
        Eigen::MatrixXd z(m, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            RandomStream stream(request.seed, first + static_cast<std::size_t>(j));
            for (Eigen::Index a = 0; a < m; ++a) z(a, j) = stream.normal();
        }
        const Eigen::MatrixXd g = root * z;
        for (Eigen::Index j = 0; j < cols; ++j) sups[first + static_cast<std::size_t>(j)] = g.col(j).cwiseAbs().maxCoeff();
    });
    return sups;
}

}  // namespace

std::size_t default_path_count(std::size_t p) noexcept {
    if (p <= 10) return 8000;
    if (p <= 20) return 10000;
    return 13000;
}

GaussianFactor symmetric_root(const CorrelationField& correlation) {
    double clipped = 0.0;
    const CorrelationField repaired = psd_repair(correlation, &clipped);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(repaired.table);
    if (eig.info() != Eigen::Success) fail(ErrorKind::Numerical, "correlation factorization failed");
    const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd root = eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
    if (!root.allFinite()) fail(ErrorKind::Numerical, "correlation square root is not finite");
    return {0.5 * (root + root.transpose()), clipped};
}

SupNormSample::SupNormSample(std::vector<double> values, double clipped_mass)
    : sorted_(std::move(values)), clipped_mass_(clipped_mass) {
    std::sort(sorted_.begin(), sorted_.end());
}

double SupNormSample::quantile(double gamma) const {
    require(gamma > 0.0 && gamma < 1.0, "level gamma must lie in (0,1)");
    require(!sorted_.empty(), "empty sup-norm sample");
    return sorted_[order_statistic_rank(gamma, sorted_.size()) - 1];
}

double SupNormSample::standard_error(double gamma) const {
    require(!sorted_.empty(), "empty sup-norm sample");
    const auto n = static_cast<double>(sorted_.size());
    const double spread = std::sqrt(n * gamma * (1.0 - gamma));
    const double k = static_cast<double>(order_statistic_rank(gamma, sorted_.size()));
    const auto lo = static_cast<std::size_t>(std::clamp(std::floor(k - spread), 1.0, n));
    const auto hi = static_cast<std::size_t>(std::clamp(std::ceil(k + spread), 1.0, n));
    if (hi == lo) return 0.0;
    return (sorted_[hi - 1] - sorted_[lo - 1]) * spread / static_cast<double>(hi - lo);
}

double SupNormSample::exceedance(double t) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
    return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

std::vector<double> simulate_sup_norms(const SupQuantileRequest& request) {
    check_request(request);
    return simulate_with_factor(request, symmetric_root(request.correlation).root);
}

SupNormSample sample_sup_norms(const SupQuantileRequest& request) {
    check_request(request);
    const GaussianFactor factor = symmetric_root(request.correlation);
    return SupNormSample(simulate_with_factor(request, factor.root), factor.clipped_mass);
}

SupQuantileResult sup_quantile(const SupQuantileRequest& request) {
    const SupNormSample sample = sample_sup_norms(request);
    return {sample.quantile(request.gamma), sample.standard_error(request.gamma), sample.size(), sample.clipped_mass()};
}

}  // namespace scb
