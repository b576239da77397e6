#include "scb/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scb/errors.hpp"

namespace scb {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid argument";
        case ErrorKind::Parse: return "parse error";
        case ErrorKind::Degenerate: return "degenerate statistics";
        case ErrorKind::IllPosed: return "ill-posed bandwidth";
        case ErrorKind::Numerical: return "numerical failure";
    }
    return "error";
}

// ---------------------------------------------------------------------------
// Density

Density Density::uniform() { return Density{}; }

Density Density::tabulated(std::vector<double> values) {
    if (values.size() < 2) fail(ErrorKind::InvalidArgument, "tabulated density needs at least 2 values");
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k]) || values[k] < 0.0) {
            std::ostringstream msg;
            msg << "density value " << values[k] << " at node " << k << " is not positive";
            fail(ErrorKind::InvalidArgument, msg.str());
        }
        if (k > 0 && values[k] == 0.0 && values[k - 1] == 0.0) {
            std::ostringstream msg;
            msg << "density vanishes on the interval between nodes " << k - 1 << " and " << k;
            fail(ErrorKind::InvalidArgument, msg.str());
        }
    }
    const double step = 1.0 / static_cast<double>(values.size() - 1);
    double total = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) total += 0.5 * step * (values[k - 1] + values[k]);

    Density d;
    d.nodes_.resize(values.size());
    d.cumulative_.resize(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) d.nodes_[k] = values[k] / total;
    d.cumulative_[0] = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k)
        d.cumulative_[k] = d.cumulative_[k - 1] + 0.5 * step * (d.nodes_[k - 1] + d.nodes_[k]);
    d.cumulative_.back() = 1.0;
    return d;
}

double Density::pdf(double t) const {
    if (t < 0.0 || t > 1.0) return 0.0;
    if (is_uniform()) return 1.0;
    const double step = 1.0 / static_cast<double>(nodes_.size() - 1);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(t / step), nodes_.size() - 2);
    const double s = (t - static_cast<double>(k) * step) / step;
    return nodes_[k] + s * (nodes_[k + 1] - nodes_[k]);
}

double Density::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (is_uniform()) return t;
    const double step = 1.0 / static_cast<double>(nodes_.size() - 1);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(t / step), nodes_.size() - 2);
    const double s = t - static_cast<double>(k) * step;
    const double slope = (nodes_[k + 1] - nodes_[k]) / step;
    return cumulative_[k] + nodes_[k] * s + 0.5 * slope * s * s;
}

double Density::quantile(double u) const {
    require(u >= 0.0 && u <= 1.0, "density quantile level must lie in [0,1]");
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < u) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Grid

Grid Grid::product(std::vector<std::vector<double>> axes) {
    if (axes.empty() || axes.size() > 2) fail(ErrorKind::InvalidArgument, "grid dimension must be 1 or 2");
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const auto& a = axes[k];
        if (a.empty()) fail(ErrorKind::InvalidArgument, "grid axis is empty");
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (!std::isfinite(a[j]) || a[j] < 0.0 || a[j] > 1.0) {
                std::ostringstream msg;
                msg << "grid axis " << k << " point " << j << " = " << a[j] << " lies outside [0,1]";
                fail(ErrorKind::InvalidArgument, msg.str());
            }
            if (j > 0 && !(a[j] > a[j - 1])) {
                std::ostringstream msg;
                msg << "grid axis " << k << " is not strictly increasing at point " << j;
                fail(ErrorKind::InvalidArgument, msg.str());
            }
        }
    }
    return Grid(std::move(axes));
}

namespace {
std::vector<double> linspace01(std::size_t m) {
    require(m >= 1, "grid size must be positive");
    if (m == 1) return {0.5};
    std::vector<double> a(m);
    for (std::size_t k = 0; k < m; ++k) a[k] = static_cast<double>(k) / static_cast<double>(m - 1);
    return a;
}
}  // namespace

Grid Grid::equispaced(std::size_t m) { return Grid({linspace01(m)}); }
Grid Grid::equispaced(std::size_t m1, std::size_t m2) { return Grid({linspace01(m1), linspace01(m2)}); }

std::size_t Grid::size() const noexcept {
    if (axes_.empty()) return 0;
    std::size_t s = 1;
    for (const auto& a : axes_) s *= a.size();
    return s;
}

Point Grid::point(std::size_t j) const {
    if (axes_.size() == 1) return {axes_[0][j], 0.0};
    const std::size_t p2 = axes_[1].size();
    return {axes_[0][j / p2], axes_[1][j % p2]};
}

// ---------------------------------------------------------------------------
// DesignGrid

DesignGrid DesignGrid::from_grid(Grid grid) {
    require(grid.dim() >= 1, "design grid must not be empty");
    for (int k = 0; k < grid.dim(); ++k)
        if (grid.axis_size(k) < 2) fail(ErrorKind::InvalidArgument, "design axes need at least 2 points");
    DesignGrid d;
    d.grid_ = std::move(grid);
    d.densities_.assign(static_cast<std::size_t>(d.grid_.dim()), Density::uniform());
    return d;
}

DesignGrid make_design_grid(const std::vector<Density>& densities, const std::vector<std::size_t>& sizes) {
    if (sizes.empty() || sizes.size() > 2) fail(ErrorKind::InvalidArgument, "design dimension must be 1 or 2");
    if (densities.size() != sizes.size())
        fail(ErrorKind::InvalidArgument, "need one density per design axis");
    std::vector<std::vector<double>> axes(sizes.size());
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const std::size_t pk = sizes[k];
        if (pk < 2) fail(ErrorKind::InvalidArgument, "each design axis needs p_k >= 2");
        axes[k].resize(pk);
        for (std::size_t j = 1; j <= pk; ++j) {
            const double u = (static_cast<double>(j) - 0.5) / static_cast<double>(pk);
            axes[k][j - 1] = densities[k].is_uniform() ? u : densities[k].quantile(u);
        }
    }
    DesignGrid d;
    d.grid_ = Grid::product(std::move(axes));
    d.densities_ = densities;
    d.generated_ = true;
    return d;
}

DesignGrid make_uniform_design(std::size_t p) { return make_design_grid({Density::uniform()}, {p}); }

// ---------------------------------------------------------------------------
// FunctionalSample

const FunctionalSample& validate_sample(const FunctionalSample& sample) {
    if (sample.values.rows() < 1) fail(ErrorKind::Parse, "sample has no curves");
    const auto p = static_cast<Eigen::Index>(sample.design.size());
    if (sample.values.cols() != p) {
        std::ostringstream msg;
        msg << "curves have " << sample.values.cols() << " values but the design has " << p << " points";
        fail(ErrorKind::Parse, msg.str());
    }
    for (Eigen::Index i = 0; i < sample.values.rows(); ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (!std::isfinite(sample.values(i, j))) {
                std::ostringstream msg;
                msg << "non-finite value at curve " << i << ", point " << j;
                fail(ErrorKind::Parse, msg.str());
            }
    return sample;
}

FunctionalSample make_sample(const DesignGrid& design, const std::vector<std::vector<double>>& rows) {
    const std::size_t p = design.size();
    FunctionalSample s{design, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p))};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p) {
            std::ostringstream msg;
            msg << "curve " << i << " has " << rows[i].size() << " values, expected " << p;
            fail(ErrorKind::Parse, msg.str());
        }
        for (std::size_t j = 0; j < p; ++j)
            s.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    validate_sample(s);
    return s;
}

FunctionalSample select_rows(const FunctionalSample& sample, std::span<const std::size_t> rows) {
    FunctionalSample out{sample.design, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), sample.values.cols())};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < sample.n(), "row index out of range");
        out.values.row(static_cast<Eigen::Index>(i)) = sample.values.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

DiscretizedCurve::DiscretizedCurve(Grid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    require(static_cast<std::size_t>(values.size()) == grid.size(), "curve value count must equal grid size");
}

}  // namespace scb
