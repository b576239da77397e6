#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace scb {

/// A location in [0,1]^d. For d == 1 only the first coordinate is meaningful.
using Point = std::array<double, 2>;

/// Positive design density on [0,1], either uniform or tabulated on an equispaced
/// node set and interpolated piecewise-linearly.
class Density {
public:
    static Density uniform();

    /// Values at t_k = k/(K-1), k = 0..K-1. Renormalized to integrate to one.
    /// Values must be finite and >= 0 with no two adjacent zeros, so the CDF is
    /// strictly increasing.
    static Density tabulated(std::vector<double> values);

    bool is_uniform() const noexcept { return nodes_.empty(); }
    double pdf(double t) const;
    double cdf(double t) const;
    /// Solves cdf(x) = u by bisection on [0,1] to absolute tolerance 1e-12.
    double quantile(double u) const;
    /// Normalized node values; empty for the uniform density.
    const std::vector<double>& table() const noexcept { return nodes_; }

    friend bool operator==(const Density&, const Density&) = default;

private:
    std::vector<double> nodes_;
    std::vector<double> cumulative_;  // CDF at each node
};

/// Product grid in [0,1]^d, d in {1,2}. Points are enumerated with the last axis
/// varying fastest: j = j_1 * p_2 + j_2.
class Grid {
public:
    Grid() = default;

    /// Validates: 1 or 2 axes, each nonempty, strictly increasing, inside [0,1].
    static Grid product(std::vector<std::vector<double>> axes);
    /// m points from 0 to 1 inclusive (m >= 2), or {0.5} for m == 1.
    static Grid equispaced(std::size_t m);
    static Grid equispaced(std::size_t m1, std::size_t m2);

    int dim() const noexcept { return static_cast<int>(axes_.size()); }
    std::size_t size() const noexcept;
    std::size_t axis_size(int k) const { return axes_.at(static_cast<std::size_t>(k)).size(); }
    std::span<const double> axis(int k) const { return axes_.at(static_cast<std::size_t>(k)); }
    Point point(std::size_t j) const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    explicit Grid(std::vector<std::vector<double>> axes) : axes_(std::move(axes)) {}
    std::vector<std::vector<double>> axes_;
};

/// Evaluation grids carry no density; any valid product grid will do.
using EvalGrid = Grid;

/// Default evaluation grid: 100 equispaced points on [0,1].
inline EvalGrid default_eval_grid() { return Grid::equispaced(100); }

/// Design points x_j with the densities that generated them.
class DesignGrid {
public:
    DesignGrid() = default;

    /// Design grid taken as given (e.g. read from a file); the density is
    /// recorded as uniform for quadrature purposes. Each axis needs >= 2 points.
    static DesignGrid from_grid(Grid grid);

    const Grid& grid() const noexcept { return grid_; }
    int dim() const noexcept { return grid_.dim(); }
    std::size_t size() const noexcept { return grid_.size(); }
    const std::vector<Density>& densities() const noexcept { return densities_; }
    /// True when the points were generated from the densities by CDF inversion.
    bool generated() const noexcept { return generated_; }

    friend bool operator==(const DesignGrid&, const DesignGrid&) = default;
    friend DesignGrid make_design_grid(const std::vector<Density>&, const std::vector<std::size_t>&);

private:
    Grid grid_;
    std::vector<Density> densities_;
    bool generated_ = false;
};

/// Axis k point j solves F_k(x) = (j - 0.5)/p_k. Uniform axes are computed in
/// closed form so they are exactly arithmetic.
DesignGrid make_design_grid(const std::vector<Density>& densities, const std::vector<std::size_t>& sizes);
DesignGrid make_uniform_design(std::size_t p);

/// n curves observed on a common design grid; row i of `values` is curve i.
struct FunctionalSample {
    DesignGrid design;
    Eigen::MatrixXd values;

    std::size_t n() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(values.cols()); }
    /// Column means (the averaged curve on the design grid).
    Eigen::VectorXd column_means() const { return values.colwise().mean().transpose(); }
};

/// Returns the sample unchanged if every row has p finite entries and n >= 1.
/// Throws Error(Parse) naming the first offending cell otherwise.
const FunctionalSample& validate_sample(const FunctionalSample& sample);

/// Builds a validated sample from ragged rows; a short or long row is rejected
/// with its index.
FunctionalSample make_sample(const DesignGrid& design, const std::vector<std::vector<double>>& rows);

/// Subset of curves by row index.
FunctionalSample select_rows(const FunctionalSample& sample, std::span<const std::size_t> rows);

/// Values of one function on an evaluation grid.
struct DiscretizedCurve {
    Grid grid;
    Eigen::VectorXd values;

    DiscretizedCurve() = default;
    DiscretizedCurve(Grid g, Eigen::VectorXd v);

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

}  // namespace scb
