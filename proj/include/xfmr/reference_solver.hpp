#pragma once

// Finite-difference reference solutions of the transformer heat equation.
//
// Time is measured in hours throughout; rho*cp is divided by 3600 so that the
// W-based source terms stay consistent. 1D uses Crank-Nicolson, 2D uses
// Peaceman-Rachford ADI. The reaction part -h*u of the source is treated
// implicitly in both.

#include <functional>
#include <span>
#include <vector>

#include "xfmr/drive.hpp"
#include "xfmr/physics.hpp"

namespace xfmr {

struct GridSpec {
    int nx = 201;        ///< nodes per spatial axis, boundaries included
    int nt = 240;        ///< time steps
    double t_end = 24.0; ///< hours

    double dx() const { return 1.0 / (nx - 1); }
    double dt() const { return t_end / nt; }
    void validate() const;

    /// Default reference resolution: 201 nodes in 1D, 101x101 in 2D, 10 steps/hour.
    static GridSpec reference_default(int dim, double hours);
};

/// Temperature on a uniform spatial grid at a sequence of time levels.
/// Node (i, j) of level n sits at x = i/(nx-1), y = j/(nx-1); storage is
/// level-major, then y, then x.
class FieldSeries {
public:
    FieldSeries(int dim, int nx, std::vector<double> times, std::vector<double> values);

    int dim() const { return dim_; }
    int nx() const { return nx_; }
    /// Nodes along y: nx in 2D, 1 in 1D.
    int ny() const { return dim_ == 2 ? nx_ : 1; }
    std::size_t nodes_per_level() const { return static_cast<std::size_t>(nx_) * ny(); }
    std::size_t levels() const { return times_.size(); }

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

    double coord(int i) const { return static_cast<double>(i) / (nx_ - 1); }
    double value(std::size_t level, int i, int j = 0) const {
        return values_[level * nodes_per_level() + static_cast<std::size_t>(j) * nx_ + i];
    }
    std::span<const double> level(std::size_t n) const {
        return {values_.data() + n * nodes_per_level(), nodes_per_level()};
    }

    /// Grid description; assumes uniformly spaced levels starting at t=0.
    GridSpec grid() const;

    bool operator==(const FieldSeries&) const = default;

private:
    int dim_;
    int nx_;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Generic linear heat problem
///     capacity * du/dt = conductivity * Lap(u) - reaction * u + source(x, t)
/// with Dirichlet data `boundary(x, t)`. An empty `initial` requests the
/// steady solution of the t=0 problem as initial condition.
struct HeatProblem {
    int dim = 1;
    double capacity = 1.0;
    double conductivity = 1.0;
    double reaction = 0.0;
    std::function<double(Point, double)> source;
    std::function<double(Point, double)> boundary;
    std::function<double(Point)> initial;
};

/// Transformer problem: capacity rho*cp/3600, reaction h, source P0+P_K+h*Ta,
/// boundary data from the drive, steady initial state.
HeatProblem transformer_problem(const PhysicsSpec& spec, const DriveSeries& drive);

FieldSeries solve_heat(const HeatProblem& problem, const GridSpec& grid);

FieldSeries solve_1d(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid);
FieldSeries solve_2d(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid);
/// Dispatches on spec.dim.
FieldSeries solve_reference(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid);

/// ||a - b|| / ||b||, b being the reference.
double relative_l2(std::span<const double> a, std::span<const double> b);
double relative_l2(const FieldSeries& a, const FieldSeries& b);

/// Multilinear interpolation in space and time.
double sample_series(const FieldSeries& f, Point x, double t);

}  // namespace xfmr
