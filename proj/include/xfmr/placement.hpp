#pragma once

// Sensor placement on a candidate grid.
//
// Model 1: minimize sum_i a_i s_i subject to n_min <= sum s_i <= n_max.
// Model 2: Model 1 plus s_i + s_j <= 1 whenever |x_i - x_j| < d.
// Model 3: Model 2 plus the overlap term sum_i s_i * sum_j s_j c_ij.
//
// a_i is the time-averaged |div u| at candidate i. Selections are compared by
// objective first, then by their sorted index lists (lexicographically
// smallest wins), so every solver returns the same answer.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xfmr/drive.hpp"
#include "xfmr/physics.hpp"
#include "xfmr/reference_solver.hpp"

namespace xfmr {

struct PinnModel;

/// Inset added to the margin so that candidates lie strictly inside.
inline constexpr double kGridInset = 1e-12;

struct PlacementGrid {
    int dim = 1;
    int nx = 1;
    int ny = 1;
    double margin = 0.0;
    std::vector<Point> points;  ///< x fastest

    std::size_t size() const { return points.size(); }
    double distance(std::size_t i, std::size_t j) const;
};

/// Uniform nx (x ny) grid spanning [margin + inset, 1 - margin - inset] per axis.
/// A single node per axis sits at 0.5.
PlacementGrid build_grid(int dim, int nx, int ny, double margin);

/// Grid from explicit coordinates (tests and custom layouts).
PlacementGrid grid_from_points(int dim, std::vector<Point> points);

/// div u = du/dx (+ du/dy) at each point for one time.
using DivergenceFn = std::function<std::vector<double>(std::span<const Point> points, double t)>;

/// Central differences on the multilinear interpolant of a field, one grid
/// step wide (narrowed to stay inside the domain).
DivergenceFn field_divergence(const FieldSeries& field);

/// Exact derivatives of a trained network.
DivergenceFn pinn_divergence(const PinnModel& model, const DriveSeries& drive);

struct ScoreField {
    std::vector<double> abs_score;     ///< mean over times of |div u|
    std::vector<double> signed_score;  ///< mean over times of div u
    std::vector<double> times;
};

/// Hourly times 0, 1, ..., floor(horizon).
std::vector<double> hourly_times(double horizon);

ScoreField score_field(const DivergenceFn& div, const PlacementGrid& grid, std::span<const double> times);

/// Scores given directly, e.g. from tests. signed_score is set equal to abs_score.
ScoreField scores_from_values(std::vector<double> abs_score);

struct PlacementConfig {
    int n_min = 5;
    int n_max = 10;
    double d = 0.05;      ///< minimum pairwise distance
    double d1 = 0.2;      ///< overlap radius
    double margin = 0.05; ///< grid distance to the boundary
    double big_m = 1000.0;
    /// Overlap cost signed_i * (d1 - dist) without clamping.
    bool signed_costs = false;

    /// Throws ArgumentError unless 1 <= n_min <= n_max <= candidates,
    /// 0 <= d <= d1 and big_m > 0.
    void validate(std::size_t candidates) const;
};

/// c_ij = abs_i * max(0, d1 - dist_ij), zero diagonal. With signed_costs:
/// c_ij = signed_i * (d1 - dist_ij).
Eigen::MatrixXd overlap_cost(const PlacementGrid& grid, const ScoreField& scores, double d1,
                             bool signed_costs = false);

enum class SolverKind { Analytic, Exhaustive, BranchAndBound };
std::string to_string(SolverKind s);

struct PlacementSolution {
    std::vector<std::uint8_t> s;    ///< selection vector
    std::vector<int> selected;      ///< ascending indices
    double objective = 0.0;
    int model = 1;
    SolverKind solver = SolverKind::Analytic;
    std::uint64_t nodes = 0;
    std::uint64_t evaluations = 0;
};

/// Everything a solver needs; costs are only used by Model 3.
struct PlacementInstance {
    int model = 1;
    PlacementGrid grid;
    ScoreField scores;
    PlacementConfig cfg;
    Eigen::MatrixXd cost;

    PlacementInstance(int model, PlacementGrid grid, ScoreField scores, PlacementConfig cfg);

    std::size_t size() const { return grid.size(); }
    bool conflict(std::size_t i, std::size_t j) const;
    /// Objective of a selection given as ascending indices; summation order
    /// is fixed so equal sets always give bit-identical values.
    double objective(std::span<const int> selected) const;
};

/// Selects the n_min smallest abs_scores (lowest index on ties).
PlacementSolution solve_model1(const ScoreField& scores, const PlacementConfig& cfg);
PlacementSolution solve_model2(const ScoreField& scores, const PlacementGrid& grid, const PlacementConfig& cfg);
PlacementSolution solve_model3(const ScoreField& scores, const PlacementGrid& grid, const PlacementConfig& cfg);

inline constexpr std::size_t kExhaustiveLimit = 22;

/// Enumerates every feasible subset. Throws SizeError above kExhaustiveLimit.
PlacementSolution exhaustive_solve(const PlacementInstance& inst);
PlacementSolution bnb_solve(const PlacementInstance& inst);

/// Exhaustive up to kExhaustiveLimit candidates, branch-and-bound above.
PlacementSolution solve_placement(const PlacementInstance& inst);

/// Size of the largest conflict-free subset under the distance d.
int independence_number(const PlacementGrid& grid, double d);

/// Throws InfeasibleError when fewer than n_min candidates can coexist.
void check_feasible(const PlacementInstance& inst);

/// Problems found by re-checking a solution from scratch; empty when valid.
/// Model 3 is verified through the linearized form: L_i = s_i c_i with
/// c_i = sum_j s_j c_ij must satisfy all big-M links, and
/// sum a_i s_i + sum L_i must reproduce the objective.
std::vector<std::string> validate_solution(const PlacementInstance& inst, const PlacementSolution& sol);

/// True when big_m dominates every |c_i|, so the big-M links are exact.
bool big_m_sufficient(const Eigen::MatrixXd& cost, double big_m);

/// JSON report: model, config, candidates, scores, selection, objective,
/// solver statistics.
std::string placement_report_json(const PlacementInstance& inst, const PlacementSolution& sol);

/// CSV `x[,y],abs_score,signed_score,selected`.
void write_placement_csv(std::ostream& os, const PlacementInstance& inst, const PlacementSolution& sol);

}  // namespace xfmr
