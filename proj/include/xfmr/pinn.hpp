#pragma once

// Physics-informed loss for the transformer heat model.
//
// The network sees standardized inputs and produces a normalized output;
// everything here converts back to physical units before the PDE residual
//     f = rho*cp/3600 * du/dt - k*Lap(u) - (P0 + P_K - h*(u - Ta))
// is formed, then divides f by beta.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xfmr/drive.hpp"
#include "xfmr/mlp.hpp"
#include "xfmr/physics.hpp"
#include "xfmr/reference_solver.hpp"
#include "xfmr/scaler.hpp"

namespace xfmr {

/// A space-time location together with the drive values at its time.
struct SpaceTimePoint {
    Point x;
    double t = 0.0;
    DriveSample drive;
};

SpaceTimePoint make_point(const DriveSeries& drive, Point x, double t);

/// Physical-unit derivatives of the temperature at one point.
struct Jet {
    double u = 0.0;
    double du_dt = 0.0;              ///< per hour
    std::array<double, 2> grad_x{};  ///< d/dx, d/dy (second entry unused in 1D)
    double lap_x = 0.0;              ///< d2/dx2 (+ d2/dy2)
    int dim = 1;
};

/// Residual of the heat equation divided by beta, for any temperature jet.
double residual_from_jet(const PhysicsSpec& spec, const SpaceTimePoint& p, const Jet& jet, double beta);

/// Trained surrogate: network plus the scaling that maps physical inputs to
/// network inputs and network output to degrees C.
struct PinnModel {
    PhysicsSpec physics;
    Scaler scaler;
    NetworkParams params;

    InputLayout layout() const { return {physics.dim}; }
    /// Jet directions in network slot indices: t, x and (2D) y.
    std::vector<int> jet_directions() const;

    /// Standardized network inputs, one column per point.
    Eigen::MatrixXd encode(std::span<const SpaceTimePoint> points) const;

    double predict(const SpaceTimePoint& p) const;
    Eigen::VectorXd predict(std::span<const SpaceTimePoint> points) const;

    Jet jet(const SpaceTimePoint& p) const;
    std::vector<Jet> jets(std::span<const SpaceTimePoint> points) const;
    /// Converts row `i` of a batch computed with `jet_directions()`.
    Jet to_physical(const JetBatch& batch, Eigen::Index i) const;
};

double residual(const PinnModel& model, const SpaceTimePoint& p, double beta);

struct TrainConfig {
    int hidden_layers = 4;
    int hidden_width = 50;
    int n_u = 100;
    int n_f = 20000;
    double lambda_u = 1.0;
    double lambda_f = 10000.0;
    double beta = 1000.0;
    int adam_epochs = 5000;
    double adam_lr = 1e-6;
    double adam_epsilon = 1e-5;
    int lbfgs_epochs = 5000;
    int lbfgs_max_evals = 20000;
    int lbfgs_history = 50;
    int lbfgs_max_line_search = 50;
    double lbfgs_tolerance = 1e-6;
    /// Adds t=0 interior points with reference targets to the data term.
    bool include_initial = false;
    std::uint64_t seed = 1;

    /// Full-size hyperparameters.
    static TrainConfig full(int dim);
    /// Reduced profile that trains in CPU minutes.
    static TrainConfig desk(int dim);

    void validate() const;
};

struct BoundarySample {
    SpaceTimePoint at;
    double target = 0.0;  ///< C
};

struct TrainingSets {
    std::vector<BoundarySample> boundary;
    std::vector<SpaceTimePoint> collocation;
};

/// Boundary samples on a uniform lattice along the boundary (arc length,
/// corners avoided in 2D) times a uniform time grid over [0, horizon];
/// collocation points uniform at random over the closed domain x [0, horizon].
/// `initial_reference` supplies t=0 targets when cfg.include_initial is set.
TrainingSets sample_training_sets(const PhysicsSpec& spec, const DriveSeries& drive, double horizon,
                                  const TrainConfig& cfg, const FieldSeries* initial_reference = nullptr);

struct LossBreakdown {
    double mse = 0.0;
    double mse_u = 0.0;
    double mse_f = 0.0;
};

/// Composite loss lambda_u*mse_u + lambda_f*mse_f with precomputed network
/// inputs. mse_u is measured in normalized output units.
class PinnLoss {
public:
    PinnLoss(const PhysicsSpec& spec, const Scaler& scaler, const TrainingSets& sets, const TrainConfig& cfg);

    LossBreakdown evaluate(const NetworkParams& params) const;
    LossBreakdown evaluate(const NetworkParams& params, std::span<double> gradient) const;

    /// Loss as a list of terms for `param_gradient`. The callbacks write the
    /// term-wise means into `sink` when it is non-null.
    std::vector<LossTerm> terms(LossBreakdown* sink) const;

    std::size_t boundary_count() const { return static_cast<std::size_t>(boundary_inputs_.cols()); }
    std::size_t collocation_count() const { return static_cast<std::size_t>(colloc_inputs_.cols()); }

private:
    PhysicsSpec spec_;
    Scaler scaler_;
    InputLayout layout_;
    double lambda_u_, lambda_f_, beta_;
    Eigen::MatrixXd boundary_inputs_;
    Eigen::VectorXd boundary_targets_;  // normalized
    Eigen::MatrixXd colloc_inputs_;
    Eigen::VectorXd colloc_forcing_;    // P0 + P_K + h*Ta per point
    std::vector<int> directions_;
};

LossBreakdown total_loss(const NetworkParams& p, const Scaler& scaler, const PhysicsSpec& spec,
                         const TrainingSets& sets, const TrainConfig& cfg);

struct Metrics {
    double rel_l2_field = 0.0;
    double rel_l2_top = 0.0;
};

/// Top-oil trace: the x=1 column over time (1D) or the y-average of the x=1
/// edge (2D).
std::vector<double> top_oil_trace(const FieldSeries& field);

/// Errors of a prediction series against a reference on the same grid.
Metrics compare_fields(const FieldSeries& prediction, const FieldSeries& reference);

/// Model predictions at every node and level of `reference`.
FieldSeries predict_on_grid(const PinnModel& model, const FieldSeries& grid_like, const DriveSeries& drive);

Metrics eval_metrics(const PinnModel& model, const FieldSeries& reference, const DriveSeries& drive);

/// Cheap per-epoch metrics on a subsampled reference grid that always keeps
/// the x=0 and x=1 nodes and the first and last levels.
class MetricsProbe {
public:
    MetricsProbe(const PinnModel& layout_source, const FieldSeries& reference, const DriveSeries& drive,
                 int max_nodes_per_axis = 41, int max_levels = 49);

    Metrics evaluate(const NetworkParams& params) const;

private:
    PinnModel model_;
    FieldSeries reference_;
    Eigen::MatrixXd inputs_;
};

}  // namespace xfmr
