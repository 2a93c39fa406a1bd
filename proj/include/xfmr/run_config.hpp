#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "xfmr/physics.hpp"
#include "xfmr/pinn.hpp"
#include "xfmr/placement.hpp"
#include "xfmr/reference_solver.hpp"

namespace xfmr {

struct RunConfig {
    int dim = 1;
    double horizon = 24.0;  ///< hours
    std::uint64_t seed = 1;
    PhysicsSpec physics;
    GridSpec grid;
    TrainConfig train;
    PlacementConfig placement;
    int place_nx = 91;
    int place_ny = 1;
    std::optional<std::filesystem::path> drive_path;
    std::filesystem::path out_dir = "out";

    /// Transformer physics, reference grid and full training settings, or the
    /// reduced training profile when `desk_scale` is set.
    static RunConfig defaults(int dim, double horizon, bool desk_scale);

    /// Checks every embedded spec and that the drive file exists.
    void validate() const;
};

/// Parses a JSON config on top of the defaults. Every key is optional; unknown
/// keys are rejected with ArgumentError. Top level:
///   dim, horizon_hours, seed, drive, out,
///   physics {k, rho, cp, h, p0, nu},
///   grid {nx, nt},
///   train {hidden_layers, hidden_width, n_u, n_f, lambda_u, lambda_f, beta,
///          adam_epochs, adam_lr, adam_epsilon, lbfgs_epochs, lbfgs_max_evals,
///          lbfgs_history, lbfgs_max_line_search, lbfgs_tolerance,
///          include_initial, seed},
///   placement {n_min, n_max, d, d1, margin, big_m, signed_costs, nx, ny}
RunConfig parse_run_config(const std::string& json_text, bool desk_scale);
RunConfig load_run_config(const std::filesystem::path& path, bool desk_scale);

std::string run_config_json(const RunConfig& cfg);

}  // namespace xfmr
