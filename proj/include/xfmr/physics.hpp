#pragma once

// Transformer heat model: parameters, heat source and boundary values.
//
// The governing equation on the unit interval / unit square is
//
//     rho*cp * du/dt = k * Lap(u) + q,
//     q = P0 + nu*K(t)^2 * Px(x) - h*(u - Ta(t)),
//
// with Dirichlet data Ta on x=0, To on x=1 and (Ta+To)/2 on y=0, y=1 (2D).
// All powers are used verbatim on the nondimensional unit domain.

namespace xfmr {

struct PhysicsSpec {
    int dim = 1;          ///< spatial dimension, 1 or 2
    double k = 50.0;      ///< thermal conductivity, W/(m K)
    double rho = 900.0;   ///< density, kg/m^3
    double cp = 2000.0;   ///< heat capacity, J/(kg K)
    double h = 1000.0;    ///< convective coefficient, W/(m^2 K)
    double p0 = 1500.0;   ///< no-load loss, W
    double nu = 83000.0;  ///< rated load loss, W

    /// Transformer parameters for the given dimension (h doubles in 2D).
    static PhysicsSpec transformer(int dim);

    /// Throws ArgumentError unless dim is 1 or 2 and every coefficient is > 0.
    void validate() const;

    /// rho*cp expressed per hour, i.e. the coefficient multiplying du/dt
    /// when t is measured in hours.
    double capacity_per_hour() const { return rho * cp / 3600.0; }
};

/// A point of the unit interval or unit square. `y` is ignored in 1D.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Drive values at one instant. Build with `make` so that `tav` stays the
/// exact mean of `ta` and `to`.
struct DriveSample {
    double ta = 0.0;   ///< ambient temperature, C
    double to = 0.0;   ///< top-oil temperature, C
    double tav = 0.0;  ///< (ta + to) / 2, C
    double kf = 0.0;   ///< load factor, p.u.

    static DriveSample make(double ta, double to, double kf) { return {ta, to, (ta + to) / 2.0, kf}; }
};

/// Tolerance used to decide whether a point sits on the boundary.
inline constexpr double kBoundaryTol = 1e-12;

bool in_domain(Point x, int dim);
bool on_boundary(Point x, int dim);

/// Spatial load-loss shape: 0.5*sin(3*pi*x) + 0.5 in 1D, 1 in 2D.
double load_loss_spatial(Point x, int dim);

/// Temporal load loss nu*K^2.
double load_loss_temporal(double kf, double nu);

double source_q(const PhysicsSpec& spec, Point x, double u, const DriveSample& drive);

/// Source without the -h*u part: P0 + P_K + h*Ta. The full source equals
/// `source_affine_part - h*u`.
double source_affine_part(const PhysicsSpec& spec, Point x, const DriveSample& drive);

/// Dirichlet value on the boundary. At 2D corners the x=0 / x=1 edges win.
double boundary_value(const PhysicsSpec& spec, Point x, const DriveSample& drive);

}  // namespace xfmr
