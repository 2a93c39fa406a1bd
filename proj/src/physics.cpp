#include "xfmr/physics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "xfmr/errors.hpp"

namespace xfmr {

PhysicsSpec PhysicsSpec::transformer(int dim) {
    PhysicsSpec spec;
    spec.dim = dim;
    spec.h = dim == 2 ? 2000.0 : 1000.0;
    spec.validate();
    return spec;
}

void PhysicsSpec::validate() const {
    if (dim != 1 && dim != 2) {
        throw ArgumentError("physics: dim must be 1 or 2, got " + std::to_string(dim));
    }
    const struct {
        const char* name;
        double value;
    } fields[] = {{"k", k}, {"rho", rho}, {"cp", cp}, {"h", h}, {"p0", p0}, {"nu", nu}};
    for (const auto& f : fields) {
        if (!(f.value > 0.0) || !std::isfinite(f.value)) {
            std::ostringstream msg;
            msg << "physics: " << f.name << " must be finite and > 0, got " << f.value;
            throw ArgumentError(msg.str());
        }
    }
}

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void require_in_domain(Point x, int dim) {
    if (!in_domain(x, dim)) {
        std::ostringstream msg;
        msg << "point (" << x.x;
        if (dim == 2) msg << ", " << x.y;
        msg << ") outside the unit domain";
        throw DomainError(msg.str());
    }
}

}  // namespace

bool in_domain(Point x, int dim) {
    if (dim == 1) return in_unit(x.x);
    return in_unit(x.x) && in_unit(x.y);
}

bool on_boundary(Point x, int dim) {
    auto near = [](double v, double target) { return std::abs(v - target) <= kBoundaryTol; };
    bool on = near(x.x, 0.0) || near(x.x, 1.0);
    if (dim == 2) on = on || near(x.y, 0.0) || near(x.y, 1.0);
    return on;
}

double load_loss_spatial(Point x, int dim) {
    if (dim != 1 && dim != 2) throw ArgumentError("load_loss_spatial: dim must be 1 or 2");
    require_in_domain(x, dim);
    if (dim == 2) return 1.0;
    return 0.5 * std::sin(3.0 * std::numbers::pi * x.x) + 0.5;
}

double load_loss_temporal(double kf, double nu) {
    if (!(kf >= 0.0)) throw DomainError("load_loss_temporal: load factor must be >= 0");
    return nu * kf * kf;
}

double source_affine_part(const PhysicsSpec& spec, Point x, const DriveSample& drive) {
    return spec.p0 + load_loss_temporal(drive.kf, spec.nu) * load_loss_spatial(x, spec.dim) + spec.h * drive.ta;
}

double source_q(const PhysicsSpec& spec, Point x, double u, const DriveSample& drive) {
    return spec.p0 + load_loss_temporal(drive.kf, spec.nu) * load_loss_spatial(x, spec.dim) -
           spec.h * (u - drive.ta);
}

double boundary_value(const PhysicsSpec& spec, Point x, const DriveSample& drive) {
    require_in_domain(x, spec.dim);
    if (!on_boundary(x, spec.dim)) {
        throw PreconditionError("boundary_value: point is not on the boundary");
    }
    if (std::abs(x.x) <= kBoundaryTol) return drive.ta;
    if (std::abs(x.x - 1.0) <= kBoundaryTol) return drive.to;
    return drive.tav;
}

}  // namespace xfmr
