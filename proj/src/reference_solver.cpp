#include "xfmr/reference_solver.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "xfmr/errors.hpp"

namespace xfmr {

void GridSpec::validate() const {
    if (nx < 3) throw ArgumentError("grid: nx must be >= 3");
    if (nt < 1) throw ArgumentError("grid: nt must be >= 1");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ArgumentError("grid: t_end must be > 0");
}

GridSpec GridSpec::reference_default(int dim, double hours) {
    GridSpec g;
    g.nx = dim == 2 ? 101 : 201;
    g.t_end = hours;
    g.nt = std::max(1, static_cast<int>(std::lround(10.0 * hours)));
    return g;
}

FieldSeries::FieldSeries(int dim, int nx, std::vector<double> times, std::vector<double> values)
    : dim_(dim), nx_(nx), times_(std::move(times)), values_(std::move(values)) {
    if (dim_ != 1 && dim_ != 2) throw ArgumentError("field series: dim must be 1 or 2");
    if (nx_ < 2) throw ArgumentError("field series: nx must be >= 2");
    if (times_.empty()) throw ArgumentError("field series: no time levels");
    for (std::size_t n = 1; n < times_.size(); ++n) {
        if (!(times_[n] > times_[n - 1])) throw ArgumentError("field series: times must be strictly increasing");
    }
    if (values_.size() != times_.size() * nodes_per_level()) {
        throw ArgumentError("field series: value count does not match grid");
    }
}

GridSpec FieldSeries::grid() const {
    GridSpec g;
    g.nx = nx_;
    g.nt = static_cast<int>(times_.size()) - 1;
    g.t_end = times_.back();
    return g;
}

namespace {

/// Thomas algorithm for a constant-coefficient tridiagonal system
/// lower*x[i-1] + diag*x[i] + upper*x[i+1] = rhs[i]. Overwrites rhs with x.
class TridiagonalSolver {
public:
    TridiagonalSolver(std::size_t n, double lower, double diag, double upper) : c_(n), lower_(lower), diag_(diag) {
        double denom = diag;
        c_[0] = upper / denom;
        inv_denom_.resize(n);
        inv_denom_[0] = 1.0 / denom;
        for (std::size_t i = 1; i < n; ++i) {
            denom = diag - lower * c_[i - 1];
            inv_denom_[i] = 1.0 / denom;
            c_[i] = upper / denom;
        }
    }

    void solve(std::span<double> rhs) const {
        const std::size_t n = rhs.size();
        rhs[0] *= inv_denom_[0];
        for (std::size_t i = 1; i < n; ++i) rhs[i] = (rhs[i] - lower_ * rhs[i - 1]) * inv_denom_[i];
        for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c_[i] * rhs[i + 1];
    }

private:
    std::vector<double> c_;
    std::vector<double> inv_denom_;
    double lower_;
    double diag_;
};

void check_problem(const HeatProblem& p) {
    if (p.dim != 1 && p.dim != 2) throw ArgumentError("heat problem: dim must be 1 or 2");
    if (!(p.capacity > 0.0) || !(p.conductivity > 0.0) || !(p.reaction >= 0.0)) {
        throw ArgumentError("heat problem: capacity and conductivity must be > 0, reaction >= 0");
    }
    if (!p.source || !p.boundary) throw ArgumentError("heat problem: source and boundary are required");
}

std::vector<double> steady_1d(const HeatProblem& p, int nx) {
    const double dx = 1.0 / (nx - 1);
    const double kk = p.conductivity / (dx * dx);
    const std::size_t m = static_cast<std::size_t>(nx) - 2;
    std::vector<double> u(nx);
    u[0] = p.boundary({0.0, 0.0}, 0.0);
    u[nx - 1] = p.boundary({1.0, 0.0}, 0.0);
    std::vector<double> rhs(m);
    for (std::size_t i = 0; i < m; ++i) rhs[i] = p.source({(i + 1) * dx, 0.0}, 0.0);
    rhs[0] += kk * u[0];
    rhs[m - 1] += kk * u[nx - 1];
    TridiagonalSolver(m, -kk, 2.0 * kk + p.reaction, -kk).solve(rhs);
    std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
    return u;
}

std::vector<double> steady_2d(const HeatProblem& p, int nx) {
    const double dx = 1.0 / (nx - 1);
    const double kk = p.conductivity / (dx * dx);
    const int m = nx - 2;
    auto node = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
    auto unknown = [m](int i, int j) { return (j - 1) * m + (i - 1); };

    std::vector<double> u(static_cast<std::size_t>(nx) * nx, 0.0);
    for (int j = 0; j < nx; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i == 0 || j == 0 || i == nx - 1 || j == nx - 1) u[node(i, j)] = p.boundary({i * dx, j * dx}, 0.0);
        }
    }

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(m) * m * 5);
    Eigen::VectorXd rhs(m * m);
    for (int j = 1; j <= m; ++j) {
        for (int i = 1; i <= m; ++i) {
            const int row = unknown(i, j);
            entries.emplace_back(row, row, 4.0 * kk + p.reaction);
            double b = p.source({i * dx, j * dx}, 0.0);
            const int ni[4] = {i - 1, i + 1, i, i};
            const int nj[4] = {j, j, j - 1, j + 1};
            for (int q = 0; q < 4; ++q) {
                if (ni[q] == 0 || nj[q] == 0 || ni[q] == nx - 1 || nj[q] == nx - 1) {
                    b += kk * u[node(ni[q], nj[q])];
                } else {
                    entries.emplace_back(row, unknown(ni[q], nj[q]), -kk);
                }
            }
            rhs[row] = b;
        }
    }
    Eigen::SparseMatrix<double> a(m * m, m * m);
    a.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("steady initial state: factorization failed");
    Eigen::VectorXd sol = ldlt.solve(rhs);
    for (int j = 1; j <= m; ++j) {
        for (int i = 1; i <= m; ++i) u[node(i, j)] = sol[unknown(i, j)];
    }
    return u;
}

void check_finite(std::span<const double> level, std::size_t n) {
    for (double v : level) {
        if (!std::isfinite(v)) throw NumericError("reference solver: non-finite temperature", n);
    }
}

FieldSeries solve_heat_1d(const HeatProblem& p, const GridSpec& grid) {
    const int nx = grid.nx;
    const double dx = grid.dx();
    const double dt = grid.dt();
    const double kk = p.conductivity / (dx * dx);
    const std::size_t m = static_cast<std::size_t>(nx) - 2;

    std::vector<double> times(grid.nt + 1);
    for (int n = 0; n <= grid.nt; ++n) times[n] = n * dt;
    times.back() = grid.t_end;

    std::vector<double> values;
    values.reserve(times.size() * nx);

    std::vector<double> u;
    if (p.initial) {
        u.resize(nx);
        for (int i = 0; i < nx; ++i) u[i] = p.initial({i * dx, 0.0});
        u[0] = p.boundary({0.0, 0.0}, 0.0);
        u[nx - 1] = p.boundary({1.0, 0.0}, 0.0);
    } else {
        u = steady_1d(p, nx);
    }
    check_finite(u, 0);
    values.insert(values.end(), u.begin(), u.end());

    // (c/dt + r/2 + kk) u_i - kk/2 (u_{i-1} + u_{i+1}) = explicit half + sources
    const double c_dt = p.capacity / dt;
    const TridiagonalSolver solver(m, -0.5 * kk, c_dt + 0.5 * p.reaction + kk, -0.5 * kk);
    std::vector<double> src_old(m), src_new(m), rhs(m);
    for (std::size_t i = 0; i < m; ++i) src_old[i] = p.source({(i + 1) * dx, 0.0}, times[0]);

    for (int n = 0; n < grid.nt; ++n) {
        const double t_new = times[n + 1];
        const double left = p.boundary({0.0, 0.0}, t_new);
        const double right = p.boundary({1.0, 0.0}, t_new);
        for (std::size_t i = 0; i < m; ++i) src_new[i] = p.source({(i + 1) * dx, 0.0}, t_new);
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t k = i + 1;
            const double lap = kk * (u[k - 1] - 2.0 * u[k] + u[k + 1]);
            rhs[i] = (c_dt - 0.5 * p.reaction) * u[k] + 0.5 * lap + 0.5 * (src_old[i] + src_new[i]);
        }
        rhs[0] += 0.5 * kk * left;
        rhs[m - 1] += 0.5 * kk * right;
        solver.solve(rhs);
        u[0] = left;
        u[nx - 1] = right;
        std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
        std::swap(src_old, src_new);
        check_finite(u, n + 1);
        values.insert(values.end(), u.begin(), u.end());
    }
    return FieldSeries(1, nx, std::move(times), std::move(values));
}

FieldSeries solve_heat_2d(const HeatProblem& p, const GridSpec& grid) {
    const int nx = grid.nx;
    const double dx = grid.dx();
    const double dt = grid.dt();
    const double kk = p.conductivity / (dx * dx);
    const double c = p.capacity;
    const double r_half = 0.5 * p.reaction;
    const double tau = 0.5 * dt;
    const int m = nx - 2;
    const std::size_t per_level = static_cast<std::size_t>(nx) * nx;
    auto node = [nx](int i, int j) { return static_cast<std::size_t>(j) * nx + i; };
    auto is_boundary = [nx](int i, int j) { return i == 0 || j == 0 || i == nx - 1 || j == nx - 1; };

    std::vector<double> times(grid.nt + 1);
    for (int n = 0; n <= grid.nt; ++n) times[n] = n * dt;
    times.back() = grid.t_end;

    std::vector<double> values;
    values.reserve(times.size() * per_level);

    std::vector<double> u(per_level);
    if (p.initial) {
        for (int j = 0; j < nx; ++j) {
            for (int i = 0; i < nx; ++i) {
                u[node(i, j)] = is_boundary(i, j) ? p.boundary({i * dx, j * dx}, 0.0) : p.initial({i * dx, j * dx});
            }
        }
    } else {
        u = steady_2d(p, nx);
    }
    check_finite(u, 0);
    values.insert(values.end(), u.begin(), u.end());

    // Splitting: A1 = kk*dxx - r/2, A2 = kk*dyy - r/2, source at the half step.
    //   (c - tau*A1) u*      = (c + tau*A2) u^n + tau*S
    //   (c - tau*A2) u^{n+1} = (c + tau*A1) u*  + tau*S
    const TridiagonalSolver solver(m, -tau * kk, c + tau * (2.0 * kk + r_half), -tau * kk);
    std::vector<double> ustar(per_level, 0.0), g_old(per_level, 0.0), g_new(per_level, 0.0), src(per_level, 0.0);
    std::vector<double> line(m);

    auto fill_boundary = [&](std::vector<double>& g, double t) {
        for (int j = 0; j < nx; ++j) {
            for (int i = 0; i < nx; ++i) {
                if (is_boundary(i, j)) g[node(i, j)] = p.boundary({i * dx, j * dx}, t);
            }
        }
    };
    fill_boundary(g_old, 0.0);

    for (int n = 0; n < grid.nt; ++n) {
        const double t_new = times[n + 1];
        const double t_mid = 0.5 * (times[n] + t_new);
        fill_boundary(g_new, t_new);
        for (int j = 1; j <= m; ++j) {
            for (int i = 1; i <= m; ++i) src[node(i, j)] = p.source({i * dx, j * dx}, t_mid);
        }

        // Intermediate values on the x = 0 and x = 1 columns, consistent with
        // the two half steps: u* = (g^n + g^{n+1})/2 - tau/(2c) * A2 (g^{n+1} - g^n).
        for (int side : {0, nx - 1}) {
            for (int j = 1; j <= m; ++j) {
                auto diff = [&](int jj) { return g_new[node(side, jj)] - g_old[node(side, jj)]; };
                const double a2 = kk * (diff(j - 1) - 2.0 * diff(j) + diff(j + 1)) - r_half * diff(j);
                ustar[node(side, j)] =
                    0.5 * (g_old[node(side, j)] + g_new[node(side, j)]) - tau / (2.0 * c) * a2;
            }
        }

        // Sweep 1: implicit in x, one tridiagonal solve per interior row.
        for (int j = 1; j <= m; ++j) {
            for (int i = 1; i <= m; ++i) {
                const double uc = u[node(i, j)];
                const double a2 = kk * (u[node(i, j - 1)] - 2.0 * uc + u[node(i, j + 1)]) - r_half * uc;
                line[i - 1] = c * uc + tau * a2 + tau * src[node(i, j)];
            }
            line[0] += tau * kk * ustar[node(0, j)];
            line[m - 1] += tau * kk * ustar[node(nx - 1, j)];
            solver.solve(line);
            for (int i = 1; i <= m; ++i) ustar[node(i, j)] = line[i - 1];
        }

        // Sweep 2: implicit in y, one tridiagonal solve per interior column.
        std::vector<double> next = g_new;
        for (int i = 1; i <= m; ++i) {
            for (int j = 1; j <= m; ++j) {
                const double us = ustar[node(i, j)];
                const double a1 = kk * (ustar[node(i - 1, j)] - 2.0 * us + ustar[node(i + 1, j)]) - r_half * us;
                line[j - 1] = c * us + tau * a1 + tau * src[node(i, j)];
            }
            line[0] += tau * kk * g_new[node(i, 0)];
            line[m - 1] += tau * kk * g_new[node(i, nx - 1)];
            solver.solve(line);
            for (int j = 1; j <= m; ++j) next[node(i, j)] = line[j - 1];
        }
        u.swap(next);
        std::swap(g_old, g_new);
        check_finite(u, n + 1);
        values.insert(values.end(), u.begin(), u.end());
    }
    return FieldSeries(2, nx, std::move(times), std::move(values));
}

void check_drive_covers(const DriveSeries& drive, const GridSpec& grid) {
    if (drive.t_first() > 0.0 || drive.t_last() < grid.t_end) {
        std::ostringstream msg;
        msg << "reference solver: drive covers [" << drive.t_first() << ", " << drive.t_last()
            << "] but the run needs [0, " << grid.t_end << "]";
        throw RangeError(msg.str());
    }
}

}  // namespace

HeatProblem transformer_problem(const PhysicsSpec& spec, const DriveSeries& drive) {
    spec.validate();
    HeatProblem p;
    p.dim = spec.dim;
    p.capacity = spec.capacity_per_hour();
    p.conductivity = spec.k;
    p.reaction = spec.h;
    p.source = [spec, &drive](Point x, double t) { return source_affine_part(spec, x, drive.at(t)); };
    p.boundary = [spec, &drive](Point x, double t) { return boundary_value(spec, x, drive.at(t)); };
    return p;
}

FieldSeries solve_heat(const HeatProblem& problem, const GridSpec& grid) {
    grid.validate();
    check_problem(problem);
    return problem.dim == 1 ? solve_heat_1d(problem, grid) : solve_heat_2d(problem, grid);
}

FieldSeries solve_1d(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid) {
    if (spec.dim != 1) throw ArgumentError("solve_1d: physics dim must be 1");
    grid.validate();
    check_drive_covers(drive, grid);
    return solve_heat(transformer_problem(spec, drive), grid);
}

FieldSeries solve_2d(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid) {
    if (spec.dim != 2) throw ArgumentError("solve_2d: physics dim must be 2");
    grid.validate();
    check_drive_covers(drive, grid);
    return solve_heat(transformer_problem(spec, drive), grid);
}

FieldSeries solve_reference(const PhysicsSpec& spec, const DriveSeries& drive, const GridSpec& grid) {
    return spec.dim == 2 ? solve_2d(spec, drive, grid) : solve_1d(spec, drive, grid);
}

double relative_l2(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ArgumentError("relative_l2: shape mismatch");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        num += d * d;
        den += b[i] * b[i];
    }
    if (den == 0.0) throw DegenerateError("relative_l2: reference has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

double relative_l2(const FieldSeries& a, const FieldSeries& b) {
    if (a.dim() != b.dim() || a.nx() != b.nx() || a.levels() != b.levels()) {
        throw ArgumentError("relative_l2: field series shapes differ");
    }
    return relative_l2(std::span<const double>(a.values()), std::span<const double>(b.values()));
}

namespace {

/// Cell index and weight of `v` on a uniform [0,1] grid of n nodes.
std::pair<int, double> locate_uniform(double v, int n) {
    const double s = v * (n - 1);
    int i = static_cast<int>(std::floor(s));
    i = std::clamp(i, 0, n - 2);
    return {i, s - i};
}

}  // namespace

double sample_series(const FieldSeries& f, Point x, double t) {
    if (!in_domain(x, f.dim())) throw RangeError("sample_series: point outside the domain");
    const auto& times = f.times();
    if (!(t >= times.front() && t <= times.back())) throw RangeError("sample_series: time outside the series");

    std::size_t n0 = 0;
    double wt = 0.0;
    if (times.size() > 1) {
        auto it = std::upper_bound(times.begin(), times.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - times.begin());
        if (hi >= times.size()) hi = times.size() - 1;
        n0 = hi - 1;
        wt = (t - times[n0]) / (times[hi] - times[n0]);
    }
    const std::size_t n1 = times.size() > 1 ? n0 + 1 : 0;

    const auto [i, wx] = locate_uniform(x.x, f.nx());
    auto spatial = [&](std::size_t n) {
        if (f.dim() == 1) return (1.0 - wx) * f.value(n, i) + wx * f.value(n, i + 1);
        const auto [j, wy] = locate_uniform(x.y, f.nx());
        const double lo = (1.0 - wx) * f.value(n, i, j) + wx * f.value(n, i + 1, j);
        const double hi = (1.0 - wx) * f.value(n, i, j + 1) + wx * f.value(n, i + 1, j + 1);
        return (1.0 - wy) * lo + wy * hi;
    };
    const double a = spatial(n0);
    if (wt == 0.0) return a;
    return (1.0 - wt) * a + wt * spatial(n1);
}

}  // namespace xfmr
