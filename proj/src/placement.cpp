#include "xfmr/placement.hpp"

#include <algorithm>
#include <cmath>

#include "xfmr/errors.hpp"
#include "xfmr/pinn.hpp"

namespace xfmr {

double PlacementGrid::distance(std::size_t i, std::size_t j) const {
    const double dx = points[i].x - points[j].x;
    const double dy = dim == 2 ? points[i].y - points[j].y : 0.0;
    return std::sqrt(dx * dx + dy * dy);
}

namespace {

std::vector<double> axis_nodes(int n, double margin) {
    const double lo = margin + kGridInset;
    const double hi = 1.0 - margin - kGridInset;
    if (n == 1) return {0.5};
    if (!(lo < hi)) throw ArgumentError("build_grid: margin leaves no room for " + std::to_string(n) + " nodes");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    v.back() = hi;
    return v;
}

}  // namespace

PlacementGrid build_grid(int dim, int nx, int ny, double margin) {
    if (dim != 1 && dim != 2) throw ArgumentError("build_grid: dim must be 1 or 2");
    if (dim == 1) ny = 1;
    if (nx < 1 || ny < 1) throw ArgumentError("build_grid: nx and ny must be >= 1");
    if (!(margin >= 0.0 && margin < 0.5)) throw ArgumentError("build_grid: margin must lie in [0, 0.5)");

    PlacementGrid g;
    g.dim = dim;
    g.nx = nx;
    g.ny = ny;
    g.margin = margin;
    const auto xs = axis_nodes(nx, margin);
    const auto ys = dim == 2 ? axis_nodes(ny, margin) : std::vector<double>{0.0};
    g.points.reserve(xs.size() * ys.size());
    for (double y : ys)
        for (double x : xs) g.points.push_back({x, y});
    return g;
}

PlacementGrid grid_from_points(int dim, std::vector<Point> points) {
    if (dim != 1 && dim != 2) throw ArgumentError("grid_from_points: dim must be 1 or 2");
    for (const auto& p : points) {
        if (!in_domain(p, dim)) throw DomainError("grid_from_points: point outside the domain");
    }
    PlacementGrid g;
    g.dim = dim;
    g.nx = static_cast<int>(points.size());
    g.ny = 1;
    g.points = std::move(points);
    return g;
}

DivergenceFn field_divergence(const FieldSeries& field) {
    return [field](std::span<const Point> points, double t) {
        const double h = 1.0 / (field.nx() - 1);
        std::vector<double> out(points.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            const Point p = points[k];
            if (!in_domain(p, field.dim())) throw RangeError("field_divergence: point outside the domain");
            const double xl = std::max(0.0, p.x - h), xr = std::min(1.0, p.x + h);
            double div = (sample_series(field, {xr, p.y}, t) - sample_series(field, {xl, p.y}, t)) / (xr - xl);
            if (field.dim() == 2) {
                const double yl = std::max(0.0, p.y - h), yr = std::min(1.0, p.y + h);
                div += (sample_series(field, {p.x, yr}, t) - sample_series(field, {p.x, yl}, t)) / (yr - yl);
            }
            out[k] = div;
        }
        return out;
    };
}

DivergenceFn pinn_divergence(const PinnModel& model, const DriveSeries& drive) {
    return [model, drive](std::span<const Point> points, double t) {
        std::vector<SpaceTimePoint> q;
        q.reserve(points.size());
        for (const auto& p : points) {
            if (!in_domain(p, model.physics.dim)) throw RangeError("pinn_divergence: point outside the domain");
            q.push_back(make_point(drive, p, t));
        }
        const auto jets = model.jets(q);
        std::vector<double> out(points.size());
        for (std::size_t k = 0; k < jets.size(); ++k) {
            out[k] = jets[k].grad_x[0] + (model.physics.dim == 2 ? jets[k].grad_x[1] : 0.0);
        }
        return out;
    };
}

std::vector<double> hourly_times(double horizon) {
    if (!(horizon >= 0.0)) throw ArgumentError("hourly_times: horizon must be >= 0");
    std::vector<double> t;
    for (int h = 0; h <= static_cast<int>(std::floor(horizon + 1e-9)); ++h) t.push_back(h);
    return t;
}

ScoreField score_field(const DivergenceFn& div, const PlacementGrid& grid, std::span<const double> times) {
    if (times.empty()) throw ArgumentError("score_field: no times");
    ScoreField s;
    s.abs_score.assign(grid.size(), 0.0);
    s.signed_score.assign(grid.size(), 0.0);
    s.times.assign(times.begin(), times.end());
    for (double t : times) {
        const auto v = div(grid.points, t);
        if (v.size() != grid.size()) throw ArgumentError("score_field: source returned the wrong size");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i])) throw NumericError("score_field: non-finite divergence", i);
            s.abs_score[i] += std::abs(v[i]);
            s.signed_score[i] += v[i];
        }
    }
    const double n = static_cast<double>(times.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        s.abs_score[i] /= n;
        s.signed_score[i] /= n;
    }
    return s;
}

ScoreField scores_from_values(std::vector<double> abs_score) {
    for (double a : abs_score) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw ArgumentError("scores_from_values: scores must be finite and >= 0");
    }
    ScoreField s;
    s.signed_score = abs_score;
    s.abs_score = std::move(abs_score);
    return s;
}

void PlacementConfig::validate(std::size_t candidates) const {
    if (n_min < 1 || n_min > n_max) throw ArgumentError("placement: need 1 <= n_min <= n_max");
    if (static_cast<std::size_t>(n_max) > candidates) {
        throw ArgumentError("placement: n_max exceeds the candidate count " + std::to_string(candidates));
    }
    if (!(d >= 0.0) || !(d <= d1)) throw ArgumentError("placement: need 0 <= d <= d1");
    if (!(margin >= 0.0 && margin < 0.5)) throw ArgumentError("placement: margin must lie in [0, 0.5)");
    if (!(big_m > 0.0)) throw ArgumentError("placement: big_m must be > 0");
}

Eigen::MatrixXd overlap_cost(const PlacementGrid& grid, const ScoreField& scores, double d1, bool signed_costs) {
    if (!(d1 >= 0.0)) throw ArgumentError("overlap_cost: d1 must be >= 0");
    if (scores.abs_score.size() != grid.size()) throw ArgumentError("overlap_cost: score/grid size mismatch");
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            const double gap = d1 - grid.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            c(i, j) = signed_costs ? scores.signed_score[static_cast<std::size_t>(i)] * gap
                                   : scores.abs_score[static_cast<std::size_t>(i)] * std::max(0.0, gap);
        }
    }
    return c;
}

std::string to_string(SolverKind s) {
    switch (s) {
        case SolverKind::Analytic: return "analytic";
        case SolverKind::Exhaustive: return "exhaustive";
        case SolverKind::BranchAndBound: return "branch-and-bound";
    }
    return "unknown";
}

PlacementInstance::PlacementInstance(int model_, PlacementGrid grid_, ScoreField scores_, PlacementConfig cfg_)
    : model(model_), grid(std::move(grid_)), scores(std::move(scores_)), cfg(cfg_) {
    if (model < 1 || model > 3) throw ArgumentError("placement: model must be 1, 2 or 3");
    if (scores.abs_score.size() != grid.size() || scores.signed_score.size() != grid.size()) {
        throw ArgumentError("placement: score/grid size mismatch");
    }
    cfg.validate(grid.size());
    if (model == 3) {
        cost = overlap_cost(grid, scores, cfg.d1, cfg.signed_costs);
        if (!big_m_sufficient(cost, cfg.big_m)) {
            throw ArgumentError("placement: big_m is smaller than the largest possible overlap cost");
        }
    }
}

bool PlacementInstance::conflict(std::size_t i, std::size_t j) const {
    return model >= 2 && i != j && grid.distance(i, j) < cfg.d;
}

double PlacementInstance::objective(std::span<const int> selected) const {
    double total = 0.0;
    for (int i : selected) total += scores.abs_score[static_cast<std::size_t>(i)];
    if (model == 3) {
        for (int i : selected)
            for (int j : selected)
                if (i != j) total += cost(i, j);
    }
    return total;
}

bool big_m_sufficient(const Eigen::MatrixXd& cost, double big_m) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        double pos = 0.0, neg = 0.0;
        for (Eigen::Index j = 0; j < cost.cols(); ++j) {
            if (cost(i, j) > 0.0) pos += cost(i, j);
            else neg -= cost(i, j);
        }
        if (std::max(pos, neg) > big_m) return false;
    }
    return true;
}

std::vector<std::string> validate_solution(const PlacementInstance& inst, const PlacementSolution& sol) {
    std::vector<std::string> problems;
    const std::size_t n = inst.size();
    if (sol.s.size() != n) {
        problems.push_back("selection vector has the wrong length");
        return problems;
    }
    if (sol.model != inst.model) problems.push_back("model id mismatch");

    std::vector<int> idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (sol.s[i] > 1) problems.push_back("non-binary entry at " + std::to_string(i));
        if (sol.s[i] == 1) idx.push_back(static_cast<int>(i));
    }
    if (idx != sol.selected) problems.push_back("index list disagrees with the selection vector");
    const int count = static_cast<int>(idx.size());
    if (count < inst.cfg.n_min || count > inst.cfg.n_max) {
        problems.push_back("sensor count " + std::to_string(count) + " outside [n_min, n_max]");
    }
    if (inst.model >= 2) {
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = a + 1; b < idx.size(); ++b) {
                const auto i = static_cast<std::size_t>(idx[a]), j = static_cast<std::size_t>(idx[b]);
                const double dist = inst.grid.distance(i, j);
                if (dist < inst.cfg.d) {
                    problems.push_back("sensors " + std::to_string(i) + " and " + std::to_string(j) +
                                       " closer than d");
                }
            }
    }

    double linear = 0.0;
    for (std::size_t i = 0; i < n; ++i) linear += inst.scores.abs_score[i] * sol.s[i];
    double expected = linear;
    if (inst.model == 3) {
        const double m = inst.cfg.big_m;
        double sum_l = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double ci = 0.0;
            for (std::size_t j = 0; j < n; ++j) ci += inst.cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * sol.s[j];
            const double si = sol.s[i];
            const double li = si * ci;
            const double slack = 1e-9 * (1.0 + std::abs(ci));
            const bool ok = ci - m * (1.0 - si) <= li + slack && li <= ci + m * (1.0 - si) + slack &&
                            li <= m * si + slack && li >= -m * si - slack;
            if (!ok) problems.push_back("big-M link violated at " + std::to_string(i));
            sum_l += li;
        }
        expected += sum_l;
    }
    if (std::abs(expected - sol.objective) > 1e-9 * (1.0 + std::abs(expected))) {
        problems.push_back("objective does not match the recomputed value");
    }
    return problems;
}

}  // namespace xfmr
