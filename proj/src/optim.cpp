#include "xfmr/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "xfmr/errors.hpp"

namespace xfmr {

Adam::Adam(std::size_t n, AdamOptions opts) : opts_(opts), m_(n, 0.0), v_(n, 0.0) {
    if (!(opts_.lr > 0.0) || !(opts_.epsilon > 0.0)) throw ArgumentError("adam: lr and epsilon must be > 0");
}

void Adam::step(std::span<double> x, std::span<const double> grad) {
    if (x.size() != m_.size() || grad.size() != m_.size()) throw ArgumentError("adam: size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(opts_.beta1, t_);
    const double c2 = 1.0 - std::pow(opts_.beta2, t_);
    for (std::size_t i = 0; i < x.size(); ++i) {
        m_[i] = opts_.beta1 * m_[i] + (1.0 - opts_.beta1) * grad[i];
        v_[i] = opts_.beta2 * v_[i] + (1.0 - opts_.beta2) * grad[i] * grad[i];
        const double mhat = m_[i] / c1;
        const double vhat = v_[i] / c2;
        x[i] -= opts_.lr * mhat / (std::sqrt(vhat) + opts_.epsilon);
    }
}

std::string to_string(LbfgsStop s) {
    switch (s) {
        case LbfgsStop::GradientTolerance: return "gradient-tolerance";
        case LbfgsStop::RelativeDecrease: return "relative-decrease";
        case LbfgsStop::MaxIterations: return "max-iterations";
        case LbfgsStop::MaxEvaluations: return "max-evaluations";
        case LbfgsStop::LineSearchFailed: return "line-search-failed";
    }
    return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double inf_norm(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

struct TrialPoint {
    double t = 0.0;
    double f = 0.0;
    double gtd = 0.0;
    std::vector<double> g;
};

/// Minimizer of the cubic interpolating two (t, f, f') samples, clamped to
/// [lo, hi]; falls back to the midpoint when the cubic has no minimizer.
double cubic_step(const TrialPoint& a, const TrialPoint& b, double lo, double hi) {
    const double d1 = a.gtd + b.gtd - 3.0 * (a.f - b.f) / (a.t - b.t);
    const double d2_sq = d1 * d1 - a.gtd * b.gtd;
    if (d2_sq >= 0.0) {
        const double d2 = std::sqrt(d2_sq);
        double t;
        if (a.t <= b.t) {
            t = b.t - (b.t - a.t) * ((b.gtd + d2 - d1) / (b.gtd - a.gtd + 2.0 * d2));
        } else {
            t = a.t - (a.t - b.t) * ((a.gtd + d2 - d1) / (a.gtd - b.gtd + 2.0 * d2));
        }
        if (std::isfinite(t)) return std::clamp(t, lo, hi);
    }
    return 0.5 * (lo + hi);
}

class LineSearch {
public:
    LineSearch(const Objective& obj, std::span<const double> x, std::span<const double> dir, const LbfgsOptions& opts,
               int& evaluations)
        : obj_(obj), x_(x), dir_(dir), opts_(opts), evals_(evaluations), trial_(x.size()) {}

    /// Returns the accepted point, or the lowest point with sufficient
    /// decrease when the strong Wolfe conditions could not be met; `ok`
    /// tells which. A returned t of 0 means no progress.
    TrialPoint run(double f0, std::span<const double> g0, double gtd0, double t_init, bool& ok) {
        ok = false;
        TrialPoint origin{0.0, f0, gtd0, std::vector<double>(g0.begin(), g0.end())};
        TrialPoint prev = origin;
        TrialPoint cur = eval(t_init);
        int ls = 1;
        TrialPoint lo, hi;

        auto armijo_fails = [&](const TrialPoint& p) { return !(p.f <= f0 + opts_.c1 * p.t * gtd0); };
        auto curvature_ok = [&](const TrialPoint& p) { return std::abs(p.gtd) <= -opts_.c2 * gtd0; };

        while (true) {
            if (armijo_fails(cur) || (ls > 1 && cur.f >= prev.f)) {
                lo = prev;
                hi = cur;
                break;
            }
            if (curvature_ok(cur)) {
                ok = true;
                return cur;
            }
            if (cur.gtd >= 0.0) {
                lo = cur;
                hi = prev;
                break;
            }
            if (ls >= opts_.max_line_search || budget_exhausted()) return cur;
            const double lo_t = cur.t + 0.01 * (cur.t - prev.t);
            const double hi_t = cur.t * 10.0;
            const double next = cubic_step(prev, cur, lo_t, hi_t);
            prev = std::move(cur);
            cur = eval(next);
            ++ls;
        }

        const double dir_scale = std::max(inf_norm(dir_), 1e-300);
        while (ls < opts_.max_line_search && !budget_exhausted()) {
            const double a = std::min(lo.t, hi.t);
            const double b = std::max(lo.t, hi.t);
            if ((b - a) * dir_scale < 1e-14) break;
            double t = cubic_step(lo, hi, a, b);
            // Keep trial points away from the bracket ends.
            const double margin = 0.1 * (b - a);
            if (t - a < margin || b - t < margin) t = 0.5 * (a + b);
            TrialPoint p = eval(t);
            ++ls;
            if (armijo_fails(p) || p.f >= lo.f) {
                hi = std::move(p);
            } else {
                if (curvature_ok(p)) {
                    ok = true;
                    return p;
                }
                if (p.gtd * (hi.t - lo.t) >= 0.0) hi = lo;
                lo = std::move(p);
            }
        }
        return lo;
    }

private:
    bool budget_exhausted() const { return evals_ >= opts_.max_evaluations; }

    TrialPoint eval(double t) {
        TrialPoint p;
        p.t = t;
        for (std::size_t i = 0; i < x_.size(); ++i) trial_[i] = x_[i] + t * dir_[i];
        p.g.assign(x_.size(), 0.0);
        p.f = obj_(trial_, p.g);
        ++evals_;
        if (!std::isfinite(p.f)) p.f = std::numeric_limits<double>::infinity();
        p.gtd = dot(p.g, dir_);
        if (!std::isfinite(p.gtd)) p.gtd = 0.0;
        return p;
    }

    const Objective& obj_;
    std::span<const double> x_;
    std::span<const double> dir_;
    const LbfgsOptions& opts_;
    int& evals_;
    std::vector<double> trial_;
};

}  // namespace

LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsOptions& opts,
                           const IterationCallback& on_iteration) {
    if (opts.history < 1 || opts.max_line_search < 1 || opts.max_evaluations < 1) {
        throw ArgumentError("lbfgs: history, line-search and evaluation budgets must be >= 1");
    }
    const std::size_t n = x0.size();
    LbfgsResult res;
    res.x = std::move(x0);
    std::vector<double> g(n);
    res.f = objective(res.x, g);
    res.evaluations = 1;
    if (!std::isfinite(res.f)) throw NumericError("lbfgs: non-finite objective at the starting point", 0);
    if (inf_norm(g) <= opts.tolerance) {
        res.stop = LbfgsStop::GradientTolerance;
        return res;
    }

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> d(n), alpha(static_cast<std::size_t>(opts.history));

    res.stop = LbfgsStop::MaxIterations;
    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        // Two-loop recursion: d = -H g.
        for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
        const std::size_t m = s_hist.size();
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * dot(s_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y_hist[k][i];
        }
        if (m > 0) {
            const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : d) v *= gamma;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s_hist[k][i];
        }
        double gtd = dot(g, d);
        if (!(gtd < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            gtd = dot(g, d);
        }

        double t_init = 1.0;
        if (s_hist.empty()) {
            double l1 = 0.0;
            for (double v : g) l1 += std::abs(v);
            t_init = std::min(1.0, 1.0 / l1);
        }

        bool ok = false;
        LineSearch ls(objective, res.x, d, opts, res.evaluations);
        TrialPoint p = ls.run(res.f, g, gtd, t_init, ok);
        if (!(p.t > 0.0) || !(p.f < res.f)) {
            res.stop = LbfgsStop::LineSearchFailed;
            break;
        }

        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = p.t * d[i];
            y[i] = p.g[i] - g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            if (static_cast<int>(s_hist.size()) == opts.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }

        const double f_old = res.f;
        for (std::size_t i = 0; i < n; ++i) res.x[i] += p.t * d[i];
        res.f = p.f;
        g = std::move(p.g);
        res.iterations = iter;
        if (on_iteration) on_iteration(iter, res.f, res.x);

        if (inf_norm(g) <= opts.tolerance) {
            res.stop = LbfgsStop::GradientTolerance;
            break;
        }
        if ((f_old - res.f) / std::max({std::abs(f_old), std::abs(res.f), 1.0}) <= opts.tolerance) {
            res.stop = LbfgsStop::RelativeDecrease;
            break;
        }
        if (res.evaluations >= opts.max_evaluations) {
            res.stop = LbfgsStop::MaxEvaluations;
            break;
        }
    }
    return res;
}

}  // namespace xfmr
