#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace xfmr {

struct AdamOptions {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias-corrected moments.
class Adam {
public:
    Adam(std::size_t n, AdamOptions opts);

    void step(std::span<double> x, std::span<const double> grad);
    int steps_taken() const { return t_; }

private:
    AdamOptions opts_;
    std::vector<double> m_, v_;
    int t_ = 0;
};

/// f(x), writing the gradient into `grad`.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct LbfgsOptions {
    int history = 50;
    int max_iterations = 1000;
    int max_evaluations = 20000;
    int max_line_search = 50;
    /// Stops when the gradient infinity norm or the relative decrease
    /// (f_k - f_{k+1}) / max(|f_k|, |f_{k+1}|, 1) drops to this value.
    double tolerance = 1e-6;
    double c1 = 1e-4;
    double c2 = 0.9;
};

enum class LbfgsStop { GradientTolerance, RelativeDecrease, MaxIterations, MaxEvaluations, LineSearchFailed };

std::string to_string(LbfgsStop s);

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    int evaluations = 0;
    LbfgsStop stop = LbfgsStop::MaxIterations;
};

/// Called after every accepted iteration with its index (1-based), loss and point.
using IterationCallback = std::function<void(int iteration, double f, std::span<const double> x)>;

/// Unconstrained limited-memory BFGS with a strong-Wolfe line search
/// (bracketing plus cubic-interpolation zoom). The returned point is the best
/// one seen, so the reported loss sequence never increases.
LbfgsResult minimize_lbfgs(const Objective& objective, std::vector<double> x0, const LbfgsOptions& opts,
                           const IterationCallback& on_iteration = {});

}  // namespace xfmr
