#include "xfmr/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>

#include "csv_util.hpp"
#include "xfmr/errors.hpp"
#include "xfmr/optim.hpp"

namespace xfmr {

void write_report_csv(std::ostream& os, const TrainReport& report) {
    using detail::format_double;
    os << "epoch,mse,mse_u,mse_f,rel_l2_field,rel_l2_top\n";
    for (const auto& e : report.epochs) {
        os << e.epoch << ',' << format_double(e.loss.mse) << ',' << format_double(e.loss.mse_u) << ','
           << format_double(e.loss.mse_f) << ',' << format_double(e.metrics.rel_l2_field) << ','
           << format_double(e.metrics.rel_l2_top) << '\n';
    }
}

void ReportSink::record(const std::string& stage, const NetworkParams& params, const LossBreakdown& loss) {
    EpochRecord rec;
    rec.epoch = static_cast<int>(report_.epochs.size()) + 1;
    rec.stage = stage;
    rec.loss = loss;
    if (probe_) rec.metrics = probe_->evaluate(params);
    report_.epochs.push_back(std::move(rec));
}

StageResult train_adam(const NetworkParams& start, const PinnLoss& loss, const TrainConfig& cfg, ReportSink* sink) {
    StageResult res{start, 0, 0, false, {}};
    Adam adam(start.size(), AdamOptions{cfg.adam_lr, 0.9, 0.999, cfg.adam_epsilon});
    NetworkParams current = start;
    std::vector<double> grad(start.size());
    for (int epoch = 0; epoch < cfg.adam_epochs; ++epoch) {
        LossBreakdown b;
        try {
            b = loss.evaluate(current, grad);
        } catch (const NumericError& e) {
            res.aborted = true;
            res.message = std::string("adam epoch ") + std::to_string(epoch + 1) + ": " + e.what();
            break;
        }
        ++res.evaluations;
        if (!std::isfinite(b.mse)) {
            res.aborted = true;
            res.message = "adam epoch " + std::to_string(epoch + 1) + ": non-finite loss";
            break;
        }
        if (sink) sink->record("adam", current, b);
        res.params = current;
        adam.step(current.flat(), grad);
        ++res.iterations;
    }
    if (!res.aborted) res.params = current;
    return res;
}

StageResult train_lbfgs(const NetworkParams& start, const PinnLoss& loss, const TrainConfig& cfg, ReportSink* sink) {
    StageResult res{start, 0, 0, false, {}};
    if (cfg.lbfgs_epochs == 0) return res;

    // Breakdown of every evaluation since the last accepted iteration, so the
    // accepted point's components can be reported without re-evaluating.
    std::vector<std::pair<std::vector<double>, LossBreakdown>> recent;
    NetworkParams scratch = start;

    Objective objective = [&](std::span<const double> x, std::span<double> g) {
        std::copy(x.begin(), x.end(), scratch.flat().begin());
        try {
            const LossBreakdown b = loss.evaluate(scratch, g);
            recent.emplace_back(std::vector<double>(x.begin(), x.end()), b);
            return b.mse;
        } catch (const NumericError&) {
            std::fill(g.begin(), g.end(), 0.0);
            return std::numeric_limits<double>::infinity();
        }
    };

    LbfgsOptions opts;
    opts.history = cfg.lbfgs_history;
    opts.max_iterations = cfg.lbfgs_epochs;
    opts.max_evaluations = cfg.lbfgs_max_evals;
    opts.max_line_search = cfg.lbfgs_max_line_search;
    opts.tolerance = cfg.lbfgs_tolerance;

    auto on_iteration = [&](int, double f, std::span<const double> x) {
        LossBreakdown b{f, 0.0, 0.0};
        for (auto it = recent.rbegin(); it != recent.rend(); ++it) {
            if (std::equal(it->first.begin(), it->first.end(), x.begin())) {
                b = it->second;
                break;
            }
        }
        recent.clear();
        if (sink) {
            NetworkParams p(start.spec(), std::vector<double>(x.begin(), x.end()));
            sink->record("lbfgs", p, b);
        }
    };

    try {
        LbfgsResult r = minimize_lbfgs(objective, start.vector(), opts, on_iteration);
        res.params = NetworkParams(start.spec(), std::move(r.x));
        res.iterations = r.iterations;
        res.evaluations = r.evaluations;
        res.message = to_string(r.stop);
    } catch (const NumericError& e) {
        res.aborted = true;
        res.message = std::string("lbfgs: ") + e.what();
    }
    return res;
}

TrainingRun run_training(const PhysicsSpec& spec, const DriveSeries& drive, double horizon,
                         const FieldSeries& reference, const TrainConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    cfg.validate();
    spec.validate();

    const Scaler scaler = fit_scaler(drive, spec.dim, horizon);
    const TrainingSets sets = sample_training_sets(spec, drive, horizon, cfg, &reference);
    const PinnLoss loss(spec, scaler, sets, cfg);

    const NetSpec net = NetSpec::for_physics(spec.dim, cfg.hidden_layers, cfg.hidden_width);
    TrainingRun run{PinnModel{spec, scaler, init_xavier(net, cfg.seed)}, {}, {}, false, {}};
    const MetricsProbe probe(run.model, reference, drive);
    ReportSink sink(run.report, &probe);

    StageResult adam = train_adam(run.model.params, loss, cfg, &sink);
    run.model.params = adam.params;
    if (adam.aborted) {
        run.aborted = true;
        run.message = adam.message;
    } else {
        StageResult lbfgs = train_lbfgs(run.model.params, loss, cfg, &sink);
        run.model.params = lbfgs.params;
        run.aborted = lbfgs.aborted;
        run.message = lbfgs.message;
    }
    run.final_metrics = eval_metrics(run.model, reference, drive);
    run.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

}  // namespace xfmr
