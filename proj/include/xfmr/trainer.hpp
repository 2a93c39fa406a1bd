#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "xfmr/pinn.hpp"

namespace xfmr {

struct EpochRecord {
    int epoch = 0;
    std::string stage;
    LossBreakdown loss;
    Metrics metrics;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    double wall_seconds = 0.0;
};

/// CSV `epoch,mse,mse_u,mse_f,rel_l2_field,rel_l2_top`.
void write_report_csv(std::ostream& os, const TrainReport& report);

/// Appends one record per epoch; metrics come from the probe when given.
class ReportSink {
public:
    ReportSink(TrainReport& report, const MetricsProbe* probe) : report_(report), probe_(probe) {}

    void record(const std::string& stage, const NetworkParams& params, const LossBreakdown& loss);

private:
    TrainReport& report_;
    const MetricsProbe* probe_;
};

struct StageResult {
    NetworkParams params;
    int iterations = 0;
    int evaluations = 0;
    bool aborted = false;   ///< non-finite loss; `params` is the last finite state
    std::string message;
};

/// Full-batch Adam for cfg.adam_epochs epochs (beta1 0.9, beta2 0.999,
/// epsilon cfg.adam_epsilon). Each epoch records the loss at the parameters
/// the gradient was taken at.
StageResult train_adam(const NetworkParams& start, const PinnLoss& loss, const TrainConfig& cfg, ReportSink* sink);

/// L-BFGS with cfg's history, evaluation budget, line-search cap and
/// tolerance; one epoch per accepted iteration.
StageResult train_lbfgs(const NetworkParams& start, const PinnLoss& loss, const TrainConfig& cfg, ReportSink* sink);

struct TrainingRun {
    PinnModel model;
    TrainReport report;
    Metrics final_metrics;
    bool aborted = false;
    std::string message;
};

/// fit_scaler -> sample_training_sets -> Adam -> L-BFGS -> eval_metrics.
TrainingRun run_training(const PhysicsSpec& spec, const DriveSeries& drive, double horizon,
                         const FieldSeries& reference, const TrainConfig& cfg);

}  // namespace xfmr
