#include "xfmr/pinn.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "xfmr/errors.hpp"

namespace xfmr {

namespace {

constexpr Eigen::Index kChunk = 4096;

}  // namespace

SpaceTimePoint make_point(const DriveSeries& drive, Point x, double t) { return {x, t, drive.at(t)}; }

double residual_from_jet(const PhysicsSpec& spec, const SpaceTimePoint& p, const Jet& jet, double beta) {
    if (!std::isfinite(jet.u) || !std::isfinite(jet.du_dt) || !std::isfinite(jet.lap_x)) {
        throw NumericError("residual: non-finite temperature jet", 0);
    }
    const double f = spec.capacity_per_hour() * jet.du_dt - spec.k * jet.lap_x - source_q(spec, p.x, jet.u, p.drive);
    return f / beta;
}

std::vector<int> PinnModel::jet_directions() const {
    const InputLayout l = layout();
    std::vector<int> dirs{l.t(), l.x()};
    if (physics.dim == 2) dirs.push_back(l.y());
    return dirs;
}

Eigen::MatrixXd PinnModel::encode(std::span<const SpaceTimePoint> points) const {
    const InputLayout l = layout();
    Eigen::MatrixXd z(l.size(), static_cast<Eigen::Index>(points.size()));
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto c = static_cast<Eigen::Index>(i);
        z(l.x(), c) = scaler.standardize(l.x(), p.x.x);
        if (physics.dim == 2) z(l.y(), c) = scaler.standardize(l.y(), p.x.y);
        z(l.t(), c) = scaler.standardize(l.t(), p.t);
        z(l.kf(), c) = scaler.standardize(l.kf(), p.drive.kf);
        z(l.ta(), c) = scaler.standardize(l.ta(), p.drive.ta);
        z(l.to(), c) = scaler.standardize(l.to(), p.drive.to);
    }
    return z;
}

double PinnModel::predict(const SpaceTimePoint& p) const {
    return predict(std::span<const SpaceTimePoint>(&p, 1))[0];
}

Eigen::VectorXd PinnModel::predict(std::span<const SpaceTimePoint> points) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
    for (std::size_t start = 0; start < points.size(); start += kChunk) {
        const auto len = std::min<std::size_t>(kChunk, points.size() - start);
        const Eigen::VectorXd v = forward_batch(params, encode(points.subspan(start, len)));
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            out[static_cast<Eigen::Index>(start) + i] = scaler.denormalize(v[i]);
        }
    }
    return out;
}

Jet PinnModel::to_physical(const JetBatch& batch, Eigen::Index i) const {
    const InputLayout l = layout();
    Jet j;
    j.dim = physics.dim;
    j.u = scaler.denormalize(batch.value[i]);
    j.du_dt = scaler.out_std * batch.first(i, 0) * scaler.slope(l.t());
    for (int d = 0; d < physics.dim; ++d) {
        const double s = scaler.slope(d == 0 ? l.x() : l.y());
        j.grad_x[d] = scaler.out_std * batch.first(i, 1 + d) * s;
        j.lap_x += scaler.out_std * batch.second(i, 1 + d) * s * s;
    }
    return j;
}

std::vector<Jet> PinnModel::jets(std::span<const SpaceTimePoint> points) const {
    std::vector<Jet> out;
    out.reserve(points.size());
    for (std::size_t start = 0; start < points.size(); start += kChunk) {
        const auto len = std::min<std::size_t>(kChunk, points.size() - start);
        JetTape tape(params, encode(points.subspan(start, len)), jet_directions());
        for (Eigen::Index i = 0; i < tape.batch_size(); ++i) out.push_back(to_physical(tape.outputs(), i));
    }
    return out;
}

Jet PinnModel::jet(const SpaceTimePoint& p) const { return jets(std::span<const SpaceTimePoint>(&p, 1))[0]; }

double residual(const PinnModel& model, const SpaceTimePoint& p, double beta) {
    if (!(beta > 0.0)) throw ArgumentError("residual: beta must be > 0");
    return residual_from_jet(model.physics, p, model.jet(p), beta);
}

TrainConfig TrainConfig::full(int dim) {
    TrainConfig c;
    if (dim == 2) {
        c.adam_lr = 1e-4;
        c.lbfgs_tolerance = 1e-3;
        c.n_f = 40400;
        c.n_u = 20200;
    }
    return c;
}

TrainConfig TrainConfig::desk(int dim) {
    TrainConfig c = full(dim);
    c.hidden_layers = 4;
    c.hidden_width = 20;
    c.n_f = dim == 2 ? 4000 : 2000;
    c.n_u = dim == 2 ? 400 : 200;
    c.adam_epochs = 2000;
    c.adam_lr = 1e-3;
    c.lbfgs_epochs = 500;
    return c;
}

void TrainConfig::validate() const {
    if (hidden_layers < 1 || hidden_width < 1) throw ArgumentError("train: network must have >= 1 layer and width");
    if (n_u < 1 || n_f < 1) throw ArgumentError("train: n_u and n_f must be >= 1");
    if (!(lambda_u >= 0.0) || !(lambda_f >= 0.0)) throw ArgumentError("train: loss weights must be >= 0");
    if (!(beta > 0.0)) throw ArgumentError("train: beta must be > 0");
    if (adam_epochs < 0 || lbfgs_epochs < 0) throw ArgumentError("train: epoch counts must be >= 0");
    if (!(adam_lr > 0.0) || !(adam_epsilon > 0.0)) throw ArgumentError("train: adam lr and epsilon must be > 0");
    if (lbfgs_max_evals < 1 || lbfgs_history < 1 || lbfgs_max_line_search < 1) {
        throw ArgumentError("train: L-BFGS budgets must be >= 1");
    }
    if (!(lbfgs_tolerance >= 0.0)) throw ArgumentError("train: L-BFGS tolerance must be >= 0");
}

TrainingSets sample_training_sets(const PhysicsSpec& spec, const DriveSeries& drive, double horizon,
                                  const TrainConfig& cfg, const FieldSeries* initial_reference) {
    spec.validate();
    cfg.validate();
    if (!(horizon > 0.0)) throw ArgumentError("sample_training_sets: horizon must be > 0");
    TrainingSets sets;

    std::vector<Point> perimeter;
    if (spec.dim == 1) {
        perimeter = {{0.0, 0.0}, {1.0, 0.0}};
    } else {
        const int per_edge = std::max(1, static_cast<int>(std::lround(std::sqrt(static_cast<double>(cfg.n_u)) / 4.0)));
        const int total = 4 * per_edge;
        for (int k = 0; k < total; ++k) {
            const double s = 4.0 * (k + 0.5) / total;
            if (s < 1.0) {
                perimeter.push_back({s, 0.0});
            } else if (s < 2.0) {
                perimeter.push_back({1.0, s - 1.0});
            } else if (s < 3.0) {
                perimeter.push_back({3.0 - s, 1.0});
            } else {
                perimeter.push_back({0.0, 4.0 - s});
            }
        }
    }
    const std::size_t per_level = perimeter.size();
    const std::size_t n_levels = (static_cast<std::size_t>(cfg.n_u) + per_level - 1) / per_level;
    for (std::size_t lv = 0; lv < n_levels && sets.boundary.size() < static_cast<std::size_t>(cfg.n_u); ++lv) {
        const double t = n_levels == 1 ? 0.0 : horizon * static_cast<double>(lv) / static_cast<double>(n_levels - 1);
        const DriveSample d = drive.at(t);
        for (const Point& x : perimeter) {
            if (sets.boundary.size() == static_cast<std::size_t>(cfg.n_u)) break;
            sets.boundary.push_back({{x, t, d}, boundary_value(spec, x, d)});
        }
    }

    if (cfg.include_initial) {
        if (!initial_reference) throw ArgumentError("sample_training_sets: initial points need a reference field");
        const DriveSample d0 = drive.at(0.0);
        if (spec.dim == 1) {
            for (int i = 0; i < cfg.n_u; ++i) {
                const Point x{(i + 0.5) / cfg.n_u, 0.0};
                sets.boundary.push_back({{x, 0.0, d0}, sample_series(*initial_reference, x, 0.0)});
            }
        } else {
            const int m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.n_u))));
            for (int j = 0; j < m; ++j) {
                for (int i = 0; i < m; ++i) {
                    const Point x{(i + 0.5) / m, (j + 0.5) / m};
                    sets.boundary.push_back({{x, 0.0, d0}, sample_series(*initial_reference, x, 0.0)});
                }
            }
        }
    }

    std::mt19937_64 rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    sets.collocation.reserve(cfg.n_f);
    for (int i = 0; i < cfg.n_f; ++i) {
        Point x{unit(rng), 0.0};
        if (spec.dim == 2) x.y = unit(rng);
        const double t = horizon * unit(rng);
        sets.collocation.push_back({x, t, drive.at(t)});
    }
    return sets;
}

PinnLoss::PinnLoss(const PhysicsSpec& spec, const Scaler& scaler, const TrainingSets& sets, const TrainConfig& cfg)
    : spec_(spec),
      scaler_(scaler),
      layout_{spec.dim},
      lambda_u_(cfg.lambda_u),
      lambda_f_(cfg.lambda_f),
      beta_(cfg.beta) {
    spec_.validate();
    scaler_.validate();
    cfg.validate();
    if (sets.boundary.empty() || sets.collocation.empty()) throw ArgumentError("pinn loss: empty training set");

    // Only the scaler and the layout are used for encoding.
    PinnModel encoder{spec_, scaler_, NetworkParams(NetSpec::for_physics(spec.dim, 1, 1))};
    directions_ = encoder.jet_directions();

    std::vector<SpaceTimePoint> bpts;
    bpts.reserve(sets.boundary.size());
    boundary_targets_.resize(static_cast<Eigen::Index>(sets.boundary.size()));
    for (std::size_t i = 0; i < sets.boundary.size(); ++i) {
        bpts.push_back(sets.boundary[i].at);
        boundary_targets_[static_cast<Eigen::Index>(i)] = scaler_.normalize(sets.boundary[i].target);
    }
    boundary_inputs_ = encoder.encode(bpts);

    colloc_inputs_ = encoder.encode(sets.collocation);
    colloc_forcing_.resize(static_cast<Eigen::Index>(sets.collocation.size()));
    for (std::size_t i = 0; i < sets.collocation.size(); ++i) {
        colloc_forcing_[static_cast<Eigen::Index>(i)] =
            source_affine_part(spec_, sets.collocation[i].x, sets.collocation[i].drive);
    }
}

std::vector<LossTerm> PinnLoss::terms(LossBreakdown* sink) const {
    std::vector<LossTerm> out;

    LossTerm data;
    data.inputs = boundary_inputs_;
    data.evaluate = [this, sink](const JetBatch& jets, JetBatch& adj) {
        const auto n = static_cast<double>(jets.value.size());
        const Eigen::VectorXd diff = jets.value - boundary_targets_;
        const double mse_u = diff.squaredNorm() / n;
        adj.value = (2.0 * lambda_u_ / n) * diff;
        if (sink) sink->mse_u = mse_u;
        return lambda_u_ * mse_u;
    };
    out.push_back(std::move(data));

    LossTerm physics;
    physics.inputs = colloc_inputs_;
    physics.directions = directions_;
    physics.evaluate = [this, sink](const JetBatch& jets, JetBatch& adj) {
        const auto n = static_cast<double>(jets.value.size());
        const double sd = scaler_.out_std;
        const double a_t = spec_.capacity_per_hour() * sd * scaler_.slope(layout_.t()) / beta_;
        const double a_u = spec_.h * sd / beta_;
        double a_lap[2] = {0.0, 0.0};
        for (int d = 0; d < spec_.dim; ++d) {
            const double s = scaler_.slope(d == 0 ? layout_.x() : layout_.y());
            a_lap[d] = -spec_.k * sd * s * s / beta_;
        }
        Eigen::VectorXd f = a_t * jets.first.col(0) + a_u * jets.value;
        for (int d = 0; d < spec_.dim; ++d) f += a_lap[d] * jets.second.col(1 + d);
        f.array() += (spec_.h * scaler_.out_mean - colloc_forcing_.array()) / beta_;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (!std::isfinite(f[i])) throw NumericError("pinn loss: non-finite residual", static_cast<std::size_t>(i));
        }
        const double mse_f = f.squaredNorm() / n;
        const Eigen::VectorXd w = (2.0 * lambda_f_ / n) * f;
        adj.value = a_u * w;
        adj.first.col(0) = a_t * w;
        for (int d = 0; d < spec_.dim; ++d) adj.second.col(1 + d) = a_lap[d] * w;
        if (sink) sink->mse_f = mse_f;
        return lambda_f_ * mse_f;
    };
    out.push_back(std::move(physics));
    return out;
}

LossBreakdown PinnLoss::evaluate(const NetworkParams& params) const {
    LossBreakdown b;
    const auto t = terms(&b);
    b.mse = loss_value(params, t);
    return b;
}

LossBreakdown PinnLoss::evaluate(const NetworkParams& params, std::span<double> gradient) const {
    LossBreakdown b;
    const auto t = terms(&b);
    auto lg = param_gradient(params, t);
    if (gradient.size() != lg.gradient.size()) throw ArgumentError("pinn loss: gradient buffer has the wrong size");
    std::copy(lg.gradient.begin(), lg.gradient.end(), gradient.begin());
    b.mse = lg.value;
    return b;
}

LossBreakdown total_loss(const NetworkParams& p, const Scaler& scaler, const PhysicsSpec& spec,
                         const TrainingSets& sets, const TrainConfig& cfg) {
    return PinnLoss(spec, scaler, sets, cfg).evaluate(p);
}

std::vector<double> top_oil_trace(const FieldSeries& field) {
    std::vector<double> trace(field.levels());
    const int last = field.nx() - 1;
    for (std::size_t n = 0; n < field.levels(); ++n) {
        double s = 0.0;
        for (int j = 0; j < field.ny(); ++j) s += field.value(n, last, j);
        trace[n] = s / field.ny();
    }
    return trace;
}

Metrics compare_fields(const FieldSeries& prediction, const FieldSeries& reference) {
    if (prediction.dim() != reference.dim() || prediction.nx() != reference.nx() ||
        prediction.levels() != reference.levels()) {
        throw ArgumentError("compare_fields: shape mismatch");
    }
    Metrics m;
    m.rel_l2_field = relative_l2(prediction, reference);
    const auto a = top_oil_trace(prediction);
    const auto b = top_oil_trace(reference);
    m.rel_l2_top = relative_l2(std::span<const double>(a), std::span<const double>(b));
    return m;
}

namespace {

std::vector<SpaceTimePoint> grid_points(const FieldSeries& grid_like, const DriveSeries& drive,
                                        const std::vector<int>& nodes, const std::vector<std::size_t>& levels) {
    std::vector<SpaceTimePoint> pts;
    const int ny_count = grid_like.dim() == 2 ? static_cast<int>(nodes.size()) : 1;
    pts.reserve(levels.size() * nodes.size() * ny_count);
    for (auto n : levels) {
        const double t = grid_like.times()[n];
        const DriveSample d = drive.at(t);
        for (int jj = 0; jj < ny_count; ++jj) {
            const double y = grid_like.dim() == 2 ? grid_like.coord(nodes[jj]) : 0.0;
            for (int i : nodes) pts.push_back({{grid_like.coord(i), y}, t, d});
        }
    }
    return pts;
}

std::vector<int> spread_indices(int count, int max_count) {
    std::vector<int> idx;
    const int m = std::min(count, std::max(2, max_count));
    for (int k = 0; k < m; ++k) {
        idx.push_back(static_cast<int>(std::lround(static_cast<double>(k) * (count - 1) / (m - 1))));
    }
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace

FieldSeries predict_on_grid(const PinnModel& model, const FieldSeries& grid_like, const DriveSeries& drive) {
    if (grid_like.dim() != model.physics.dim) throw ArgumentError("predict_on_grid: dimension mismatch");
    std::vector<int> nodes(grid_like.nx());
    for (int i = 0; i < grid_like.nx(); ++i) nodes[i] = i;
    std::vector<double> values;
    values.reserve(grid_like.values().size());
    for (std::size_t n = 0; n < grid_like.levels(); ++n) {
        const auto pts = grid_points(grid_like, drive, nodes, {n});
        const Eigen::VectorXd v = model.predict(pts);
        values.insert(values.end(), v.data(), v.data() + v.size());
    }
    return FieldSeries(grid_like.dim(), grid_like.nx(), grid_like.times(), std::move(values));
}

Metrics eval_metrics(const PinnModel& model, const FieldSeries& reference, const DriveSeries& drive) {
    return compare_fields(predict_on_grid(model, reference, drive), reference);
}

MetricsProbe::MetricsProbe(const PinnModel& layout_source, const FieldSeries& reference, const DriveSeries& drive,
                           int max_nodes_per_axis, int max_levels)
    : model_(layout_source), reference_(reference) {
    const auto nodes = spread_indices(reference.nx(), max_nodes_per_axis);
    const auto lv_int = spread_indices(static_cast<int>(reference.levels()), max_levels);
    std::vector<std::size_t> levels(lv_int.begin(), lv_int.end());

    std::vector<double> times;
    std::vector<double> values;
    for (auto n : levels) {
        times.push_back(reference.times()[n]);
        const int ny_count = reference.dim() == 2 ? static_cast<int>(nodes.size()) : 1;
        for (int jj = 0; jj < ny_count; ++jj) {
            for (int i : nodes) values.push_back(reference.value(n, i, reference.dim() == 2 ? nodes[jj] : 0));
        }
    }
    // The subsampled nodes are not uniform in general; FieldSeries is only
    // used here as a container for compare_fields.
    reference_ = FieldSeries(reference.dim(), static_cast<int>(nodes.size()), std::move(times), std::move(values));
    inputs_ = model_.encode(grid_points(reference, drive, nodes, levels));
}

Metrics MetricsProbe::evaluate(const NetworkParams& params) const {
    const Eigen::VectorXd v = forward_batch(params, inputs_);
    std::vector<double> values(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) values[static_cast<std::size_t>(i)] = model_.scaler.denormalize(v[i]);
    const FieldSeries pred(reference_.dim(), reference_.nx(), reference_.times(), std::move(values));
    return compare_fields(pred, reference_);
}

}  // namespace xfmr
