#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "xfmr/errors.hpp"
#include "xfmr/pinn.hpp"

using namespace xfmr;
using testing::rel_err;

namespace {

DriveSeries constant_drive(double ta, double to, double kf, int hours) {
    std::vector<double> t, a, o, k;
    for (int h = 0; h <= hours; ++h) {
        t.push_back(h);
        a.push_back(ta);
        o.push_back(to);
        k.push_back(kf);
    }
    return DriveSeries(t, a, o, k);
}

TrainConfig small_config(int dim) {
    TrainConfig c = TrainConfig::desk(dim);
    c.hidden_layers = 2;
    c.hidden_width = 6;
    c.n_u = 20;
    c.n_f = 50;
    return c;
}

PinnModel random_model(int dim, const DriveSeries& drive, std::uint64_t seed, int layers = 2, int width = 6) {
    auto params = init_xavier(NetSpec::for_physics(dim, layers, width), seed);
    std::mt19937_64 rng(seed + 100);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int l = 0; l < params.spec().layer_count(); ++l)
        for (auto& b : params.bias(l)) b = u(rng);
    return {PhysicsSpec::transformer(dim), fit_scaler(drive, dim, 24.0), params};
}

PinnModel zero_output_model(int dim, const DriveSeries& drive) {
    PinnModel m = random_model(dim, drive, 3);
    const int last = m.params.spec().hidden_layers;
    m.params.weight(last).setZero();
    m.params.bias(last).setZero();
    return m;
}

FieldSeries ramp_series(int nx, int levels) {
    std::vector<double> times, values;
    for (int n = 0; n < levels; ++n) {
        times.push_back(n);
        for (int i = 0; i < nx; ++i) values.push_back(20.0 + 3.0 * i + 0.5 * n);
    }
    return FieldSeries(1, nx, times, values);
}

}  // namespace

TEST_CASE("scaler endpoints and round trip") {
    const auto drive = synth_drive(7, 48);
    for (int dim : {1, 2}) {
        const Scaler s = fit_scaler(drive, dim, 24.0);
        const InputLayout l{dim};
        CHECK(s.in_min[l.t()] == 0.0);
        CHECK(s.in_max[l.t()] == 24.0);
        for (int slot = 0; slot < l.size(); ++slot) {
            CHECK(s.standardize(slot, s.in_min[slot]) == doctest::Approx(-1.0).epsilon(1e-15));
            CHECK(s.standardize(slot, s.in_max[slot]) == doctest::Approx(1.0).epsilon(1e-15));
            CHECK(std::abs(s.standardize(slot, 0.5 * (s.in_min[slot] + s.in_max[slot]))) < 1e-14);
        }
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-50.0, 80.0);
        for (int i = 0; i < 100; ++i) {
            const double v = u(rng);
            const int slot = i % l.size();
            CHECK(std::abs(s.destandardize(slot, s.standardize(slot, v)) - v) <= 1e-12);
            CHECK(std::abs(s.denormalize(s.normalize(v)) - v) <= 1e-12);
        }
        CHECK(s.out_std > 0.0);
    }
}

TEST_CASE("scaler output statistics come from boundary temperatures") {
    const auto drive = constant_drive(10.0, 30.0, 0.5, 24);
    std::vector<double> t{0, 24}, ta{10, 20}, to{30, 40}, kf{0.2, 0.8};
    const Scaler s = fit_scaler(DriveSeries(t, ta, to, kf), 1, 24.0);
    CHECK(s.out_mean == doctest::Approx(25.0));
    CHECK(s.out_std == doctest::Approx(std::sqrt(125.0)));
    CHECK_THROWS_AS(fit_scaler(drive, 1, 24.0), DegenerateError);
    CHECK_THROWS_AS(fit_scaler(synth_drive(1, 10), 1, 24.0), RangeError);
}

TEST_CASE("boundary samples carry boundary_value targets") {
    const auto drive = synth_drive(2, 30);
    for (int dim : {1, 2}) {
        const auto spec = PhysicsSpec::transformer(dim);
        auto cfg = small_config(dim);
        cfg.n_u = dim == 2 ? 64 : 30;
        const auto sets = sample_training_sets(spec, drive, 24.0, cfg);
        CHECK(sets.boundary.size() == static_cast<std::size_t>(cfg.n_u));
        CHECK(sets.collocation.size() == static_cast<std::size_t>(cfg.n_f));
        for (const auto& b : sets.boundary) {
            CHECK(on_boundary(b.at.x, dim));
            CHECK(b.at.t >= 0.0);
            CHECK(b.at.t <= 24.0);
            CHECK(b.target == boundary_value(spec, b.at.x, drive.at(b.at.t)));
        }
        for (const auto& c : sets.collocation) {
            CHECK(in_domain(c.x, dim));
            CHECK(c.t >= 0.0);
            CHECK(c.t <= 24.0);
        }
    }
}

TEST_CASE("training sets are deterministic per seed") {
    const auto drive = synth_drive(2, 30);
    const auto spec = PhysicsSpec::transformer(1);
    auto cfg = small_config(1);
    const auto a = sample_training_sets(spec, drive, 24.0, cfg);
    const auto b = sample_training_sets(spec, drive, 24.0, cfg);
    cfg.seed = 9;
    const auto c = sample_training_sets(spec, drive, 24.0, cfg);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < a.collocation.size(); ++i) {
        same = same && a.collocation[i].x.x == b.collocation[i].x.x && a.collocation[i].t == b.collocation[i].t;
        differ = differ || a.collocation[i].x.x != c.collocation[i].x.x;
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("collocation density passes a chi-square test") {
    const auto drive = synth_drive(4, 30);
    auto cfg = small_config(2);
    cfg.n_f = 20000;
    const auto sets = sample_training_sets(PhysicsSpec::transformer(2), drive, 24.0, cfg);
    auto chi2 = [&](auto coord) {
        std::vector<int> bins(10, 0);
        for (const auto& c : sets.collocation) bins[std::min(9, static_cast<int>(coord(c) * 10.0))]++;
        const double expected = cfg.n_f / 10.0;
        double s = 0.0;
        for (int b : bins) s += (b - expected) * (b - expected) / expected;
        return s;
    };
    // 99.9% quantile of chi-square with 9 degrees of freedom.
    const double limit = 27.88;
    CHECK(chi2([](const SpaceTimePoint& p) { return p.x.x; }) < limit);
    CHECK(chi2([](const SpaceTimePoint& p) { return p.x.y; }) < limit);
    CHECK(chi2([](const SpaceTimePoint& p) { return p.t / 24.0; }) < limit);
}

TEST_CASE("initial points need a reference") {
    const auto drive = synth_drive(2, 30);
    auto cfg = small_config(1);
    cfg.include_initial = true;
    CHECK_THROWS_AS(sample_training_sets(PhysicsSpec::transformer(1), drive, 24.0, cfg), ArgumentError);
    const auto ref = ramp_series(11, 3);
    const auto sets = sample_training_sets(PhysicsSpec::transformer(1), drive, 24.0, cfg, &ref);
    CHECK(sets.boundary.size() == static_cast<std::size_t>(2 * cfg.n_u));
    const auto& b = sets.boundary.back();
    CHECK(b.at.t == 0.0);
    CHECK(b.target == doctest::Approx(20.0 + 30.0 * b.at.x.x));
}

TEST_CASE("residual of a linear temperature has a closed form") {
    const auto spec = PhysicsSpec::transformer(1);
    const DriveSample d = DriveSample::make(12.0, 40.0, 0.7);
    const double a = 3.0, b = -2.5, c = 25.0, beta = 1000.0;
    for (double x : {0.0, 0.2, 0.5, 0.9}) {
        const double t = 5.0;
        Jet j;
        j.u = a * x + b * t + c;
        j.du_dt = b;
        j.grad_x[0] = a;
        const SpaceTimePoint p{{x, 0.0}, t, d};
        const double q = spec.p0 + spec.nu * 0.49 * (0.5 * std::sin(3.0 * std::numbers::pi * x) + 0.5) - spec.h * (j.u - 12.0);
        const double expected = (spec.rho * spec.cp / 3600.0 * b - q) / beta;
        CHECK(rel_err(residual_from_jet(spec, p, j, beta), expected) < 1e-13);
    }
}

TEST_CASE("manufactured decay solution has zero residual") {
    auto spec = PhysicsSpec::transformer(1);
    const DriveSample d = DriveSample::make(15.0, 15.0, 0.0);
    const double B = 8.0;
    const double rate = spec.h / spec.capacity_per_hour();
    for (double t : {0.0, 0.5, 3.0}) {
        for (double x : {0.0, 0.3, 1.0}) {
            Jet j;
            j.u = d.ta + spec.p0 / spec.h + B * std::exp(-rate * t);
            j.du_dt = -rate * B * std::exp(-rate * t);
            CHECK(std::abs(residual_from_jet(spec, {{x, 0.0}, t, d}, j, 1000.0)) < 1e-8);
        }
    }
}

TEST_CASE("zero network residual is the negated source at the output mean") {
    const auto drive = synth_drive(5, 30);
    for (int dim : {1, 2}) {
        const PinnModel m = zero_output_model(dim, drive);
        const auto p = make_point(drive, {0.35, 0.6}, 7.25);
        const double mean = m.scaler.out_mean;
        CHECK(m.predict(p) == doctest::Approx(mean).epsilon(1e-15));
        const double px = dim == 2 ? 1.0 : 0.5 * std::sin(3.0 * std::numbers::pi * 0.35) + 0.5;
        const double q = m.physics.p0 + m.physics.nu * p.drive.kf * p.drive.kf * px - m.physics.h * (mean - p.drive.ta);
        CHECK(rel_err(residual(m, p, 1000.0), -q / 1000.0) < 1e-12);
    }
}

TEST_CASE("doubling beta halves the residual") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = random_model(1, drive, 8);
    for (double t : {0.0, 4.0, 23.5}) {
        const auto p = make_point(drive, {0.4, 0.0}, t);
        CHECK(rel_err(residual(m, p, 2000.0), 0.5 * residual(m, p, 1000.0)) < 1e-14);
    }
    CHECK_THROWS_AS(residual(m, make_point(drive, {0.4, 0.0}, 1.0), 0.0), ArgumentError);
}

TEST_CASE("non-finite temperature jet is a numeric error") {
    const auto spec = PhysicsSpec::transformer(1);
    Jet j;
    j.u = std::nan("");
    CHECK_THROWS_AS(residual_from_jet(spec, {{0.5, 0.0}, 1.0, DriveSample::make(1, 2, 0.5)}, j, 1000.0),
                    NumericError);
}

TEST_CASE("physical jets agree with finite differences of predictions") {
    const auto drive = synth_drive(6, 30);
    for (int dim : {1, 2}) {
        const PinnModel m = random_model(dim, drive, 21);
        const Point x{0.37, 0.61};
        const double t = 6.5;
        // Keep the drive fixed while differencing in t: only the t slot moves.
        const DriveSample d = drive.at(t);
        auto u = [&](Point q, double tt) { return m.predict(SpaceTimePoint{q, tt, d}); };
        const Jet j = m.jet({x, t, d});
        const double hx = 1e-4, ht = 1e-3;
        CHECK(rel_err(j.du_dt, (u(x, t + ht) - u(x, t - ht)) / (2 * ht), 1e-6) < 1e-6);
        CHECK(rel_err(j.grad_x[0], (u({x.x + hx, x.y}, t) - u({x.x - hx, x.y}, t)) / (2 * hx), 1e-6) < 1e-6);
        double lap = (u({x.x + hx, x.y}, t) - 2 * u(x, t) + u({x.x - hx, x.y}, t)) / (hx * hx);
        if (dim == 2) {
            CHECK(rel_err(j.grad_x[1], (u({x.x, x.y + hx}, t) - u({x.x, x.y - hx}, t)) / (2 * hx), 1e-6) < 1e-6);
            lap += (u({x.x, x.y + hx}, t) - 2 * u(x, t) + u({x.x, x.y - hx}, t)) / (hx * hx);
        }
        CHECK(rel_err(j.lap_x, lap, 1e-2) < 1e-4);
    }
}

TEST_CASE("hand boundary batch gives mse_u = 5") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = zero_output_model(1, drive);
    const auto& s = m.scaler;
    TrainingSets sets;
    sets.boundary.push_back({make_point(drive, {0.0, 0.0}, 1.0), s.denormalize(1.0)});
    sets.boundary.push_back({make_point(drive, {1.0, 0.0}, 2.0), s.denormalize(-3.0)});
    sets.collocation.push_back(make_point(drive, {0.5, 0.0}, 3.0));
    TrainConfig cfg = small_config(1);
    cfg.lambda_u = 2.0;
    cfg.lambda_f = 0.0;
    const auto loss = total_loss(m.params, s, m.physics, sets, cfg);
    CHECK(loss.mse_u == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(loss.mse == doctest::Approx(10.0).epsilon(1e-13));

    for (auto& b : sets.boundary) b.target = s.out_mean;
    CHECK(total_loss(m.params, s, m.physics, sets, cfg).mse == 0.0);
}

TEST_CASE("loss weights scale their terms") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = random_model(1, drive, 4);
    TrainConfig cfg = small_config(1);
    const auto sets = sample_training_sets(m.physics, drive, 24.0, cfg);
    const auto base = total_loss(m.params, m.scaler, m.physics, sets, cfg);
    CHECK(rel_err(base.mse, cfg.lambda_u * base.mse_u + cfg.lambda_f * base.mse_f) < 1e-13);

    TrainConfig scaled = cfg;
    scaled.lambda_f *= 3.0;
    const auto s3 = total_loss(m.params, m.scaler, m.physics, sets, scaled);
    CHECK(rel_err(s3.mse - cfg.lambda_u * s3.mse_u, 3.0 * (base.mse - cfg.lambda_u * base.mse_u)) < 1e-12);

    TrainConfig no_u = cfg;
    no_u.lambda_u = 0.0;
    const auto nu = total_loss(m.params, m.scaler, m.physics, sets, no_u);
    CHECK(rel_err(nu.mse, no_u.lambda_f * nu.mse_f) < 1e-14);
}

TEST_CASE("loss is invariant under permutation of points") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = random_model(2, drive, 4);
    TrainConfig cfg = small_config(2);
    auto sets = sample_training_sets(m.physics, drive, 24.0, cfg);
    const auto a = total_loss(m.params, m.scaler, m.physics, sets, cfg);
    std::mt19937_64 rng(3);
    std::shuffle(sets.boundary.begin(), sets.boundary.end(), rng);
    std::shuffle(sets.collocation.begin(), sets.collocation.end(), rng);
    const auto b = total_loss(m.params, m.scaler, m.physics, sets, cfg);
    CHECK(rel_err(a.mse_u, b.mse_u) < 1e-12);
    CHECK(rel_err(a.mse_f, b.mse_f) < 1e-12);
}

TEST_CASE("loss gradient matches finite differences") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = random_model(1, drive, 12, 2, 4);
    TrainConfig cfg = small_config(1);
    cfg.n_u = 8;
    cfg.n_f = 8;
    const auto sets = sample_training_sets(m.physics, drive, 24.0, cfg);
    const PinnLoss loss(m.physics, m.scaler, sets, cfg);
    std::vector<double> g(m.params.size());
    loss.evaluate(m.params, g);
    double worst = 0.0;
    for (std::size_t k = 0; k < m.params.size(); ++k) {
        auto plus = m.params, minus = m.params;
        const double h = 1e-6 * std::max(1.0, std::abs(m.params.flat()[k]));
        plus.flat()[k] += h;
        minus.flat()[k] -= h;
        const double fd = (loss.evaluate(plus).mse - loss.evaluate(minus).mse) / (2 * h);
        worst = std::max(worst, rel_err(g[k], fd, 1e-3 * std::max(1.0, std::abs(loss.evaluate(m.params).mse))));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("field comparison metrics") {
    const auto ref = ramp_series(9, 4);
    CHECK(compare_fields(ref, ref).rel_l2_field == 0.0);
    CHECK(compare_fields(ref, ref).rel_l2_top == 0.0);
    auto doubled = ref.values();
    for (auto& v : doubled) v *= 2.0;
    const FieldSeries twice(1, 9, ref.times(), doubled);
    CHECK(compare_fields(twice, ref).rel_l2_field == doctest::Approx(1.0));
    CHECK(compare_fields(twice, ref).rel_l2_top == doctest::Approx(1.0));
    CHECK_THROWS_AS(compare_fields(ramp_series(5, 4), ref), ArgumentError);

    const auto trace = top_oil_trace(ref);
    REQUIRE(trace.size() == 4);
    CHECK(trace[2] == doctest::Approx(20.0 + 24.0 + 1.0));
}

TEST_CASE("metrics probe on the full grid equals eval_metrics") {
    const auto drive = synth_drive(5, 30);
    const PinnModel m = random_model(1, drive, 4);
    const auto ref = solve_reference(m.physics, drive, {21, 24, 24.0});
    const MetricsProbe probe(m, ref, drive, 100, 100);
    const auto a = probe.evaluate(m.params);
    const auto b = eval_metrics(m, ref, drive);
    CHECK(rel_err(a.rel_l2_field, b.rel_l2_field) < 1e-12);
    CHECK(rel_err(a.rel_l2_top, b.rel_l2_top) < 1e-12);
}
