#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "xfmr/errors.hpp"
#include "xfmr/placement.hpp"

using namespace xfmr;

namespace {

PlacementGrid line(std::vector<double> xs) {
    std::vector<Point> pts;
    for (double x : xs) pts.push_back({x, 0.0});
    return grid_from_points(1, pts);
}

PlacementConfig config(int n_min, int n_max, double d, double d1) {
    PlacementConfig c;
    c.n_min = n_min;
    c.n_max = n_max;
    c.d = d;
    c.d1 = d1;
    return c;
}

std::vector<double> random_scores(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(n);
    for (auto& v : s) v = u(rng);
    return s;
}

// Independent oracle: plain enumeration of the model's objective written out
// from the definitions.
struct Brute {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<int> selected;
    bool found = false;
};

Brute brute_force(int model, const PlacementGrid& g, const std::vector<double>& a, const PlacementConfig& c) {
    const int n = static_cast<int>(g.size());
    Brute best;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<int> sel;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) sel.push_back(i);
        const int k = static_cast<int>(sel.size());
        if (k < c.n_min || k > c.n_max) continue;
        bool ok = true;
        if (model >= 2)
            for (int i : sel)
                for (int j : sel)
                    if (i < j && g.distance(i, j) < c.d) ok = false;
        if (!ok) continue;
        double obj = 0.0;
        for (int i : sel) obj += a[i];
        if (model == 3)
            for (int i : sel)
                for (int j : sel)
                    if (i != j) obj += a[i] * std::max(0.0, c.d1 - g.distance(i, j));
        if (!best.found || obj < best.objective - 1e-12 ||
            (std::abs(obj - best.objective) <= 1e-12 && sel < best.selected)) {
            best = {obj, sel, true};
        }
    }
    return best;
}

}  // namespace

TEST_CASE("1D grid is symmetric and strictly inside the margin") {
    const auto g = build_grid(1, 3, 1, 0.1);
    REQUIRE(g.size() == 3);
    CHECK(g.points[0].x == doctest::Approx(0.1));
    CHECK(g.points[1].x == doctest::Approx(0.5));
    CHECK(g.points[2].x == doctest::Approx(0.9));
    CHECK(g.points[0].x > 0.1);
    CHECK(g.points[2].x < 0.9);
    CHECK(std::abs((g.points[0].x + g.points[2].x) - 1.0) < 1e-15);
    CHECK(build_grid(1, 1, 1, 0.2).points[0].x == 0.5);
    CHECK_THROWS_AS(build_grid(1, 3, 1, 0.5), ArgumentError);
    CHECK_THROWS_AS(build_grid(1, 0, 1, 0.1), ArgumentError);
}

TEST_CASE("2D grid has distinct interior points") {
    const auto g = build_grid(2, 4, 4, 0.05);
    REQUIRE(g.size() == 16);
    std::set<std::pair<double, double>> seen;
    for (const auto& p : g.points) {
        seen.insert({p.x, p.y});
        CHECK(std::min({p.x, p.y, 1.0 - p.x, 1.0 - p.y}) > 0.05);
    }
    CHECK(seen.size() == 16);
}

TEST_CASE("scores of constant and linear fields") {
    const auto g = build_grid(1, 7, 1, 0.05);
    const auto times = hourly_times(3.0);
    REQUIRE(times == std::vector<double>{0, 1, 2, 3});
    const int nx = 11;
    std::vector<double> t{0, 1, 2, 3}, flat, ramp;
    for (int n = 0; n < 4; ++n)
        for (int i = 0; i < nx; ++i) {
            flat.push_back(42.0);
            ramp.push_back(static_cast<double>(i) / (nx - 1));
        }
    const auto s0 = score_field(field_divergence(FieldSeries(1, nx, t, flat)), g, times);
    const auto s1 = score_field(field_divergence(FieldSeries(1, nx, t, ramp)), g, times);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(s0.abs_score[i] == 0.0);
        CHECK(s1.abs_score[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s1.signed_score[i] == doctest::Approx(1.0).epsilon(1e-12));
    }

    const DivergenceFn oracle = [](std::span<const Point> pts, double) { return std::vector<double>(pts.size(), 1.0); };
    const auto so = score_field(oracle, g, times);
    CHECK(so.abs_score == std::vector<double>(g.size(), 1.0));

    const DivergenceFn alternating = [](std::span<const Point> pts, double t) {
        return std::vector<double>(pts.size(), static_cast<int>(t) % 2 == 0 ? 2.0 : -2.0);
    };
    const auto sa = score_field(alternating, g, times);
    CHECK(sa.abs_score[0] == 2.0);
    CHECK(sa.signed_score[0] == 0.0);
}

TEST_CASE("field divergence rejects points outside the domain") {
    std::vector<double> t{0, 1}, v(2 * 5, 1.0);
    const auto div = field_divergence(FieldSeries(1, 5, t, v));
    const std::vector<Point> bad{{1.5, 0.0}};
    CHECK_THROWS_AS(div(bad, 0.0), RangeError);
}

TEST_CASE("model 1 examples") {
    const auto scores = scores_from_values({3, 1, 2});
    const auto a = solve_model1(scores, config(1, 2, 0.0, 0.0));
    CHECK(a.selected == std::vector<int>{1});
    CHECK(a.objective == 1.0);
    CHECK(a.s == std::vector<std::uint8_t>{0, 1, 0});
    const auto b = solve_model1(scores, config(2, 3, 0.0, 0.0));
    CHECK(b.selected == std::vector<int>{1, 2});
    CHECK(b.objective == 3.0);
    CHECK_THROWS_AS(solve_model1(scores, config(4, 4, 0.0, 0.0)), InfeasibleError);
    const auto ties = solve_model1(scores_from_values({1, 0.5, 1, 0.5}), config(3, 4, 0.0, 0.0));
    CHECK(ties.selected == std::vector<int>{0, 1, 3});
}

TEST_CASE("model 1 matches enumeration") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const auto a = random_scores(12, rng);
        const auto g = build_grid(1, 12, 1, 0.05);
        const auto cfg = config(4, 8, 0.0, 0.0);
        const auto analytic = solve_model1(scores_from_values(a), cfg);
        const auto ex = exhaustive_solve(PlacementInstance(1, g, scores_from_values(a), cfg));
        const auto br = brute_force(1, g, a, cfg);
        CHECK(analytic.selected == br.selected);
        CHECK(ex.selected == br.selected);
        CHECK(ex.objective == analytic.objective);
    }
}

TEST_CASE("model 2 tie example picks {0,2}") {
    const auto g = line({0.1, 0.2, 0.3, 0.4});
    const auto cfg = config(2, 2, 0.15, 0.2);
    const auto scores = scores_from_values({1, 1, 1, 1});
    const auto sol = solve_model2(scores, g, cfg);
    CHECK(sol.selected == std::vector<int>{0, 2});
    CHECK(sol.objective == 2.0);
    CHECK(bnb_solve(PlacementInstance(2, g, scores, cfg)).selected == std::vector<int>{0, 2});
}

TEST_CASE("model 2 with inactive distance equals model 1") {
    std::mt19937_64 rng(9);
    const auto g = build_grid(1, 15, 1, 0.05);
    const auto a = random_scores(15, rng);
    const auto cfg = config(3, 6, 0.01, 0.2);
    const auto m1 = solve_model1(scores_from_values(a), cfg);
    const auto m2 = solve_model2(scores_from_values(a), g, cfg);
    const auto bb = bnb_solve(PlacementInstance(2, g, scores_from_values(a), cfg));
    CHECK(m2.selected == m1.selected);
    CHECK(bb.selected == m1.selected);
}

TEST_CASE("random model 2 and 3 instances match the oracle") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 12; ++trial) {
        const int model = 2 + trial % 2;
        const auto g = trial % 3 == 0 ? build_grid(2, 4, 3, 0.05) : build_grid(1, model == 2 ? 15 : 12, 1, 0.05);
        const auto a = random_scores(g.size(), rng);
        const auto cfg = config(2, 5, 0.05, 0.2);
        const PlacementInstance inst(model, g, scores_from_values(a), cfg);
        const auto br = brute_force(model, g, a, cfg);
        const auto ex = exhaustive_solve(inst);
        const auto bb = bnb_solve(inst);
        CHECK(ex.selected == br.selected);
        CHECK(bb.selected == br.selected);
        CHECK(bb.objective == ex.objective);
        CHECK(std::abs(ex.objective - br.objective) < 1e-12);
        CHECK(validate_solution(inst, bb).empty());
        CHECK(bb.nodes <= (std::uint64_t{1} << g.size()));
    }
}

TEST_CASE("overlap cost") {
    const auto g = line({0.2, 0.35, 0.8});
    const auto c = overlap_cost(g, scores_from_values({2, 1, 4}), 0.2);
    CHECK(c(0, 1) == doctest::Approx(0.1));
    CHECK(c(1, 0) == doctest::Approx(0.05));
    CHECK(c(0, 2) == 0.0);
    CHECK(c(2, 1) == 0.0);
    for (int i = 0; i < 3; ++i) CHECK(c(i, i) == 0.0);
    ScoreField signed_scores = scores_from_values({2, 1, 4});
    signed_scores.signed_score = {-2, 1, 4};
    const auto cs = overlap_cost(g, signed_scores, 0.2, true);
    CHECK(cs(0, 2) == doctest::Approx(-2.0 * (0.2 - 0.6)));
    CHECK(cs(2, 0) == doctest::Approx(4.0 * (0.2 - 0.6)));
}

TEST_CASE("model 3 special cases") {
    std::mt19937_64 rng(3);
    const auto g = build_grid(1, 10, 1, 0.05);
    const auto a = random_scores(10, rng);
    // d1 = d: every positive cost sits on a conflicting pair.
    const auto cfg = config(3, 5, 0.25, 0.25);
    CHECK(solve_model3(scores_from_values(a), g, cfg).selected == solve_model2(scores_from_values(a), g, cfg).selected);

    const auto single = solve_model3(scores_from_values(a), g, config(1, 3, 0.05, 0.2));
    const auto cheapest = static_cast<int>(std::min_element(a.begin(), a.end()) - a.begin());
    CHECK(single.selected == std::vector<int>{cheapest});

    const auto zero = config(3, 5, 0.0, 0.0);
    const auto m3 = solve_model3(scores_from_values(a), g, zero);
    const auto m2 = solve_model2(scores_from_values(a), g, zero);
    CHECK(m3.selected == m2.selected);
    CHECK(m3.objective == m2.objective);
}

TEST_CASE("big M must dominate the costs") {
    const auto g = build_grid(1, 6, 1, 0.05);
    auto cfg = config(2, 3, 0.05, 0.2);
    cfg.big_m = 1e-6;
    CHECK_THROWS_AS(PlacementInstance(3, g, scores_from_values({1, 1, 1, 1, 1, 1}), cfg), ArgumentError);
    CHECK_NOTHROW(PlacementInstance(2, g, scores_from_values({1, 1, 1, 1, 1, 1}), cfg));
}

TEST_CASE("enumeration guard and trivial instances") {
    const auto one = PlacementInstance(2, line({0.5}), scores_from_values({0.7}), config(1, 1, 0.05, 0.2));
    const auto sol = exhaustive_solve(one);
    CHECK(sol.selected == std::vector<int>{0});
    CHECK(sol.objective == 0.7);
    const auto big = build_grid(1, 23, 1, 0.05);
    CHECK_THROWS_AS(exhaustive_solve(PlacementInstance(1, big, scores_from_values(std::vector<double>(23, 1.0)),
                                                       config(1, 2, 0.0, 0.0))),
                    SizeError);
}

TEST_CASE("infeasible spacing") {
    const auto clustered = line({0.50, 0.51, 0.52, 0.53, 0.54});
    const auto cfg = config(2, 3, 0.1, 0.2);
    const PlacementInstance inst(2, clustered, scores_from_values({1, 1, 1, 1, 1}), cfg);
    CHECK(independence_number(clustered, 0.1) == 1);
    CHECK_THROWS_AS(check_feasible(inst), InfeasibleError);
    CHECK_THROWS_AS(exhaustive_solve(inst), InfeasibleError);
    CHECK_THROWS_AS(bnb_solve(inst), InfeasibleError);
    try {
        bnb_solve(inst);
    } catch (const InfeasibleError& e) {
        CHECK(e.n_min() == 2);
        CHECK(e.independence_bound() == 1);
    }
}

TEST_CASE("independence number on a line") {
    const auto g = line({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
    CHECK(independence_number(g, 0.15) == 5);
    CHECK(independence_number(g, 0.05) == 9);
    CHECK(independence_number(build_grid(2, 5, 5, 0.05), 0.3) == 13);
}

TEST_CASE("validator catches broken solutions") {
    const auto g = line({0.1, 0.2, 0.3, 0.4});
    const auto cfg = config(2, 2, 0.15, 0.3);
    const PlacementInstance inst(3, g, scores_from_values({1, 2, 3, 4}), cfg);
    auto sol = solve_placement(inst);
    REQUIRE(validate_solution(inst, sol).empty());

    auto wrong_obj = sol;
    wrong_obj.objective += 0.5;
    CHECK_FALSE(validate_solution(inst, wrong_obj).empty());

    auto close = sol;
    close.s = {1, 1, 0, 0};
    close.selected = {0, 1};
    close.objective = inst.objective(std::vector<int>{0, 1});
    CHECK_FALSE(validate_solution(inst, close).empty());

    auto too_many = sol;
    too_many.s = {1, 0, 1, 1};
    too_many.selected = {0, 2, 3};
    too_many.objective = inst.objective(std::vector<int>{0, 2, 3});
    CHECK_FALSE(validate_solution(inst, too_many).empty());

    auto mismatch = sol;
    mismatch.selected = {3};
    CHECK_FALSE(validate_solution(inst, mismatch).empty());
}

TEST_CASE("model nesting and scale equivariance") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 6; ++trial) {
        const int dim = trial % 2 == 0 ? 1 : 2;
        const auto g = build_grid(dim, dim == 1 ? 16 : 4, 4, 0.05);
        const auto a = random_scores(g.size(), rng);
        const auto cfg = config(3, 6, 0.2, 0.35);
        const double o1 = solve_model1(scores_from_values(a), cfg).objective;
        const auto m2 = solve_model2(scores_from_values(a), g, cfg);
        const double o3 = solve_model3(scores_from_values(a), g, cfg).objective;
        CHECK(m2.objective >= o1);
        CHECK(o3 >= m2.objective);

        auto scaled = a;
        for (auto& v : scaled) v *= 4.0;
        const auto m2s = solve_model2(scores_from_values(scaled), g, cfg);
        CHECK(m2s.selected == m2.selected);
        CHECK(m2s.objective == doctest::Approx(4.0 * m2.objective));
        const auto m1s = solve_model1(scores_from_values(scaled), cfg);
        CHECK(m1s.selected == solve_model1(scores_from_values(a), cfg).selected);
    }
}

TEST_CASE("placement report and csv") {
    const auto g = build_grid(2, 3, 2, 0.1);
    const auto cfg = config(2, 3, 0.05, 0.2);
    const PlacementInstance inst(3, g, scores_from_values({0.5, 0.1, 0.4, 0.3, 0.2, 0.6}), cfg);
    const auto sol = solve_placement(inst);
    const auto j = nlohmann::json::parse(placement_report_json(inst, sol));
    CHECK(j["model"] == 3);
    CHECK(j["selected"].get<std::vector<int>>() == sol.selected);
    CHECK(j["selection"].size() == 6);
    CHECK(j["objective"].get<double>() == sol.objective);
    CHECK(j["candidates"].size() == 6);
    CHECK(j["solver"]["kind"] == "exhaustive");
    CHECK(j["config"]["d1"].get<double>() == 0.2);

    std::ostringstream os;
    write_placement_csv(os, inst, sol);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "x,y,abs_score,signed_score,selected");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    CHECK(rows == 6);
}
