#include <algorithm>
#include <cmath>
#include <numeric>

#include "xfmr/errors.hpp"
#include "xfmr/placement.hpp"

namespace xfmr {

namespace {

using Adjacency = std::vector<std::vector<std::uint8_t>>;

Adjacency conflict_graph(const PlacementGrid& grid, double d) {
    const std::size_t n = grid.size();
    Adjacency adj(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (grid.distance(i, j) < d) adj[i][j] = adj[j][i] = 1;
    return adj;
}

/// Number of cliques in a greedy clique cover; an upper bound on the
/// independence number of the induced subgraph.
int clique_cover_bound(const Adjacency& adj, std::span<const int> verts) {
    std::vector<std::vector<int>> cliques;
    for (int v : verts) {
        bool placed = false;
        for (auto& c : cliques) {
            if (std::all_of(c.begin(), c.end(), [&](int u) { return adj[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]; })) {
                c.push_back(v);
                placed = true;
                break;
            }
        }
        if (!placed) cliques.push_back({v});
    }
    return static_cast<int>(cliques.size());
}

int greedy_independent(const Adjacency& adj) {
    std::vector<int> chosen;
    for (std::size_t v = 0; v < adj.size(); ++v) {
        if (std::none_of(chosen.begin(), chosen.end(), [&](int u) { return adj[v][static_cast<std::size_t>(u)]; })) {
            chosen.push_back(static_cast<int>(v));
        }
    }
    return static_cast<int>(chosen.size());
}

class MaxIndependentSet {
public:
    explicit MaxIndependentSet(const Adjacency& adj) : adj_(adj) {}

    int solve() {
        std::vector<int> all(adj_.size());
        std::iota(all.begin(), all.end(), 0);
        best_ = greedy_independent(adj_);
        search(all, 0);
        return best_;
    }

private:
    void search(std::vector<int> verts, int taken) {
        // Vertices of degree <= 1 within the remaining set can always be taken.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t k = 0; k < verts.size(); ++k) {
                const int v = verts[k];
                int deg = 0;
                for (int u : verts) deg += adj(v, u);
                if (deg <= 1) {
                    ++taken;
                    verts = without_closed_neighborhood(verts, v);
                    changed = true;
                    break;
                }
            }
        }
        if (verts.empty()) {
            best_ = std::max(best_, taken);
            return;
        }
        if (taken + clique_cover_bound(adj_, verts) <= best_) return;

        int pivot = verts.front(), best_deg = -1;
        for (int v : verts) {
            int deg = 0;
            for (int u : verts) deg += adj(v, u);
            if (deg > best_deg) {
                best_deg = deg;
                pivot = v;
            }
        }
        search(without_closed_neighborhood(verts, pivot), taken + 1);
        std::vector<int> rest;
        for (int v : verts)
            if (v != pivot) rest.push_back(v);
        search(std::move(rest), taken);
    }

    int adj(int a, int b) const { return adj_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; }

    std::vector<int> without_closed_neighborhood(const std::vector<int>& verts, int v) const {
        std::vector<int> out;
        for (int u : verts)
            if (u != v && !adj(u, v)) out.push_back(u);
        return out;
    }

    const Adjacency& adj_;
    int best_ = 0;
};

int independence_number(const Adjacency& adj) {
    return MaxIndependentSet(adj).solve();
}

double tie_slack(double best) { return 1e-9 * (std::abs(best) + 1.0); }

/// Shared incumbent logic: objective first, then the sorted index list.
struct Incumbent {
    bool found = false;
    double objective = 0.0;
    std::vector<int> selected;

    bool offer(const PlacementInstance& inst, std::vector<int> sorted) {
        const double obj = inst.objective(sorted);
        if (!found || obj < objective || (obj == objective && sorted < selected)) {
            found = true;
            objective = obj;
            selected = std::move(sorted);
            return true;
        }
        return false;
    }

    bool may_improve(double approx) const { return !found || approx <= objective + tie_slack(objective); }
};

PlacementSolution make_solution(const PlacementInstance& inst, const Incumbent& inc, SolverKind kind) {
    PlacementSolution sol;
    sol.s.assign(inst.size(), 0);
    for (int i : inc.selected) sol.s[static_cast<std::size_t>(i)] = 1;
    sol.selected = inc.selected;
    sol.objective = inc.objective;
    sol.model = inst.model;
    sol.solver = kind;
    return sol;
}

[[noreturn]] void throw_infeasible(const PlacementInstance& inst, int alpha) {
    throw InfeasibleError("placement infeasible: n_min = " + std::to_string(inst.cfg.n_min) +
                              " but at most " + std::to_string(alpha) +
                              " candidates can be placed at pairwise distance >= " + std::to_string(inst.cfg.d),
                          inst.cfg.n_min, alpha);
}

double pair_cost(const PlacementInstance& inst, int i, int j) {
    return inst.cost(i, j) + inst.cost(j, i);
}

class Exhaustive {
public:
    Exhaustive(const PlacementInstance& inst, const Adjacency& adj) : inst_(inst), adj_(adj) {}

    PlacementSolution run() {
        recurse(0, 0.0);
        if (!inc_.found) throw_infeasible(inst_, independence_number(adj_));
        PlacementSolution sol = make_solution(inst_, inc_, SolverKind::Exhaustive);
        sol.nodes = nodes_;
        sol.evaluations = evals_;
        return sol;
    }

private:
    void recurse(int start, double value) {
        ++nodes_;
        const int n = static_cast<int>(inst_.size());
        for (int j = start; j < n; ++j) {
            if (std::any_of(chosen_.begin(), chosen_.end(), [&](int i) { return inst_.model >= 2 && adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; })) {
                continue;
            }
            double next = value + inst_.scores.abs_score[static_cast<std::size_t>(j)];
            if (inst_.model == 3)
                for (int i : chosen_) next += pair_cost(inst_, i, j);
            chosen_.push_back(j);
            const int k = static_cast<int>(chosen_.size());
            if (k >= inst_.cfg.n_min && inc_.may_improve(next)) {
                ++evals_;
                inc_.offer(inst_, chosen_);
            }
            if (k < inst_.cfg.n_max) recurse(j + 1, next);
            chosen_.pop_back();
        }
    }

    const PlacementInstance& inst_;
    const Adjacency& adj_;
    Incumbent inc_;
    std::vector<int> chosen_;
    std::uint64_t nodes_ = 0, evals_ = 0;
};

class BranchAndBound {
public:
    BranchAndBound(const PlacementInstance& inst, const Adjacency& adj)
        : inst_(inst), adj_(adj), n_(static_cast<int>(inst.size())), acc_(inst.size(), 0.0) {
        has_negative_ = inst_.model == 3 && (inst_.cost.array() < 0.0).any();
    }

    PlacementSolution run() {
        std::vector<int> order(static_cast<std::size_t>(n_));
        std::iota(order.begin(), order.end(), 0);
        const auto& a = inst_.scores.abs_score;
        std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
            return a[static_cast<std::size_t>(i)] < a[static_cast<std::size_t>(j)];
        });
        search(order, 0.0);
        if (!inc_.found) throw_infeasible(inst_, independence_number(adj_));
        PlacementSolution sol = make_solution(inst_, inc_, SolverKind::BranchAndBound);
        sol.nodes = nodes_;
        sol.evaluations = evals_;
        return sol;
    }

private:
    bool conflicts(int i, int j) const {
        return inst_.model >= 2 && adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }

    double lower_bound(const std::vector<int>& remaining, double value, int need, int room) {
        std::vector<double> r;
        r.reserve(remaining.size());
        for (int j : remaining) {
            double rj = inst_.scores.abs_score[static_cast<std::size_t>(j)];
            if (inst_.model == 3) rj += acc_[static_cast<std::size_t>(j)];
            if (has_negative_) {
                double neg = 0.0;
                for (int k : remaining)
                    if (k != j) neg += std::min(0.0, pair_cost(inst_, j, k));
                rj += 0.5 * neg;
            }
            r.push_back(rj);
        }
        std::sort(r.begin(), r.end());
        double lb = value;
        for (int k = 0; k < static_cast<int>(r.size()) && k < room; ++k) {
            if (k < need || r[static_cast<std::size_t>(k)] < 0.0) lb += r[static_cast<std::size_t>(k)];
            else break;
        }
        return lb;
    }

    void search(const std::vector<int>& remaining, double value) {
        ++nodes_;
        const int count = static_cast<int>(chosen_.size());
        const int room = inst_.cfg.n_max - count;
        if (room <= 0 || remaining.empty()) return;
        const int need = std::max(1, inst_.cfg.n_min - count);
        if (static_cast<int>(remaining.size()) < need) return;
        if (inst_.model >= 2 && need > 1 && clique_cover_bound(adj_, remaining) < need) return;
        if (inc_.found && lower_bound(remaining, value, need, room) > inc_.objective + tie_slack(inc_.objective)) return;

        for (std::size_t p = 0; p < remaining.size(); ++p) {
            const int j = remaining[p];
            double next = value + inst_.scores.abs_score[static_cast<std::size_t>(j)];
            if (inst_.model == 3) next += acc_[static_cast<std::size_t>(j)];

            chosen_.push_back(j);
            if (static_cast<int>(chosen_.size()) >= inst_.cfg.n_min && inc_.may_improve(next)) {
                ++evals_;
                std::vector<int> sorted = chosen_;
                std::sort(sorted.begin(), sorted.end());
                inc_.offer(inst_, std::move(sorted));
            }
            std::vector<int> child;
            child.reserve(remaining.size() - p);
            for (std::size_t q = p + 1; q < remaining.size(); ++q)
                if (!conflicts(j, remaining[q])) child.push_back(remaining[q]);
            if (inst_.model == 3)
                for (int k = 0; k < n_; ++k) acc_[static_cast<std::size_t>(k)] += (k == j ? 0.0 : pair_cost(inst_, j, k));
            search(child, next);
            if (inst_.model == 3)
                for (int k = 0; k < n_; ++k) acc_[static_cast<std::size_t>(k)] -= (k == j ? 0.0 : pair_cost(inst_, j, k));
            chosen_.pop_back();
        }
    }

    const PlacementInstance& inst_;
    const Adjacency& adj_;
    int n_;
    bool has_negative_ = false;
    std::vector<double> acc_;
    Incumbent inc_;
    std::vector<int> chosen_;
    std::uint64_t nodes_ = 0, evals_ = 0;
};

}  // namespace

int independence_number(const PlacementGrid& grid, double d) {
    return independence_number(conflict_graph(grid, d));
}

void check_feasible(const PlacementInstance& inst) {
    if (inst.model == 1) return;
    const Adjacency adj = conflict_graph(inst.grid, inst.cfg.d);
    if (greedy_independent(adj) >= inst.cfg.n_min) return;
    const int alpha = independence_number(adj);
    if (alpha < inst.cfg.n_min) throw_infeasible(inst, alpha);
}

PlacementSolution solve_model1(const ScoreField& scores, const PlacementConfig& cfg) {
    const std::size_t n = scores.abs_score.size();
    if (cfg.n_min > static_cast<int>(n)) {
        throw InfeasibleError("placement infeasible: n_min = " + std::to_string(cfg.n_min) + " exceeds the " +
                                  std::to_string(n) + " candidates",
                              cfg.n_min, static_cast<int>(n));
    }
    cfg.validate(n);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const auto& a = scores.abs_score;
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return a[static_cast<std::size_t>(i)] < a[static_cast<std::size_t>(j)];
    });
    std::vector<int> chosen(order.begin(), order.begin() + cfg.n_min);
    std::sort(chosen.begin(), chosen.end());

    PlacementSolution sol;
    sol.s.assign(n, 0);
    for (int i : chosen) {
        sol.s[static_cast<std::size_t>(i)] = 1;
        sol.objective += a[static_cast<std::size_t>(i)];
    }
    sol.selected = std::move(chosen);
    sol.model = 1;
    sol.solver = SolverKind::Analytic;
    sol.evaluations = 1;
    return sol;
}

PlacementSolution exhaustive_solve(const PlacementInstance& inst) {
    if (inst.size() > kExhaustiveLimit) {
        throw SizeError("exhaustive_solve: " + std::to_string(inst.size()) + " candidates exceed the limit of " +
                        std::to_string(kExhaustiveLimit));
    }
    const Adjacency adj = conflict_graph(inst.grid, inst.cfg.d);
    return Exhaustive(inst, adj).run();
}

PlacementSolution bnb_solve(const PlacementInstance& inst) {
    check_feasible(inst);
    const Adjacency adj = conflict_graph(inst.grid, inst.cfg.d);
    return BranchAndBound(inst, adj).run();
}

PlacementSolution solve_placement(const PlacementInstance& inst) {
    return inst.size() <= kExhaustiveLimit ? exhaustive_solve(inst) : bnb_solve(inst);
}

PlacementSolution solve_model2(const ScoreField& scores, const PlacementGrid& grid, const PlacementConfig& cfg) {
    return solve_placement(PlacementInstance(2, grid, scores, cfg));
}

PlacementSolution solve_model3(const ScoreField& scores, const PlacementGrid& grid, const PlacementConfig& cfg) {
    return solve_placement(PlacementInstance(3, grid, scores, cfg));
}

}  // namespace xfmr
