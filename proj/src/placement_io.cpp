#include <json.hpp>
#include <ostream>

#include "csv_util.hpp"
#include "xfmr/placement.hpp"

namespace xfmr {

std::string placement_report_json(const PlacementInstance& inst, const PlacementSolution& sol) {
    using nlohmann::json;
    json j;
    j["model"] = inst.model;
    j["config"] = {{"n_min", inst.cfg.n_min},   {"n_max", inst.cfg.n_max},   {"d", inst.cfg.d},
                   {"d1", inst.cfg.d1},         {"margin", inst.cfg.margin}, {"big_m", inst.cfg.big_m},
                   {"signed_costs", inst.cfg.signed_costs}};
    j["grid"] = {{"dim", inst.grid.dim}, {"nx", inst.grid.nx}, {"ny", inst.grid.ny}};
    json pts = json::array();
    for (const auto& p : inst.grid.points) {
        if (inst.grid.dim == 2) pts.push_back({p.x, p.y});
        else pts.push_back(p.x);
    }
    j["candidates"] = std::move(pts);
    j["abs_score"] = inst.scores.abs_score;
    j["signed_score"] = inst.scores.signed_score;
    j["times"] = inst.scores.times;
    std::vector<int> s(sol.s.begin(), sol.s.end());
    j["selection"] = s;
    j["selected"] = sol.selected;
    j["objective"] = sol.objective;
    j["solver"] = {{"kind", to_string(sol.solver)}, {"nodes", sol.nodes}, {"evaluations", sol.evaluations}};
    return j.dump(1) + "\n";
}

void write_placement_csv(std::ostream& os, const PlacementInstance& inst, const PlacementSolution& sol) {
    using detail::format_double;
    os << (inst.grid.dim == 2 ? "x,y," : "x,") << "abs_score,signed_score,selected\n";
    for (std::size_t i = 0; i < inst.size(); ++i) {
        const auto& p = inst.grid.points[i];
        os << format_double(p.x) << ',';
        if (inst.grid.dim == 2) os << format_double(p.y) << ',';
        os << format_double(inst.scores.abs_score[i]) << ',' << format_double(inst.scores.signed_score[i]) << ','
           << static_cast<int>(sol.s[i]) << '\n';
    }
}

}  // namespace xfmr
