#include "xfmr/run_config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "xfmr/errors.hpp"

namespace xfmr {

using nlohmann::json;

RunConfig RunConfig::defaults(int dim, double horizon, bool desk_scale) {
    if (dim != 1 && dim != 2) throw ArgumentError("config: dim must be 1 or 2");
    if (!(horizon > 0.0)) throw ArgumentError("config: horizon_hours must be > 0");
    RunConfig c;
    c.dim = dim;
    c.horizon = horizon;
    c.physics = PhysicsSpec::transformer(dim);
    c.grid = GridSpec::reference_default(dim, horizon);
    c.train = desk_scale ? TrainConfig::desk(dim) : TrainConfig::full(dim);
    if (dim == 2) {
        c.place_nx = 15;
        c.place_ny = 15;
    }
    return c;
}

void RunConfig::validate() const {
    if (dim != physics.dim) throw ArgumentError("config: physics dim disagrees with dim");
    physics.validate();
    grid.validate();
    if (std::abs(grid.t_end - horizon) > 1e-9) throw ArgumentError("config: grid t_end must equal the horizon");
    train.validate();
    if (place_nx < 1 || place_ny < 1) throw ArgumentError("config: placement grid must have >= 1 node per axis");
    const std::size_t candidates = static_cast<std::size_t>(place_nx) * (dim == 2 ? place_ny : 1);
    placement.validate(candidates);
    if (drive_path && !std::filesystem::exists(*drive_path)) {
        throw IoError("config: drive file not found: " + drive_path->string());
    }
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ArgumentError("config: '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& item : obj.items()) {
        if (!ok.count(item.key())) throw ArgumentError("config: unknown key '" + where + item.key() + "'");
    }
}

template <class T>
void take(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, bool desk_scale) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
    check_keys(j, "", {"dim", "horizon_hours", "seed", "drive", "out", "physics", "grid", "train", "placement"});
    try {
        int dim = 1;
        double horizon = 24.0;
        take(j, "dim", dim);
        take(j, "horizon_hours", horizon);
        RunConfig c = RunConfig::defaults(dim, horizon, desk_scale);
        take(j, "seed", c.seed);
        c.train.seed = c.seed;
        if (j.contains("drive")) c.drive_path = j.at("drive").get<std::string>();
        if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();

        if (j.contains("physics")) {
            const auto& p = j.at("physics");
            check_keys(p, "physics.", {"k", "rho", "cp", "h", "p0", "nu"});
            take(p, "k", c.physics.k);
            take(p, "rho", c.physics.rho);
            take(p, "cp", c.physics.cp);
            take(p, "h", c.physics.h);
            take(p, "p0", c.physics.p0);
            take(p, "nu", c.physics.nu);
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            check_keys(g, "grid.", {"nx", "nt"});
            take(g, "nx", c.grid.nx);
            take(g, "nt", c.grid.nt);
        }
        if (j.contains("train")) {
            const auto& t = j.at("train");
            check_keys(t, "train.",
                       {"hidden_layers", "hidden_width", "n_u", "n_f", "lambda_u", "lambda_f", "beta", "adam_epochs",
                        "adam_lr", "adam_epsilon", "lbfgs_epochs", "lbfgs_max_evals", "lbfgs_history",
                        "lbfgs_max_line_search", "lbfgs_tolerance", "include_initial", "seed"});
            auto& tc = c.train;
            take(t, "hidden_layers", tc.hidden_layers);
            take(t, "hidden_width", tc.hidden_width);
            take(t, "n_u", tc.n_u);
            take(t, "n_f", tc.n_f);
            take(t, "lambda_u", tc.lambda_u);
            take(t, "lambda_f", tc.lambda_f);
            take(t, "beta", tc.beta);
            take(t, "adam_epochs", tc.adam_epochs);
            take(t, "adam_lr", tc.adam_lr);
            take(t, "adam_epsilon", tc.adam_epsilon);
            take(t, "lbfgs_epochs", tc.lbfgs_epochs);
            take(t, "lbfgs_max_evals", tc.lbfgs_max_evals);
            take(t, "lbfgs_history", tc.lbfgs_history);
            take(t, "lbfgs_max_line_search", tc.lbfgs_max_line_search);
            take(t, "lbfgs_tolerance", tc.lbfgs_tolerance);
            take(t, "include_initial", tc.include_initial);
            take(t, "seed", tc.seed);
        }
        if (j.contains("placement")) {
            const auto& p = j.at("placement");
            check_keys(p, "placement.", {"n_min", "n_max", "d", "d1", "margin", "big_m", "signed_costs", "nx", "ny"});
            auto& pc = c.placement;
            take(p, "n_min", pc.n_min);
            take(p, "n_max", pc.n_max);
            take(p, "d", pc.d);
            pc.margin = pc.d;
            take(p, "d1", pc.d1);
            take(p, "margin", pc.margin);
            take(p, "big_m", pc.big_m);
            take(p, "signed_costs", pc.signed_costs);
            take(p, "nx", c.place_nx);
            take(p, "ny", c.place_ny);
        }
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("config: ") + e.what());
    }
}

RunConfig load_run_config(const std::filesystem::path& path, bool desk_scale) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str(), desk_scale);
}

std::string run_config_json(const RunConfig& c) {
    json j;
    j["dim"] = c.dim;
    j["horizon_hours"] = c.horizon;
    j["seed"] = c.seed;
    if (c.drive_path) j["drive"] = c.drive_path->string();
    j["out"] = c.out_dir.string();
    j["physics"] = {{"k", c.physics.k}, {"rho", c.physics.rho}, {"cp", c.physics.cp},
                    {"h", c.physics.h}, {"p0", c.physics.p0},   {"nu", c.physics.nu}};
    j["grid"] = {{"nx", c.grid.nx}, {"nt", c.grid.nt}};
    const auto& t = c.train;
    j["train"] = {{"hidden_layers", t.hidden_layers},
                  {"hidden_width", t.hidden_width},
                  {"n_u", t.n_u},
                  {"n_f", t.n_f},
                  {"lambda_u", t.lambda_u},
                  {"lambda_f", t.lambda_f},
                  {"beta", t.beta},
                  {"adam_epochs", t.adam_epochs},
                  {"adam_lr", t.adam_lr},
                  {"adam_epsilon", t.adam_epsilon},
                  {"lbfgs_epochs", t.lbfgs_epochs},
                  {"lbfgs_max_evals", t.lbfgs_max_evals},
                  {"lbfgs_history", t.lbfgs_history},
                  {"lbfgs_max_line_search", t.lbfgs_max_line_search},
                  {"lbfgs_tolerance", t.lbfgs_tolerance},
                  {"include_initial", t.include_initial},
                  {"seed", t.seed}};
    const auto& p = c.placement;
    j["placement"] = {{"n_min", p.n_min}, {"n_max", p.n_max},   {"d", p.d},
                      {"d1", p.d1},       {"margin", p.margin}, {"big_m", p.big_m},
                      {"signed_costs", p.signed_costs}, {"nx", c.place_nx}, {"ny", c.place_ny}};
    return j.dump(1) + "\n";
}

}  // namespace xfmr
