#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "xfmr/checkpoint.hpp"
#include "xfmr/drive.hpp"
#include "xfmr/errors.hpp"
#include "xfmr/field_io.hpp"
#include "xfmr/pinn.hpp"
#include "xfmr/placement.hpp"
#include "xfmr/reference_solver.hpp"
#include "xfmr/run_config.hpp"
#include "xfmr/trainer.hpp"

namespace xfmr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool desk_scale = false;
};

struct Failure {
    int code;
    std::string message;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig c = g.config.empty() ? RunConfig::defaults(1, 24.0, g.desk_scale) : load_run_config(g.config, g.desk_scale);
    if (g.seed) {
        c.seed = *g.seed;
        c.train.seed = *g.seed;
    }
    if (!g.out.empty()) c.out_dir = g.out;
    c.validate();
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + c.out_dir.string() + ": " + ec.message());
    return c;
}

DriveSeries resolve_drive(const RunConfig& c) {
    if (c.drive_path) return read_drive_csv(*c.drive_path);
    return synth_drive(c.seed, static_cast<int>(std::ceil(c.horizon - 1e-9)));
}

FieldSeries resolve_reference(const RunConfig& c, const DriveSeries& drive, const std::string& path) {
    if (!path.empty()) {
        FieldSeries f = read_field_csv(path);
        if (f.dim() != c.dim) throw ArgumentError("reference field dimension does not match the config");
        return f;
    }
    try {
        return solve_reference(c.physics, drive, c.grid);
    } catch (const RangeError& e) {
        throw Failure{kSolver, e.what()};
    }
}

std::string time_label(double t) {
    std::ostringstream os;
    os << t;
    return os.str();
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

void print_drive_summary(const DriveSeries& d) {
    auto stats = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        std::ostringstream os;
        os << "min " << *lo << "  mean " << mean << "  max " << *hi;
        return os.str();
    };
    std::cout << "rows     " << d.size() << "  (t = " << d.t_first() << " .. " << d.t_last() << " h)\n"
              << "ta [C]   " << stats(d.ta()) << '\n'
              << "to [C]   " << stats(d.to()) << '\n'
              << "K  [pu]  " << stats(d.kf()) << '\n';
}

int cmd_gen_data(const Globals& g, int hours, const std::string& file) {
    const std::uint64_t seed = g.seed.value_or(1);
    const fs::path dir = g.out.empty() ? fs::path("out") : fs::path(g.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    const DriveSeries d = synth_drive(seed, hours);
    const fs::path path = dir / file;
    std::ostringstream os;
    write_drive_csv(os, d);
    write_text(path, os.str());
    std::cout << "wrote " << path.string() << '\n';
    print_drive_summary(d);
    return kOk;
}

int cmd_simulate(const Globals& g, const std::vector<double>& snapshots) {
    const RunConfig c = resolve_config(g);
    const DriveSeries drive = resolve_drive(c);
    const FieldSeries field = resolve_reference(c, drive, "");

    std::ostringstream ds;
    write_drive_csv(ds, drive);
    write_text(c.out_dir / "drive.csv", ds.str());

    json meta;
    meta["dim"] = c.dim;
    meta["nx"] = c.grid.nx;
    meta["nt"] = c.grid.nt;
    meta["horizon_hours"] = c.horizon;
    meta["seed"] = c.seed;
    json files = json::array();
    if (snapshots.empty()) {
        std::ostringstream os;
        write_field_csv(os, field);
        write_text(c.out_dir / "reference.csv", os.str());
        files.push_back("reference.csv");
    } else {
        for (double t : snapshots) {
            std::vector<std::size_t> level{level_index(field, t, 0.5 * c.grid.dt())};
            std::ostringstream os;
            write_field_csv(os, field, &level);
            const std::string name = "snapshot_t" + time_label(t) + ".csv";
            write_text(c.out_dir / name, os.str());
            files.push_back(name);
        }
    }
    meta["files"] = files;
    write_text(c.out_dir / "reference_meta.json", meta.dump(1) + "\n");
    for (const auto& f : files) std::cout << "wrote " << (c.out_dir / f.get<std::string>()).string() << '\n';
    return kOk;
}

int cmd_train(const Globals& g, const std::string& reference_path) {
    const RunConfig c = resolve_config(g);
    const DriveSeries drive = resolve_drive(c);
    const FieldSeries reference = resolve_reference(c, drive, reference_path);

    TrainingRun run = [&] {
        try {
            return run_training(c.physics, drive, c.horizon, reference, c.train);
        } catch (const NumericError& e) {
            throw Failure{kTraining, e.what()};
        }
    }();

    save_checkpoint(c.out_dir / "checkpoint.json", run.model);
    std::ostringstream rs;
    write_report_csv(rs, run.report);
    write_text(c.out_dir / "train_report.csv", rs.str());

    json summary;
    summary["epochs"] = run.report.epochs.size();
    summary["rel_l2_field"] = run.final_metrics.rel_l2_field;
    summary["rel_l2_top"] = run.final_metrics.rel_l2_top;
    summary["wall_seconds"] = run.report.wall_seconds;
    summary["aborted"] = run.aborted;
    summary["message"] = run.message;
    write_text(c.out_dir / "train_summary.json", summary.dump(1) + "\n");

    std::cout << "epochs        " << run.report.epochs.size() << '\n'
              << "rel_l2_field  " << run.final_metrics.rel_l2_field << '\n'
              << "rel_l2_top    " << run.final_metrics.rel_l2_top << '\n'
              << "stop          " << run.message << '\n';
    if (run.aborted) {
        std::cerr << "xfmr: training aborted: " << run.message << " (last finite checkpoint kept)\n";
        return kTraining;
    }
    return kOk;
}

int cmd_place(const Globals& g, const std::string& source, int model, const std::string& checkpoint,
              const std::string& reference_path) {
    const RunConfig c = resolve_config(g);
    const DriveSeries drive = resolve_drive(c);
    const PlacementGrid grid = build_grid(c.dim, c.place_nx, c.place_ny, c.placement.margin);
    const auto times = hourly_times(c.horizon);

    ScoreField scores;
    if (source == "pinn") {
        const fs::path ck = checkpoint.empty() ? c.out_dir / "checkpoint.json" : fs::path(checkpoint);
        const PinnModel m = load_checkpoint(ck);
        if (m.physics.dim != c.dim) throw ArgumentError("checkpoint dimension does not match the config");
        scores = score_field(pinn_divergence(m, drive), grid, times);
    } else {
        const FieldSeries reference = resolve_reference(c, drive, reference_path);
        scores = score_field(field_divergence(reference), grid, times);
    }

    const PlacementInstance inst(model, grid, scores, c.placement);
    const PlacementSolution sol = solve_placement(inst);
    const auto problems = validate_solution(inst, sol);
    if (!problems.empty()) throw Failure{kSolver, "placement failed validation: " + problems.front()};

    const std::string stem = "placement_model" + std::to_string(model);
    write_text(c.out_dir / (stem + ".json"), placement_report_json(inst, sol));
    std::ostringstream os;
    write_placement_csv(os, inst, sol);
    write_text(c.out_dir / (stem + ".csv"), os.str());

    std::cout << "model " << model << " (" << to_string(sol.solver) << ", " << sol.nodes << " nodes)\n"
              << "objective " << sol.objective << '\n'
              << "sensors  ";
    for (int i : sol.selected) {
        const auto& p = grid.points[static_cast<std::size_t>(i)];
        std::cout << ' ' << p.x;
        if (c.dim == 2) std::cout << ':' << p.y;
    }
    std::cout << '\n';
    return kOk;
}

FieldSeries on_grid_of(const FieldSeries& a, const FieldSeries& b) {
    if (a.dim() == b.dim() && a.nx() == b.nx() && a.times() == b.times()) return a;
    if (a.dim() != b.dim()) throw ArgumentError("fields have different dimensions");
    std::vector<double> v;
    v.reserve(b.values().size());
    for (double t : b.times())
        for (int j = 0; j < b.ny(); ++j)
            for (int i = 0; i < b.nx(); ++i) v.push_back(sample_series(a, {b.coord(i), b.coord(j)}, t));
    return FieldSeries(b.dim(), b.nx(), b.times(), std::move(v));
}

int cmd_compare(const Globals& g, const std::string& a_path, const std::string& b_path, std::vector<double> times) {
    try {
        const FieldSeries b = read_field_csv(b_path);
        const FieldSeries a = on_grid_of(read_field_csv(a_path), b);
        if (times.empty()) {
            times = b.dim() == 2 ? std::vector<double>{10, 50, 80} : std::vector<double>{15, 30, 50, 65, 80};
        }
        json j;
        j["rel_l2_field"] = relative_l2(a, b);
        j["rel_l2_top"] = relative_l2(top_oil_trace(a), top_oil_trace(b));
        json slices = json::array();
        json skipped = json::array();
        for (double t : times) {
            std::size_t n;
            try {
                n = level_index(b, t, 1e-6);
            } catch (const RangeError&) {
                skipped.push_back(t);
                continue;
            }
            slices.push_back({{"t_hours", t}, {"rel_l2", relative_l2(a.level(n), b.level(n))}});
        }
        j["snapshots"] = slices;
        j["skipped_times"] = skipped;
        const std::string text = j.dump(1) + "\n";
        std::cout << text;
        if (!g.out.empty()) {
            fs::create_directories(g.out);
            write_text(fs::path(g.out) / "compare.json", text);
        }
        return kOk;
    } catch (const std::exception& e) {
        throw Failure{kCompare, e.what()};
    }
}

std::vector<double> parse_times(const std::vector<std::string>& items) {
    std::vector<double> out;
    for (const auto& s : items) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw CLI::ValidationError("time list", "not a number: '" + s + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Transformer thermal modelling toolkit"};
    app.name(args.empty() ? "xfmr" : fs::path(args[0]).filename().string());
    app.require_subcommand(1);

    Globals g;
    std::uint64_t seed = 1;
    app.add_option("--config", g.config, "JSON run configuration")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "random seed for drive synthesis and training");
    app.add_option("--out", g.out, "output directory (default: out)");
    app.add_flag("--desk-scale", g.desk_scale, "use the reduced training profile");
    app.fallthrough();

    int hours = 100;
    std::string drive_file = "drive.csv";
    auto* gen = app.add_subcommand("gen-data", "write a synthetic drive CSV");
    gen->add_option("--hours", hours, "length in hours")->check(CLI::PositiveNumber);
    gen->add_option("--file", drive_file, "file name inside the output directory");

    std::vector<std::string> snapshot_items;
    auto* sim = app.add_subcommand("simulate", "finite-difference reference solution");
    sim->add_option("--snapshot", snapshot_items, "write only these times (hours)")->delimiter(',');

    std::string reference_path;
    auto* train = app.add_subcommand("train", "train the physics-informed network");
    train->add_option("--reference", reference_path, "reference field CSV (computed when absent)")
        ->check(CLI::ExistingFile);

    std::string source = "pinn";
    int model = 1;
    std::string checkpoint;
    auto* place = app.add_subcommand("place", "optimal sensor placement");
    place->add_option("--source", source, "gradient source")->check(CLI::IsMember({"pinn", "reference"}));
    place->add_option("--model", model, "placement model")->check(CLI::Range(1, 3));
    place->add_option("--checkpoint", checkpoint, "trained network (default: <out>/checkpoint.json)");
    place->add_option("--reference", reference_path, "reference field CSV (computed when absent)")
        ->check(CLI::ExistingFile);

    std::string field_a, field_b;
    std::vector<std::string> compare_items;
    auto* compare = app.add_subcommand("compare", "error metrics of field A against reference field B");
    compare->add_option("a", field_a, "field CSV to assess")->required();
    compare->add_option("b", field_b, "reference field CSV")->required();
    compare->add_option("--times", compare_items, "snapshot times (hours)")->delimiter(',');

    std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    if (seed_opt->count() > 0) g.seed = seed;

    int code = kOk;
    try {
        if (*gen) code = cmd_gen_data(g, hours, drive_file);
        else if (*sim) code = cmd_simulate(g, parse_times(snapshot_items));
        else if (*train) code = cmd_train(g, reference_path);
        else if (*place) code = cmd_place(g, source, model, checkpoint, reference_path);
        else if (*compare) code = cmd_compare(g, field_a, field_b, parse_times(compare_items));
    } catch (const Failure& f) {
        std::cerr << "xfmr: error: " << f.message << '\n';
        return f.code;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "xfmr: error: " << e.what() << '\n';
        return kUsage;
    } catch (const InfeasibleError& e) {
        std::cerr << "xfmr: error: " << e.what() << " (n_min " << e.n_min() << ", independence bound "
                  << e.independence_bound() << ")\n";
        return kInfeasible;
    } catch (const IoError& e) {
        std::cerr << "xfmr: error: " << e.what() << '\n';
        return kIo;
    } catch (const ArgumentError& e) {
        std::cerr << "xfmr: error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "xfmr: error: " << e.what() << '\n';
        if (*train) return kTraining;
        if (*compare) return kCompare;
        return kSolver;
    }
    return code;
}

}  // namespace xfmr::cli
