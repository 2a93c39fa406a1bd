#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using xfmr::cli::run;

namespace {

struct Captured {
    int code;
    std::string out;
};

Captured call(std::vector<std::string> args) {
    args.insert(args.begin(), "xfmr");
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = run(args);
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    return {code, out.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int count_lines(const fs::path& p) {
    std::ifstream is(p);
    int n = 0;
    for (std::string line; std::getline(is, line);) ++n;
    return n;
}

fs::path small_config(const fs::path& dir, const std::string& extra = "") {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << R"({"grid": {"nx": 21, "nt": 48},
        "train": {"hidden_layers": 2, "hidden_width": 5, "n_u": 10, "n_f": 40,
                  "adam_epochs": 4, "lbfgs_epochs": 3},
        "placement": {"nx": 15 )" << extra << "}}";
    return p;
}

}  // namespace

TEST_CASE("gen-data writes a deterministic drive file") {
    const auto dir = testing::scratch_dir("cli_gen");
    REQUIRE(call({"gen-data", "--out", (dir / "a").string()}).code == 0);
    REQUIRE(call({"gen-data", "--out", (dir / "b").string()}).code == 0);
    REQUIRE(call({"--seed", "2", "gen-data", "--hours", "10", "--out", (dir / "c").string()}).code == 0);
    CHECK(count_lines(dir / "a" / "drive.csv") == 102);
    CHECK(slurp(dir / "a" / "drive.csv") == slurp(dir / "b" / "drive.csv"));
    CHECK(count_lines(dir / "c" / "drive.csv") == 12);
}

TEST_CASE("simulate writes the full field or snapshots") {
    const auto dir = testing::scratch_dir("cli_sim");
    const auto cfg = small_config(dir).string();
    const auto out = (dir / "o").string();
    REQUIRE(call({"--config", cfg, "--out", out, "simulate"}).code == 0);
    CHECK(fs::exists(dir / "o" / "reference.csv"));
    CHECK(fs::exists(dir / "o" / "drive.csv"));
    const auto meta = nlohmann::json::parse(slurp(dir / "o" / "reference_meta.json"));
    CHECK(meta["nx"] == 21);

    const auto snaps = (dir / "s").string();
    REQUIRE(call({"--config", cfg, "--out", snaps, "simulate", "--snapshot", "6,12.5"}).code == 0);
    CHECK(fs::exists(dir / "s" / "snapshot_t6.csv"));
    CHECK(fs::exists(dir / "s" / "snapshot_t12.5.csv"));
    CHECK_FALSE(fs::exists(dir / "s" / "reference.csv"));

    const auto ref = (dir / "o" / "reference.csv").string();
    const auto same = call({"compare", ref, ref, "--times", "6,500"});
    REQUIRE(same.code == 0);
    const auto j = nlohmann::json::parse(same.out);
    CHECK(j["rel_l2_field"].get<double>() == 0.0);
    CHECK(j["rel_l2_top"].get<double>() == 0.0);
    CHECK(j["snapshots"].size() == 1);
    CHECK(j["skipped_times"].size() == 1);

    CHECK(call({"compare", ref, (dir / "missing.csv").string()}).code == 6);
    CHECK(call({"compare", ref, (dir / "s" / "snapshot_t6.csv").string()}).code == 0);
}

TEST_CASE("train then place from the network") {
    const auto dir = testing::scratch_dir("cli_train");
    const auto cfg = small_config(dir).string();
    const auto out = (dir / "o").string();
    REQUIRE(call({"--config", cfg, "--out", out, "--desk-scale", "train"}).code == 0);
    CHECK(fs::exists(dir / "o" / "checkpoint.json"));
    CHECK(count_lines(dir / "o" / "train_report.csv") > 4);
    const auto summary = nlohmann::json::parse(slurp(dir / "o" / "train_summary.json"));
    CHECK(summary["aborted"] == false);

    for (const std::string m : {"1", "2", "3"}) {
        REQUIRE(call({"--config", cfg, "--out", out, "place", "--model", m}).code == 0);
        const auto rep = nlohmann::json::parse(slurp(dir / "o" / ("placement_model" + m + ".json")));
        CHECK(rep["selected"].size() >= 5);
    }
    CHECK(call({"--config", cfg, "--out", out, "place", "--source", "reference", "--model", "2"}).code == 0);
}

TEST_CASE("exit codes for bad input") {
    const auto dir = testing::scratch_dir("cli_errors");
    const auto out = (dir / "o").string();
    CHECK(call({}).code == 1);
    CHECK(call({"frobnicate"}).code == 1);
    CHECK(call({"--config", (dir / "none.json").string(), "simulate"}).code == 1);
    std::ofstream(dir / "bad.json") << R"({"grid": {"nx": 21, "bogus": 1}})";
    CHECK(call({"--config", (dir / "bad.json").string(), "--out", out, "simulate"}).code == 1);
    CHECK(call({"place", "--model", "4"}).code == 1);

    const auto tight = small_config(dir, R"(, "n_min": 6, "n_max": 8, "d": 0.3, "d1": 0.4)").string();
    CHECK(call({"--config", tight, "--out", out, "place", "--source", "reference", "--model", "2"}).code == 5);
    CHECK(call({"--config", tight, "--out", out, "place", "--checkpoint", (dir / "none.json").string()}).code == 2);
}
