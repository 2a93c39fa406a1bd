#include "xfmr/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "xfmr/errors.hpp"

namespace xfmr {

using nlohmann::json;

std::string checkpoint_to_string(const PinnModel& model) {
    const NetSpec& net = model.params.spec();
    json j;
    j["format"] = kCheckpointFormat;
    j["version"] = kCheckpointVersion;
    j["net"] = {{"input_dim", net.input_dim},
                {"hidden_layers", net.hidden_layers},
                {"hidden_width", net.hidden_width},
                {"output_dim", net.output_dim}};
    const PhysicsSpec& p = model.physics;
    j["physics"] = {{"dim", p.dim}, {"k", p.k},   {"rho", p.rho}, {"cp", p.cp},
                    {"h", p.h},     {"p0", p.p0}, {"nu", p.nu}};
    j["scaler"] = {{"in_min", model.scaler.in_min},
                   {"in_max", model.scaler.in_max},
                   {"out_mean", model.scaler.out_mean},
                   {"out_std", model.scaler.out_std}};
    j["params"] = model.params.vector();
    return j.dump(1) + "\n";
}

PinnModel checkpoint_from_string(const std::string& text) {
    try {
        const json j = json::parse(text);
        if (j.at("format").get<std::string>() != kCheckpointFormat) throw IoError("checkpoint: unknown format tag");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw IoError("checkpoint: unsupported version " + std::to_string(version));
        }
        NetSpec net;
        net.input_dim = j.at("net").at("input_dim").get<int>();
        net.hidden_layers = j.at("net").at("hidden_layers").get<int>();
        net.hidden_width = j.at("net").at("hidden_width").get<int>();
        net.output_dim = j.at("net").at("output_dim").get<int>();

        PhysicsSpec phys;
        const auto& jp = j.at("physics");
        phys.dim = jp.at("dim").get<int>();
        phys.k = jp.at("k").get<double>();
        phys.rho = jp.at("rho").get<double>();
        phys.cp = jp.at("cp").get<double>();
        phys.h = jp.at("h").get<double>();
        phys.p0 = jp.at("p0").get<double>();
        phys.nu = jp.at("nu").get<double>();
        phys.validate();
        if (net.input_dim != phys.dim + 4) throw IoError("checkpoint: input_dim does not match physics dim");

        Scaler sc;
        sc.in_min = j.at("scaler").at("in_min").get<std::vector<double>>();
        sc.in_max = j.at("scaler").at("in_max").get<std::vector<double>>();
        sc.out_mean = j.at("scaler").at("out_mean").get<double>();
        sc.out_std = j.at("scaler").at("out_std").get<double>();
        sc.validate();
        if (static_cast<int>(sc.in_min.size()) != net.input_dim) throw IoError("checkpoint: scaler size mismatch");

        return PinnModel{phys, sc, NetworkParams(net, j.at("params").get<std::vector<double>>())};
    } catch (const json::exception& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    } catch (const ArgumentError& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    } catch (const DegenerateError& e) {
        throw IoError(std::string("checkpoint: ") + e.what());
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
        os << contents;
        os.flush();
        if (!os) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void save_checkpoint(const std::filesystem::path& path, const PinnModel& model) {
    write_file_atomic(path, checkpoint_to_string(model));
}

PinnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    return checkpoint_from_string(ss.str());
}

}  // namespace xfmr
