#include "xfmr/field_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "csv_util.hpp"
#include "xfmr/errors.hpp"

namespace xfmr {

void write_field_csv(std::ostream& os, const FieldSeries& field, const std::vector<std::size_t>* levels) {
    using detail::format_double;
    os << (field.dim() == 2 ? "x,y,t_hours,u_c\n" : "x,t_hours,u_c\n");
    auto emit = [&](std::size_t n) {
        const std::string t = format_double(field.times()[n]);
        for (int j = 0; j < field.ny(); ++j) {
            for (int i = 0; i < field.nx(); ++i) {
                os << format_double(field.coord(i)) << ',';
                if (field.dim() == 2) os << format_double(field.coord(j)) << ',';
                os << t << ',' << format_double(field.value(n, i, j)) << '\n';
            }
        }
    };
    if (levels) {
        for (auto n : *levels) {
            if (n >= field.levels()) throw ArgumentError("write_field_csv: level index out of range");
            emit(n);
        }
    } else {
        for (std::size_t n = 0; n < field.levels(); ++n) emit(n);
    }
}

void write_field_csv(const std::filesystem::path& path, const FieldSeries& field,
                     const std::vector<std::size_t>* levels) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_field_csv(os, field, levels);
    if (!os) throw IoError("write failed: " + path.string());
}

FieldSeries read_field_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw IoError("field csv: empty input");
    line = detail::strip_line(line);
    int dim = 0;
    if (line == "x,t_hours,u_c") {
        dim = 1;
    } else if (line == "x,y,t_hours,u_c") {
        dim = 2;
    } else {
        throw IoError("field csv: unrecognized header '" + line + "'");
    }
    const std::size_t cols = dim == 2 ? 4 : 3;

    struct Row {
        double x, y, t, u;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        line = detail::strip_line(line);
        if (line.empty()) continue;
        auto f = detail::split_commas(line);
        if (f.size() != cols) throw IoError("field csv: wrong field count on line " + std::to_string(line_no));
        Row r{};
        r.x = detail::parse_double(f[0], line_no);
        r.y = dim == 2 ? detail::parse_double(f[1], line_no) : 0.0;
        r.t = detail::parse_double(f[cols - 2], line_no);
        r.u = detail::parse_double(f[cols - 1], line_no);
        rows.push_back(r);
    }
    if (rows.empty()) throw IoError("field csv: no data rows");

    double x_max = 0.0;
    std::map<double, std::size_t> time_index;
    for (const auto& r : rows) {
        x_max = std::max({x_max, r.x, r.y});
        time_index.emplace(r.t, 0);
    }
    std::size_t per_axis_guess = 0;
    {
        std::vector<double> xs;
        for (const auto& r : rows) xs.push_back(r.x);
        std::sort(xs.begin(), xs.end());
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        per_axis_guess = xs.size();
    }
    const int nx = static_cast<int>(per_axis_guess);
    if (nx < 2 || std::abs(x_max - 1.0) > 1e-12) throw IoError("field csv: nodes must span [0, 1] uniformly");

    std::vector<double> times;
    for (auto& [t, idx] : time_index) {
        idx = times.size();
        times.push_back(t);
    }
    const std::size_t per_level = dim == 2 ? static_cast<std::size_t>(nx) * nx : static_cast<std::size_t>(nx);
    if (rows.size() != per_level * times.size()) {
        throw IoError("field csv: expected " + std::to_string(per_level * times.size()) + " rows, found " +
                      std::to_string(rows.size()));
    }
    std::vector<double> values(rows.size(), std::nan(""));
    auto grid_index = [nx](double v) -> int {
        const double s = v * (nx - 1);
        const long i = std::lround(s);
        if (std::abs(s - static_cast<double>(i)) > 1e-6 || i < 0 || i >= nx) {
            throw IoError("field csv: coordinate " + std::to_string(v) + " is not a grid node");
        }
        return static_cast<int>(i);
    };
    for (const auto& r : rows) {
        const int i = grid_index(r.x);
        const int j = dim == 2 ? grid_index(r.y) : 0;
        const std::size_t slot = time_index[r.t] * per_level + static_cast<std::size_t>(j) * nx + i;
        if (!std::isnan(values[slot])) throw IoError("field csv: duplicate node");
        values[slot] = r.u;
    }
    for (double v : values) {
        if (std::isnan(v)) throw IoError("field csv: missing node");
    }
    return FieldSeries(dim, nx, std::move(times), std::move(values));
}

FieldSeries read_field_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_field_csv(is);
}

std::size_t level_index(const FieldSeries& field, double t, double tol) {
    const auto& times = field.times();
    auto it = std::lower_bound(times.begin(), times.end(), t);
    std::size_t best = times.size();
    double best_gap = tol;
    for (auto cand : {it, it == times.begin() ? it : it - 1}) {
        if (cand == times.end()) continue;
        const double gap = std::abs(*cand - t);
        if (gap <= best_gap) {
            best_gap = gap;
            best = static_cast<std::size_t>(cand - times.begin());
        }
    }
    if (best == times.size()) {
        std::ostringstream msg;
        msg << "no stored time level at t=" << t;
        throw RangeError(msg.str());
    }
    return best;
}

FieldSeries select_levels(const FieldSeries& field, const std::vector<std::size_t>& levels) {
    std::vector<double> times;
    std::vector<double> values;
    for (auto n : levels) {
        if (n >= field.levels()) throw ArgumentError("select_levels: level index out of range");
        times.push_back(field.times()[n]);
        auto lv = field.level(n);
        values.insert(values.end(), lv.begin(), lv.end());
    }
    return FieldSeries(field.dim(), field.nx(), std::move(times), std::move(values));
}

}  // namespace xfmr
