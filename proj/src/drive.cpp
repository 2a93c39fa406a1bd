#include "xfmr/drive.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "csv_util.hpp"
#include "xfmr/errors.hpp"

namespace xfmr {

DriveSeries::DriveSeries(std::vector<double> t, std::vector<double> ta, std::vector<double> to, std::vector<double> kf)
    : t_(std::move(t)), ta_(std::move(ta)), to_(std::move(to)), kf_(std::move(kf)) {
    const auto n = t_.size();
    if (ta_.size() != n || to_.size() != n || kf_.size() != n) {
        throw ArgumentError("drive series: t, ta, to and kf must have the same length");
    }
    if (n < 2) throw ArgumentError("drive series: need at least 2 samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(t_[i]) || !std::isfinite(ta_[i]) || !std::isfinite(to_[i]) || !std::isfinite(kf_[i])) {
            throw ArgumentError("drive series: non-finite value at sample " + std::to_string(i));
        }
        if (i > 0 && !(t_[i] > t_[i - 1])) {
            throw ArgumentError("drive series: times must be strictly increasing (sample " + std::to_string(i) + ")");
        }
        if (kf_[i] < 0.0) {
            throw ArgumentError("drive series: negative load factor at sample " + std::to_string(i));
        }
    }
}

DriveSample DriveSeries::at(double t) const {
    if (!(t >= t_.front() && t <= t_.back())) {
        std::ostringstream msg;
        msg << "drive_at: t=" << t << " outside [" << t_.front() << ", " << t_.back() << "]";
        throw RangeError(msg.str());
    }
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    if (hi == t_.size()) hi = t_.size() - 1;
    std::size_t lo = hi - 1;
    if (t == t_[lo]) return DriveSample::make(ta_[lo], to_[lo], kf_[lo]);
    if (t == t_[hi]) return DriveSample::make(ta_[hi], to_[hi], kf_[hi]);
    const double w = (t - t_[lo]) / (t_[hi] - t_[lo]);
    auto lerp = [w](double a, double b) { return a + w * (b - a); };
    return DriveSample::make(lerp(ta_[lo], ta_[hi]), lerp(to_[lo], to_[hi]), lerp(kf_[lo], kf_[hi]));
}

DriveSeries synth_drive(std::uint64_t seed, int hours) {
    if (hours < 2) throw ArgumentError("synth_drive: hours must be >= 2");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    const auto n = static_cast<std::size_t>(hours) + 1;
    std::vector<double> t(n), ta(n), to(n), kf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hour = static_cast<double>(i);
        // Ambient peaks mid-afternoon, load peaks in the evening.
        double amb = 7.5 + 6.0 * std::sin(two_pi * (hour - 9.0) / 24.0) + 1.0 * unit(rng);
        double load = 0.7 + 0.25 * std::sin(two_pi * (hour - 12.0) / 24.0) + 0.04 * unit(rng);
        amb = std::clamp(amb, 0.0, 15.0);
        load = std::clamp(load, 0.4, 1.0);
        t[i] = hour;
        ta[i] = amb;
        kf[i] = load;
        to[i] = amb + 30.0 + 15.0 * load;
    }
    return DriveSeries(std::move(t), std::move(ta), std::move(to), std::move(kf));
}

void write_drive_csv(std::ostream& os, const DriveSeries& series) {
    using detail::format_double;
    os << "t_hours,ta_c,to_c,k_pu\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        os << format_double(series.t()[i]) << ',' << format_double(series.ta()[i]) << ','
           << format_double(series.to()[i]) << ',' << format_double(series.kf()[i]) << '\n';
    }
}

void write_drive_csv(const std::filesystem::path& path, const DriveSeries& series) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    write_drive_csv(os, series);
    if (!os) throw IoError("write failed: " + path.string());
}

DriveSeries read_drive_csv(std::istream& is) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw IoError("drive csv: empty input");
    ++line_no;
    if (detail::strip_line(line) != "t_hours,ta_c,to_c,k_pu") {
        throw IoError("drive csv: expected header 't_hours,ta_c,to_c,k_pu'");
    }
    std::vector<double> t, ta, to, kf;
    while (std::getline(is, line)) {
        ++line_no;
        line = detail::strip_line(line);
        if (line.empty()) continue;
        auto fields = detail::split_commas(line);
        if (fields.size() != 4) {
            throw IoError("drive csv: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                          " fields, expected 4");
        }
        t.push_back(detail::parse_double(fields[0], line_no));
        ta.push_back(detail::parse_double(fields[1], line_no));
        to.push_back(detail::parse_double(fields[2], line_no));
        kf.push_back(detail::parse_double(fields[3], line_no));
    }
    try {
        return DriveSeries(std::move(t), std::move(ta), std::move(to), std::move(kf));
    } catch (const ArgumentError& e) {
        throw IoError(std::string("drive csv: ") + e.what());
    }
}

DriveSeries read_drive_csv(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    return read_drive_csv(is);
}

}  // namespace xfmr
