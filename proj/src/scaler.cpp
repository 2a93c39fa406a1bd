#include "xfmr/scaler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xfmr/errors.hpp"

namespace xfmr {

void Scaler::validate() const {
    if (in_min.size() != in_max.size() || in_min.empty()) throw ArgumentError("scaler: slot arrays malformed");
    for (std::size_t s = 0; s < in_min.size(); ++s) {
        if (!(in_max[s] > in_min[s])) {
            throw DegenerateError("scaler: input slot " + std::to_string(s) + " is constant");
        }
    }
    if (!(out_std > 0.0) || !std::isfinite(out_mean)) throw DegenerateError("scaler: output std must be > 0");
}

Scaler fit_scaler(const DriveSeries& drive, int dim, double horizon) {
    if (dim != 1 && dim != 2) throw ArgumentError("fit_scaler: dim must be 1 or 2");
    if (!(horizon > 0.0)) throw ArgumentError("fit_scaler: horizon must be > 0");
    if (drive.t_first() > 0.0 || drive.t_last() < horizon) {
        std::ostringstream msg;
        msg << "fit_scaler: drive does not cover [0, " << horizon << "]";
        throw RangeError(msg.str());
    }
    const InputLayout layout{dim};

    std::vector<DriveSample> samples{drive.at(0.0)};
    for (double t : drive.t()) {
        if (t > 0.0 && t < horizon) samples.push_back(drive.at(t));
    }
    samples.push_back(drive.at(horizon));

    Scaler s;
    s.in_min.assign(layout.size(), 0.0);
    s.in_max.assign(layout.size(), 1.0);
    s.in_min[layout.t()] = 0.0;
    s.in_max[layout.t()] = horizon;

    const double inf = std::numeric_limits<double>::infinity();
    double lo[3] = {inf, inf, inf};
    double hi[3] = {-inf, -inf, -inf};
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t count = 0;
    for (const auto& d : samples) {
        const double v[3] = {d.kf, d.ta, d.to};
        for (int q = 0; q < 3; ++q) {
            lo[q] = std::min(lo[q], v[q]);
            hi[q] = std::max(hi[q], v[q]);
        }
        std::vector<double> boundary = {d.ta, d.to};
        if (dim == 2) boundary.push_back(d.tav);
        for (double b : boundary) {
            sum += b;
            sum_sq += b * b;
            ++count;
        }
    }
    s.in_min[layout.kf()] = lo[0];
    s.in_max[layout.kf()] = hi[0];
    s.in_min[layout.ta()] = lo[1];
    s.in_max[layout.ta()] = hi[1];
    s.in_min[layout.to()] = lo[2];
    s.in_max[layout.to()] = hi[2];

    s.out_mean = sum / static_cast<double>(count);
    const double var = std::max(0.0, sum_sq / static_cast<double>(count) - s.out_mean * s.out_mean);
    s.out_std = std::sqrt(var);
    s.validate();
    return s;
}

}  // namespace xfmr
