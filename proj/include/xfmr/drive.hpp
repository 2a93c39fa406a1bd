#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "xfmr/physics.hpp"

namespace xfmr {

/// Hourly (or arbitrary, strictly increasing) samples of ambient temperature,
/// top-oil temperature and load factor.
class DriveSeries {
public:
    /// Validates: equal lengths >= 2, strictly increasing times, kf >= 0.
    DriveSeries(std::vector<double> t, std::vector<double> ta, std::vector<double> to, std::vector<double> kf);

    std::size_t size() const { return t_.size(); }
    const std::vector<double>& t() const { return t_; }
    const std::vector<double>& ta() const { return ta_; }
    const std::vector<double>& to() const { return to_; }
    const std::vector<double>& kf() const { return kf_; }

    double t_first() const { return t_.front(); }
    double t_last() const { return t_.back(); }

    /// Linear interpolation; throws RangeError outside [t_first, t_last].
    DriveSample at(double t) const;

    bool operator==(const DriveSeries&) const = default;

private:
    std::vector<double> t_, ta_, to_, kf_;
};

inline DriveSample drive_at(const DriveSeries& series, double t) { return series.at(t); }

/// Deterministic synthetic drive with daily cycles, sampled hourly at
/// t = 0, 1, ..., hours. Ambient stays in [0, 15] C, load in [0.4, 1.0] p.u.
/// and top oil is ta + 30 + 15*kf.
DriveSeries synth_drive(std::uint64_t seed, int hours);

// CSV with header `t_hours,ta_c,to_c,k_pu`.
void write_drive_csv(std::ostream& os, const DriveSeries& series);
void write_drive_csv(const std::filesystem::path& path, const DriveSeries& series);
DriveSeries read_drive_csv(std::istream& is);
DriveSeries read_drive_csv(const std::filesystem::path& path);

}  // namespace xfmr
