#pragma once

#include <vector>

#include "xfmr/drive.hpp"

namespace xfmr {

/// Positions of the network inputs: space coordinates, t, K, Ta, To.
struct InputLayout {
    int dim = 1;

    int size() const { return dim + 4; }
    int x() const { return 0; }
    int y() const { return 1; }
    int t() const { return dim; }
    int kf() const { return dim + 1; }
    int ta() const { return dim + 2; }
    int to() const { return dim + 3; }
};

/// Min-max map of each input slot onto [-1, 1] and z-score of the output.
struct Scaler {
    std::vector<double> in_min;
    std::vector<double> in_max;
    double out_mean = 0.0;
    double out_std = 1.0;

    /// Throws DegenerateError if a slot is constant or out_std <= 0.
    void validate() const;

    double standardize(int slot, double v) const {
        return (2.0 * v - (in_max[slot] + in_min[slot])) / (in_max[slot] - in_min[slot]);
    }
    double destandardize(int slot, double z) const {
        return 0.5 * (z * (in_max[slot] - in_min[slot]) + (in_max[slot] + in_min[slot]));
    }
    /// d(standardized)/d(physical) for a slot.
    double slope(int slot) const { return 2.0 / (in_max[slot] - in_min[slot]); }

    double normalize(double u) const { return (u - out_mean) / out_std; }
    double denormalize(double un) const { return out_mean + out_std * un; }

    bool operator==(const Scaler&) const = default;
};

/// Space slots span [0, 1], t spans [0, horizon], drive slots span the drive's
/// range over [0, horizon]. Output mean/std are taken over the boundary
/// temperatures (Ta, To and, in 2D, their average) at the drive samples in
/// the horizon.
Scaler fit_scaler(const DriveSeries& drive, int dim, double horizon);

}  // namespace xfmr
