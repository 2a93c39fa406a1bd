#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "xfmr/reference_solver.hpp"

namespace xfmr {

// Field CSV: header `x,t_hours,u_c` (1D) or `x,y,t_hours,u_c` (2D). Rows are
// grouped by time level; within a level y varies slowest and x fastest.

/// Writes every level, or only the levels nearest to the listed times.
void write_field_csv(std::ostream& os, const FieldSeries& field, const std::vector<std::size_t>* levels = nullptr);
void write_field_csv(const std::filesystem::path& path, const FieldSeries& field,
                     const std::vector<std::size_t>* levels = nullptr);

/// Parses a field CSV written by `write_field_csv`; row order is free but the
/// file must cover a full uniform node grid at every listed time.
FieldSeries read_field_csv(std::istream& is);
FieldSeries read_field_csv(const std::filesystem::path& path);

/// Index of the stored level closest to t; throws RangeError if no level is
/// within `tol` hours of it.
std::size_t level_index(const FieldSeries& field, double t, double tol = 1e-9);

/// Restricts a series to the given levels (ascending, unique).
FieldSeries select_levels(const FieldSeries& field, const std::vector<std::size_t>& levels);

}  // namespace xfmr
