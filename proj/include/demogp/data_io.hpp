#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "demogp/errors.hpp"

namespace demogp {

enum class SurfaceKind { kMortality, kFertility };

SurfaceKind surface_kind_from_name(const std::string& name);
std::string surface_kind_name(SurfaceKind kind);

// Age x year grid of rates (raw or log) with a missing-value mask.
struct DemographicSurface {
  std::vector<int> ages;   // row labels; open age groups carry their threshold
  std::vector<int> years;  // column labels, ascending
  Eigen::MatrixXd values;  // ages.size() x years.size()
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;  // true = missing
  SurfaceKind kind = SurfaceKind::kMortality;

  int age_count() const { return static_cast<int>(ages.size()); }
  int year_count() const { return static_cast<int>(years.size()); }
  int age_index(int age) const;
  int year_index(int year) const;
  bool complete() const { return !mask.any(); }
};

enum class RateFormat { kCanonicalCsv, kHmdStyle };

// Canonical CSV: header `year,age,rate`, empty rate = missing.
// HMD-style: whitespace-delimited Year/Age plus named rate columns, "." for
// missing, trailing "+" marks an open age group. `column` selects the rate
// column by header name (e.g. "Male"); ignored for canonical CSV.
DemographicSurface parse_rates(std::istream& input, RateFormat format,
                               const std::string& column = "",
                               SurfaceKind kind = SurfaceKind::kMortality);

void write_canonical_csv(std::ostream& out, const DemographicSurface& surface);

// Elementwise natural log; cells with rate <= 0 become masked.
DemographicSurface log_transform(const DemographicSurface& surface);

// Mortality keeps ages 0..100, fertility 15..45; other rows are dropped.
DemographicSurface truncate_ages(const DemographicSurface& surface,
                                 SurfaceKind kind);

}  // namespace demogp
