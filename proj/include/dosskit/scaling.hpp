#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosskit/doss.hpp"
#include "dosskit/manifest.hpp"

namespace dosskit {

enum class ScalingAxis { source, generator };

std::string_view to_string(ScalingAxis axis);
std::optional<ScalingAxis> parse_axis(std::string_view text);

/// One diversity-scaling training set configuration.
///
/// Source axis: every chosen source contributes per_source_real · usage real
/// samples, and per_source_real · usage / rho fake samples split evenly over
/// that source's generators (10k real + 4 × 10k fake at usage 1, rho 0.25).
///
/// Generator axis: every chosen generator contributes per_generator_fake ·
/// usage fake samples split evenly over the sources it was built from, and
/// rho times the fake total is drawn from the real domains those sources
/// name (40k fake + 10k real per generator at usage 1).
struct ScalingConfig {
  ScalingAxis axis = ScalingAxis::source;
  std::uint64_t n_units = 1;
  double usage = 1.0;
  double rho = 0.25;
  std::uint64_t per_source_real = 10000;
  std::uint64_t per_generator_fake = 40000;
  std::uint64_t trial_seed = 0;
  std::uint64_t trials = 3;
  /// Restrict (n_units, usage) to the published grid.
  bool strict = true;
};

struct GridPoint {
  std::uint64_t n_units;
  double usage;
};

/// Published settings for an axis: n_units in {1,2,4,8} (source) or
/// {1,2,4,8,16} (generator), usage in {1, 1/2, ...} down to 1/8 or 1/16, and
/// n_units · usage >= 1 so that no training set falls below 50k samples.
/// That leaves 10 source settings and 15 generator settings.
std::vector<GridPoint> scaling_grid(ScalingAxis axis);

/// Units available on an axis, sorted: real sources that have at least one
/// fake domain, or distinct generator names.
std::vector<std::string> scaling_units(const DomainSizes& sizes, ScalingAxis axis);

struct ScalingTrial {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;            ///< trial_seed + trial
  std::vector<std::string> units;    ///< chosen units, sorted
  SelectPlan plan;
};

/// One SelectPlan per trial. Trial i draws n_units units without replacement
/// using Xoshiro256(trial_seed + i) and a partial Fisher-Yates pass over the
/// sorted unit list. Counts that are not whole numbers, or pools too small
/// for the request, are errors.
std::vector<ScalingTrial> build_scaling_config(const ScalingConfig& cfg, const DomainSizes& sizes);
std::vector<ScalingTrial> build_scaling_config(const ScalingConfig& cfg, const DomainIndex& index);

struct PowerLawFit {
  double a = 0.0;            ///< prefactor, exp(intercept)
  double b = 0.0;            ///< exponent, slope in log-log space
  double r_squared = 0.0;    ///< on ln y; 1 when ln y has no variance
  std::size_t n_points = 0;
  /// Standard errors of slope and intercept; absent with two points.
  std::optional<double> b_stderr;
  std::optional<double> intercept_stderr;

  double predict(double x) const;
  std::string to_json() const;
  /// "y = a·x^b (R²=...)"
  std::string describe() const;
};

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Ordinary least squares of ln y on ln x.
PowerLawFit fit_power_law(std::span<const CurvePoint> points);

struct TrialResult {
  ScalingAxis axis = ScalingAxis::source;
  std::uint64_t n_units = 0;
  double usage = 1.0;
  std::uint64_t trial = 0;
  std::string metric;
  double value = 0.0;
};

struct CurveRow {
  ScalingAxis axis = ScalingAxis::source;
  std::uint64_t n_units = 0;
  double usage = 1.0;
  std::string metric;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n_trials = 0;
};

struct CurveTable {
  std::vector<CurveRow> rows;  ///< sorted by (axis, n_units, usage)

  /// Header "axis,n_units,usage,mean,min,max".
  std::string to_csv() const;
};

/// Mean, min and max per (axis, n_units, usage). A group mixing metric
/// names is a validation error.
CurveTable aggregate_trials(std::span<const TrialResult> results);

/// Parses "axis,n_units,usage,trial,metric,value" rows (header optional).
std::vector<TrialResult> parse_trial_results(std::string_view csv);

/// Parses "x,y" rows (header optional, '#' comments skipped).
std::vector<CurvePoint> parse_curve_points(std::string_view csv);

}  // namespace dosskit
