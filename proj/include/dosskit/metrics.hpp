#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosskit/manifest.hpp"

namespace dosskit {

struct ScoreEntry {
  double score = 0.0;
  Label label = Label::real;
};

/// Scores of one test set. Higher score means "more real".
struct ScoreSet {
  std::string name;
  std::vector<ScoreEntry> entries;
};

/// Reads `{"id":..., "score":..., "label":...}` lines. Blank and '#' lines
/// are skipped; non-finite scores are rejected.
ScoreSet parse_score_set(std::istream& in, std::string name);

/// One point of the threshold sweep. A sample is called real when
/// score >= threshold.
struct RocPoint {
  double threshold = 0.0;  ///< +inf for the final point
  double fpr = 0.0;        ///< fakes with score >= threshold
  double fnr = 0.0;        ///< reals with score < threshold
};

/// Sweep over every distinct score (ascending) followed by +inf. The first
/// point always has fnr = 0, fpr = 1; the last has fnr = 1, fpr = 0.
std::vector<RocPoint> roc_points(const ScoreSet& set);

/// Equal error rate: the point where FNR − FPR changes sign along the sweep,
/// linearly interpolated between the two bracketing points.
double eer(const ScoreSet& set);

/// Fraction of entries where (score >= threshold) agrees with label == real.
/// Scores must lie in [0, 1].
double acc(const ScoreSet& set, double threshold = 0.5);

/// Harmonic mean of eer and 1 − acc; 0 when both are 0.
double cde(double eer, double acc);

struct SetMetrics {
  double eer = 0.0;
  double acc = 0.0;
  double cde = 0.0;
};

enum class CdeAggregation {
  mean_of_sets,   ///< average the per-set CDE values (default)
  of_macro_means, ///< CDE of the macro EER and macro ACC
};

struct MetricReport {
  std::map<std::string, SetMetrics> per_set;
  SetMetrics macro;
  CdeAggregation cde_aggregation = CdeAggregation::mean_of_sets;
  double threshold = 0.5;
  /// Sets that could not be scored, with the reason. Only filled by
  /// evaluate_sets(); macro_report() throws instead.
  std::map<std::string, std::string> failures;

  bool partial() const noexcept { return !failures.empty(); }
  std::string to_json() const;
  /// CSV rows "set,eer,acc,cde" in name order, then a "macro" row.
  std::string to_csv() const;
};

SetMetrics set_metrics(const ScoreSet& set, double threshold = 0.5);

/// Per-set metrics and their unweighted means. Any per-set error is
/// rethrown with the set name prefixed.
MetricReport macro_report(std::span<const ScoreSet> sets, double threshold = 0.5,
                          CdeAggregation aggregation = CdeAggregation::mean_of_sets);

/// Like macro_report() but records failing sets in `failures` and averages
/// over the remaining ones.
MetricReport evaluate_sets(std::span<const ScoreSet> sets, double threshold = 0.5,
                           CdeAggregation aggregation = CdeAggregation::mean_of_sets);

}  // namespace dosskit
