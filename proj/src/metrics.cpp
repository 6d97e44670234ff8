#include "dosskit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "format.hpp"

namespace dosskit {

namespace {

using nlohmann::json;

struct Counts {
  std::size_t reals = 0;
  std::size_t fakes = 0;
};

Counts count_labels(const ScoreSet& set) {
  Counts c;
  for (const auto& e : set.entries) (e.label == Label::real ? c.reals : c.fakes)++;
  return c;
}

SetMetrics average(const std::map<std::string, SetMetrics>& per_set, CdeAggregation aggregation) {
  SetMetrics m;
  if (per_set.empty()) return m;
  for (const auto& [name, s] : per_set) {
    m.eer += s.eer;
    m.acc += s.acc;
    m.cde += s.cde;
  }
  const auto n = static_cast<double>(per_set.size());
  m.eer /= n;
  m.acc /= n;
  m.cde = aggregation == CdeAggregation::mean_of_sets ? m.cde / n : cde(m.eer, m.acc);
  return m;
}

MetricReport report_skeleton(double threshold, CdeAggregation aggregation) {
  MetricReport r;
  r.threshold = threshold;
  r.cde_aggregation = aggregation;
  return r;
}

}  // namespace

ScoreSet parse_score_set(std::istream& in, std::string name) {
  ScoreSet set;
  set.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& why) {
    return validation_error(set.name + ": line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || line[first] == '#') continue;
    const json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) throw fail("malformed JSON");
    const auto score = row.find("score");
    if (score == row.end() || !score->is_number()) throw fail("field 'score' must be a number");
    const auto label = row.find("label");
    if (label == row.end() || !label->is_string()) throw fail("field 'label' must be a string");
    const auto parsed = parse_label(label->get<std::string>());
    if (!parsed) throw fail("label must be \"real\" or \"fake\"");
    const double value = score->get<double>();
    if (!std::isfinite(value)) throw fail("score is not finite");
    set.entries.push_back({value, *parsed});
  }
  if (in.bad()) throw io_error(set.name + ": read failure");
  return set;
}

std::vector<RocPoint> roc_points(const ScoreSet& set) {
  const auto counts = count_labels(set);
  if (counts.reals == 0 || counts.fakes == 0) {
    throw computation_error("EER undefined: need at least one real and one fake score");
  }
  std::vector<ScoreEntry> sorted = set.entries;
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoreEntry& a, const ScoreEntry& b) { return a.score < b.score; });

  const auto reals = static_cast<double>(counts.reals);
  const auto fakes = static_cast<double>(counts.fakes);
  std::vector<RocPoint> points;
  std::size_t reals_below = 0;
  std::size_t fakes_below = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].score;
    points.push_back({t, (fakes - static_cast<double>(fakes_below)) / fakes,
                      static_cast<double>(reals_below) / reals});
    for (; i < sorted.size() && sorted[i].score == t; ++i) {
      (sorted[i].label == Label::real ? reals_below : fakes_below)++;
    }
  }
  points.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return points;
}

double eer(const ScoreSet& set) {
  const auto points = roc_points(set);
  // FNR − FPR is nondecreasing along the sweep, from −1 to +1.
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double gap = points[k].fnr - points[k].fpr;
    if (gap < 0.0) continue;
    if (gap == 0.0 || k == 0) return points[k].fnr;
    const auto& lo = points[k - 1];
    const auto& hi = points[k];
    const double gap_lo = lo.fnr - lo.fpr;
    const double t = -gap_lo / (gap - gap_lo);
    return std::clamp(lo.fnr + t * (hi.fnr - lo.fnr), 0.0, 1.0);
  }
  return 1.0;  // unreachable: the last point has gap 1
}

double acc(const ScoreSet& set, double threshold) {
  if (set.entries.empty()) throw computation_error("ACC undefined on an empty set");
  std::size_t correct = 0;
  for (const auto& e : set.entries) {
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      throw computation_error("unnormalized score for ACC");
    }
    const bool called_real = e.score >= threshold;
    correct += called_real == (e.label == Label::real) ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(set.entries.size());
}

double cde(double eer, double acc) {
  const double miss = 1.0 - acc;
  const double denom = eer + miss;
  if (denom == 0.0) return 0.0;
  return 2.0 * eer * miss / denom;
}

SetMetrics set_metrics(const ScoreSet& set, double threshold) {
  SetMetrics m;
  m.eer = eer(set);
  m.acc = acc(set, threshold);
  m.cde = cde(m.eer, m.acc);
  return m;
}

MetricReport macro_report(std::span<const ScoreSet> sets, double threshold,
                          CdeAggregation aggregation) {
  if (sets.empty()) throw validation_error("no score sets");
  auto report = report_skeleton(threshold, aggregation);
  for (const auto& set : sets) {
    try {
      if (!report.per_set.emplace(set.name, set_metrics(set, threshold)).second) {
        throw validation_error("duplicate set name");
      }
    } catch (const Error& e) {
      throw Error(e.kind(), set.name + ": " + e.what());
    }
  }
  report.macro = average(report.per_set, aggregation);
  return report;
}

MetricReport evaluate_sets(std::span<const ScoreSet> sets, double threshold,
                           CdeAggregation aggregation) {
  auto report = report_skeleton(threshold, aggregation);
  for (const auto& set : sets) {
    try {
      if (report.per_set.contains(set.name) || report.failures.contains(set.name)) {
        throw validation_error("duplicate set name");
      }
      report.per_set.emplace(set.name, set_metrics(set, threshold));
    } catch (const Error& e) {
      report.failures[set.name] = e.what();
    }
  }
  report.macro = average(report.per_set, aggregation);
  return report;
}

std::string MetricReport::to_json() const {
  nlohmann::ordered_json doc;
  const auto metrics = [](const SetMetrics& m) {
    nlohmann::ordered_json j;
    j["eer"] = m.eer;
    j["acc"] = m.acc;
    j["cde"] = m.cde;
    return j;
  };
  doc["threshold"] = threshold;
  doc["cde_aggregation"] =
      cde_aggregation == CdeAggregation::mean_of_sets ? "mean_of_sets" : "of_macro_means";
  doc["per_set"] = nlohmann::ordered_json::object();
  for (const auto& [name, m] : per_set) doc["per_set"][name] = metrics(m);
  doc["macro"] = metrics(macro);
  doc["n_sets"] = per_set.size();
  doc["partial"] = partial();
  doc["failures"] = failures;
  return doc.dump(2);
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "set,eer,acc,cde\n";
  const auto row = [&](const std::string& name, const SetMetrics& m) {
    out << detail::csv_field(name) << ',' << detail::format_double(m.eer) << ','
        << detail::format_double(m.acc) << ',' << detail::format_double(m.cde) << '\n';
  };
  for (const auto& [name, m] : per_set) row(name, m);
  row("macro", macro);
  return out.str();
}

}  // namespace dosskit
