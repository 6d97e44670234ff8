#include "dosskit/scaling.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "dosskit/rng.hpp"
#include "format.hpp"

namespace dosskit {

namespace {

constexpr std::uint64_t kSourceUnits[] = {1, 2, 4, 8};
constexpr std::uint64_t kGeneratorUnits[] = {1, 2, 4, 8, 16};
constexpr double kSourceUsage[] = {1.0, 0.5, 0.25, 0.125};
constexpr double kGeneratorUsage[] = {1.0, 0.5, 0.25, 0.125, 0.0625};

std::uint64_t whole(double x, const std::string& what) {
  const double r = std::round(x);
  if (!(x >= 0.0) || std::abs(x - r) > 1e-9 * std::max(1.0, std::abs(x))) {
    throw computation_error(what + " is not a whole number of samples (" +
                            detail::format_double(x) + ")");
  }
  return static_cast<std::uint64_t>(r);
}

// Splits `total` over `keys` as evenly as possible; the first keys absorb
// the remainder.
void spread(std::uint64_t total, const std::vector<DomainKey>& keys, const std::string& unit,
            const DomainSizes& sizes, std::map<DomainKey, std::uint64_t>& counts) {
  const auto k = static_cast<std::uint64_t>(keys.size());
  for (std::uint64_t i = 0; i < k; ++i) {
    const std::uint64_t want = total / k + (i < total % k ? 1 : 0);
    const auto it = sizes.find(keys[i]);
    const std::uint64_t have = it == sizes.end() ? 0 : it->second;
    if (want > have) {
      throw validation_error("insufficient pool for unit " + unit + ": " + keys[i].str() +
                             " needs " + std::to_string(want) + " samples but holds " +
                             std::to_string(have) + " (short by " +
                             std::to_string(want - have) + ")");
    }
    if (want > 0) counts[keys[i]] += want;
  }
}

SelectPlan source_axis_plan(const ScalingConfig& cfg, const std::vector<std::string>& units,
                            const DomainSizes& sizes) {
  SelectPlan plan;
  for (const auto& source : units) {
    const auto real = DomainKey::real(source);
    const auto real_n = whole(static_cast<double>(cfg.per_source_real) * cfg.usage,
                              "real count for source " + source);
    const auto fake_n = whole(static_cast<double>(cfg.per_source_real) * cfg.usage / cfg.rho,
                              "fake count for source " + source);
    std::vector<DomainKey> fakes;
    for (const auto& [key, n] : sizes) {
      if (key.is_fake() && key.source() == source) fakes.push_back(key);
    }
    spread(real_n, {real}, source, sizes, plan.counts);
    spread(fake_n, fakes, source, sizes, plan.counts);
  }
  return plan;
}

SelectPlan generator_axis_plan(const ScalingConfig& cfg, const std::vector<std::string>& units,
                               const DomainSizes& sizes) {
  SelectPlan plan;
  std::set<DomainKey> bases;
  std::uint64_t fake_total = 0;
  for (const auto& generator : units) {
    const auto fake_n = whole(static_cast<double>(cfg.per_generator_fake) * cfg.usage,
                              "fake count for generator " + generator);
    std::vector<DomainKey> fakes;
    for (const auto& [key, n] : sizes) {
      if (key.is_fake() && key.generator() == generator) {
        fakes.push_back(key);
        bases.insert(key.base());
      }
    }
    spread(fake_n, fakes, generator, sizes, plan.counts);
    fake_total += fake_n;
  }
  const auto real_n = whole(static_cast<double>(fake_total) * cfg.rho, "real count");
  spread(real_n, {bases.begin(), bases.end()}, "real pool", sizes, plan.counts);
  return plan;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    out.emplace_back(first == field.npos ? std::string_view{}
                                         : field.substr(first, last - first + 1));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_uint(const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Calls `row` for every data row; a first row that `row` rejects is taken
// as a header.
template <typename RowFn>
void for_each_csv_row(std::string_view csv, std::size_t columns, RowFn row) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fields = split_csv_line(line);
    const bool ok = fields.size() == columns && row(fields);
    if (!ok) {
      if (!seen_data) {
        seen_data = true;  // header
        continue;
      }
      throw validation_error("line " + std::to_string(line_no) + ": malformed row");
    }
    seen_data = true;
  }
}

}  // namespace

std::string_view to_string(ScalingAxis axis) {
  return axis == ScalingAxis::source ? "source" : "generator";
}

std::optional<ScalingAxis> parse_axis(std::string_view text) {
  if (text == "source") return ScalingAxis::source;
  if (text == "generator") return ScalingAxis::generator;
  return std::nullopt;
}

std::vector<GridPoint> scaling_grid(ScalingAxis axis) {
  const std::span<const std::uint64_t> units =
      axis == ScalingAxis::source ? std::span<const std::uint64_t>(kSourceUnits)
                                  : std::span<const std::uint64_t>(kGeneratorUnits);
  const std::span<const double> usages = axis == ScalingAxis::source
                                             ? std::span<const double>(kSourceUsage)
                                             : std::span<const double>(kGeneratorUsage);
  std::vector<GridPoint> grid;
  for (auto n : units) {
    for (auto v : usages) {
      if (static_cast<double>(n) * v >= 1.0) grid.push_back({n, v});
    }
  }
  return grid;
}

std::vector<std::string> scaling_units(const DomainSizes& sizes, ScalingAxis axis) {
  std::set<std::string> units;
  for (const auto& [key, n] : sizes) {
    if (!key.is_fake()) continue;
    if (axis == ScalingAxis::generator) {
      units.insert(key.generator());
    } else if (sizes.contains(key.base())) {
      units.insert(key.source());
    }
  }
  return {units.begin(), units.end()};
}

std::vector<ScalingTrial> build_scaling_config(const ScalingConfig& cfg, const DomainSizes& sizes) {
  if (cfg.n_units < 1) throw validation_error("n_units must be >= 1");
  if (!(cfg.usage > 0.0 && cfg.usage <= 1.0)) throw validation_error("usage must be in (0, 1]");
  if (!(cfg.rho > 0.0) || !std::isfinite(cfg.rho)) throw validation_error("rho must be > 0");
  if (cfg.trials < 1) throw validation_error("trials must be >= 1");
  if (cfg.strict) {
    const auto grid = scaling_grid(cfg.axis);
    const bool on_grid = std::any_of(grid.begin(), grid.end(), [&](const GridPoint& p) {
      return p.n_units == cfg.n_units && p.usage == cfg.usage;
    });
    if (!on_grid) {
      throw validation_error("(" + std::to_string(cfg.n_units) + ", " +
                             detail::format_double(cfg.usage) + ") is not a " +
                             std::string(to_string(cfg.axis)) +
                             "-axis grid point; disable strict mode to allow it");
    }
  }

  const auto units = scaling_units(sizes, cfg.axis);
  if (units.size() < cfg.n_units) {
    throw validation_error("index has " + std::to_string(units.size()) + " " +
                           std::string(to_string(cfg.axis)) + " units, need " +
                           std::to_string(cfg.n_units));
  }

  std::vector<ScalingTrial> trials;
  for (std::uint64_t i = 0; i < cfg.trials; ++i) {
    ScalingTrial trial;
    trial.trial = i;
    trial.seed = cfg.trial_seed + i;
    Xoshiro256 rng(trial.seed);
    auto pool = units;
    for (std::uint64_t k = 0; k < cfg.n_units; ++k) {
      std::swap(pool[k], pool[k + rng.below(pool.size() - k)]);
    }
    trial.units.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.n_units));
    std::sort(trial.units.begin(), trial.units.end());
    trial.plan = cfg.axis == ScalingAxis::source ? source_axis_plan(cfg, trial.units, sizes)
                                                 : generator_axis_plan(cfg, trial.units, sizes);
    trials.push_back(std::move(trial));
  }
  return trials;
}

std::vector<ScalingTrial> build_scaling_config(const ScalingConfig& cfg, const DomainIndex& index) {
  return build_scaling_config(cfg, index.sizes());
}

// ---------------------------------------------------------------------------
// Power-law fit

PowerLawFit fit_power_law(std::span<const CurvePoint> points) {
  if (points.size() < 2) throw validation_error("power law fit needs at least 2 points");
  for (const auto& p : points) {
    if (!(p.x > 0.0 && p.y > 0.0) || !std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw validation_error("power law requires positive data");
    }
  }
  const bool same_x = std::all_of(points.begin(), points.end(),
                                  [&](const CurvePoint& p) { return p.x == points[0].x; });
  if (same_x) throw computation_error("degenerate abscissa");

  PowerLawFit fit;
  const std::size_t n = points.size();
  fit.n_points = n;
  const bool same_y = std::all_of(points.begin(), points.end(),
                                  [&](const CurvePoint& p) { return p.y == points[0].y; });
  if (same_y) {
    fit.a = points[0].y;
    fit.b = 0.0;
    fit.r_squared = 1.0;
    if (n > 2) {
      fit.b_stderr = 0.0;
      fit.intercept_stderr = 0.0;
    }
    return fit;
  }

  std::vector<double> lx(n), ly(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lx[i] = std::log(points[i].x);
    ly[i] = std::log(points[i].y);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = lx[i] - mx;
    const double dy = ly[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.b = sxy / sxx;
  const double intercept = my - fit.b * mx;
  fit.a = std::exp(intercept);

  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + fit.b * lx[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  if (n > 2) {
    const double s2 = ss_res / static_cast<double>(n - 2);
    fit.b_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return fit;
}

double PowerLawFit::predict(double x) const { return a * std::pow(x, b); }

std::string PowerLawFit::to_json() const {
  nlohmann::ordered_json doc;
  doc["a"] = a;
  doc["b"] = b;
  doc["r_squared"] = r_squared;
  doc["n_points"] = n_points;
  doc["b_stderr"] = b_stderr ? nlohmann::ordered_json(*b_stderr) : nullptr;
  doc["intercept_stderr"] =
      intercept_stderr ? nlohmann::ordered_json(*intercept_stderr) : nullptr;
  return doc.dump(2);
}

std::string PowerLawFit::describe() const {
  char buf[128];
  std::snprintf(buf, sizeof buf, "y = %.6g·x^%.6g (R²=%.4f)", a, b, r_squared);
  return buf;
}

// ---------------------------------------------------------------------------
// Trial aggregation

CurveTable aggregate_trials(std::span<const TrialResult> results) {
  using GroupKey = std::tuple<int, std::uint64_t, double>;
  std::map<GroupKey, std::vector<const TrialResult*>> groups;
  for (const auto& r : results) {
    groups[{static_cast<int>(r.axis), r.n_units, r.usage}].push_back(&r);
  }
  CurveTable table;
  for (const auto& [key, members] : groups) {
    CurveRow row;
    row.axis = members.front()->axis;
    row.n_units = members.front()->n_units;
    row.usage = members.front()->usage;
    row.metric = members.front()->metric;
    row.min = members.front()->value;
    row.max = members.front()->value;
    double sum = 0.0;
    for (const auto* m : members) {
      if (m->metric != row.metric) {
        throw validation_error("mixed metrics in group (" + std::string(to_string(row.axis)) +
                               ", " + std::to_string(row.n_units) + ", " +
                               detail::format_double(row.usage) + "): " + row.metric +
                               " and " + m->metric);
      }
      sum += m->value;
      row.min = std::min(row.min, m->value);
      row.max = std::max(row.max, m->value);
    }
    row.n_trials = members.size();
    row.mean = sum / static_cast<double>(members.size());
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string CurveTable::to_csv() const {
  std::ostringstream out;
  out << "axis,n_units,usage,mean,min,max\n";
  for (const auto& r : rows) {
    out << to_string(r.axis) << ',' << r.n_units << ',' << detail::format_double(r.usage) << ','
        << detail::format_double(r.mean) << ',' << detail::format_double(r.min) << ','
        << detail::format_double(r.max) << '\n';
  }
  return out.str();
}

std::vector<TrialResult> parse_trial_results(std::string_view csv) {
  std::vector<TrialResult> out;
  for_each_csv_row(csv, 6, [&](const std::vector<std::string>& f) {
    const auto axis = parse_axis(f[0]);
    const auto n_units = to_uint(f[1]);
    const auto usage = to_double(f[2]);
    const auto trial = to_uint(f[3]);
    const auto value = to_double(f[5]);
    if (!axis || !n_units || !usage || !trial || !value || f[4].empty()) return false;
    out.push_back({*axis, *n_units, *usage, *trial, f[4], *value});
    return true;
  });
  return out;
}

std::vector<CurvePoint> parse_curve_points(std::string_view csv) {
  std::vector<CurvePoint> out;
  for_each_csv_row(csv, 2, [&](const std::vector<std::string>& f) {
    const auto x = to_double(f[0]);
    const auto y = to_double(f[1]);
    if (!x || !y) return false;
    out.push_back({*x, *y});
    return true;
  });
  return out;
}

}  // namespace dosskit
