#include "dosskit/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dosskit/doss.hpp"
#include "dosskit/io.hpp"
#include "dosskit/manifest.hpp"
#include "dosskit/metrics.hpp"
#include "dosskit/plan_io.hpp"
#include "dosskit/sampler.hpp"
#include "dosskit/scaling.hpp"
#include "format.hpp"

#ifndef DOSSKIT_VERSION
#define DOSSKIT_VERSION "0.0.0"
#endif

namespace dosskit {

const char* const kToolVersion = DOSSKIT_VERSION;

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Provenance attached to every output: tool version, effective config and
/// a digest of every input. Nothing here depends on wall-clock time.
class Provenance {
 public:
  Provenance(std::string command, std::string config)
      : command_(std::move(command)), config_(std::move(config)) {}

  /// Reads an input file and records its digest.
  std::string load(const fs::path& path) {
    auto data = read_file(path);
    inputs_.emplace_back(path.string(), sha256_hex(data));
    return data;
  }

  ordered_json json() const {
    ordered_json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["command"] = command_;
    j["config"] = config_;
    j["inputs"] = ordered_json::array();
    for (const auto& [path, digest] : inputs_) {
      j["inputs"].push_back({{"path", path}, {"sha256", digest}});
    }
    return j;
  }

  /// Same information as '#' comment lines, for line-oriented outputs.
  std::string comments() const {
    std::ostringstream out;
    out << "# " << kToolName << ' ' << kToolVersion << ' ' << command_ << '\n';
    std::istringstream cfg(config_);
    std::string line;
    while (std::getline(cfg, line)) {
      if (!line.empty()) out << "# config: " << line << '\n';
    }
    for (const auto& [path, digest] : inputs_) {
      out << "# input: " << path << " sha256=" << digest << '\n';
    }
    return out.str();
  }

 private:
  std::string command_;
  std::string config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
};

std::string with_provenance(const Provenance& prov, const char* key, ordered_json payload) {
  ordered_json doc;
  doc["provenance"] = prov.json();
  doc[key] = std::move(payload);
  return doc.dump(2) + "\n";
}

std::vector<SampleRecord> load_manifest(Provenance& prov, const fs::path& path) {
  const auto text = prov.load(path);
  try {
    return parse_manifest_text(text);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", fraction);
  return buf;
}

// ---------------------------------------------------------------------------
// Options shared across subcommands.

struct Options {
  std::string manifest;
  std::vector<std::string> manifests;
  std::string map_path;
  std::string plan_path;
  std::string out;
  std::string report;
  std::string mode = "select";
  std::uint64_t n_cap = 2500;
  double rho = 0.25;
  double tau = 1.0;
  std::optional<std::uint64_t> seed;
  std::uint64_t length = 0;
  std::vector<std::string> score_paths;
  std::string out_json;
  std::string out_csv;
  double threshold = 0.5;
  bool cde_of_macro = false;
  std::string curve;
  std::string results;
  std::string axis = "source";
  std::uint64_t n_units = 1;
  double usage = 1.0;
  std::uint64_t trials = 3;
  std::uint64_t trial_seed = 0;
  std::uint64_t per_source_real = 10000;
  std::uint64_t per_generator_fake = 40000;
  bool no_strict = false;
};

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw validation_error("--seed is required");
  return *o.seed;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_validate(const Options& o, const std::string& config, std::ostream& out) {
  Provenance prov("validate", config);
  const auto text = prov.load(o.manifest);
  std::istringstream in(text);
  const auto check = check_manifest(in);

  ordered_json payload;
  payload["manifest"] = o.manifest;
  payload["ok"] = check.ok();
  payload["records"] = check.records.size();
  payload["errors"] = ordered_json::array();
  for (const auto& issue : check.issues) {
    payload["errors"].push_back({{"line", issue.line}, {"message", issue.message}});
  }
  if (check.ok() && check.records.empty()) {
    payload["ok"] = false;
    payload["errors"].push_back({{"line", 0}, {"message", "empty pool"}});
  }
  const bool ok = payload["ok"].get<bool>();
  if (!o.report.empty()) {
    write_file_atomic(o.report, with_provenance(prov, "validation", payload));
  }
  out << payload.dump(2) << '\n';
  return ok ? 0 : static_cast<int>(ErrorKind::validation);
}

int cmd_curate(const Options& o, const std::string& config, std::ostream& out) {
  Provenance prov("curate", config);
  std::vector<SampleRecord> records;
  for (const auto& path : o.manifests) {
    auto part = load_manifest(prov, path);
    records.insert(records.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
  }
  const auto map = o.map_path.empty() ? CanonicalSourceMap{}
                                      : CanonicalSourceMap::from_json_text(prov.load(o.map_path));
  auto result = canonicalize_sources(records, map);

  std::map<std::string, int> seen;
  std::vector<std::string> clashes;
  for (const auto& rec : result.records) {
    if (++seen[rec.id] == 2) clashes.push_back(rec.id);
  }
  if (!clashes.empty()) {
    std::string list;
    for (std::size_t i = 0; i < clashes.size() && i < 10; ++i) list += (i ? ", " : "") + clashes[i];
    throw validation_error(std::to_string(clashes.size()) +
                           " sample ids remain duplicated after curation: " + list);
  }

  std::ostringstream manifest;
  manifest << prov.comments();
  write_manifest(manifest, result.records);
  write_file_atomic(o.out, manifest.str());
  if (!o.report.empty()) {
    write_file_atomic(o.report, with_provenance(prov, "dedup",
                                                ordered_json::parse(result.report.to_json())));
  }
  out << "records in: " << records.size() << "\nrecords out: " << result.records.size()
      << "\nremoved: " << result.report.total_removed() << '\n';
  return 0;
}

int cmd_plan(const Options& o, const std::string& config, std::ostream& out) {
  DossParams params{o.n_cap, o.rho, o.tau};
  params.validate();
  if (o.mode != "select" && o.mode != "weight") {
    throw validation_error("--mode must be select or weight");
  }
  Provenance prov("plan", config);
  const auto records = load_manifest(prov, o.manifest);
  const auto index = index_domains(records, o.manifest);

  std::map<DomainKey, double> seconds;
  for (const auto& rec : records) seconds[domain_of(rec)] += rec.duration_s;

  std::string payload;
  std::vector<std::string> warnings;
  if (o.mode == "select") {
    const auto plan = doss_select(index, params);
    payload = plan_to_json(plan);
    warnings = plan.warnings;
    double hours = 0.0;
    for (const auto& [key, count] : plan.counts) {
      const auto n = static_cast<double>(index.size_of(key));
      hours += seconds[key] / n * static_cast<double>(count) / 3600.0;
    }
    const auto total = plan.total();
    out << "mode: select\ndomains: " << plan.counts.size() << "\nsamples: " << total
        << "\nhours: " << percent(hours) << "\nreal fraction: "
        << percent(total ? static_cast<double>(plan.real_total()) / static_cast<double>(total) : 0.0)
        << '\n';
  } else {
    const auto plan = doss_weight(index, params);
    payload = plan_to_json(plan);
    warnings = plan.warnings;
    double hours = 0.0;
    for (const auto& [key, s] : seconds) hours += s / 3600.0;
    out << "mode: weight\ndomains: " << plan.weights.size() << "\npool hours: " << percent(hours)
        << "\nreal probability: " << percent(plan.real_total() / plan.total()) << '\n';
  }
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  write_file_atomic(o.out, with_provenance(prov, "plan", ordered_json::parse(payload)));
  return 0;
}

int cmd_materialize(const Options& o, const std::string& config, std::ostream& out) {
  const auto seed = require_seed(o);
  Provenance prov("materialize", config);
  const auto records = load_manifest(prov, o.manifest);
  const auto index = index_domains(records, o.manifest);
  const auto any = plan_from_json(prov.load(o.plan_path));
  const auto* plan = std::get_if<SelectPlan>(&any);
  if (!plan) throw validation_error("materialize needs a select plan");

  const auto pruned = materialize_select(index, records, *plan, seed);
  std::ostringstream text;
  text << prov.comments() << "# seed: " << seed << '\n';
  write_manifest(text, pruned.records);
  write_file_atomic(o.out, text.str());
  out << "records: " << pruned.records.size() << '\n';
  return 0;
}

int cmd_sample(const Options& o, const std::string& config, std::ostream& out) {
  const auto seed = require_seed(o);
  if (o.length < 1) throw validation_error("--length must be >= 1");
  Provenance prov("sample", config);
  const auto records = load_manifest(prov, o.manifest);
  const auto index = index_domains(records, o.manifest);
  const auto any = plan_from_json(prov.load(o.plan_path));
  const auto* plan = std::get_if<WeightPlan>(&any);
  if (!plan) throw validation_error("sample needs a weight plan");

  SampleStream stream(*plan, index, seed);
  std::string text = prov.comments();
  text += "# seed: " + std::to_string(seed) + "\n";
  std::uint64_t real_draws = 0;
  for (std::uint64_t i = 0; i < o.length; ++i) {
    const auto draw = stream.next();
    real_draws += stream.domains()[draw.domain].is_real() ? 1 : 0;
    text.append(draw.id);
    text += '\n';
  }
  write_file_atomic(o.out, text);
  out << "draws: " << o.length << "\nreal fraction: "
      << percent(static_cast<double>(real_draws) / static_cast<double>(o.length)) << '\n';
  return 0;
}

int cmd_distribution(const Options& o, const std::string& config, std::ostream& out) {
  Provenance prov("distribution", config);
  const auto records = load_manifest(prov, o.manifest);
  const auto index = index_domains(records, o.manifest);
  const auto any = plan_from_json(prov.load(o.plan_path));
  const auto table = std::visit([&](const auto& plan) { return domain_distribution(plan, index); }, any);
  write_file_atomic(o.out, prov.comments() + table.to_csv());
  out << "real mass: " << percent(table.real_mass()) << "\nfake mass: " << percent(table.fake_mass())
      << '\n';
  return 0;
}

std::vector<fs::path> score_files(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(p)) {
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
          found.push_back(entry.path());
        }
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(p);
    }
  }
  return files;
}

int cmd_eval(const Options& o, const std::string& config, std::ostream& out, std::ostream& err) {
  Provenance prov("eval", config);
  const auto files = score_files(o.score_paths);
  if (files.empty()) throw validation_error("no score files found");

  std::vector<ScoreSet> sets;
  std::map<std::string, std::string> parse_failures;
  for (const auto& file : files) {
    const auto name = file.stem().string();
    const auto text = prov.load(file);
    std::istringstream in(text);
    try {
      sets.push_back(parse_score_set(in, name));
    } catch (const Error& e) {
      parse_failures[name] = e.what();
    }
  }
  const auto aggregation =
      o.cde_of_macro ? CdeAggregation::of_macro_means : CdeAggregation::mean_of_sets;
  auto report = evaluate_sets(sets, o.threshold, aggregation);
  for (auto& [name, why] : parse_failures) report.failures.emplace(name, why);

  if (!o.out_json.empty()) {
    write_file_atomic(o.out_json,
                      with_provenance(prov, "report", ordered_json::parse(report.to_json())));
  }
  if (!o.out_csv.empty()) write_file_atomic(o.out_csv, prov.comments() + report.to_csv());
  out << report.to_csv();
  for (const auto& [name, why] : report.failures) err << "error: " << name << ": " << why << '\n';
  return report.partial() ? static_cast<int>(ErrorKind::computation) : 0;
}

int cmd_fit(const Options& o, const std::string& config, std::ostream& out) {
  Provenance prov("fit", config);
  const auto points = parse_curve_points(prov.load(o.curve));
  const auto fit = fit_power_law(points);
  if (!o.out.empty()) {
    write_file_atomic(o.out, with_provenance(prov, "fit", ordered_json::parse(fit.to_json())));
  }
  out << fit.describe() << '\n';
  return 0;
}

int cmd_scaling(const Options& o, const std::string& config, std::ostream& out) {
  ScalingConfig cfg;
  const auto axis = parse_axis(o.axis);
  if (!axis) throw validation_error("--axis must be source or generator");
  cfg.axis = *axis;
  cfg.n_units = o.n_units;
  cfg.usage = o.usage;
  cfg.rho = o.rho;
  cfg.trials = o.trials;
  cfg.trial_seed = o.trial_seed;
  cfg.per_source_real = o.per_source_real;
  cfg.per_generator_fake = o.per_generator_fake;
  cfg.strict = !o.no_strict;

  Provenance prov("scaling", config);
  const auto records = load_manifest(prov, o.manifest);
  const auto index = index_domains(records, o.manifest);
  const auto trials = build_scaling_config(cfg, index);

  ordered_json payload = ordered_json::array();
  for (const auto& t : trials) {
    ordered_json j;
    j["trial"] = t.trial;
    j["seed"] = t.seed;
    j["units"] = t.units;
    j["plan"] = ordered_json::parse(plan_to_json(t.plan));
    payload.push_back(std::move(j));
    out << "trial " << t.trial << ": " << t.plan.real_total() << " real + "
        << t.plan.fake_total() << " fake\n";
  }
  write_file_atomic(o.out, with_provenance(prov, "trials", std::move(payload)));
  return 0;
}

int cmd_aggregate(const Options& o, const std::string& config, std::ostream& out) {
  Provenance prov("aggregate", config);
  const auto results = parse_trial_results(prov.load(o.results));
  const auto table = aggregate_trials(results);
  const auto csv = table.to_csv();
  if (!o.out.empty()) write_file_atomic(o.out, prov.comments() + csv);
  out << csv;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset composition toolkit: diversity-optimized sampling plans, "
               "detection metrics and scaling-law fits"};
  app.name(args.empty() ? kToolName : args.front());
  app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
  app.set_config("--config", "", "TOML config file; command-line flags override it");
  app.require_subcommand(1);

  Options o;

  auto* validate = app.add_subcommand("validate", "Check a manifest against the record schema");
  validate->add_option("manifest", o.manifest, "Manifest (.jsonl)")->required();
  validate->add_option("--report", o.report, "Also write the error list here");

  auto* curate = app.add_subcommand("curate", "Canonicalize sources and collapse duplicate reals");
  curate->add_option("manifests", o.manifests, "Input manifests")->required();
  curate->add_option("--map", o.map_path, "Source map JSON {\"dataset/source\": \"canonical\"}");
  curate->add_option("-o,--out", o.out, "Curated manifest")->required();
  curate->add_option("--report", o.report, "Dedup report JSON");

  auto* plan = app.add_subcommand("plan", "Compute a select (pruning) or weight plan");
  plan->add_option("--manifest", o.manifest)->required();
  plan->add_option("--mode", o.mode, "select or weight")->capture_default_str()
      ->check(CLI::IsMember({"select", "weight"}));
  plan->add_option("--n-cap", o.n_cap, "Saturation cap")->capture_default_str()
      ->check(CLI::PositiveNumber);
  plan->add_option("--rho", o.rho, "Real-to-fake ratio")->capture_default_str()
      ->check(CLI::PositiveNumber);
  plan->add_option("--tau", o.tau, "Diversity temperature")->capture_default_str()
      ->check(CLI::PositiveNumber);
  plan->add_option("-o,--out", o.out, "Plan JSON")->required();

  auto* materialize = app.add_subcommand("materialize", "Write the pruned manifest of a select plan");
  materialize->add_option("--manifest", o.manifest)->required();
  materialize->add_option("--plan", o.plan_path)->required();
  materialize->add_option("--seed", o.seed)->required();
  materialize->add_option("-o,--out", o.out)->required();

  auto* sample = app.add_subcommand("sample", "Emit a seeded id stream from a weight plan");
  sample->add_option("--manifest", o.manifest)->required();
  sample->add_option("--plan", o.plan_path)->required();
  sample->add_option("--seed", o.seed)->required();
  sample->add_option("--length", o.length)->required()->check(CLI::PositiveNumber);
  sample->add_option("-o,--out", o.out)->required();

  auto* distribution = app.add_subcommand("distribution", "Per-domain sampling probabilities (CSV)");
  distribution->add_option("--plan", o.plan_path)->required();
  distribution->add_option("--manifest", o.manifest)->required();
  distribution->add_option("-o,--out", o.out)->required();

  auto* eval = app.add_subcommand("eval", "EER, ACC and CDE over score files");
  eval->add_option("scores", o.score_paths, "Score files or directories of .jsonl files")->required();
  eval->add_option("--out-json", o.out_json);
  eval->add_option("--out-csv", o.out_csv);
  eval->add_option("--threshold", o.threshold, "ACC decision threshold")->capture_default_str();
  eval->add_flag("--cde-of-macro", o.cde_of_macro,
                 "Report CDE of the macro EER/ACC instead of the mean per-set CDE");

  auto* fit = app.add_subcommand("fit", "Fit y = a·x^b to an (x, y) CSV");
  fit->add_option("curve", o.curve, "CSV with x,y columns")->required();
  fit->add_option("-o,--out", o.out, "Fit report JSON");

  auto* scaling = app.add_subcommand("scaling", "Build per-trial plans for a scaling experiment");
  scaling->add_option("--manifest", o.manifest)->required();
  scaling->add_option("--axis", o.axis)->capture_default_str()
      ->check(CLI::IsMember({"source", "generator"}));
  scaling->add_option("--n-units", o.n_units)->required();
  scaling->add_option("--usage", o.usage)->capture_default_str();
  scaling->add_option("--rho", o.rho)->capture_default_str()->check(CLI::PositiveNumber);
  scaling->add_option("--trials", o.trials)->capture_default_str();
  scaling->add_option("--trial-seed", o.trial_seed)->capture_default_str();
  scaling->add_option("--per-source-real", o.per_source_real)->capture_default_str();
  scaling->add_option("--per-generator-fake", o.per_generator_fake)->capture_default_str();
  scaling->add_flag("--no-strict", o.no_strict, "Allow settings outside the published grid");
  scaling->add_option("-o,--out", o.out)->required();

  auto* aggregate = app.add_subcommand("aggregate", "Mean/min/max of trial metrics per setting");
  aggregate->add_option("results", o.results, "CSV axis,n_units,usage,trial,metric,value")
      ->required();
  aggregate->add_option("-o,--out", o.out, "CurveTable CSV");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  if (args.empty()) argv.push_back(kToolName);
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::validation);
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const auto config = sub->config_to_str(true, false);
    if (sub == validate) return cmd_validate(o, config, out);
    if (sub == curate) return cmd_curate(o, config, out);
    if (sub == plan) return cmd_plan(o, config, out);
    if (sub == materialize) return cmd_materialize(o, config, out);
    if (sub == sample) return cmd_sample(o, config, out);
    if (sub == distribution) return cmd_distribution(o, config, out);
    if (sub == eval) return cmd_eval(o, config, out, err);
    if (sub == fit) return cmd_fit(o, config, out);
    if (sub == scaling) return cmd_scaling(o, config, out);
    if (sub == aggregate) return cmd_aggregate(o, config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::computation);
  }
  return static_cast<int>(ErrorKind::validation);
}

}  // namespace dosskit
