#include "dosskit/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace dosskit {

namespace {

using nlohmann::json;

constexpr std::string_view kWhitespace = " \t\r\n\f\v";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(kWhitespace);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(kWhitespace);
  return std::string(s.substr(first, last - first + 1));
}

bool blank_or_comment(std::string_view line) {
  const auto first = line.find_first_not_of(kWhitespace);
  return first == std::string_view::npos || line[first] == '#';
}

// Component strings end up inside "real/<source>" style keys.
void check_component(std::string_view field, const std::string& value) {
  if (value.empty()) {
    throw validation_error("field '" + std::string(field) + "' is empty");
  }
  if (value.find('/') != std::string::npos) {
    throw validation_error("field '" + std::string(field) +
                           "' must not contain '/': \"" + value + "\"");
  }
}

std::string require_string(const json& row, const char* field) {
  const auto it = row.find(field);
  if (it == row.end()) {
    throw validation_error(std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    throw validation_error(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

SampleRecord record_from_json(const json& row) {
  static const std::unordered_set<std::string> kKnown = {
      "id", "label", "source", "generator", "dataset", "duration_s", "path"};
  if (!row.is_object()) throw validation_error("line is not a JSON object");
  for (const auto& [key, value] : row.items()) {
    if (!kKnown.contains(key)) {
      throw validation_error("unknown field '" + key + "'");
    }
  }

  SampleRecord rec;
  rec.id = require_string(row, "id");
  if (rec.id.empty()) throw validation_error("field 'id' is empty");

  const auto label_text = require_string(row, "label");
  const auto label = parse_label(label_text);
  if (!label) {
    throw validation_error("label must be \"real\" or \"fake\", got \"" +
                           label_text + "\"");
  }
  rec.label = *label;

  rec.source = trim(require_string(row, "source"));
  check_component("source", rec.source);
  rec.dataset = trim(require_string(row, "dataset"));
  check_component("dataset", rec.dataset);

  const auto gen = row.find("generator");
  const bool has_generator = gen != row.end() && !gen->is_null();
  if (rec.label == Label::fake) {
    if (!has_generator) throw validation_error("fake without generator");
    if (!gen->is_string()) throw validation_error("field 'generator' must be a string");
    rec.generator = trim(gen->get<std::string>());
    if (rec.generator->empty()) throw validation_error("fake without generator");
    check_component("generator", *rec.generator);
  } else if (has_generator) {
    throw validation_error("real record must not carry a generator");
  }

  const auto dur = row.find("duration_s");
  if (dur == row.end()) throw validation_error("missing field 'duration_s'");
  if (!dur->is_number()) throw validation_error("field 'duration_s' must be a number");
  rec.duration_s = dur->get<double>();
  if (!std::isfinite(rec.duration_s) || rec.duration_s < 0.0) {
    throw validation_error("field 'duration_s' must be finite and nonnegative");
  }

  rec.path = require_string(row, "path");
  return rec;
}

}  // namespace

std::string_view to_string(Label label) {
  return label == Label::real ? "real" : "fake";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "real") return Label::real;
  if (text == "fake") return Label::fake;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// DomainKey

DomainKey::DomainKey(std::string source, std::string generator)
    : source_(std::move(source)), generator_(std::move(generator)) {
  text_ = generator_.empty() ? "real/" + source_
                             : "fake/" + source_ + "/" + generator_;
}

DomainKey DomainKey::real(std::string source) {
  if (source.empty() || source.find('/') != std::string::npos) {
    throw validation_error("invalid source name \"" + source + "\"");
  }
  return DomainKey(std::move(source), {});
}

DomainKey DomainKey::fake(std::string source, std::string generator) {
  if (source.empty() || source.find('/') != std::string::npos) {
    throw validation_error("invalid source name \"" + source + "\"");
  }
  if (generator.empty() || generator.find('/') != std::string::npos) {
    throw validation_error("invalid generator name \"" + generator + "\"");
  }
  return DomainKey(std::move(source), std::move(generator));
}

DomainKey DomainKey::parse(std::string_view text) {
  const auto bad = [&] {
    return validation_error("malformed domain key \"" + std::string(text) + "\"");
  };
  if (text.starts_with("real/")) {
    auto rest = text.substr(5);
    if (rest.empty() || rest.find('/') != std::string_view::npos) throw bad();
    return real(std::string(rest));
  }
  if (text.starts_with("fake/")) {
    auto rest = text.substr(5);
    const auto slash = rest.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == rest.size()) {
      throw bad();
    }
    if (rest.find('/', slash + 1) != std::string_view::npos) throw bad();
    return fake(std::string(rest.substr(0, slash)), std::string(rest.substr(slash + 1)));
  }
  throw bad();
}

DomainKey domain_of(const SampleRecord& record) {
  if (record.label == Label::real) return DomainKey::real(record.source);
  return DomainKey::fake(record.source, record.generator.value_or(""));
}

// ---------------------------------------------------------------------------
// DomainIndex

DomainIndex DomainIndex::from_lists(std::map<DomainKey, std::vector<std::string>> lists,
                                    std::string pool_id) {
  DomainIndex index;
  index.pool_id_ = std::move(pool_id);
  std::unordered_map<std::string, const DomainKey*> owner;
  for (auto& [key, ids] : lists) {
    if (ids.empty()) {
      index.warnings_.push_back("dropped empty domain " + key.str());
      continue;
    }
    std::sort(ids.begin(), ids.end());
    for (const auto& id : ids) {
      auto [it, inserted] = owner.emplace(id, &key);
      if (!inserted) {
        throw validation_error("sample id \"" + id + "\" appears in " +
                               it->second->str() + " and " + key.str());
      }
    }
    index.domains_.emplace(key, std::move(ids));
  }
  return index;
}

DomainSizes DomainIndex::sizes() const {
  DomainSizes out;
  for (const auto& [key, ids] : domains_) out.emplace_hint(out.end(), key, ids.size());
  return out;
}

std::uint64_t DomainIndex::size_of(const DomainKey& key) const {
  const auto it = domains_.find(key);
  return it == domains_.end() ? 0 : it->second.size();
}

const std::vector<std::string>& DomainIndex::ids(const DomainKey& key) const {
  const auto it = domains_.find(key);
  if (it == domains_.end()) {
    throw validation_error("domain " + key.str() + " is not in the index");
  }
  return it->second;
}

std::size_t DomainIndex::record_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [key, ids] : domains_) n += ids.size();
  return n;
}

// ---------------------------------------------------------------------------
// Parsing

ManifestCheck check_manifest(std::istream& in) {
  ManifestCheck out;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    const json row = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (row.is_discarded()) {
      out.issues.push_back({line_no, "malformed JSON"});
      continue;
    }
    try {
      SampleRecord rec = record_from_json(row);
      auto [it, inserted] = first_line.emplace(rec.id, line_no);
      if (!inserted) {
        out.issues.push_back({line_no, "duplicate id \"" + rec.id + "\" on lines " +
                                           std::to_string(it->second) + " and " +
                                           std::to_string(line_no)});
        continue;
      }
      out.records.push_back(std::move(rec));
    } catch (const Error& e) {
      out.issues.push_back({line_no, e.what()});
    }
  }
  if (in.bad()) throw io_error("read failure while reading manifest");
  return out;
}

std::vector<SampleRecord> parse_manifest(std::istream& in) {
  auto check = check_manifest(in);
  if (!check.ok()) {
    const auto& first = check.issues.front();
    throw validation_error("line " + std::to_string(first.line) + ": " + first.message);
  }
  return std::move(check.records);
}

std::vector<SampleRecord> parse_manifest_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_manifest(in);
}

std::string to_json_line(const SampleRecord& record) {
  nlohmann::ordered_json row;
  row["id"] = record.id;
  row["label"] = to_string(record.label);
  row["source"] = record.source;
  if (record.generator) row["generator"] = *record.generator;
  row["dataset"] = record.dataset;
  row["duration_s"] = record.duration_s;
  row["path"] = record.path;
  return row.dump() + "\n";
}

void write_manifest(std::ostream& out, std::span<const SampleRecord> records) {
  for (const auto& rec : records) out << to_json_line(rec);
}

DomainIndex index_domains(std::span<const SampleRecord> records, std::string pool_id) {
  if (records.empty()) throw validation_error("empty pool");
  std::map<DomainKey, std::vector<std::string>> lists;
  for (const auto& rec : records) lists[domain_of(rec)].push_back(rec.id);
  return DomainIndex::from_lists(std::move(lists), std::move(pool_id));
}

// ---------------------------------------------------------------------------
// Source canonicalization

CanonicalSourceMap::CanonicalSourceMap(
    std::map<std::pair<std::string, std::string>, std::string> alias)
    : alias_(std::move(alias)) {
  for (const auto& [from, to] : alias_) {
    if (to.empty() || to.find('/') != std::string::npos) {
      throw validation_error("invalid canonical source \"" + to + "\"");
    }
    const auto again = alias_.find({from.first, to});
    if (again != alias_.end() && again->second != to) {
      throw validation_error("source map is not idempotent: " + from.first + "/" +
                             from.second + " -> " + to + " -> " + again->second);
    }
  }
}

CanonicalSourceMap CanonicalSourceMap::from_json_text(std::string_view text) {
  const json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw validation_error("source map must be a JSON object");
  }
  std::map<std::pair<std::string, std::string>, std::string> alias;
  for (const auto& [key, value] : doc.items()) {
    const auto slash = key.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == key.size()) {
      throw validation_error("source map key \"" + key + "\" is not \"dataset/source\"");
    }
    if (!value.is_string()) {
      throw validation_error("source map value for \"" + key + "\" must be a string");
    }
    alias[{trim(key.substr(0, slash)), trim(key.substr(slash + 1))}] =
        trim(value.get<std::string>());
  }
  return CanonicalSourceMap(std::move(alias));
}

std::optional<std::string> CanonicalSourceMap::lookup(const std::string& dataset,
                                                      const std::string& source) const {
  const auto it = alias_.find({dataset, source});
  if (it == alias_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t DedupReport::total_removed() const {
  std::uint64_t n = 0;
  for (const auto& [dataset, count] : removed) n += count;
  return n;
}

std::string DedupReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["removed"] = removed;
  doc["rewritten"] = rewritten;
  doc["passthrough"] = passthrough;
  doc["total_removed"] = total_removed();
  return doc.dump(2);
}

Canonicalized canonicalize_sources(std::span<const SampleRecord> records,
                                   const CanonicalSourceMap& map) {
  Canonicalized out;
  std::vector<SampleRecord> rewritten;
  rewritten.reserve(records.size());
  for (const auto& rec : records) {
    SampleRecord copy = rec;
    if (auto canonical = map.lookup(rec.dataset, rec.source)) {
      if (*canonical != rec.source) {
        copy.source = std::move(*canonical);
        ++out.report.rewritten[rec.dataset];
      }
    } else if (!map.empty()) {
      ++out.report.passthrough[rec.dataset];
    }
    rewritten.push_back(std::move(copy));
  }

  // (canonical source, id) -> position of the current survivor.
  std::map<std::pair<std::string, std::string>, std::size_t> survivor;
  std::vector<bool> keep(rewritten.size(), true);
  for (std::size_t i = 0; i < rewritten.size(); ++i) {
    const auto& rec = rewritten[i];
    if (rec.label != Label::real) continue;
    auto [it, inserted] = survivor.emplace(std::pair{rec.source, rec.id}, i);
    if (inserted) continue;
    std::size_t loser = i;
    const bool incumbent_canonical = rewritten[it->second].dataset == rec.source;
    if (!incumbent_canonical && rec.dataset == rec.source) {
      loser = it->second;
      it->second = i;
    }
    keep[loser] = false;
    ++out.report.removed[rewritten[loser].dataset];
  }

  for (std::size_t i = 0; i < rewritten.size(); ++i) {
    if (keep[i]) out.records.push_back(std::move(rewritten[i]));
  }
  return out;
}

}  // namespace dosskit
