#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dosskit/error.hpp"

namespace dosskit {

enum class Label { real, fake };

std::string_view to_string(Label label);
std::optional<Label> parse_label(std::string_view text);

/// One manifest row. `generator` is present iff the sample is fake.
struct SampleRecord {
  std::string id;
  Label label = Label::real;
  std::string source;
  std::optional<std::string> generator;
  std::string dataset;
  double duration_s = 0.0;
  std::string path;

  bool operator==(const SampleRecord&) const = default;
};

/// A sampling domain: Real(source) or Fake(source, generator).
///
/// Keys order lexicographically by their string form ("real/<source>",
/// "fake/<source>/<generator>"), which is also the serialization order of
/// every plan and table.
class DomainKey {
 public:
  static DomainKey real(std::string source);
  static DomainKey fake(std::string source, std::string generator);

  /// Inverse of str(). Throws a validation Error on malformed keys.
  static DomainKey parse(std::string_view text);

  bool is_real() const noexcept { return generator_.empty(); }
  bool is_fake() const noexcept { return !generator_.empty(); }
  const std::string& source() const noexcept { return source_; }
  const std::string& generator() const noexcept { return generator_; }
  const std::string& str() const noexcept { return text_; }

  /// The real domain a fake domain draws its source from. Identity on real
  /// keys.
  DomainKey base() const { return real(source_); }

  bool operator==(const DomainKey& other) const noexcept {
    return text_ == other.text_;
  }
  std::strong_ordering operator<=>(const DomainKey& other) const noexcept {
    return text_ <=> other.text_;
  }

 private:
  DomainKey(std::string source, std::string generator);

  std::string source_;
  std::string generator_;
  std::string text_;
};

DomainKey domain_of(const SampleRecord& record);

using DomainSizes = std::map<DomainKey, std::uint64_t>;

/// Domains of one pool and the ids they hold. Immutable once built.
class DomainIndex {
 public:
  /// Builds an index from per-domain id lists. Lists are sorted; empty
  /// domains are dropped and reported through warnings(). An id occurring
  /// in more than one place is a validation error.
  static DomainIndex from_lists(std::map<DomainKey, std::vector<std::string>> lists,
                                std::string pool_id = {});

  const std::map<DomainKey, std::vector<std::string>>& domains() const noexcept {
    return domains_;
  }
  DomainSizes sizes() const;
  std::uint64_t size_of(const DomainKey& key) const;
  bool contains(const DomainKey& key) const { return domains_.contains(key); }
  const std::vector<std::string>& ids(const DomainKey& key) const;

  std::size_t domain_count() const noexcept { return domains_.size(); }
  std::size_t record_count() const noexcept;
  const std::string& pool_id() const noexcept { return pool_id_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::map<DomainKey, std::vector<std::string>> domains_;
  std::string pool_id_;
  std::vector<std::string> warnings_;
};

/// A single problem found while reading a manifest. `line` is 1-based.
struct ManifestIssue {
  std::size_t line = 0;
  std::string message;
};

struct ManifestCheck {
  std::vector<SampleRecord> records;
  std::vector<ManifestIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
};

/// Reads a JSON-lines manifest, collecting every problem instead of stopping
/// at the first one. Blank lines and lines starting with '#' are skipped.
ManifestCheck check_manifest(std::istream& in);

/// Strict variant: returns records in input order or throws a validation
/// Error describing the first issue (with its line number).
std::vector<SampleRecord> parse_manifest(std::istream& in);
std::vector<SampleRecord> parse_manifest_text(std::string_view text);

/// One JSON object per record, fields in canonical order, '\n' terminated.
std::string to_json_line(const SampleRecord& record);
void write_manifest(std::ostream& out, std::span<const SampleRecord> records);

/// Throws "empty pool" on an empty input.
DomainIndex index_domains(std::span<const SampleRecord> records,
                          std::string pool_id = {});

/// (dataset, source) -> canonical source name.
class CanonicalSourceMap {
 public:
  CanonicalSourceMap() = default;

  /// Rejects maps that are not idempotent, i.e. where (d, s) -> c but
  /// (d, c) maps somewhere other than c.
  explicit CanonicalSourceMap(std::map<std::pair<std::string, std::string>, std::string> alias);

  /// Parses the `{"dataset/source": "canonical"}` file form.
  static CanonicalSourceMap from_json_text(std::string_view text);

  std::optional<std::string> lookup(const std::string& dataset,
                                    const std::string& source) const;
  const std::map<std::pair<std::string, std::string>, std::string>& entries() const noexcept {
    return alias_;
  }
  bool empty() const noexcept { return alias_.empty(); }

 private:
  std::map<std::pair<std::string, std::string>, std::string> alias_;
};

struct DedupReport {
  /// Real records collapsed away, by the dataset that contributed them.
  std::map<std::string, std::uint64_t> removed;
  /// Records whose source was rewritten, by dataset.
  std::map<std::string, std::uint64_t> rewritten;
  /// Records whose (dataset, source) pair had no map entry, by dataset.
  std::map<std::string, std::uint64_t> passthrough;

  std::uint64_t total_removed() const;
  /// No removals and no rewrites.
  bool empty() const { return removed.empty() && rewritten.empty(); }

  std::string to_json() const;
};

struct Canonicalized {
  std::vector<SampleRecord> records;
  DedupReport report;
};

/// Rewrites sources through `map`, then collapses real records that share
/// (canonical source, id). Among duplicates the survivor is the record whose
/// dataset is named like the canonical source, else the first in input
/// order. Relative order of survivors is preserved.
Canonicalized canonicalize_sources(std::span<const SampleRecord> records,
                                   const CanonicalSourceMap& map);

}  // namespace dosskit
