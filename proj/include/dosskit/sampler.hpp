#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dosskit/doss.hpp"
#include "dosskit/manifest.hpp"
#include "dosskit/rng.hpp"

namespace dosskit {

struct PrunedManifest {
  std::vector<SampleRecord> records;  ///< sorted by id
  SelectPlan plan;
  std::uint64_t seed = 0;
};

/// Draws exactly plan.counts[d] ids from every domain, uniformly without
/// replacement. Each domain uses its own generator seeded with
/// derive_seed(seed, domain.str()) and a forward partial Fisher-Yates pass
/// over the domain's sorted ids, so results do not depend on record order
/// or on which other domains are present.
PrunedManifest materialize_select(const DomainIndex& index,
                                  std::span<const SampleRecord> records,
                                  const SelectPlan& plan, std::uint64_t seed);

struct SampleStreamSpec {
  WeightPlan plan;
  std::uint64_t seed = 0;
  std::uint64_t length = 1;
};

/// Infinite two-stage weighted sampler over a DomainIndex.
///
/// Every draw consumes one output of a Xoshiro256 seeded with `seed`: its
/// high 32 bits pick the domain against cumulative thresholds quantized to
/// 2^32, then Xoshiro256::below(n_d) picks a sample inside the domain (with
/// replacement). Quantizing after normalization makes the stream invariant
/// to rescaling the weights. Domains whose probability rounds below 2^-32
/// are never drawn.
class SampleStream {
 public:
  struct Draw {
    std::size_t domain;    ///< position in domains()
    std::string_view id;
  };

  SampleStream(const WeightPlan& plan, const DomainIndex& index, std::uint64_t seed);

  Draw next();

  const std::vector<DomainKey>& domains() const noexcept { return keys_; }
  /// Normalized probability actually used for each domain.
  std::vector<double> probabilities() const;

 private:
  Xoshiro256 rng_;
  std::vector<DomainKey> keys_;
  std::vector<const std::vector<std::string>*> members_;
  std::vector<std::uint64_t> thresholds_;  ///< cumulative, last == 2^32
};

/// Convenience wrapper returning spec.length ids.
std::vector<std::string> sample_stream(const SampleStreamSpec& spec, const DomainIndex& index);

}  // namespace dosskit
