#include "dosskit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace dosskit {

namespace {

constexpr std::uint64_t kScale = std::uint64_t{1} << 32;

}  // namespace

PrunedManifest materialize_select(const DomainIndex& index,
                                  std::span<const SampleRecord> records,
                                  const SelectPlan& plan, std::uint64_t seed) {
  std::unordered_map<std::string_view, const SampleRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& rec : records) by_id.emplace(rec.id, &rec);

  PrunedManifest out;
  out.plan = plan;
  out.seed = seed;
  for (const auto& [key, count] : plan.counts) {
    if (count == 0) continue;
    const auto available = index.size_of(key);
    if (count > available) {
      throw validation_error("plan asks for " + std::to_string(count) + " samples from " +
                             key.str() + " but the index holds " + std::to_string(available));
    }
    std::vector<std::string> ids = index.ids(key);
    Xoshiro256 rng(derive_seed(seed, key.str()));
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto j = i + rng.below(ids.size() - i);
      std::swap(ids[i], ids[j]);
    }
    for (std::uint64_t i = 0; i < count; ++i) {
      const auto it = by_id.find(ids[i]);
      if (it == by_id.end()) {
        throw validation_error("sample id \"" + ids[i] + "\" from " + key.str() +
                               " has no manifest record");
      }
      out.records.push_back(*it->second);
    }
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });
  return out;
}

SampleStream::SampleStream(const WeightPlan& plan, const DomainIndex& index,
                           std::uint64_t seed)
    : rng_(seed) {
  double total = 0.0;
  for (const auto& [key, w] : plan.weights) {
    if (!index.contains(key)) {
      throw validation_error("plan domain " + key.str() + " is not in the index");
    }
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw validation_error("invalid weight for " + key.str());
    }
    total += w;
  }
  if (!(total > 0.0)) throw computation_error("degenerate plan");

  double running = 0.0;
  for (const auto& [key, w] : plan.weights) {
    running += w;
    const double cumulative = std::min(1.0, running / total);
    keys_.push_back(key);
    members_.push_back(&index.ids(key));
    thresholds_.push_back(static_cast<std::uint64_t>(std::llround(cumulative * kScale)));
  }
  thresholds_.back() = kScale;
}

SampleStream::Draw SampleStream::next() {
  const std::uint64_t bits = rng_();
  const std::uint64_t u = bits >> 32;
  const auto pos = static_cast<std::size_t>(
      std::upper_bound(thresholds_.begin(), thresholds_.end(), u) - thresholds_.begin());
  const auto& ids = *members_[pos];
  return {pos, ids[rng_.below(ids.size())]};
}

std::vector<double> SampleStream::probabilities() const {
  std::vector<double> out;
  out.reserve(thresholds_.size());
  std::uint64_t prev = 0;
  for (auto t : thresholds_) {
    out.push_back(static_cast<double>(t - prev) / static_cast<double>(kScale));
    prev = t;
  }
  return out;
}

std::vector<std::string> sample_stream(const SampleStreamSpec& spec, const DomainIndex& index) {
  if (spec.length < 1) throw validation_error("stream length must be >= 1");
  SampleStream stream(spec.plan, index, spec.seed);
  std::vector<std::string> out;
  out.reserve(spec.length);
  for (std::uint64_t i = 0; i < spec.length; ++i) out.emplace_back(stream.next().id);
  return out;
}

}  // namespace dosskit
