#pragma once

// Domain-size pools shaped like the two diversity-scaling corpora.

#include <string>
#include <vector>

#include "dosskit/manifest.hpp"

namespace dosskit::testing {

/// 8 sources with 10k real samples each and 4 generators × 10k fakes per
/// source.
inline DomainSizes source_diversity_pool() {
  const std::vector<std::string> sources = {"VCTK", "LibriTTS", "MLS", "CommonVoice-en",
                                            "Aishell1", "Aishell3", "MagicData", "CommonVoice-zh"};
  const std::vector<std::string> generators = {"MaskGCT", "F5TTS", "E2TTS", "CosyVoice2"};
  DomainSizes sizes;
  for (const auto& s : sources) {
    sizes[DomainKey::real(s)] = 10000;
    for (const auto& g : generators) sizes[DomainKey::fake(s, g)] = 10000;
  }
  return sizes;
}

/// 2 sources with 80k real samples each and 16 generators, each with 20k
/// fakes per source.
inline DomainSizes generator_diversity_pool() {
  DomainSizes sizes;
  for (const std::string s : {"VCTK", "LibriTTS"}) {
    sizes[DomainKey::real(s)] = 80000;
    for (int g = 0; g < 16; ++g) sizes[DomainKey::fake(s, "gen" + std::to_string(g))] = 20000;
  }
  return sizes;
}

}  // namespace dosskit::testing
