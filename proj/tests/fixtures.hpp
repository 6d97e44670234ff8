#pragma once

// Record builders and random pool generators shared by the test suites.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dosskit/manifest.hpp"

namespace dosskit::testing {

inline SampleRecord real(std::string id, std::string source, std::string dataset = "D",
                         double duration = 1.0) {
  SampleRecord r;
  r.id = std::move(id);
  r.label = Label::real;
  r.source = std::move(source);
  r.dataset = std::move(dataset);
  r.duration_s = duration;
  r.path = "/audio/" + r.id + ".wav";
  return r;
}

inline SampleRecord fake(std::string id, std::string source, std::string generator,
                         std::string dataset = "D", double duration = 1.0) {
  SampleRecord r = real(std::move(id), std::move(source), std::move(dataset), duration);
  r.label = Label::fake;
  r.generator = std::move(generator);
  return r;
}

/// `n` records with unique ids over a handful of sources and generators.
inline std::vector<SampleRecord> random_records(std::mt19937_64& gen, std::size_t n) {
  std::vector<SampleRecord> out;
  std::uniform_int_distribution<int> src(0, 4), g(0, 5), coin(0, 2);
  std::uniform_real_distribution<double> dur(0.0, 12.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "u" + std::to_string(gen() % 1000000) + "_" + std::to_string(i);
    const std::string source = "S" + std::to_string(src(gen));
    const double d = dur(gen);
    if (coin(gen) == 0) {
      out.push_back(real(id, source, "R" + std::to_string(src(gen)), d));
    } else {
      out.push_back(fake(id, source, "G" + std::to_string(g(gen)), "F" + std::to_string(src(gen)), d));
    }
  }
  return out;
}

/// Random domain sizes: `n_real` real sources and up to `n_fake` fake domains
/// spread over them.
inline DomainSizes random_sizes(std::mt19937_64& gen, int n_real, int n_fake,
                                std::uint64_t max_size = 60000) {
  DomainSizes sizes;
  std::uniform_int_distribution<std::uint64_t> size(1, max_size);
  std::uniform_int_distribution<int> pick(0, n_real - 1);
  for (int r = 0; r < n_real; ++r) sizes[DomainKey::real("src" + std::to_string(r))] = size(gen);
  for (int f = 0; f < n_fake; ++f) {
    sizes[DomainKey::fake("src" + std::to_string(pick(gen)), "gen" + std::to_string(f))] = size(gen);
  }
  return sizes;
}

}  // namespace dosskit::testing
