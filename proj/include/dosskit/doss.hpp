#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dosskit/manifest.hpp"

namespace dosskit {

/// Saturation cap, real-to-fake ratio and diversity temperature.
struct DossParams {
  std::uint64_t n_cap = 2500;
  double rho = 0.25;
  double tau = 1.0;

  /// Throws a validation Error unless n_cap >= 1, rho > 0 and tau > 0.
  void validate() const;

  bool operator==(const DossParams&) const = default;
};

/// Per-domain sample counts produced by the pruning strategy.
struct SelectPlan {
  std::map<DomainKey, std::uint64_t> counts;
  /// Absent for plans that did not come from doss_select (scaling plans).
  std::optional<DossParams> params;
  std::vector<std::string> warnings;

  std::uint64_t total() const;
  std::uint64_t real_total() const;
  std::uint64_t fake_total() const;
};

/// Per-domain sampling weights produced by the re-weighting strategy.
/// Weights are unnormalized; Σ real = rho · Σ fake.
struct WeightPlan {
  std::map<DomainKey, double> weights;
  DossParams params;
  std::vector<std::string> warnings;

  double total() const;
  double real_total() const;
  double fake_total() const;
};

/// x^(1/tau) evaluated as exp(ln(x)/tau); 0 maps to 0.
double tempered(double x, double tau);

/// Pruning: fake domains are capped at n_cap, and each real domain receives
/// floor(rho · Σ capped counts of the fakes built on it), bounded by its own
/// size. Real domains with no fakes get 0; fakes whose base real domain is
/// missing are kept and reported in `warnings`.
SelectPlan doss_select(const DomainSizes& sizes, const DossParams& params);
SelectPlan doss_select(const DomainIndex& index, const DossParams& params);

/// Re-weighting: the same capping as doss_select without flooring, the
/// temperature exponent applied to every domain, then all real weights
/// rescaled so that Σ real = rho · Σ fake.
WeightPlan doss_weight(const DomainSizes& sizes, const DossParams& params);
WeightPlan doss_weight(const DomainIndex& index, const DossParams& params);

struct DistributionRow {
  DomainKey domain;
  double probability = 0.0;
};

/// Normalized per-domain sampling probabilities, each section sorted by
/// descending probability (ties by domain key).
struct DistributionTable {
  std::vector<DistributionRow> real;
  std::vector<DistributionRow> fake;

  double real_mass() const;
  double fake_mass() const;
  /// CSV with header "domain,kind,probability"; real section first.
  std::string to_csv() const;
};

DistributionTable domain_distribution(const SelectPlan& plan, const DomainSizes& sizes);
DistributionTable domain_distribution(const WeightPlan& plan, const DomainSizes& sizes);
DistributionTable domain_distribution(const SelectPlan& plan, const DomainIndex& index);
DistributionTable domain_distribution(const WeightPlan& plan, const DomainIndex& index);

}  // namespace dosskit
