#include "dosskit/doss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "format.hpp"

namespace dosskit {

namespace {

// Σ_r: capped fake counts grouped by their base real domain.
template <typename Value>
std::map<DomainKey, Value> base_sums(const std::map<DomainKey, Value>& fake_counts) {
  std::map<DomainKey, Value> sums;
  for (const auto& [key, count] : fake_counts) sums[key.base()] += count;
  return sums;
}

std::vector<std::string> orphan_warnings(const DomainSizes& sizes) {
  std::vector<std::string> out;
  for (const auto& [key, n] : sizes) {
    if (key.is_fake() && !sizes.contains(key.base())) {
      out.push_back("fake domain " + key.str() + " has no real domain " + key.base().str());
    }
  }
  return out;
}

void check_keys(const DomainSizes& sizes, const DomainKey& key) {
  if (!sizes.contains(key)) {
    throw validation_error("plan domain " + key.str() + " is not in the index");
  }
}

DistributionTable build_table(const std::map<DomainKey, double>& mass) {
  double total = 0.0;
  for (const auto& [key, m] : mass) total += m;
  if (!(total > 0.0)) throw computation_error("degenerate plan");

  DistributionTable table;
  for (const auto& [key, m] : mass) {
    auto& section = key.is_real() ? table.real : table.fake;
    section.push_back({key, m / total});
  }
  const auto order = [](const DistributionRow& a, const DistributionRow& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.domain < b.domain;
  };
  std::sort(table.real.begin(), table.real.end(), order);
  std::sort(table.fake.begin(), table.fake.end(), order);
  return table;
}

}  // namespace

void DossParams::validate() const {
  if (n_cap < 1) throw validation_error("n_cap must be >= 1");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw validation_error("rho must be > 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw validation_error("tau must be > 0");
}

std::uint64_t SelectPlan::total() const { return real_total() + fake_total(); }

std::uint64_t SelectPlan::real_total() const {
  std::uint64_t n = 0;
  for (const auto& [key, c] : counts) n += key.is_real() ? c : 0;
  return n;
}

std::uint64_t SelectPlan::fake_total() const {
  std::uint64_t n = 0;
  for (const auto& [key, c] : counts) n += key.is_fake() ? c : 0;
  return n;
}

double WeightPlan::total() const { return real_total() + fake_total(); }

double WeightPlan::real_total() const {
  double s = 0.0;
  for (const auto& [key, w] : weights) s += key.is_real() ? w : 0.0;
  return s;
}

double WeightPlan::fake_total() const {
  double s = 0.0;
  for (const auto& [key, w] : weights) s += key.is_fake() ? w : 0.0;
  return s;
}

double tempered(double x, double tau) {
  if (x == 0.0) return 0.0;
  return std::exp(std::log(x) / tau);
}

SelectPlan doss_select(const DomainSizes& sizes, const DossParams& params) {
  params.validate();
  if (sizes.empty()) throw validation_error("empty pool");

  SelectPlan plan;
  plan.params = params;
  plan.warnings = orphan_warnings(sizes);

  std::map<DomainKey, std::uint64_t> fake_counts;
  for (const auto& [key, n] : sizes) {
    if (key.is_fake()) fake_counts.emplace(key, std::min<std::uint64_t>(n, params.n_cap));
  }
  const auto sums = base_sums(fake_counts);

  for (const auto& [key, n] : sizes) {
    if (key.is_fake()) {
      plan.counts.emplace(key, fake_counts.at(key));
      continue;
    }
    const auto it = sums.find(key);
    const std::uint64_t sigma = it == sums.end() ? 0 : it->second;
    if (sigma == 0) {
      plan.warnings.push_back("real domain " + key.str() + " has no fake domains");
      plan.counts.emplace(key, 0);
      continue;
    }
    // Absorb the representation error of rho so that 100 · 0.29 floors to 29.
    const double product = static_cast<double>(sigma) * params.rho;
    const double target = std::floor(product + product * 4.0 * std::numeric_limits<double>::epsilon());
    const auto bound = static_cast<double>(n);
    plan.counts.emplace(key, static_cast<std::uint64_t>(std::min(bound, target)));
  }
  return plan;
}

SelectPlan doss_select(const DomainIndex& index, const DossParams& params) {
  return doss_select(index.sizes(), params);
}

WeightPlan doss_weight(const DomainSizes& sizes, const DossParams& params) {
  params.validate();
  if (sizes.empty()) throw validation_error("empty pool");

  WeightPlan plan;
  plan.params = params;
  plan.warnings = orphan_warnings(sizes);

  // Step 1: capped and tempered fake weights.
  std::map<DomainKey, double> fake_counts;
  double fake_weight = 0.0;
  for (const auto& [key, n] : sizes) {
    if (!key.is_fake()) continue;
    const double capped = static_cast<double>(std::min<std::uint64_t>(n, params.n_cap));
    fake_counts.emplace(key, capped);
    const double w = tempered(capped, params.tau);
    plan.weights.emplace(key, w);
    fake_weight += w;
  }
  const auto sums = base_sums(fake_counts);

  // Step 2: proportional real weights, same temperature.
  double real_weight = 0.0;
  for (const auto& [key, n] : sizes) {
    if (!key.is_real()) continue;
    const auto it = sums.find(key);
    const double sigma = it == sums.end() ? 0.0 : it->second;
    if (sigma == 0.0) plan.warnings.push_back("real domain " + key.str() + " has no fake domains");
    const double target = std::min(static_cast<double>(n), sigma * params.rho);
    const double w = tempered(target, params.tau);
    plan.weights.emplace(key, w);
    real_weight += w;
  }

  // Step 3: global real-to-fake ratio.
  if (!(real_weight > 0.0)) throw computation_error("no weightable real domain");
  const double alpha = fake_weight * params.rho / real_weight;
  for (auto& [key, w] : plan.weights) {
    if (key.is_real()) w *= alpha;
  }
  return plan;
}

WeightPlan doss_weight(const DomainIndex& index, const DossParams& params) {
  return doss_weight(index.sizes(), params);
}

double DistributionTable::real_mass() const {
  double s = 0.0;
  for (const auto& row : real) s += row.probability;
  return s;
}

double DistributionTable::fake_mass() const {
  double s = 0.0;
  for (const auto& row : fake) s += row.probability;
  return s;
}

std::string DistributionTable::to_csv() const {
  std::ostringstream out;
  out << "domain,kind,probability\n";
  for (const auto* section : {&real, &fake}) {
    for (const auto& row : *section) {
      out << detail::csv_field(row.domain.str()) << ','
          << (row.domain.is_real() ? "real" : "fake") << ','
          << detail::format_double(row.probability) << '\n';
    }
  }
  return out.str();
}

DistributionTable domain_distribution(const SelectPlan& plan, const DomainSizes& sizes) {
  std::map<DomainKey, double> mass;
  for (const auto& [key, c] : plan.counts) {
    check_keys(sizes, key);
    mass.emplace(key, static_cast<double>(c));
  }
  return build_table(mass);
}

DistributionTable domain_distribution(const WeightPlan& plan, const DomainSizes& sizes) {
  for (const auto& [key, w] : plan.weights) {
    check_keys(sizes, key);
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw validation_error("invalid weight for " + key.str());
    }
  }
  return build_table(plan.weights);
}

DistributionTable domain_distribution(const SelectPlan& plan, const DomainIndex& index) {
  return domain_distribution(plan, index.sizes());
}

DistributionTable domain_distribution(const WeightPlan& plan, const DomainIndex& index) {
  return domain_distribution(plan, index.sizes());
}

}  // namespace dosskit
