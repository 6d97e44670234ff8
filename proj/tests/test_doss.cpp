#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "dosskit/doss.hpp"
#include "dosskit/plan_io.hpp"
#include "fixtures.hpp"

using namespace dosskit;

namespace {

DomainSizes hand_pool() {
  return {{DomainKey::fake("r1", "f1"), 5000},
          {DomainKey::fake("r1", "f2"), 1000},
          {DomainKey::real("r1"), 10000}};
}

}  // namespace

TEST_CASE("doss_select hand trace") {
  const auto plan = doss_select(hand_pool(), {2500, 0.25, 1.0});
  CHECK(plan.counts.at(DomainKey::fake("r1", "f1")) == 2500);
  CHECK(plan.counts.at(DomainKey::fake("r1", "f2")) == 1000);
  // floor((2500 + 1000) * 0.25)
  CHECK(plan.counts.at(DomainKey::real("r1")) == 875);
  CHECK(plan.total() == 4375);
  CHECK(plan.warnings.empty());
}

TEST_CASE("doss_select floors decimal ratios exactly") {
  // In binary floating point 100 · 0.29 is 28.999999999999996.
  for (const auto& [sigma, rho, want] : std::vector<std::tuple<std::uint64_t, double, std::uint64_t>>{
           {100, 0.29, 29}, {100, 0.57, 57}, {100, 0.58, 58}, {10, 0.7, 7}, {99, 0.29, 28}, {3, 0.1, 0}}) {
    DomainSizes sizes = {{DomainKey::fake("r", "g"), sigma}, {DomainKey::real("r"), 1000}};
    const auto plan = doss_select(sizes, {5000, rho, 1.0});
    CHECK(plan.counts.at(DomainKey::real("r")) == want);
  }
}

TEST_CASE("doss_select with inactive caps selects the full pool") {
  const auto plan = doss_select(hand_pool(), {100000, 10.0, 1.0});
  CHECK(plan.counts.at(DomainKey::fake("r1", "f1")) == 5000);
  CHECK(plan.counts.at(DomainKey::fake("r1", "f2")) == 1000);
  CHECK(plan.counts.at(DomainKey::real("r1")) == 10000);
}

TEST_CASE("doss_select: real domain without fakes gets zero and a warning") {
  auto sizes = hand_pool();
  sizes[DomainKey::real("lonely")] = 300;
  const auto plan = doss_select(sizes, {2500, 0.25, 1.0});
  CHECK(plan.counts.at(DomainKey::real("lonely")) == 0);
  REQUIRE(plan.warnings.size() == 1);
  CHECK(plan.warnings[0].find("real/lonely") != std::string::npos);
}

TEST_CASE("doss_select: fake domain without a base real domain is kept and warned") {
  auto sizes = hand_pool();
  sizes[DomainKey::fake("orphan", "g")] = 40;
  const auto plan = doss_select(sizes, {2500, 0.25, 1.0});
  CHECK(plan.counts.at(DomainKey::fake("orphan", "g")) == 40);
  CHECK(plan.counts.at(DomainKey::real("r1")) == 875);
  REQUIRE(plan.warnings.size() == 1);
  CHECK(plan.warnings[0].find("fake/orphan/g") != std::string::npos);
}

TEST_CASE("DossParams validation") {
  CHECK_THROWS_AS(doss_select(hand_pool(), {0, 0.25, 1.0}), Error);
  CHECK_THROWS_AS(doss_select(hand_pool(), {10, 0.0, 1.0}), Error);
  CHECK_THROWS_AS(doss_weight(hand_pool(), {10, 0.25, 0.0}), Error);
  CHECK_THROWS_AS(doss_weight(hand_pool(), {10, -1.0, 1.0}), Error);
}

TEST_CASE("doss_select cap law and monotonicity in n_cap") {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sizes = dosskit::testing::random_sizes(gen, 5, 30, 5000);
    const std::uint64_t cap_lo = 1 + gen() % 3000;
    const std::uint64_t cap_hi = cap_lo + gen() % 3000;
    const auto lo = doss_select(sizes, {cap_lo, 0.25, 1.0});
    const auto hi = doss_select(sizes, {cap_hi, 0.25, 1.0});
    for (const auto& [key, n] : sizes) {
      if (key.is_fake()) {
        CHECK(lo.counts.at(key) == std::min(n, cap_lo));
        CHECK(hi.counts.at(key) >= lo.counts.at(key));
      } else {
        CHECK(lo.counts.at(key) <= n);
      }
    }
  }
}

TEST_CASE("doss_weight hand trace, tau = 1") {
  const auto plan = doss_weight(hand_pool(), {2500, 0.25, 1.0});
  CHECK(plan.weights.at(DomainKey::fake("r1", "f1")) == doctest::Approx(2500.0).epsilon(1e-12));
  CHECK(plan.weights.at(DomainKey::fake("r1", "f2")) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(plan.weights.at(DomainKey::real("r1")) == doctest::Approx(875.0).epsilon(1e-12));
}

TEST_CASE("doss_weight hand trace, tau = 5") {
  // Oracle: std::pow instead of the exp/log route.
  const double f1 = std::pow(2500.0, 0.2);
  const double f2 = std::pow(1000.0, 0.2);
  const double r_pre = std::pow(875.0, 0.2);
  const double alpha = (f1 + f2) * 0.25 / r_pre;
  CHECK(f1 == doctest::Approx(4.78176).epsilon(1e-6));
  CHECK(f2 == doctest::Approx(3.98107).epsilon(1e-6));
  CHECK(r_pre == doctest::Approx(3.87616).epsilon(1e-6));
  CHECK(alpha == doctest::Approx(0.565175).epsilon(1e-6));

  const auto plan = doss_weight(hand_pool(), {2500, 0.25, 5.0});
  const double w_f1 = plan.weights.at(DomainKey::fake("r1", "f1"));
  const double w_f2 = plan.weights.at(DomainKey::fake("r1", "f2"));
  const double w_r1 = plan.weights.at(DomainKey::real("r1"));
  CHECK(w_f1 == doctest::Approx(f1).epsilon(1e-12));
  CHECK(w_f2 == doctest::Approx(f2).epsilon(1e-12));
  CHECK(w_r1 == doctest::Approx(r_pre * alpha).epsilon(1e-12));
  CHECK(std::abs(w_r1 - 2.19071) < 5e-6);
  CHECK(w_r1 / (w_f1 + w_f2) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("doss_weight at very high temperature flattens fake weights") {
  const auto plan = doss_weight(hand_pool(), {2500, 0.25, 1e6});
  const double a = plan.weights.at(DomainKey::fake("r1", "f1"));
  const double b = plan.weights.at(DomainKey::fake("r1", "f2"));
  CHECK(std::abs(a - 1.0) < 1e-3);
  CHECK(std::abs(b - 1.0) < 1e-3);
  CHECK(std::abs(a - b) / std::max(a, b) < 1e-3);
}

TEST_CASE("doss_weight errors without a weightable real domain") {
  const DomainSizes only_fake = {{DomainKey::fake("a", "g"), 10}};
  CHECK_THROWS_WITH_AS(doss_weight(only_fake, {10, 0.25, 1.0}), "no weightable real domain", Error);
  const DomainSizes unrelated = {{DomainKey::fake("a", "g"), 10}, {DomainKey::real("b"), 10}};
  CHECK_THROWS_AS(doss_weight(unrelated, {10, 0.25, 1.0}), Error);
}

TEST_CASE("tempered power") {
  CHECK(tempered(0.0, 5.0) == 0.0);
  CHECK(tempered(1.0, 3.0) == 1.0);
  CHECK(tempered(32.0, 5.0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("doss_weight ratio law and temperature flattening over random pools") {
  std::mt19937_64 gen(202);
  for (int trial = 0; trial < 200; ++trial) {
    const auto sizes = dosskit::testing::random_sizes(gen, 1 + static_cast<int>(gen() % 10),
                                                      1 + static_cast<int>(gen() % 60));
    const std::uint64_t cap = 1 + gen() % 20000;
    const double rho = 0.05 + static_cast<double>(gen() % 1000) / 500.0;
    const double tau = 0.5 + static_cast<double>(gen() % 100) / 10.0;
    WeightPlan plan;
    try {
      plan = doss_weight(sizes, {cap, rho, tau});
    } catch (const Error&) {
      continue;  // every fake landed on sources without a real domain
    }
    const double real = plan.real_total();
    const double fake = plan.fake_total();
    CHECK(std::abs(real - rho * fake) <= 1e-9 * rho * fake);

    // w[f1]/w[f2] = (s[f1]/s[f2])^(1/tau), and shrinks toward 1 as tau grows.
    const auto hotter = doss_weight(sizes, {cap, rho, tau * 2});
    const DomainKey* prev = nullptr;
    for (const auto& [key, n] : sizes) {
      if (!key.is_fake()) continue;
      if (prev) {
        const double s1 = static_cast<double>(std::min(sizes.at(*prev), cap));
        const double s2 = static_cast<double>(std::min(n, cap));
        const double ratio = plan.weights.at(*prev) / plan.weights.at(key);
        CHECK(ratio == doctest::Approx(std::pow(s1 / s2, 1.0 / tau)).epsilon(1e-10));
        const double hot = hotter.weights.at(*prev) / hotter.weights.at(key);
        CHECK(std::abs(std::log(hot)) <= std::abs(std::log(ratio)) + 1e-12);
      }
      prev = &key;
    }
  }
}

TEST_CASE("naive pooling limit: tau = 1 and a large cap weight fakes by size") {
  std::mt19937_64 gen(303);
  for (int trial = 0; trial < 50; ++trial) {
    auto sizes = dosskit::testing::random_sizes(gen, 4, 40, 50000);
    // Make every real domain large enough that rho·Σ_r never binds.
    for (auto& [key, n] : sizes) {
      if (key.is_real()) n = 10000000;
    }
    const auto plan = doss_weight(sizes, {50000, 0.25, 1.0});
    double max_dev = 0.0;
    const auto& first = *std::find_if(sizes.begin(), sizes.end(),
                                      [](const auto& kv) { return kv.first.is_fake(); });
    const double scale = plan.weights.at(first.first) / static_cast<double>(first.second);
    for (const auto& [key, n] : sizes) {
      if (!key.is_fake()) continue;
      const double expected = scale * static_cast<double>(n);
      max_dev = std::max(max_dev, std::abs(plan.weights.at(key) - expected) / expected);
    }
    CHECK(max_dev < 1e-12);
  }
}

TEST_CASE("plans are deterministic") {
  std::mt19937_64 gen(404);
  const auto sizes = dosskit::testing::random_sizes(gen, 8, 100);
  CHECK(plan_to_json(doss_weight(sizes, {2500, 0.25, 5.0})) ==
        plan_to_json(doss_weight(sizes, {2500, 0.25, 5.0})));
  CHECK(plan_to_json(doss_select(sizes, {2500, 0.25, 5.0})) ==
        plan_to_json(doss_select(sizes, {2500, 0.25, 5.0})));
}

TEST_CASE("plan JSON round trip") {
  std::mt19937_64 gen(505);
  const auto sizes = dosskit::testing::random_sizes(gen, 6, 50);
  const auto weight = doss_weight(sizes, {2500, 0.25, 5.0});
  const auto back = std::get<WeightPlan>(plan_from_json(plan_to_json(weight)));
  CHECK(back.weights == weight.weights);
  CHECK(back.params == weight.params);

  const auto select = doss_select(sizes, {2500, 0.25, 5.0});
  const auto back2 = std::get<SelectPlan>(plan_from_json(plan_to_json(select)));
  CHECK(back2.counts == select.counts);
  CHECK(back2.params == select.params);

  CHECK_THROWS_AS(plan_from_json(R"({"kind":"select","counts":{"bogus":1}})"), Error);
  CHECK_THROWS_AS(plan_from_json(R"({"kind":"select","counts":{"real/a":-1}})"), Error);
  CHECK_THROWS_AS(plan_from_json(R"({"kind":"other"})"), Error);
}

TEST_CASE("domain_distribution normalizes and sorts") {
  WeightPlan plan;
  plan.weights = {{DomainKey::fake("r1", "f1"), 3.0},
                  {DomainKey::fake("r1", "f2"), 1.0},
                  {DomainKey::real("r1"), 1.0}};
  const auto table = domain_distribution(plan, hand_pool());
  REQUIRE(table.fake.size() == 2);
  REQUIRE(table.real.size() == 1);
  CHECK(table.fake[0].domain == DomainKey::fake("r1", "f1"));
  CHECK(table.fake[0].probability == doctest::Approx(0.6));
  CHECK(table.fake[1].probability == doctest::Approx(0.2));
  CHECK(table.real[0].probability == doctest::Approx(0.2));
  CHECK(table.to_csv() ==
        "domain,kind,probability\nreal/r1,real,0.2\nfake/r1/f1,fake,0.6\nfake/r1/f2,fake,0.2\n");
}

TEST_CASE("domain_distribution of a tempered plan puts rho/(1+rho) on reals") {
  const auto plan = doss_weight(hand_pool(), {2500, 0.25, 5.0});
  const auto table = domain_distribution(plan, hand_pool());
  CHECK(table.real_mass() == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("domain_distribution of a uniform plan") {
  SelectPlan plan;
  DomainSizes sizes;
  for (int i = 0; i < 7; ++i) {
    const auto key = DomainKey::fake("s", "g" + std::to_string(i));
    plan.counts[key] = 12;
    sizes[key] = 12;
  }
  const auto table = domain_distribution(plan, sizes);
  for (const auto& row : table.fake) CHECK(row.probability == doctest::Approx(1.0 / 7));
}

TEST_CASE("domain_distribution errors") {
  SelectPlan zero;
  zero.counts[DomainKey::real("r1")] = 0;
  CHECK_THROWS_WITH_AS(domain_distribution(zero, hand_pool()), "degenerate plan", Error);
  SelectPlan stray;
  stray.counts[DomainKey::real("elsewhere")] = 3;
  CHECK_THROWS_AS(domain_distribution(stray, hand_pool()), Error);
}
