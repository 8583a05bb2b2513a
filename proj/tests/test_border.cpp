#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "brb/border.hpp"
#include "brb/robustcert.hpp"
#include "brb/rng.hpp"

using brb::AllocationRule;
using brb::BidRates;
using brb::CapacityBounds;
using brb::FairShares;
using brb::InterimTarget;
using brb::RngStream;
using brb::SubsetId;

namespace {

// The two-agent rule that equalizes interim probabilities: the sole bidder
// wins outright; in a tie agent 0 wins with probability 1 - alpha_0.
AllocationRule two_agent_rule(double alpha) {
  AllocationRule rule(2);
  rule.set_prob(0b01, 0, 1.0);
  rule.set_prob(0b10, 1, 1.0);
  rule.set_prob(0b11, 0, 1.0 - alpha);
  rule.set_prob(0b11, 1, alpha);
  return rule;
}

}  // namespace

TEST_SUITE("border") {

TEST_CASE("subset probability is the product measure") {
  const BidRates half({0.5, 0.5});
  CHECK(brb::subset_probability(half, 0b01) == doctest::Approx(0.25).epsilon(1e-12));
  double total = 0.0;
  for (SubsetId s = 0; s <= 3; ++s) total += brb::subset_probability(half, s);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const BidRates skew({0.3, 0.7});
  CHECK(brb::subset_probability(skew, 0b11) == doctest::Approx(0.21).epsilon(1e-12));
}

TEST_CASE("induced interim matches the closed forms") {
  const auto interim = brb::induced_interim(two_agent_rule(0.3), BidRates({0.3, 0.7}));
  CHECK(interim.p[0] == doctest::Approx(0.79).epsilon(1e-12));
  CHECK(interim.p[1] == doctest::Approx(0.79).epsilon(1e-12));

  const auto uniform = brb::induced_interim(AllocationRule::uniform(2), BidRates({0.5, 0.5}));
  CHECK(uniform.p[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(uniform.p[1] == doctest::Approx(0.75).epsilon(1e-12));

  AllocationRule solo(1);
  solo.set_prob(0b1, 0, 1.0);
  CHECK(brb::induced_interim(solo, BidRates({0.4})).p[0] == doctest::Approx(1.0));
}

TEST_CASE("general opponent distributions") {
  const AllocationRule rule = two_agent_rule(0.3);

  std::vector<double> point_mass(4, 0.0);
  point_mass[0] = 1.0;  // nobody else bids
  CHECK(brb::induced_interim_general(rule, point_mass, 0) == doctest::Approx(1.0));

  // Product of Bernoulli opponents reproduces induced_interim.
  const BidRates rates({0.3, 0.7});
  std::vector<double> product(4, 0.0);
  product[0b00] = 0.3;  // agent 1 silent w.p. 1-0.7
  product[0b10] = 0.7;
  CHECK(brb::induced_interim_general(rule, product, 0) ==
        doctest::Approx(brb::induced_interim(rule, rates).p[0]).epsilon(1e-12));

  // One-at-a-time coalition: alpha_i + sum_j alpha_j p_i^{ij}.
  std::vector<double> turns(4, 0.0);
  turns[0b00] = 0.3;
  turns[0b10] = 0.7;
  const double expected = 0.3 + 0.7 * rule.prob(0b11, 0);
  CHECK(brb::induced_interim_general(rule, turns, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("border feasibility verdicts") {
  const BidRates half({0.5, 0.5});
  InterimTarget both_win{{1.0, 1.0}};
  const auto bad = brb::border_feasible(half, both_win);
  CHECK_FALSE(bad.feasible);
  CHECK_FALSE(bad.equality_ok);  // 1.0 != 0.75

  const auto good = brb::border_feasible(BidRates({0.3, 0.7}), InterimTarget{{0.79, 0.79}});
  CHECK(good.feasible);

  for (int n = 1; n <= 12; ++n) {
    const FairShares shares = FairShares::symmetric(n);
    const auto check = brb::border_feasible(shares.to_rates(), brb::worst_case_interim(shares));
    CHECK(check.feasible);
  }
}

TEST_CASE("equalized and scaled interim targets") {
  const auto thirds = brb::worst_case_interim(FairShares::symmetric(3));
  CHECK(thirds.p[0] == doctest::Approx(19.0 / 27).epsilon(1e-12));
  const auto skew = brb::worst_case_interim(FairShares({0.3, 0.7}));
  CHECK(skew.p[0] == doctest::Approx(0.79).epsilon(1e-12));
  CHECK(brb::worst_case_interim(FairShares({1.0})).p[0] == doctest::Approx(1.0));

  const FairShares quarters = FairShares::symmetric(4);
  const auto scaled = brb::proportional_interim(quarters, 2.0);
  CHECK(scaled.p[0] == doctest::Approx(0.46875).epsilon(1e-12));
  CHECK(scaled.p[0] >= (1.0 - std::exp(-2.0)) / 2.0);
  const auto unscaled = brb::proportional_interim(quarters, 1.0);
  CHECK(unscaled.p[0] == doctest::Approx(brb::worst_case_interim(quarters).p[0]).epsilon(1e-12));
  CHECK_THROWS(brb::proportional_interim(quarters, 5.0));
}

TEST_CASE("monotone ratio") {
  const std::vector<double> skew{0.3, 0.7};
  CHECK(brb::border_monotone_ratio(skew, 0b01) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(brb::border_monotone_ratio(skew, 0b11) == doctest::Approx(0.79).epsilon(1e-12));

  RngStream stream(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform01() * 7);
    std::vector<double> weights(static_cast<std::size_t>(n));
    for (double& w : weights) w = 0.05 + 0.9 * stream.uniform01();
    const SubsetId inner = 1 + static_cast<SubsetId>(stream.uniform01() * ((1u << n) - 1));
    SubsetId outer = inner;
    for (int i = 0; i < n; ++i)
      if (stream.uniform01() < 0.5) outer |= SubsetId{1} << i;
    CHECK(brb::border_monotone_ratio(weights, inner) >=
          brb::border_monotone_ratio(weights, outer) - 1e-9);
  }
  // The full set recovers the equalized interim value.
  const std::vector<double> shares{0.2, 0.3, 0.5};
  CHECK(brb::border_monotone_ratio(shares, 0b111) ==
        doctest::Approx(1.0 - 0.8 * 0.7 * 0.5).epsilon(1e-12));
}

TEST_CASE("border network shape and capacities") {
  const BidRates half({0.5, 0.5});
  const InterimTarget target{{0.75, 0.75}};
  CapacityBounds bounds;
  bounds.set(0b11, 0, 0.5);
  const auto bn = brb::build_border_network(half, target, bounds);

  // 1 source + 3 subset nodes + 2 agent nodes + 1 sink
  CHECK(bn.net.nodes() == 4 + 2 + 1);
  CHECK(bn.net.edge(bn.source_edge[0b11]).cap == doctest::Approx(0.25).epsilon(1e-12));
  double source_total = 0.0;
  for (SubsetId s = 1; s <= 3; ++s) source_total += bn.net.edge(bn.source_edge[s]).cap;
  CHECK(source_total == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(bn.net.edge(bn.middle_edge[0b11 * 2 + 0]).cap == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(bn.net.edge(bn.middle_edge[0b11 * 2 + 1]).cap == brb::kInfiniteCapacity);

  CHECK_THROWS_AS(brb::build_border_network(half, InterimTarget{{1.0, 1.0}}, {}),
                  std::invalid_argument);
}

TEST_CASE("generalized margin reduces and cross-checks") {
  // Unbounded: margin equals the plain inequality margin.
  const BidRates rates({0.4, 0.6});
  const InterimTarget target = brb::worst_case_interim(FairShares({0.4, 0.6}));
  for (SubsetId I = 0; I <= 3; ++I) {
    const double margin = brb::generalized_border_margin(rates, target, {}, I);
    double lhs = 0.0;
    double miss = 1.0;
    for (int i = 0; i < 2; ++i) {
      if (!brb::subset_contains(I, i)) continue;
      lhs += target.p[static_cast<std::size_t>(i)] * rates.rate(i);
      miss *= 1.0 - rates.rate(i);
    }
    CHECK(margin == doctest::Approx((1.0 - miss) - lhs).epsilon(1e-12));
  }
  CHECK(brb::generalized_border_margin(rates, target, {}, 0) == doctest::Approx(0.0));

  // Doubleton caps: margin == 1 - modified_border_lhs for every subset.
  RngStream stream(4242);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform01() * 5);
    std::vector<double> raw(static_cast<std::size_t>(n));
    double total = 0.0;
    for (double& a : raw) {
      a = 0.05 + stream.uniform01();
      total += a;
    }
    for (double& a : raw) a /= total;
    const FairShares shares(raw);
    const auto bounds = CapacityBounds::doubleton_caps(shares);
    const auto wc = brb::worst_case_interim(shares);
    for (SubsetId I = 0; I <= brb::full_subset(n); ++I) {
      CHECK(brb::generalized_border_margin(shares.to_rates(), wc, bounds, I) ==
            doctest::Approx(1.0 - brb::modified_border_lhs(shares, I)).epsilon(1e-9));
    }
  }
}

}  // TEST_SUITE
