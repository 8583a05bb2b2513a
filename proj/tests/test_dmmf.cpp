#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "brb/dmmf.hpp"
#include "brb/rng.hpp"

using brb::BidRates;
using brb::FairShares;
using brb::InterimTarget;
using brb::RngStream;
using brb::SubsetId;

TEST_SUITE("dmmf") {

TEST_CASE("single agent always wins") {
  const auto run = brb::run_dmmf(FairShares({1.0}), BidRates({1.0}), 500, 1);
  CHECK(run.win_fraction[0] == doctest::Approx(1.0));
  CHECK(run.rounds_with_bidder == 500);
}

TEST_CASE("wins conserve rounds and the diagnostic identity holds") {
  const FairShares shares({0.2, 0.3, 0.5});
  const BidRates rates({0.4, 0.5, 0.6});
  const auto run = brb::run_dmmf(shares, rates, 20000, 7, /*thin_every=*/500);
  long total = 0;
  for (long w : run.wins) total += w;
  CHECK(total == run.rounds_with_bidder);

  for (const auto& [t, wins] : run.thinned) {
    long sum = 0;
    for (long w : wins) sum += w;
    double weighted = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double y =
          wins[static_cast<std::size_t>(i)] / shares.share(i) - static_cast<double>(sum);
      weighted += shares.share(i) * y;
    }
    CHECK(std::abs(weighted) <= 1e-6 * std::max<double>(1, static_cast<double>(t)));
  }
}

TEST_CASE("symmetric win fractions converge to the ergodic limit") {
  const FairShares shares = FairShares::symmetric(3);
  const auto run = brb::run_dmmf(shares, shares.to_rates(), 300000, 11);
  const double expected = (1.0 / 3) * (1.0 - std::pow(2.0 / 3, 3));
  for (double f : run.win_fraction) CHECK(std::abs(f - expected) < 0.02);
}

TEST_CASE("subgroup stability verdicts") {
  const FairShares symmetric = FairShares::symmetric(3);
  const auto checks = brb::subgroup_stability(symmetric, symmetric.to_rates());
  CHECK(checks.size() == 6);  // proper nonempty subsets of 3
  CHECK(brb::all_strict(checks));
  for (const auto& c : checks) CHECK(c.subset != brb::full_subset(3));

  // A vanishing bid rate starves its singleton subset.
  const auto degenerate =
      brb::subgroup_stability(FairShares({0.5, 0.5}), BidRates({1e-9, 0.5}));
  CHECK_FALSE(brb::all_strict(degenerate));
}

TEST_CASE("winner table is consistent across nested subsets") {
  RngStream stream(13);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(stream.uniform01() * 6);
    std::vector<double> score(static_cast<std::size_t>(n));
    std::vector<double> tiebreak(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      score[static_cast<std::size_t>(i)] = stream.uniform01() < 0.3
                                               ? 1.0  // force ties
                                               : stream.uniform01() * 3.0;
      tiebreak[static_cast<std::size_t>(i)] = stream.uniform01();
    }
    const auto winner = brb::subset_winner_table(score, tiebreak);
    for (SubsetId s = 1; s <= brb::full_subset(n); ++s) {
      CHECK(brb::subset_contains(s, winner[s]));
      for (SubsetId sub = s; sub != 0; sub = (sub - 1) & s) {
        if (brb::subset_contains(sub, winner[s])) CHECK(winner[sub] == winner[s]);
      }
    }
  }
}

TEST_CASE("rule derivation round-trips a feasible target") {
  const BidRates rates({0.5, 0.5});
  const InterimTarget target{{0.75, 0.75}};
  const auto derivation = brb::derive_rule_via_dmmf(rates, target, 200000, 17);
  REQUIRE(derivation.ok);
  CHECK(derivation.derived_shares[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(derivation.derived_shares[1] == doctest::Approx(0.5).epsilon(1e-9));
  derivation.rule.validate(1e-9);

  const auto realized = brb::induced_interim(derivation.rule, rates);
  CHECK(std::abs(realized.p[0] - 0.75) < 0.02);
  CHECK(std::abs(realized.p[1] - 0.75) < 0.02);
}

TEST_CASE("derivation rejects bad targets upfront") {
  const BidRates rates({0.5, 0.5});
  // Equality violated: 1.0 != 0.75.
  CHECK_FALSE(brb::derive_rule_via_dmmf(rates, InterimTarget{{1.0, 1.0}}, 100, 1).ok);
  // Pair inequality violated at n = 3.
  CHECK_FALSE(brb::derive_rule_via_dmmf(BidRates({0.9, 0.9, 0.9}),
                                        InterimTarget{{0.555, 0.555, 0.0}}, 100, 1)
                  .ok);
  // Zero interim demand for an agent cannot define positive shares.
  const auto zero =
      brb::derive_rule_via_dmmf(BidRates({1.0, 0.5}), InterimTarget{{1.0, 0.0}}, 100, 1);
  CHECK_FALSE(zero.ok);
}

TEST_CASE("trace csv shape") {
  const FairShares shares = FairShares::symmetric(2);
  const auto run = brb::run_dmmf(shares, shares.to_rates(), 1000, 3, /*thin_every=*/100);
  std::ostringstream out;
  brb::write_dmmf_trace_csv(out, run, 2);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,wins_0,wins_1");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 10);
}

}  // TEST_SUITE
