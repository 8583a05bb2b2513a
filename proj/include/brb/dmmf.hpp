#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "brb/allocation.hpp"
#include "brb/border.hpp"
#include "brb/shares.hpp"

namespace brb {

// Dynamic max-min fairness: each round the item goes to the bidder with the
// smallest wins-to-share ratio, ties broken uniformly at random.

struct DmmfRun {
  std::vector<long> wins;            // W_i after the final round
  std::vector<double> win_fraction;  // W_i / rounds
  long rounds = 0;
  long rounds_with_bidder = 0;
  // (t, wins snapshot) every `thin_every` rounds when requested.
  std::vector<std::pair<long, std::vector<long>>> thinned;
};

DmmfRun run_dmmf(const FairShares& shares, const BidRates& rates, long rounds,
                 std::uint64_t seed, long thin_every = 0);

struct StabilityCheck {
  SubsetId subset = 0;
  double lhs = 0.0;  // (1 - prod_{i in I}(1-beta_i)) / sum_{i in I} alpha_i
  double rhs = 0.0;  // 1 - prod_j (1-beta_j)
  bool strict = false;
};

// Strict-inequality check for every proper nonempty subset; all strict is the
// positive-recurrence condition that makes the win fractions converge.
std::vector<StabilityCheck> subgroup_stability(const FairShares& shares,
                                               const BidRates& rates);

bool all_strict(std::span<const StabilityCheck> checks);

// Winner-per-subset table for one round: entry m is the member of mask m with
// the smallest score (ties already broken inside `score`).
std::vector<int> subset_winner_table(std::span<const double> score,
                                     std::span<const double> tiebreak);

struct DmmfDerivation {
  bool ok = false;
  std::string message;
  std::vector<double> derived_shares;
  AllocationRule rule{1};
  long rounds = 0;
};

// Ergodic construction of an allocation rule for a feasible (rates, target)
// pair: run DMMF under the shares implied by the target and record, for every
// subset and round, who would have won had that subset bid. The empirical
// frequencies converge to a rule inducing the target.
DmmfDerivation derive_rule_via_dmmf(const BidRates& rates, const InterimTarget& target,
                                    long rounds, std::uint64_t seed);

// CSV emission: thinned trace "t,wins_0..wins_{n-1}".
void write_dmmf_trace_csv(std::ostream& out, const DmmfRun& run, int agents);

}  // namespace brb
