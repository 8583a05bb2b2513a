#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "brb/rng.hpp"
#include "brb/shares.hpp"
#include "brb/valuation.hpp"

namespace brb {

struct RoundBrief {
  std::uint32_t bidders = 0;
  int winner = -1;
};
using History = std::vector<RoundBrief>;

// What one agent may condition on when deciding whether to bid: the round,
// her own current value and remaining tokens, and the public record of past
// bidder sets and winners. Bids within a round are simultaneous, so nothing
// about the current round's other bids is visible.
struct ObservableState {
  long round;
  double own_value;
  long own_tokens;
  const History& history;
};

class Strategy {
 public:
  virtual ~Strategy() = default;
  void bind(RngStream stream) { stream_ = std::move(stream); }
  virtual bool decide(const ObservableState& state) = 0;

 protected:
  RngStream stream_{0};
};

// Coordinates a coalition of agents. Commits the coalition's bids before the
// current round's values or the targeted agent's bid exist; it may correlate
// its own agents arbitrarily and read the public history.
class AdversaryController {
 public:
  virtual ~AdversaryController() = default;
  void bind(RngStream stream) { stream_ = std::move(stream); }
  virtual std::uint32_t decide(long round, std::span<const long> tokens,
                               const History& history) = 0;

 protected:
  RngStream stream_{0};
};

// Each agent controlled exactly once: either by its own Strategy or by the
// single coalition controller.
class StrategyProfile {
 public:
  static StrategyProfile independent(std::vector<std::unique_ptr<Strategy>> strategies);
  static StrategyProfile with_adversary(std::vector<std::unique_ptr<Strategy>> strategies,
                                        std::unique_ptr<AdversaryController> adversary,
                                        std::uint32_t coalition);

  int agents() const { return static_cast<int>(strategies_.size()); }
  std::uint32_t coalition_mask() const { return coalition_; }
  bool coalition_member(int agent) const { return subset_contains(coalition_, agent); }
  Strategy* strategy(int agent) const { return strategies_[static_cast<std::size_t>(agent)].get(); }
  AdversaryController* adversary() const { return adversary_.get(); }

  // Re-derives all strategy and adversary substreams from a root seed.
  void bind_streams(std::uint64_t root_seed);

 private:
  StrategyProfile() = default;
  std::vector<std::unique_ptr<Strategy>> strategies_;
  std::unique_ptr<AdversaryController> adversary_;
  std::uint32_t coalition_ = 0;
};

// Bids exactly on the top beta-quantile of own values (via the ideal bid
// rule), independently across rounds; abstains without tokens.
std::unique_ptr<Strategy> aggressive_strategy(double beta, const ValueDistribution& dist);

// beta'-quantile bidding that ignores its own token count; the mechanism's
// budget enforcement is what truncates it.
std::unique_ptr<Strategy> threshold_deviation(double beta_prime, const ValueDistribution& dist);

std::unique_ptr<Strategy> always_bid();
std::unique_ptr<Strategy> never_bid();

// Coalition of everyone but `target`: each round at most one coalition agent
// bids, agent j with probability alpha_j, nobody with probability
// alpha_target. A drawn agent without tokens abstains.
std::unique_ptr<AdversaryController> turn_taking_adversary(int target,
                                                           const FairShares& shares);

}  // namespace brb
