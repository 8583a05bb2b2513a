#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "brb/allocation.hpp"
#include "brb/shares.hpp"
#include "brb/strategies.hpp"
#include "brb/valuation.hpp"

namespace brb {

// How bid budgets are enforced.
//  EndOfHorizon:    lifetime pool of floor(beta_i*(1+delta_i)*T) tokens.
//  Anytime:         at round t an agent may have bid at most
//                   beta_i*(1+delta_i(t))*t times so far.
//  ExpectationOnly: tokens are tracked but never enforced (diagnostic).
enum class BudgetMode { EndOfHorizon, Anytime, ExpectationOnly };

// Budget slack delta: the default formula sqrt(6 ln t / (beta t)), a custom
// per-agent constant, or zero.
enum class SlackMode { Formula, Custom, Zero };

struct MechanismConfig {
  MechanismConfig(FairShares shares_, BidRates budgets_,
                  std::vector<ValueDistribution> dists_, long horizon_,
                  AllocationRule rule_)
      : shares(std::move(shares_)),
        budgets(std::move(budgets_)),
        dists(std::move(dists_)),
        horizon(horizon_),
        rule(std::move(rule_)) {}

  FairShares shares;
  BidRates budgets;  // per-round bid rates beta; equal to shares for the base mechanism
  std::vector<ValueDistribution> dists;
  long horizon;
  SlackMode slack_mode = SlackMode::Formula;
  std::vector<double> custom_slack;
  BudgetMode budget_mode = BudgetMode::EndOfHorizon;
  AllocationRule rule;

  int agents() const { return shares.agents(); }
  void validate() const;
};

// Base configuration: budgets equal to the fair shares.
MechanismConfig make_config(const FairShares& shares, std::vector<ValueDistribution> dists,
                            long horizon, AllocationRule rule);

struct RoundOutcome {
  long t = 0;
  std::vector<double> values;
  std::uint32_t bids_submitted = 0;
  std::uint32_t bids_after_budget = 0;  // the bidder set the winner is drawn from
  int winner = -1;                      // -1 when nobody bid
  std::vector<long> tokens_remaining;
};

struct SimulationTrace {
  std::vector<RoundOutcome> outcomes;
  std::vector<double> cumulative_utility;
  std::vector<long> cumulative_wins;
  // First round where enforcement suppressed a submitted bid, or (end of
  // horizon mode) where the token pool reached zero.
  std::vector<std::optional<long>> budget_exhaustion_round;

  int agents() const { return static_cast<int>(cumulative_utility.size()); }
  long rounds() const { return static_cast<long>(outcomes.size()); }
};

// sqrt(6 ln t / (beta t)); vanishes as t grows.
double default_slack(double beta, double t);

// Runs the round loop: strategies bid, budgets gate, a winner is drawn from
// the rule's distribution for the realized bidder set, and every surviving
// bid pays one token (all-pay) whether or not it won.
SimulationTrace run(const MechanismConfig& config, StrategyProfile& profile,
                    std::uint64_t seed);

struct AgentReport {
  double avg_utility = 0.0;
  std::optional<double> ideal_fraction;  // avg / v*(alpha_i); absent when v* = 0
  std::optional<long> exhausted_at;
};

std::vector<AgentReport> utility_report(const SimulationTrace& trace,
                                        std::span<const ValueDistribution> dists,
                                        const FairShares& shares);

// CSV emission: per-round trace and per-agent summary.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
void write_summary_csv(std::ostream& out, std::span<const AgentReport> reports);

}  // namespace brb
