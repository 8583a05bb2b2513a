#pragma once

#include <span>
#include <vector>

#include "brb/allocation.hpp"
#include "brb/flow.hpp"
#include "brb/shares.hpp"

namespace brb {

// Probability that the bidder set is exactly s when agent i bids
// independently with rate beta_i.
double subset_probability(const BidRates& rates, SubsetId s);

// Interim win probabilities induced by a rule under independent bidding.
InterimTarget induced_interim(const AllocationRule& rule, const BidRates& rates);

// Win probability of `agent` conditioned on bidding when the other agents'
// joint bid pattern is drawn from `opponent_mass`, a distribution over masks
// of all n agents whose mass on masks containing `agent` must be zero.
double induced_interim_general(const AllocationRule& rule,
                               std::span<const double> opponent_mass, int agent);

struct BorderCheck {
  bool feasible = false;
  bool equality_ok = false;
  double equality_gap = 0.0;  // |sum p_i beta_i - (1 - prod(1-beta_i))|
  SubsetId witness = 0;       // a subset violating the inequality, if any
  double worst_margin = 0.0;  // min over subsets of rhs - lhs
};

// Checks the total-allocation equality and the per-subset inequalities
// sum_{i in I} p_i beta_i <= 1 - prod_{i in I}(1 - beta_i).
BorderCheck border_feasible(const BidRates& rates, const InterimTarget& target,
                            double tol = 1e-9);

// The equalized interim target 1 - prod_j(1 - alpha_j), feasible for every
// share vector and minimax optimal.
InterimTarget worst_case_interim(const FairShares& shares);

// Constant target (1 - prod_j(1 - gamma*alpha_j)) / gamma for scaled rates
// beta_i = gamma*alpha_i; at least (1 - e^-gamma)/gamma in every entry.
InterimTarget proportional_interim(const FairShares& shares, double gamma);

// (1 - prod_{i in I}(1 - w_i)) / sum_{i in I} w_i. Nonincreasing under set
// inclusion, which is what makes the equalized target feasible.
double border_monotone_ratio(std::span<const double> weights, SubsetId subset);

// Margin (1 minus the left side) of the bounded-rule existence condition for
// one agent set I, evaluated at the adversarial subset family: every S
// meeting I whose capped members leave slack 1 - sum_{i in S cap I} cap > 0.
// Nonnegative margins for all I certify that a rule obeying the bounds exists.
double generalized_border_margin(const BidRates& rates, const InterimTarget& target,
                                 const CapacityBounds& bounds, SubsetId agent_set);

// Flow network deciding rule existence: source -> subset nodes (mass of each
// bidder set) -> agent nodes (capped where bounds apply) -> sink (interim
// demand p_i * beta_i).
struct BorderNetwork {
  FlowNetwork net;
  int n = 0;
  double required_flow = 0.0;
  std::vector<int> source_edge;  // by mask; -1 for mask 0
  std::vector<int> middle_edge;  // mask*n + agent -> forward edge id or -1
  std::vector<int> sink_edge;    // by agent

  int subset_node(SubsetId s) const { return static_cast<int>(s); }
  int agent_node(int i) const { return (1 << n) + i; }
};

BorderNetwork build_border_network(const BidRates& rates, const InterimTarget& target,
                                   const CapacityBounds& bounds);

struct SolveResult {
  enum class Status { Solved, Infeasible, EqualityViolated };

  Status status = Status::Infeasible;
  AllocationRule rule{1};
  double flow_value = 0.0;
  double required_flow = 0.0;
  // Min-cut certificate on failure: the agents on the sink side and the
  // subset nodes left on the source side whose members meet that agent set.
  SubsetId witness_agents = 0;
  std::vector<SubsetId> witness_family;

  bool solved() const { return status == Status::Solved; }
};

// Computes a rule inducing `target` subject to `bounds` via max flow, or a
// min-cut infeasibility certificate. Among the (generally many) valid rules
// the result is canonicalized by averaging over relabelings of
// indistinguishable agents, so symmetric inputs yield symmetric rules.
SolveResult solve_allocation(const BidRates& rates, const InterimTarget& target,
                             const CapacityBounds& bounds = CapacityBounds());

// The doubleton-capped rule for the equalized interim target. Feasible for
// every valid share vector; an infeasible outcome indicates a solver defect
// and throws.
AllocationRule robust_border_rule(const FairShares& shares);

}  // namespace brb
