#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "brb/shares.hpp"

namespace brb {

// Interim win probabilities, one per agent, each conditioned on that agent
// bidding.
struct InterimTarget {
  std::vector<double> p;

  int agents() const { return static_cast<int>(p.size()); }
};

// Allocation rule: for every nonempty bidder set S, a distribution over which
// member wins. Probabilities for agents outside S are identically zero.
class AllocationRule {
 public:
  explicit AllocationRule(int n);

  static AllocationRule uniform(int n);

  int agents() const { return n_; }

  double prob(SubsetId s, int agent) const {
    return probs_[static_cast<std::size_t>(s) * n_ + agent];
  }
  void set_prob(SubsetId s, int agent, double p);

  // Rows sum to 1 (within tol), entries nonnegative, zero off the subset.
  void validate(double tol = 1e-9) const;

  // Text table "mask,agent,prob" in ascending (mask, agent) order,
  // probabilities with 12 significant digits.
  std::string to_table() const;
  static AllocationRule from_table(std::istream& in);

 private:
  int n_;
  std::vector<double> probs_;  // dense, indexed mask*n + agent
};

// Sparse per-(subset, agent) upper bounds on allocation probabilities;
// unbounded by default.
class CapacityBounds {
 public:
  CapacityBounds() = default;

  void set(SubsetId s, int agent, double cap);
  bool has(SubsetId s, int agent) const;
  // Bound if present, else 1 (allocation probabilities never exceed 1).
  double effective(SubsetId s, int agent) const;
  bool empty() const { return caps_.empty(); }
  const std::map<std::pair<SubsetId, int>, double>& entries() const { return caps_; }

  // The caps that force 1/2-robust tie-breaking: for every pair {i,j}, agent
  // j may win a two-bidder tie against i with probability at most (1+alpha_i)/2.
  static CapacityBounds doubleton_caps(const FairShares& shares);

 private:
  std::map<std::pair<SubsetId, int>, double> caps_;
};

}  // namespace brb
