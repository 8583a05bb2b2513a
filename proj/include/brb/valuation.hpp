#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brb/rng.hpp"

namespace brb {

// Bid-probability function over values: 1 strictly above `threshold`,
// `boundary_mass` exactly at it, 0 below. For the distributions supported
// here this shape is the exact maximizer of E[V rho(V)] subject to
// E[rho(V)] <= beta.
struct BidProbabilityFunction {
  double threshold = 0.0;
  double boundary_mass = 0.0;

  double operator()(double value) const {
    if (value > threshold) return 1.0;
    if (value == threshold) return boundary_mass;
    return 0.0;
  }
};

// Value distribution with bounded nonnegative support. Continuous support is
// limited to Uniform[0,1]; other laws are finite atom lists, which keeps the
// top-quantile utility exactly computable. Atoms are sorted and duplicates
// merged at construction so the threshold atom of a bid rule is unique.
class ValueDistribution {
 public:
  enum class Kind { Bernoulli, Uniform01, DiscreteBounded };

  static ValueDistribution bernoulli(double q);
  static ValueDistribution uniform01();
  // upper_bound defaults to the largest atom; an explicit value may only be
  // larger (simulation tolerances need a known bound on the support).
  static ValueDistribution discrete(std::vector<double> values,
                                    std::vector<double> probs,
                                    std::optional<double> upper_bound = std::nullopt);

  Kind kind() const { return kind_; }
  double upper_bound() const { return upper_bound_; }
  double bernoulli_q() const;
  std::span<const double> atom_values() const { return values_; }
  std::span<const double> atom_probs() const { return probs_; }

  double mean() const;
  double sample(RngStream& stream) const;

  // E[rho(V)] and E[V rho(V)] for a threshold rule, computed analytically.
  double bid_mass(const BidProbabilityFunction& rho) const;
  double bid_value(const BidProbabilityFunction& rho) const;

 private:
  ValueDistribution(Kind kind, double upper) : kind_(kind), upper_bound_(upper) {}

  Kind kind_;
  double upper_bound_;
  double q_ = 0.0;              // Bernoulli parameter
  std::vector<double> values_;  // atoms, ascending (empty for Uniform01)
  std::vector<double> probs_;
};

// Best per-round expected value when claiming the item on at most a beta
// fraction of rounds: v*(beta), the top-quantile benchmark.
double ideal_utility(const ValueDistribution& dist, double beta);

// Threshold rule achieving ideal_utility(dist, beta) with
// E[rho(V)] == min(beta, 1).
BidProbabilityFunction ideal_bid_rule(const ValueDistribution& dist, double beta);

}  // namespace brb
