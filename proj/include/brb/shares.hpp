#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

namespace brb {

// Agent subsets are bitmasks; bit k is agent k. The hard cap of 16 agents
// keeps full subset enumeration (2^n masks) affordable everywhere.
using SubsetId = std::uint32_t;

inline constexpr int kMaxAgents = 16;

inline int subset_size(SubsetId s) { return std::popcount(s); }

inline bool subset_contains(SubsetId s, int agent) {
  return (s >> agent) & 1u;
}

inline SubsetId full_subset(int n) { return (SubsetId{1} << n) - 1u; }

// Per-round bid rates beta_i in (0,1].
class BidRates {
 public:
  explicit BidRates(std::vector<double> rates);

  int agents() const { return static_cast<int>(rates_.size()); }
  double rate(int i) const { return rates_[static_cast<std::size_t>(i)]; }
  std::span<const double> all() const { return rates_; }

 private:
  std::vector<double> rates_;
};

// Fair shares alpha_i: positive and summing to 1. A share equal to 1 is only
// possible (and only allowed) for a single agent; with n >= 2 every share is
// strictly inside (0,1), which the modified Border formulas rely on.
class FairShares {
 public:
  explicit FairShares(std::vector<double> shares);

  static FairShares symmetric(int n);
  // Test hook: skips validation so sweeps can be shown to fail on bad input.
  static FairShares unchecked(std::vector<double> shares);

  int agents() const { return static_cast<int>(shares_.size()); }
  double share(int i) const { return shares_[static_cast<std::size_t>(i)]; }
  std::span<const double> all() const { return shares_; }
  BidRates to_rates() const { return BidRates(shares_); }

 private:
  FairShares() = default;
  std::vector<double> shares_;
};

}  // namespace brb
