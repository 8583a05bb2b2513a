#include "brb/allocation.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

AllocationRule::AllocationRule(int n) : n_(n) {
  require(n >= 1 && n <= kMaxAgents, "agent count must lie in [1,16]");
  probs_.assign((static_cast<std::size_t>(1) << n) * n, 0.0);
}

AllocationRule AllocationRule::uniform(int n) {
  AllocationRule rule(n);
  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    const double p = 1.0 / subset_size(s);
    for (int i = 0; i < n; ++i)
      if (subset_contains(s, i)) rule.set_prob(s, i, p);
  }
  return rule;
}

void AllocationRule::set_prob(SubsetId s, int agent, double p) {
  require(s <= full_subset(n_) && agent >= 0 && agent < n_, "subset/agent out of range");
  require(subset_contains(s, agent), "probability assigned to a non-bidding agent");
  probs_[static_cast<std::size_t>(s) * n_ + agent] = p;
}

void AllocationRule::validate(double tol) const {
  for (SubsetId s = 1; s <= full_subset(n_); ++s) {
    double sum = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double p = prob(s, i);
      if (!subset_contains(s, i)) {
        if (p != 0.0) throw std::logic_error("nonzero probability off the subset");
        continue;
      }
      if (!(p >= -tol)) throw std::logic_error("negative allocation probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
      throw std::logic_error("allocation probabilities do not sum to 1");
  }
}

std::string AllocationRule::to_table() const {
  std::string out = "mask,agent,prob\n";
  char line[64];
  for (SubsetId s = 1; s <= full_subset(n_); ++s) {
    for (int i = 0; i < n_; ++i) {
      if (!subset_contains(s, i)) continue;
      std::snprintf(line, sizeof(line), "%u,%d,%.12g\n", s, i, prob(s, i));
      out += line;
    }
  }
  return out;
}

AllocationRule AllocationRule::from_table(std::istream& in) {
  std::vector<std::tuple<SubsetId, int, double>> rows;
  SubsetId max_mask = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.rfind("mask", 0) == 0) continue;
    unsigned mask = 0;
    int agent = 0;
    double p = 0.0;
    if (std::sscanf(line.c_str(), "%u,%d,%lf", &mask, &agent, &p) != 3)
      throw std::invalid_argument("malformed rule table line: " + line);
    rows.emplace_back(mask, agent, p);
    max_mask = std::max(max_mask, static_cast<SubsetId>(mask));
  }
  require(!rows.empty(), "empty rule table");
  int n = 1;
  while (full_subset(n) < max_mask) ++n;
  AllocationRule rule(n);
  for (const auto& [mask, agent, p] : rows) rule.set_prob(mask, agent, p);
  return rule;
}

void CapacityBounds::set(SubsetId s, int agent, double cap) {
  require(cap >= 0.0 && cap <= 1.0, "capacity bound must lie in [0,1]");
  require(subset_contains(s, agent), "capacity bound off the subset");
  caps_[{s, agent}] = cap;
}

bool CapacityBounds::has(SubsetId s, int agent) const {
  return caps_.count({s, agent}) > 0;
}

double CapacityBounds::effective(SubsetId s, int agent) const {
  auto it = caps_.find({s, agent});
  return it == caps_.end() ? 1.0 : it->second;
}

CapacityBounds CapacityBounds::doubleton_caps(const FairShares& shares) {
  CapacityBounds bounds;
  const int n = shares.agents();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const SubsetId pair = (SubsetId{1} << i) | (SubsetId{1} << j);
      bounds.set(pair, j, (1.0 + shares.share(i)) / 2.0);
      bounds.set(pair, i, (1.0 + shares.share(j)) / 2.0);
    }
  }
  return bounds;
}

}  // namespace brb
