#include "brb/border.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace brb {
namespace {

constexpr double kEqualityTol = 1e-9;
constexpr double kSaturationTol = 1e-9;
constexpr double kMassFloor = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double no_bidder_probability(const BidRates& rates) {
  double p = 1.0;
  for (double b : rates.all()) p *= 1.0 - b;
  return p;
}

double equality_gap(const BidRates& rates, const InterimTarget& target) {
  double lhs = 0.0;
  for (int i = 0; i < rates.agents(); ++i) lhs += target.p[static_cast<std::size_t>(i)] * rates.rate(i);
  return std::abs(lhs - (1.0 - no_bidder_probability(rates)));
}

void check_dimensions(const BidRates& rates, const InterimTarget& target) {
  require(target.agents() == rates.agents(), "target dimension mismatch");
  for (double p : target.p)
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "interim probabilities must lie in [0,1]");
}

// Agents are interchangeable for canonicalization when they have identical
// rates and targets and the bound map is invariant under swapping them.
std::vector<int> agent_classes(const BidRates& rates, const InterimTarget& target,
                               const CapacityBounds& bounds) {
  const int n = rates.agents();
  std::vector<int> cls(static_cast<std::size_t>(n));
  std::iota(cls.begin(), cls.end(), 0);

  auto swap_agents = [](SubsetId s, int a, int b) {
    const bool ha = subset_contains(s, a);
    const bool hb = subset_contains(s, b);
    if (ha == hb) return s;
    return s ^ ((SubsetId{1} << a) | (SubsetId{1} << b));
  };
  auto bounds_invariant = [&](int a, int b) {
    for (const auto& [key, cap] : bounds.entries()) {
      const SubsetId s = key.first;
      int agent = key.second;
      const SubsetId ts = swap_agents(s, a, b);
      if (agent == a)
        agent = b;
      else if (agent == b)
        agent = a;
      if (!bounds.has(ts, agent) || bounds.effective(ts, agent) != cap) return false;
    }
    return true;
  };

  for (int a = 0; a < n; ++a) {
    if (cls[static_cast<std::size_t>(a)] != a) continue;
    for (int b = a + 1; b < n; ++b) {
      if (cls[static_cast<std::size_t>(b)] != b) continue;
      if (rates.rate(a) == rates.rate(b) &&
          target.p[static_cast<std::size_t>(a)] == target.p[static_cast<std::size_t>(b)] &&
          bounds_invariant(a, b))
        cls[static_cast<std::size_t>(b)] = a;
    }
  }
  return cls;
}

// Averages the rule over relabelings of interchangeable agents. The feasible
// set is convex and invariant under those relabelings, so the average stays
// feasible, keeps the induced interim, respects the bounds, and is symmetric
// whenever the instance is.
AllocationRule symmetrize_rule(const AllocationRule& rule, const std::vector<int>& cls) {
  const int n = rule.agents();
  bool trivial = true;
  for (int i = 0; i < n; ++i)
    if (cls[static_cast<std::size_t>(i)] != i) trivial = false;
  if (trivial) return rule;

  // Orbit key of (S, i): i's class plus the count of each class inside S.
  std::map<std::vector<int>, std::pair<double, long>> orbit;
  std::vector<int> key(static_cast<std::size_t>(n) + 1);
  auto build_key = [&](SubsetId s, int agent) {
    std::fill(key.begin(), key.end(), 0);
    key[0] = cls[static_cast<std::size_t>(agent)];
    for (int j = 0; j < n; ++j)
      if (subset_contains(s, j)) ++key[static_cast<std::size_t>(cls[static_cast<std::size_t>(j)]) + 1];
  };

  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(s, i)) continue;
      build_key(s, i);
      auto& cell = orbit[key];
      cell.first += rule.prob(s, i);
      cell.second += 1;
    }
  }

  AllocationRule averaged(n);
  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(s, i)) continue;
      build_key(s, i);
      const auto& cell = orbit[key];
      averaged.set_prob(s, i, cell.first / static_cast<double>(cell.second));
    }
  }
  return averaged;
}

}  // namespace

double subset_probability(const BidRates& rates, SubsetId s) {
  require(s <= full_subset(rates.agents()), "subset mask out of range");
  double p = 1.0;
  for (int i = 0; i < rates.agents(); ++i)
    p *= subset_contains(s, i) ? rates.rate(i) : 1.0 - rates.rate(i);
  return p;
}

InterimTarget induced_interim(const AllocationRule& rule, const BidRates& rates) {
  require(rule.agents() == rates.agents(), "rule dimension mismatch");
  const int n = rates.agents();
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    const double w = subset_probability(rates, s);
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i)
      if (subset_contains(s, i)) acc[static_cast<std::size_t>(i)] += rule.prob(s, i) * w;
  }
  InterimTarget target;
  target.p.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    target.p[static_cast<std::size_t>(i)] = acc[static_cast<std::size_t>(i)] / rates.rate(i);
  return target;
}

double induced_interim_general(const AllocationRule& rule,
                               std::span<const double> opponent_mass, int agent) {
  const int n = rule.agents();
  require(agent >= 0 && agent < n, "agent out of range");
  require(opponent_mass.size() == (static_cast<std::size_t>(1) << n),
          "opponent distribution must cover all masks");
  double total = 0.0;
  double win = 0.0;
  for (SubsetId s = 0; s <= full_subset(n); ++s) {
    const double m = opponent_mass[s];
    if (m == 0.0) continue;
    require(m > 0.0, "opponent distribution has negative mass");
    require(!subset_contains(s, agent), "opponent distribution puts mass on the agent");
    total += m;
    win += m * rule.prob(s | (SubsetId{1} << agent), agent);
  }
  require(std::abs(total - 1.0) <= 1e-9, "opponent distribution must be normalized");
  return win;
}

BorderCheck border_feasible(const BidRates& rates, const InterimTarget& target,
                            double tol) {
  check_dimensions(rates, target);
  const int n = rates.agents();
  BorderCheck check;
  check.equality_gap = equality_gap(rates, target);
  check.equality_ok = check.equality_gap <= tol;
  check.worst_margin = std::numeric_limits<double>::infinity();
  for (SubsetId I = 1; I <= full_subset(n); ++I) {
    double lhs = 0.0;
    double miss = 1.0;
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(I, i)) continue;
      lhs += target.p[static_cast<std::size_t>(i)] * rates.rate(i);
      miss *= 1.0 - rates.rate(i);
    }
    const double margin = (1.0 - miss) - lhs;
    if (margin < check.worst_margin) {
      check.worst_margin = margin;
      if (margin < -tol) check.witness = I;
    }
  }
  check.feasible = check.equality_ok && check.worst_margin >= -tol;
  if (check.feasible) check.witness = 0;
  return check;
}

InterimTarget worst_case_interim(const FairShares& shares) {
  double miss = 1.0;
  for (double a : shares.all()) miss *= 1.0 - a;
  InterimTarget target;
  target.p.assign(static_cast<std::size_t>(shares.agents()), 1.0 - miss);
  return target;
}

InterimTarget proportional_interim(const FairShares& shares, double gamma) {
  require(gamma > 0.0, "gamma must be positive");
  for (double a : shares.all())
    require(gamma <= 1.0 / a, "gamma must not push any rate above 1");
  double miss = 1.0;
  for (double a : shares.all()) miss *= 1.0 - gamma * a;
  InterimTarget target;
  target.p.assign(static_cast<std::size_t>(shares.agents()), (1.0 - miss) / gamma);
  return target;
}

double border_monotone_ratio(std::span<const double> weights, SubsetId subset) {
  require(subset != 0, "ratio undefined for the empty subset");
  require(subset <= full_subset(static_cast<int>(weights.size())), "subset mask out of range");
  double miss = 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!subset_contains(subset, static_cast<int>(i))) continue;
    miss *= 1.0 - weights[i];
    sum += weights[i];
  }
  return (1.0 - miss) / sum;
}

double generalized_border_margin(const BidRates& rates, const InterimTarget& target,
                                 const CapacityBounds& bounds, SubsetId agent_set) {
  check_dimensions(rates, target);
  const int n = rates.agents();
  require(agent_set <= full_subset(n), "subset mask out of range");

  double lhs = 0.0;
  double miss = 1.0;
  for (int i = 0; i < n; ++i) {
    if (!subset_contains(agent_set, i)) continue;
    lhs += target.p[static_cast<std::size_t>(i)] * rates.rate(i);
    miss *= 1.0 - rates.rate(i);
  }
  lhs += miss;

  if (agent_set != 0) {
    for (SubsetId s = 1; s <= full_subset(n); ++s) {
      if ((s & agent_set) == 0) continue;
      double capped = 0.0;
      for (int i = 0; i < n; ++i)
        if (subset_contains(s & agent_set, i)) capped += bounds.effective(s, i);
      const double slack = 1.0 - capped;
      if (slack > 0.0) lhs += subset_probability(rates, s) * slack;
    }
  }
  return 1.0 - lhs;
}

BorderNetwork build_border_network(const BidRates& rates, const InterimTarget& target,
                                   const CapacityBounds& bounds) {
  check_dimensions(rates, target);
  require(equality_gap(rates, target) <= kEqualityTol,
          "interim target violates the total-allocation equality");
  const int n = rates.agents();
  const SubsetId full = full_subset(n);

  // Node layout: 0 = source, mask m in [1, 2^n-1] = subset node m,
  // 2^n + i = agent i, 2^n + n = sink.
  const int node_count = (1 << n) + n + 1;
  BorderNetwork bn{FlowNetwork(node_count, 0, (1 << n) + n), n, 0.0, {}, {}, {}};
  bn.source_edge.assign(static_cast<std::size_t>(full) + 1, -1);
  bn.middle_edge.assign((static_cast<std::size_t>(full) + 1) * n, -1);
  bn.sink_edge.assign(static_cast<std::size_t>(n), -1);

  for (SubsetId s = 1; s <= full; ++s) {
    const double mass = subset_probability(rates, s);
    bn.source_edge[s] = bn.net.add_edge(0, bn.subset_node(s), mass);
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(s, i)) continue;
      const double cap =
          bounds.has(s, i) ? bounds.effective(s, i) * mass : kInfiniteCapacity;
      bn.middle_edge[static_cast<std::size_t>(s) * n + i] =
          bn.net.add_edge(bn.subset_node(s), bn.agent_node(i), cap);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double demand = target.p[static_cast<std::size_t>(i)] * rates.rate(i);
    bn.sink_edge[static_cast<std::size_t>(i)] =
        bn.net.add_edge(bn.agent_node(i), bn.net.sink(), demand);
  }
  bn.required_flow = 1.0 - no_bidder_probability(rates);
  return bn;
}

SolveResult solve_allocation(const BidRates& rates, const InterimTarget& target,
                             const CapacityBounds& bounds) {
  check_dimensions(rates, target);
  const int n = rates.agents();

  SolveResult result{SolveResult::Status::Infeasible, AllocationRule(n), 0.0, 0.0, 0, {}};
  if (equality_gap(rates, target) > kEqualityTol) {
    result.status = SolveResult::Status::EqualityViolated;
    result.witness_agents = full_subset(n);
    return result;
  }

  BorderNetwork bn = build_border_network(rates, target, bounds);
  result.flow_value = max_flow(bn.net);
  result.required_flow = bn.required_flow;

  bool saturated = bn.required_flow - result.flow_value <= kSaturationTol;
  if (saturated) {
    for (SubsetId s = 1; s <= full_subset(n) && saturated; ++s) {
      const auto e = bn.net.edge(bn.source_edge[s]);
      if (e.cap - e.flow > kSaturationTol) saturated = false;
    }
    for (int i = 0; i < n && saturated; ++i) {
      const auto e = bn.net.edge(bn.sink_edge[static_cast<std::size_t>(i)]);
      if (e.cap - e.flow > kSaturationTol) saturated = false;
    }
  }

  if (!saturated) {
    const std::vector<bool> reach = bn.net.residual_reachable(kMassFloor);
    for (int i = 0; i < n; ++i)
      if (!reach[static_cast<std::size_t>(bn.agent_node(i))])
        result.witness_agents |= SubsetId{1} << i;
    for (SubsetId s = 1; s <= full_subset(n); ++s)
      if ((s & result.witness_agents) != 0 &&
          reach[static_cast<std::size_t>(bn.subset_node(s))])
        result.witness_family.push_back(s);
    result.status = SolveResult::Status::Infeasible;
    return result;
  }

  AllocationRule rule(n);
  std::vector<int> members;
  std::vector<double> row;
  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    const double mass = subset_probability(rates, s);
    members.clear();
    row.clear();
    for (int i = 0; i < n; ++i)
      if (subset_contains(s, i)) members.push_back(i);

    double row_sum = 0.0;
    for (int i : members) {
      const int eid = bn.middle_edge[static_cast<std::size_t>(s) * n + i];
      const double f = std::max(0.0, bn.net.flow(eid));
      row.push_back(f);
      row_sum += f;
    }

    if (mass <= kMassFloor || row_sum <= 0.5 * mass) {
      // Negligible-probability bidder set; any distribution is valid.
      for (int i : members) rule.set_prob(s, i, 1.0 / members.size());
      continue;
    }

    // Normalize the row to sum exactly 1, then repair any tolerance-scale cap
    // overshoot by shifting the excess to members with headroom.
    for (double& f : row) f /= row_sum;
    double excess = 0.0;
    double headroom = 0.0;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const double cap = bounds.effective(s, members[k]);
      if (row[k] > cap) {
        excess += row[k] - cap;
        row[k] = cap;
      } else {
        headroom += cap - row[k];
      }
    }
    if (excess > 0.0 && headroom > 0.0) {
      const double scale = std::min(1.0, excess / headroom);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const double cap = bounds.effective(s, members[k]);
        row[k] += (cap - row[k]) * scale;
      }
    }
    for (std::size_t k = 0; k < members.size(); ++k) rule.set_prob(s, members[k], row[k]);
  }

  result.rule = symmetrize_rule(rule, agent_classes(rates, target, bounds));
  result.rule.validate(1e-7);
  result.status = SolveResult::Status::Solved;
  return result;
}

AllocationRule robust_border_rule(const FairShares& shares) {
  const BidRates rates = shares.to_rates();
  const InterimTarget target = worst_case_interim(shares);
  const CapacityBounds bounds = CapacityBounds::doubleton_caps(shares);
  SolveResult result = solve_allocation(rates, target, bounds);
  if (!result.solved())
    throw std::logic_error(
        "doubleton-capped allocation reported infeasible; this target is always "
        "feasible, so the solver is defective");
  return std::move(result.rule);
}

}  // namespace brb
