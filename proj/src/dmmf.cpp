#include "brb/dmmf.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "brb/rng.hpp"

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

DmmfRun run_dmmf(const FairShares& shares, const BidRates& rates, long rounds,
                 std::uint64_t seed, long thin_every) {
  const int n = shares.agents();
  require(rates.agents() == n, "rates dimension mismatch");
  require(rounds >= 1, "rounds must be at least 1");

  RngStream stream = derive_stream(seed, StreamPurpose::Dmmf);
  DmmfRun run;
  run.rounds = rounds;
  run.wins.assign(static_cast<std::size_t>(n), 0);

  std::vector<int> minimizers;
  for (long t = 1; t <= rounds; ++t) {
    std::uint32_t bidders = 0;
    for (int i = 0; i < n; ++i)
      if (stream.bernoulli(rates.rate(i))) bidders |= std::uint32_t{1} << i;

    if (bidders != 0) {
      ++run.rounds_with_bidder;
      minimizers.clear();
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        if (!subset_contains(bidders, i)) continue;
        const double ratio =
            static_cast<double>(run.wins[static_cast<std::size_t>(i)]) / shares.share(i);
        if (minimizers.empty() || ratio < best) {
          best = ratio;
          minimizers.assign(1, i);
        } else if (ratio == best) {
          minimizers.push_back(i);
        }
      }
      int winner = minimizers.front();
      if (minimizers.size() > 1) {
        const std::size_t pick = static_cast<std::size_t>(
            stream.uniform01() * static_cast<double>(minimizers.size()));
        winner = minimizers[std::min(pick, minimizers.size() - 1)];
      }
      ++run.wins[static_cast<std::size_t>(winner)];
    }

    if (thin_every > 0 && (t % thin_every == 0 || t == rounds))
      run.thinned.emplace_back(t, run.wins);
  }

  run.win_fraction.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    run.win_fraction[static_cast<std::size_t>(i)] =
        static_cast<double>(run.wins[static_cast<std::size_t>(i)]) /
        static_cast<double>(rounds);
  return run;
}

std::vector<StabilityCheck> subgroup_stability(const FairShares& shares,
                                               const BidRates& rates) {
  const int n = shares.agents();
  require(rates.agents() == n, "rates dimension mismatch");
  double full_hit = 1.0;
  for (double b : rates.all()) full_hit *= 1.0 - b;
  const double rhs = 1.0 - full_hit;

  std::vector<StabilityCheck> checks;
  const SubsetId full = full_subset(n);
  for (SubsetId I = 1; I < full; ++I) {  // proper nonempty subsets only
    double miss = 1.0;
    double share_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(I, i)) continue;
      miss *= 1.0 - rates.rate(i);
      share_sum += shares.share(i);
    }
    const double lhs = (1.0 - miss) / share_sum;
    checks.push_back({I, lhs, rhs, lhs > rhs});
  }
  return checks;
}

bool all_strict(std::span<const StabilityCheck> checks) {
  for (const auto& c : checks)
    if (!c.strict) return false;
  return true;
}

std::vector<int> subset_winner_table(std::span<const double> score,
                                     std::span<const double> tiebreak) {
  const int n = static_cast<int>(score.size());
  require(tiebreak.size() == score.size(), "tiebreak dimension mismatch");
  const SubsetId full = full_subset(n);
  std::vector<int> winner(static_cast<std::size_t>(full) + 1, -1);
  auto better = [&](int a, int b) {
    if (score[static_cast<std::size_t>(a)] != score[static_cast<std::size_t>(b)])
      return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)];
    return tiebreak[static_cast<std::size_t>(a)] < tiebreak[static_cast<std::size_t>(b)];
  };
  for (SubsetId s = 1; s <= full; ++s) {
    const int low = std::countr_zero(s);
    const SubsetId rest = s & (s - 1);
    if (rest == 0) {
      winner[s] = low;
    } else {
      const int other = winner[rest];
      winner[s] = better(low, other) ? low : other;
    }
  }
  return winner;
}

DmmfDerivation derive_rule_via_dmmf(const BidRates& rates, const InterimTarget& target,
                                    long rounds, std::uint64_t seed) {
  const int n = rates.agents();
  DmmfDerivation result;
  result.rounds = rounds;
  if (target.agents() != n) {
    result.message = "target dimension mismatch";
    return result;
  }
  require(rounds >= 1, "rounds must be at least 1");

  const BorderCheck check = border_feasible(rates, target);
  if (!check.feasible) {
    result.message = check.equality_ok
                         ? "target violates a subset inequality"
                         : "target violates the total-allocation equality";
    return result;
  }

  double full_hit = 1.0;
  for (double b : rates.all()) full_hit *= 1.0 - b;
  const double covered = 1.0 - full_hit;

  std::vector<double> derived(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    derived[static_cast<std::size_t>(i)] =
        rates.rate(i) * target.p[static_cast<std::size_t>(i)] / covered;
    if (derived[static_cast<std::size_t>(i)] <= 0.0) {
      result.message = "target must give every agent positive interim probability";
      return result;
    }
    sum += derived[static_cast<std::size_t>(i)];
  }
  for (double& a : derived) a /= sum;  // exact unit sum for the shares invariant
  const FairShares shares(derived);

  const auto stability = subgroup_stability(shares, rates);
  if (!all_strict(stability)) {
    result.message = "subgroup stability fails; the chain need not converge";
    return result;
  }

  RngStream stream = derive_stream(seed, StreamPurpose::Dmmf);
  std::vector<long> wins(static_cast<std::size_t>(n), 0);
  std::vector<double> score(static_cast<std::size_t>(n));
  std::vector<double> tiebreak(static_cast<std::size_t>(n));
  const SubsetId full = full_subset(n);
  std::vector<long> counts((static_cast<std::size_t>(full) + 1) * n, 0);

  for (long t = 1; t <= rounds; ++t) {
    std::uint32_t bidders = 0;
    for (int i = 0; i < n; ++i)
      if (stream.bernoulli(rates.rate(i))) bidders |= std::uint32_t{1} << i;
    for (int i = 0; i < n; ++i) {
      score[static_cast<std::size_t>(i)] =
          static_cast<double>(wins[static_cast<std::size_t>(i)]) / shares.share(i);
      tiebreak[static_cast<std::size_t>(i)] = stream.uniform01();
    }

    // One ranking resolves the hypothetical winner of every subset at once;
    // the realized winner is just the realized subset's entry.
    const std::vector<int> winner = subset_winner_table(score, tiebreak);
    for (SubsetId s = 1; s <= full; ++s)
      ++counts[static_cast<std::size_t>(s) * n + winner[s]];
    if (bidders != 0) ++wins[static_cast<std::size_t>(winner[bidders])];
  }

  AllocationRule rule(n);
  for (SubsetId s = 1; s <= full; ++s)
    for (int i = 0; i < n; ++i)
      if (subset_contains(s, i))
        rule.set_prob(s, i,
                      static_cast<double>(counts[static_cast<std::size_t>(s) * n + i]) /
                          static_cast<double>(rounds));

  result.ok = true;
  result.derived_shares = derived;
  result.rule = std::move(rule);
  return result;
}

void write_dmmf_trace_csv(std::ostream& out, const DmmfRun& run, int agents) {
  out << "t";
  for (int i = 0; i < agents; ++i) out << ",wins_" << i;
  out << "\n";
  for (const auto& [t, wins] : run.thinned) {
    out << t;
    for (long w : wins) out << ',' << w;
    out << "\n";
  }
}

}  // namespace brb
