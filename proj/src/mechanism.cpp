#include "brb/mechanism.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void MechanismConfig::validate() const {
  require(horizon >= 1, "horizon must be at least 1");
  const int n = shares.agents();
  require(budgets.agents() == n, "budget dimension mismatch");
  require(static_cast<int>(dists.size()) == n, "distribution count mismatch");
  require(rule.agents() == n, "rule dimension mismatch");
  if (slack_mode == SlackMode::Custom) {
    require(static_cast<int>(custom_slack.size()) == n, "custom slack dimension mismatch");
    for (double d : custom_slack) require(d >= 0.0, "slack must be nonnegative");
  }
}

MechanismConfig make_config(const FairShares& shares, std::vector<ValueDistribution> dists,
                            long horizon, AllocationRule rule) {
  return MechanismConfig(shares, shares.to_rates(), std::move(dists), horizon,
                         std::move(rule));
}

double default_slack(double beta, double t) {
  if (!(beta > 0.0)) throw std::invalid_argument("slack needs a positive rate");
  if (!(t >= 1.0)) throw std::invalid_argument("slack needs t >= 1");
  return std::sqrt(6.0 * std::log(t) / (beta * t));
}

SimulationTrace run(const MechanismConfig& config, StrategyProfile& profile,
                    std::uint64_t seed) {
  config.validate();
  const int n = config.agents();
  require(profile.agents() == n, "profile dimension mismatch");
  const long horizon = config.horizon;

  profile.bind_streams(seed);
  std::vector<RngStream> value_streams;
  value_streams.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    value_streams.push_back(
        derive_stream(seed, StreamPurpose::Values, static_cast<std::uint64_t>(i)));
  RngStream winner_stream = derive_stream(seed, StreamPurpose::Winner);

  auto slack_at = [&](int i, double t) -> double {
    switch (config.slack_mode) {
      case SlackMode::Formula:
        return default_slack(config.budgets.rate(i), t);
      case SlackMode::Custom:
        return config.custom_slack[static_cast<std::size_t>(i)];
      case SlackMode::Zero:
        return 0.0;
    }
    return 0.0;
  };

  // End-of-horizon mode endows a lifetime token pool; the other modes track
  // spending against a nominal pool of one token per round.
  std::vector<long> tokens(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (config.budget_mode == BudgetMode::EndOfHorizon) {
      const double cap = config.budgets.rate(i) *
                         (1.0 + slack_at(i, static_cast<double>(horizon))) *
                         static_cast<double>(horizon);
      tokens[static_cast<std::size_t>(i)] = static_cast<long>(std::floor(cap));
    } else {
      tokens[static_cast<std::size_t>(i)] = horizon;
    }
  }
  std::vector<long> spent(static_cast<std::size_t>(n), 0);

  SimulationTrace trace;
  trace.outcomes.reserve(static_cast<std::size_t>(horizon));
  trace.cumulative_utility.assign(static_cast<std::size_t>(n), 0.0);
  trace.cumulative_wins.assign(static_cast<std::size_t>(n), 0);
  trace.budget_exhaustion_round.assign(static_cast<std::size_t>(n), std::nullopt);

  History history;
  history.reserve(static_cast<std::size_t>(horizon));
  std::vector<double> values(static_cast<std::size_t>(n));
  std::vector<int> members;
  std::vector<double> weights;

  for (long t = 1; t <= horizon; ++t) {
    for (int i = 0; i < n; ++i)
      values[static_cast<std::size_t>(i)] =
          config.dists[static_cast<std::size_t>(i)].sample(
              value_streams[static_cast<std::size_t>(i)]);

    std::uint32_t submitted = 0;
    if (profile.adversary())
      submitted |= profile.adversary()->decide(t, tokens, history) &
                   profile.coalition_mask();
    for (int i = 0; i < n; ++i) {
      if (profile.coalition_member(i)) continue;
      const ObservableState state{t, values[static_cast<std::size_t>(i)],
                                  tokens[static_cast<std::size_t>(i)], history};
      if (profile.strategy(i)->decide(state)) submitted |= std::uint32_t{1} << i;
    }

    std::uint32_t after = submitted;
    for (int i = 0; i < n; ++i) {
      if (!subset_contains(after, i)) continue;
      bool blocked = false;
      switch (config.budget_mode) {
        case BudgetMode::EndOfHorizon:
          blocked = tokens[static_cast<std::size_t>(i)] <= 0;
          break;
        case BudgetMode::Anytime:
          blocked = static_cast<double>(spent[static_cast<std::size_t>(i)]) >=
                    config.budgets.rate(i) * (1.0 + slack_at(i, static_cast<double>(t))) *
                        static_cast<double>(t);
          break;
        case BudgetMode::ExpectationOnly:
          break;
      }
      if (blocked) {
        after &= ~(std::uint32_t{1} << i);
        auto& mark = trace.budget_exhaustion_round[static_cast<std::size_t>(i)];
        if (!mark) mark = t;
      }
    }

    int winner = -1;
    if (after != 0) {
      members.clear();
      weights.clear();
      for (int i = 0; i < n; ++i) {
        if (!subset_contains(after, i)) continue;
        members.push_back(i);
        weights.push_back(config.rule.prob(after, i));
      }
      winner = members[static_cast<std::size_t>(winner_stream.categorical(weights))];
    }

    for (int i = 0; i < n; ++i) {
      if (!subset_contains(after, i)) continue;
      --tokens[static_cast<std::size_t>(i)];
      ++spent[static_cast<std::size_t>(i)];
      if (config.budget_mode == BudgetMode::EndOfHorizon &&
          tokens[static_cast<std::size_t>(i)] == 0) {
        auto& mark = trace.budget_exhaustion_round[static_cast<std::size_t>(i)];
        if (!mark) mark = t;
      }
    }
    if (winner >= 0) {
      trace.cumulative_utility[static_cast<std::size_t>(winner)] +=
          values[static_cast<std::size_t>(winner)];
      ++trace.cumulative_wins[static_cast<std::size_t>(winner)];
    }

    trace.outcomes.push_back({t, values, submitted, after, winner, tokens});
    history.push_back({after, winner});
  }
  return trace;
}

std::vector<AgentReport> utility_report(const SimulationTrace& trace,
                                        std::span<const ValueDistribution> dists,
                                        const FairShares& shares) {
  const int n = trace.agents();
  require(static_cast<int>(dists.size()) == n && shares.agents() == n,
          "report dimension mismatch");
  require(trace.rounds() > 0, "empty trace");
  std::vector<AgentReport> reports(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& r = reports[static_cast<std::size_t>(i)];
    r.avg_utility = trace.cumulative_utility[static_cast<std::size_t>(i)] /
                    static_cast<double>(trace.rounds());
    const double ideal = ideal_utility(dists[static_cast<std::size_t>(i)], shares.share(i));
    if (ideal > 0.0) r.ideal_fraction = r.avg_utility / ideal;
    r.exhausted_at = trace.budget_exhaustion_round[static_cast<std::size_t>(i)];
  }
  return reports;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  const int n = trace.agents();
  out << "t,winner,bidder_mask";
  for (int i = 0; i < n; ++i) out << ",value_" << i;
  for (int i = 0; i < n; ++i) out << ",tokens_" << i;
  out << "\n";
  char buf[48];
  for (const auto& round : trace.outcomes) {
    out << round.t << ',' << round.winner << ',' << round.bids_after_budget;
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.12g", round.values[static_cast<std::size_t>(i)]);
      out << buf;
    }
    for (int i = 0; i < n; ++i) out << ',' << round.tokens_remaining[static_cast<std::size_t>(i)];
    out << "\n";
  }
}

void write_summary_csv(std::ostream& out, std::span<const AgentReport> reports) {
  out << "agent,avg_utility,ideal_fraction,exhausted_at\n";
  char buf[64];
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,", i, r.avg_utility);
    out << buf;
    if (r.ideal_fraction) {
      std::snprintf(buf, sizeof(buf), "%.12g", *r.ideal_fraction);
      out << buf;
    }
    out << ',';
    if (r.exhausted_at) out << *r.exhausted_at;
    out << "\n";
  }
}

}  // namespace brb
