#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "brb/allocation.hpp"
#include "brb/border.hpp"
#include "brb/dmmf.hpp"
#include "brb/mechanism.hpp"
#include "brb/robustcert.hpp"
#include "brb/strategies.hpp"

namespace brb {

// The symmetric-shares rule that induces the equalized interim target yet
// leaves agent 0 exposed: uniform when agent 0 is absent, agent 0 wins any
// three-way-or-larger tie outright, but wins a two-bidder tie only with
// probability 1/n.
AllocationRule counterexample_rule(int n);

enum class RuleSource {
  RobustBorder,
  UnboundedBorder,
  Uniform,
  Counterexample,
  Table,
  DmmfDerived,
};

enum class CheckKind { TwoSided, AtLeast };

struct StrategySpec {
  std::string kind = "aggressive";  // aggressive | threshold | always | never
  double beta = -1.0;               // < 0 means the agent's own rate
};

struct AdversarySpec {
  std::string kind = "turn_taking";
  int target = 0;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<double> shares;
  std::vector<double> rates;  // empty: equal to shares
  std::vector<ValueDistribution> dists;
  long horizon = 100000;
  int seeds = 20;
  BudgetMode budget_mode = BudgetMode::EndOfHorizon;
  SlackMode slack_mode = SlackMode::Formula;

  RuleSource rule_source = RuleSource::RobustBorder;
  std::string rule_table;  // path, for RuleSource::Table
  long dmmf_rounds = 1000000;
  long dmmf_thin = 0;

  std::vector<StrategySpec> strategies;  // empty: aggressive at own rate
  std::optional<AdversarySpec> adversary;

  CheckKind check_kind = CheckKind::TwoSided;
  std::optional<double> target_value;  // overrides the derived check target
  double tolerance = 0.02;
  std::string check;  // human description for the report header

  int scan_agent = 0;
  std::vector<double> beta_grid;
  double epsilon_constant = 5.0;  // epsilon(T) = C * vbar * sqrt(ln T / T)

  int sweep_agents = 10;
  int sweep_draws = 100;
  int envelope_m_max = 10;
  int envelope_points = 1001;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load_file(const std::string& path);

  FairShares fair_shares() const;
  BidRates bid_rates() const;
};

// Instantiates the configured allocation rule.
AllocationRule make_rule(const ExperimentConfig& config, std::uint64_t seed);

// Fresh strategy profile per run (each run re-derives its own substreams).
StrategyProfile make_profile(const ExperimentConfig& config);

struct AgentEstimate {
  double lambda_hat = 0.0;  // mean ideal-utility fraction across seeds
  double std_error = 0.0;
  long exhausted_seeds = 0;
  bool checked = false;  // participates in the pass criterion
};

struct SimReport {
  std::string experiment;
  std::string check;
  std::vector<AgentEstimate> agents;
  std::vector<std::vector<double>> per_seed_lambda;  // [seed][agent]
  double target = 0.0;
  double tolerance = 0.0;
  CheckKind check_kind = CheckKind::TwoSided;
  bool pass = false;

  void write_summary(std::ostream& out) const;
};

// Monte-Carlo estimate of per-agent ideal-utility fractions across seeds;
// seeds fan out over worker threads and aggregate in seed order.
SimReport run_simulation_experiment(const ExperimentConfig& config, std::uint64_t root_seed);

struct BestResponseRow {
  double beta_prime = 0.0;
  double lambda_hat = 0.0;
  double std_error = 0.0;
};

struct BestResponseReport {
  double baseline = 0.0;
  double baseline_se = 0.0;
  double epsilon = 0.0;  // deviation allowance in ideal-fraction units
  std::vector<BestResponseRow> rows;
  double best_gap = 0.0;  // max over rows of lambda - baseline
  bool pass = false;

  void write_summary(std::ostream& out) const;
};

BestResponseReport best_response_scan(const ExperimentConfig& config, std::uint64_t root_seed);

struct SweepReport {
  int draws = 0;
  double worst_lhs = 0.0;
  SubsetId worst_subset = 0;
  bool pass = false;
};

// Random share vectors, full subset sweep each; everything must pass.
SweepReport key_inequality_experiment(const ExperimentConfig& config, std::uint64_t seed);

struct EnvelopeReport {
  double max_f = 0.0;
  double max_g_slope = 0.0;  // max forward-difference slope of g
  bool pass = false;
};

EnvelopeReport envelope_experiment(int m_max, int grid_points, std::ostream* csv);

struct DmmfReport {
  std::vector<double> win_fraction;
  std::vector<double> expected;  // alpha_i * (1 - prod(1-beta_j))
  double max_gap = 0.0;
  bool stability_ok = false;
  double interim_gap = -1.0;  // round-trip error of the derived rule; -1 if skipped
  bool has_rule = false;
  AllocationRule rule{1};  // the derived rule, when has_rule
  bool pass = false;
};

DmmfReport dmmf_experiment(const ExperimentConfig& config, std::uint64_t seed,
                           bool derive_rule, std::ostream* trace_csv);

// Dirichlet(1,...,1) share vector.
std::vector<double> random_shares(int n, RngStream& stream);

}  // namespace brb
