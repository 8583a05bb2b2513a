#include "brb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace brb {
namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

ValueDistribution dist_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "bernoulli") return ValueDistribution::bernoulli(j.at("q").get<double>());
  if (kind == "uniform01") return ValueDistribution::uniform01();
  if (kind == "discrete") {
    std::optional<double> upper;
    if (j.contains("upper_bound")) upper = j.at("upper_bound").get<double>();
    return ValueDistribution::discrete(j.at("values").get<std::vector<double>>(),
                                       j.at("probs").get<std::vector<double>>(), upper);
  }
  throw std::invalid_argument("unknown distribution kind: " + kind);
}

// Seeds fan out over a bounded worker pool; results land in seed order, so
// any reduction over them is deterministic.
template <typename T>
std::vector<T> map_seeds(int seeds, const std::function<T(int)>& body) {
  std::vector<T> results(static_cast<std::size_t>(seeds));
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const unsigned workers = std::max(
      1u, std::min(std::thread::hardware_concurrency(), static_cast<unsigned>(seeds)));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int s = next.fetch_add(1);
        if (s >= seeds) return;
        try {
          results[static_cast<std::size_t>(s)] = body(s);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace

AllocationRule counterexample_rule(int n) {
  require(n >= 3, "the counterexample needs at least three agents");
  AllocationRule rule(n);
  const double inv_n = 1.0 / n;
  for (SubsetId s = 1; s <= full_subset(n); ++s) {
    const int size = subset_size(s);
    if (!subset_contains(s, 0)) {
      for (int i = 0; i < n; ++i)
        if (subset_contains(s, i)) rule.set_prob(s, i, 1.0 / size);
    } else if (size != 2) {
      rule.set_prob(s, 0, 1.0);
      // all other members implicitly 0
    } else {
      for (int i = 1; i < n; ++i)
        if (subset_contains(s, i)) rule.set_prob(s, i, 1.0 - inv_n);
      rule.set_prob(s, 0, inv_n);
    }
  }
  return rule;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.experiment = j.value("experiment", std::string("unnamed"));

  const auto& shares = j.at("shares");
  if (shares.is_object() && shares.contains("symmetric")) {
    const int n = shares.at("symmetric").get<int>();
    require(n >= 1 && n <= kMaxAgents, "symmetric share count out of range");
    cfg.shares.assign(static_cast<std::size_t>(n), 1.0 / n);
  } else {
    cfg.shares = shares.get<std::vector<double>>();
  }
  const int n = static_cast<int>(cfg.shares.size());

  if (j.contains("rates")) cfg.rates = j.at("rates").get<std::vector<double>>();

  if (j.contains("distributions")) {
    const auto& d = j.at("distributions");
    if (d.is_string()) {
      const std::string name = d.get<std::string>();
      if (name == "bernoulli_fair") {
        const auto rates = cfg.rates.empty() ? cfg.shares : cfg.rates;
        for (int i = 0; i < n; ++i)
          cfg.dists.push_back(ValueDistribution::bernoulli(rates[static_cast<std::size_t>(i)]));
      } else if (name == "uniform01") {
        for (int i = 0; i < n; ++i) cfg.dists.push_back(ValueDistribution::uniform01());
      } else {
        throw std::invalid_argument("unknown distribution preset: " + name);
      }
    } else if (d.is_array()) {
      for (const auto& item : d) cfg.dists.push_back(dist_from_json(item));
      require(static_cast<int>(cfg.dists.size()) == n, "distribution count mismatch");
    } else {
      for (int i = 0; i < n; ++i) cfg.dists.push_back(dist_from_json(d));
    }
  }

  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.seeds = j.value("seeds", cfg.seeds);
  require(cfg.seeds >= 1, "seed count must be positive");

  if (j.contains("budget_mode")) {
    const std::string mode = j.at("budget_mode").get<std::string>();
    if (mode == "end_of_horizon")
      cfg.budget_mode = BudgetMode::EndOfHorizon;
    else if (mode == "anytime")
      cfg.budget_mode = BudgetMode::Anytime;
    else if (mode == "expectation_only")
      cfg.budget_mode = BudgetMode::ExpectationOnly;
    else
      throw std::invalid_argument("unknown budget mode: " + mode);
  }
  if (j.contains("slack_mode")) {
    const std::string mode = j.at("slack_mode").get<std::string>();
    if (mode == "formula")
      cfg.slack_mode = SlackMode::Formula;
    else if (mode == "zero")
      cfg.slack_mode = SlackMode::Zero;
    else
      throw std::invalid_argument("unknown slack mode: " + mode);
  }

  if (j.contains("rule")) {
    const auto& r = j.at("rule");
    const std::string source = r.at("source").get<std::string>();
    if (source == "robust_border")
      cfg.rule_source = RuleSource::RobustBorder;
    else if (source == "unbounded_border")
      cfg.rule_source = RuleSource::UnboundedBorder;
    else if (source == "uniform")
      cfg.rule_source = RuleSource::Uniform;
    else if (source == "counterexample")
      cfg.rule_source = RuleSource::Counterexample;
    else if (source == "table") {
      cfg.rule_source = RuleSource::Table;
      cfg.rule_table = r.at("path").get<std::string>();
    } else if (source == "dmmf_derived") {
      cfg.rule_source = RuleSource::DmmfDerived;
      cfg.dmmf_rounds = r.value("rounds", cfg.dmmf_rounds);
    } else {
      throw std::invalid_argument("unknown rule source: " + source);
    }
  }

  if (j.contains("strategies")) {
    for (const auto& s : j.at("strategies")) {
      StrategySpec spec;
      spec.kind = s.at("kind").get<std::string>();
      spec.beta = s.value("beta", -1.0);
      cfg.strategies.push_back(spec);
    }
    require(static_cast<int>(cfg.strategies.size()) == n, "strategy count mismatch");
  }
  if (j.contains("adversary")) {
    AdversarySpec spec;
    spec.kind = j.at("adversary").value("kind", std::string("turn_taking"));
    spec.target = j.at("adversary").value("target", 0);
    cfg.adversary = spec;
  }

  if (j.contains("check_kind")) {
    const std::string kind = j.at("check_kind").get<std::string>();
    if (kind == "two_sided")
      cfg.check_kind = CheckKind::TwoSided;
    else if (kind == "at_least")
      cfg.check_kind = CheckKind::AtLeast;
    else
      throw std::invalid_argument("unknown check kind: " + kind);
  }
  if (j.contains("target_value")) cfg.target_value = j.at("target_value").get<double>();
  cfg.tolerance = j.value("tolerance", cfg.tolerance);
  cfg.check = j.value("check", std::string());

  cfg.scan_agent = j.value("scan_agent", cfg.scan_agent);
  if (j.contains("beta_grid")) cfg.beta_grid = j.at("beta_grid").get<std::vector<double>>();
  cfg.epsilon_constant = j.value("epsilon_constant", cfg.epsilon_constant);

  cfg.sweep_agents = j.value("sweep_agents", cfg.sweep_agents);
  cfg.sweep_draws = j.value("sweep_draws", cfg.sweep_draws);
  cfg.envelope_m_max = j.value("envelope_m_max", cfg.envelope_m_max);
  cfg.envelope_points = j.value("envelope_points", cfg.envelope_points);
  cfg.dmmf_rounds = j.value("dmmf_rounds", cfg.dmmf_rounds);
  cfg.dmmf_thin = j.value("dmmf_thin", cfg.dmmf_thin);
  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config parse error in " + path + ": " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config field error in " + path + ": " + e.what());
  }
}

FairShares ExperimentConfig::fair_shares() const { return FairShares(shares); }

BidRates ExperimentConfig::bid_rates() const {
  return BidRates(rates.empty() ? shares : rates);
}

AllocationRule make_rule(const ExperimentConfig& config, std::uint64_t seed) {
  const FairShares shares = config.fair_shares();
  const int n = shares.agents();
  switch (config.rule_source) {
    case RuleSource::RobustBorder:
      return robust_border_rule(shares);
    case RuleSource::UnboundedBorder: {
      SolveResult result =
          solve_allocation(config.bid_rates(), worst_case_interim(shares), {});
      require(result.solved(), "unbounded border target reported infeasible");
      return std::move(result.rule);
    }
    case RuleSource::Uniform:
      return AllocationRule::uniform(n);
    case RuleSource::Counterexample:
      return counterexample_rule(n);
    case RuleSource::Table: {
      std::ifstream in(config.rule_table);
      require(static_cast<bool>(in), "cannot open rule table: " + config.rule_table);
      AllocationRule rule = AllocationRule::from_table(in);
      require(rule.agents() == n, "rule table dimension mismatch");
      rule.validate();
      return rule;
    }
    case RuleSource::DmmfDerived: {
      const BidRates rates = config.bid_rates();
      InterimTarget target;
      double miss = 1.0;
      for (double b : rates.all()) miss *= 1.0 - b;
      target.p.resize(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        target.p[static_cast<std::size_t>(i)] =
            shares.share(i) * (1.0 - miss) / rates.rate(i);
      DmmfDerivation derivation =
          derive_rule_via_dmmf(rates, target, config.dmmf_rounds, seed);
      require(derivation.ok, "rule derivation failed: " + derivation.message);
      return std::move(derivation.rule);
    }
  }
  throw std::logic_error("unhandled rule source");
}

StrategyProfile make_profile(const ExperimentConfig& config) {
  const int n = static_cast<int>(config.shares.size());
  require(static_cast<int>(config.dists.size()) == n, "distributions not configured");
  const BidRates rates = config.bid_rates();

  std::uint32_t coalition = 0;
  if (config.adversary) {
    require(config.adversary->kind == "turn_taking",
            "unknown adversary kind: " + config.adversary->kind);
    coalition = full_subset(n) & ~(std::uint32_t{1} << config.adversary->target);
  }

  std::vector<std::unique_ptr<Strategy>> strategies(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (subset_contains(coalition, i)) continue;
    StrategySpec spec;
    if (!config.strategies.empty()) spec = config.strategies[static_cast<std::size_t>(i)];
    const double beta = spec.beta >= 0.0 ? spec.beta : rates.rate(i);
    if (spec.kind == "aggressive")
      strategies[static_cast<std::size_t>(i)] =
          aggressive_strategy(beta, config.dists[static_cast<std::size_t>(i)]);
    else if (spec.kind == "threshold")
      strategies[static_cast<std::size_t>(i)] =
          threshold_deviation(beta, config.dists[static_cast<std::size_t>(i)]);
    else if (spec.kind == "always")
      strategies[static_cast<std::size_t>(i)] = always_bid();
    else if (spec.kind == "never")
      strategies[static_cast<std::size_t>(i)] = never_bid();
    else
      throw std::invalid_argument("unknown strategy kind: " + spec.kind);
  }

  if (config.adversary)
    return StrategyProfile::with_adversary(
        std::move(strategies),
        turn_taking_adversary(config.adversary->target, config.fair_shares()), coalition);
  return StrategyProfile::independent(std::move(strategies));
}

void SimReport::write_summary(std::ostream& out) const {
  out << "# experiment: " << experiment << "\n";
  if (!check.empty()) out << "# check: " << check << "\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "# target: %.12g  tolerance: %.12g  mode: %s\n", target,
                tolerance, check_kind == CheckKind::TwoSided ? "two_sided" : "at_least");
  out << buf;
  out << "agent,lambda_hat,std_error,exhausted_seeds,checked\n";
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    std::snprintf(buf, sizeof(buf), "%zu,%.12g,%.12g,%ld,%d\n", i, a.lambda_hat,
                  a.std_error, a.exhausted_seeds, a.checked ? 1 : 0);
    out << buf;
  }
  out << "# pass: " << (pass ? "yes" : "no") << "\n";
}

SimReport run_simulation_experiment(const ExperimentConfig& config,
                                    std::uint64_t root_seed) {
  const FairShares shares = config.fair_shares();
  const int n = shares.agents();
  require(static_cast<int>(config.dists.size()) == n, "distributions not configured");

  MechanismConfig mech(shares, config.bid_rates(), config.dists, config.horizon,
                       make_rule(config, root_seed));
  mech.budget_mode = config.budget_mode;
  mech.slack_mode = config.slack_mode;
  mech.validate();

  struct SeedResult {
    std::vector<double> lambda;
    std::vector<bool> exhausted;
  };
  const auto results = map_seeds<SeedResult>(config.seeds, [&](int s) {
    StrategyProfile profile = make_profile(config);
    const std::uint64_t seed = splitmix64(root_seed + 0x9e3779b97f4a7c15ULL *
                                                          (static_cast<std::uint64_t>(s) + 1));
    const SimulationTrace trace = run(mech, profile, seed);
    const auto reports = utility_report(trace, config.dists, shares);
    SeedResult result;
    for (const auto& r : reports) {
      result.lambda.push_back(r.ideal_fraction.value_or(0.0));
      result.exhausted.push_back(r.exhausted_at.has_value());
    }
    return result;
  });

  SimReport report;
  report.experiment = config.experiment;
  report.check = config.check;
  report.tolerance = config.tolerance;
  report.check_kind = config.check_kind;
  report.agents.assign(static_cast<std::size_t>(n), {});
  for (const auto& r : results) report.per_seed_lambda.push_back(r.lambda);

  const std::uint32_t coalition =
      config.adversary ? (full_subset(n) & ~(std::uint32_t{1} << config.adversary->target))
                       : 0u;
  for (int i = 0; i < n; ++i) {
    auto& agent = report.agents[static_cast<std::size_t>(i)];
    double sum = 0.0;
    for (const auto& r : results) {
      sum += r.lambda[static_cast<std::size_t>(i)];
      if (r.exhausted[static_cast<std::size_t>(i)]) ++agent.exhausted_seeds;
    }
    agent.lambda_hat = sum / config.seeds;
    double var = 0.0;
    for (const auto& r : results) {
      const double d = r.lambda[static_cast<std::size_t>(i)] - agent.lambda_hat;
      var += d * d;
    }
    if (config.seeds > 1) var /= config.seeds - 1;
    agent.std_error = std::sqrt(var / config.seeds);
    agent.checked = config.adversary ? (i == config.adversary->target)
                                     : !subset_contains(coalition, i);
  }

  double target = 0.0;
  if (config.target_value) {
    target = *config.target_value;
  } else if (config.adversary) {
    const int i = config.adversary->target;
    target = robust_lower_bound(shares.share(i), (1.0 + shares.share(i)) / 2.0);
  } else {
    target = worst_case_interim(shares).p.front();
  }
  report.target = target;

  report.pass = true;
  for (const auto& agent : report.agents) {
    if (!agent.checked) continue;
    if (config.check_kind == CheckKind::TwoSided) {
      if (std::abs(agent.lambda_hat - target) > config.tolerance) report.pass = false;
    } else {
      if (agent.lambda_hat < target - config.tolerance) report.pass = false;
    }
  }
  return report;
}

void BestResponseReport::write_summary(std::ostream& out) const {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "# baseline: %.12g (se %.12g)  allowance: %.12g  best_gap: %.12g\n",
                baseline, baseline_se, epsilon, best_gap);
  out << buf;
  out << "beta_prime,lambda_hat,std_error,gap\n";
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", row.beta_prime,
                  row.lambda_hat, row.std_error, row.lambda_hat - baseline);
    out << buf;
  }
  out << "# pass: " << (pass ? "yes" : "no") << "\n";
}

BestResponseReport best_response_scan(const ExperimentConfig& config,
                                      std::uint64_t root_seed) {
  require(!config.beta_grid.empty(), "deviation grid is empty");
  const int agent = config.scan_agent;
  const FairShares shares = config.fair_shares();
  require(agent >= 0 && agent < shares.agents(), "scan agent out of range");
  require(!config.adversary, "best-response scan assumes independent opponents");

  auto estimate = [&](const ExperimentConfig& cfg) {
    const SimReport report = run_simulation_experiment(cfg, root_seed);
    return std::pair<double, double>(report.agents[static_cast<std::size_t>(agent)].lambda_hat,
                                     report.agents[static_cast<std::size_t>(agent)].std_error);
  };

  BestResponseReport report;
  const auto [base, base_se] = estimate(config);
  report.baseline = base;
  report.baseline_se = base_se;

  const double vbar = config.dists[static_cast<std::size_t>(agent)].upper_bound();
  const double ideal = ideal_utility(config.dists[static_cast<std::size_t>(agent)],
                                     shares.share(agent));
  require(ideal > 0.0, "scan agent has zero ideal utility");
  report.epsilon = config.epsilon_constant * vbar *
                   std::sqrt(std::log(static_cast<double>(config.horizon)) /
                             static_cast<double>(config.horizon)) /
                   ideal;

  report.pass = true;
  for (double beta_prime : config.beta_grid) {
    ExperimentConfig deviated = config;
    if (deviated.strategies.empty())
      deviated.strategies.assign(static_cast<std::size_t>(shares.agents()), StrategySpec{});
    deviated.strategies[static_cast<std::size_t>(agent)] = {"threshold", beta_prime};
    const auto [lambda, se] = estimate(deviated);
    report.rows.push_back({beta_prime, lambda, se});
    report.best_gap = std::max(report.best_gap, lambda - base);
    const double allowance =
        report.epsilon + 2.0 * std::sqrt(se * se + base_se * base_se);
    if (lambda - base > allowance) report.pass = false;
  }
  return report;
}

std::vector<double> random_shares(int n, RngStream& stream) {
  std::vector<double> shares(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& a : shares) {
    a = -std::log(1.0 - stream.uniform01());
    a = std::max(a, 1e-12);
    sum += a;
  }
  for (double& a : shares) a /= sum;
  return shares;
}

SweepReport key_inequality_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  RngStream stream = derive_stream(seed, StreamPurpose::Instance);
  SweepReport report;
  report.draws = config.sweep_draws;
  report.pass = true;
  report.worst_lhs = -1.0;
  for (int d = 0; d < config.sweep_draws; ++d) {
    const FairShares shares(random_shares(config.sweep_agents, stream));
    const auto reports = key_inequality_sweep(shares);
    for (const auto& r : reports) {
      if (r.lhs > report.worst_lhs) {
        report.worst_lhs = r.lhs;
        report.worst_subset = r.subset;
      }
      if (!r.pass) report.pass = false;
    }
  }
  return report;
}

EnvelopeReport envelope_experiment(int m_max, int grid_points, std::ostream* csv) {
  EnvelopeReport report;
  report.max_f = -1.0;
  report.max_g_slope = -1.0;
  for (int m = 1; m <= m_max; ++m) {
    double prev_g = envelope_g(0.0, m);
    for (int k = 0; k < grid_points; ++k) {
      const double x = static_cast<double>(k) / (grid_points - 1);
      report.max_f = std::max(report.max_f, envelope_f(x, m));
      if (k > 0) {
        const double g = envelope_g(x, m);
        const double h = 1.0 / (grid_points - 1);
        report.max_g_slope = std::max(report.max_g_slope, (g - prev_g) / h);
        prev_g = g;
      }
    }
  }
  if (csv) write_envelope_csv(*csv, grid_points, m_max);
  report.pass = report.max_f <= 1.0 + 1e-12 && report.max_g_slope <= 1e-6;
  return report;
}

DmmfReport dmmf_experiment(const ExperimentConfig& config, std::uint64_t seed,
                           bool derive_rule, std::ostream* trace_csv) {
  const FairShares shares = config.fair_shares();
  const BidRates rates = config.bid_rates();
  const int n = shares.agents();

  DmmfReport report;
  report.stability_ok = all_strict(subgroup_stability(shares, rates));

  const DmmfRun run = run_dmmf(shares, rates, config.dmmf_rounds, seed, config.dmmf_thin);
  report.win_fraction = run.win_fraction;
  double miss = 1.0;
  for (double b : rates.all()) miss *= 1.0 - b;
  report.expected.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    report.expected[static_cast<std::size_t>(i)] = shares.share(i) * (1.0 - miss);
    report.max_gap = std::max(report.max_gap,
                              std::abs(report.win_fraction[static_cast<std::size_t>(i)] -
                                       report.expected[static_cast<std::size_t>(i)]));
  }
  if (trace_csv) write_dmmf_trace_csv(*trace_csv, run, n);

  if (derive_rule) {
    InterimTarget target;
    target.p.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      target.p[static_cast<std::size_t>(i)] = shares.share(i) * (1.0 - miss) / rates.rate(i);
    DmmfDerivation derivation =
        derive_rule_via_dmmf(rates, target, config.dmmf_rounds, splitmix64(seed ^ 0x5851f42d4c957f2dULL));
    if (derivation.ok) {
      const InterimTarget realized = induced_interim(derivation.rule, rates);
      report.interim_gap = 0.0;
      for (int i = 0; i < n; ++i)
        report.interim_gap =
            std::max(report.interim_gap, std::abs(realized.p[static_cast<std::size_t>(i)] -
                                                  target.p[static_cast<std::size_t>(i)]));
      report.has_rule = true;
      report.rule = std::move(derivation.rule);
    }
  }

  report.pass = report.stability_ok && report.max_gap <= config.tolerance &&
                (!derive_rule || (report.interim_gap >= 0.0 && report.interim_gap <= 0.02));
  return report;
}

}  // namespace brb
