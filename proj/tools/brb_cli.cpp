// Command-line front end: named experiments, feasibility checks, rule
// solving, and CSV emission. Exit codes: 0 = all checks passed, 1 = a check
// failed (including infeasible verdicts), 2 = configuration error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "brb/border.hpp"
#include "brb/dmmf.hpp"
#include "brb/experiments.hpp"
#include "brb/mechanism.hpp"
#include "brb/robustcert.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config_path, "experiment config (JSON)");
  if (config_required) opt->required();
  cmd->add_option("--seed", args.seed, "root seed");
  cmd->add_option("--out", args.out_dir, "output directory for CSV files");
}

std::ofstream open_out(const CommonArgs& args, const std::string& name) {
  fs::create_directories(args.out_dir);
  const fs::path path = fs::path(args.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path.string());
  return out;
}

brb::ExperimentConfig load(const CommonArgs& args) {
  return brb::ExperimentConfig::load_file(args.config_path);
}

int cmd_solve(const CommonArgs& args) {
  const auto cfg = load(args);
  const brb::AllocationRule rule = brb::make_rule(cfg, args.seed);
  auto out = open_out(args, "rule.csv");
  out << rule.to_table();

  const brb::BidRates rates = cfg.bid_rates();
  const brb::InterimTarget interim = brb::induced_interim(rule, rates);
  std::printf("rule written to %s/rule.csv\n", args.out_dir.c_str());
  for (int i = 0; i < rule.agents(); ++i)
    std::printf("agent %d interim %.12g\n", i, interim.p[static_cast<std::size_t>(i)]);
  return 0;
}

int cmd_verify_border(const CommonArgs& args) {
  const auto cfg = load(args);
  const brb::FairShares shares = cfg.fair_shares();
  const brb::BidRates rates = cfg.bid_rates();
  brb::InterimTarget target = brb::worst_case_interim(shares);
  if (cfg.target_value)
    target.p.assign(static_cast<std::size_t>(shares.agents()), *cfg.target_value);

  const brb::BorderCheck check = brb::border_feasible(rates, target);
  std::printf("equality_gap %.3g  worst_margin %.12g\n", check.equality_gap,
              check.worst_margin);
  if (check.feasible) {
    std::printf("feasible\n");
    return 0;
  }
  if (!check.equality_ok)
    std::printf("violated: total-allocation equality\n");
  else
    std::printf("violated: subset mask %u\n", check.witness);
  return 1;
}

int cmd_keylemma(const CommonArgs& args) {
  const auto cfg = load(args);
  const brb::SweepReport report = brb::key_inequality_experiment(cfg, args.seed);
  std::printf("# check: all subset inequalities hold (lhs <= 1 + 1e-12), %d draws, n=%d\n",
              report.draws, cfg.sweep_agents);
  std::printf("worst_lhs %.15g at mask %u\n", report.worst_lhs, report.worst_subset);

  if (!cfg.shares.empty()) {
    const auto sweep = brb::key_inequality_sweep(cfg.fair_shares());
    auto out = open_out(args, "keylemma.csv");
    brb::write_sweep_csv(out, sweep);
  }
  std::printf("pass %s\n", report.pass ? "yes" : "no");
  return report.pass ? 0 : 1;
}

int cmd_envelope(const CommonArgs& args) {
  int m_max = 10;
  int points = 1001;
  if (!args.config_path.empty()) {
    const auto cfg = load(args);
    m_max = cfg.envelope_m_max;
    points = cfg.envelope_points;
  }
  auto out = open_out(args, "envelope.csv");
  const brb::EnvelopeReport report = brb::envelope_experiment(m_max, points, &out);
  std::printf("# check: f <= 1 + 1e-12 and forward-difference slope of g <= 1e-6\n");
  std::printf("max_f %.15g  max_g_slope %.3g  pass %s\n", report.max_f, report.max_g_slope,
              report.pass ? "yes" : "no");
  return report.pass ? 0 : 1;
}

int run_sim_command(const CommonArgs& args, bool want_trace) {
  const auto cfg = load(args);
  const brb::SimReport report = brb::run_simulation_experiment(cfg, args.seed);
  report.write_summary(std::cout);
  {
    auto out = open_out(args, "report.csv");
    report.write_summary(out);
  }

  // Single-seed trace and summary for inspection.
  if (want_trace) {
    brb::MechanismConfig mech(cfg.fair_shares(), cfg.bid_rates(), cfg.dists, cfg.horizon,
                              brb::make_rule(cfg, args.seed));
    mech.budget_mode = cfg.budget_mode;
    mech.slack_mode = cfg.slack_mode;
    brb::StrategyProfile profile = brb::make_profile(cfg);
    const brb::SimulationTrace trace = brb::run(mech, profile, args.seed);
    auto trace_out = open_out(args, "trace.csv");
    brb::write_trace_csv(trace_out, trace);
    const auto agent_reports = brb::utility_report(trace, cfg.dists, cfg.fair_shares());
    auto summary_out = open_out(args, "summary.csv");
    brb::write_summary_csv(summary_out, agent_reports);
  }
  return report.pass ? 0 : 1;
}

int cmd_bestresponse(const CommonArgs& args) {
  auto cfg = load(args);
  if (cfg.beta_grid.empty())
    for (int k = 1; k <= 9; ++k) cfg.beta_grid.push_back(0.1 * k);
  const brb::BestResponseReport report = brb::best_response_scan(cfg, args.seed);
  report.write_summary(std::cout);
  auto out = open_out(args, "bestresponse.csv");
  report.write_summary(out);
  return report.pass ? 0 : 1;
}

int cmd_dmmf(const CommonArgs& args) {
  const auto cfg = load(args);
  auto trace_out = open_out(args, "dmmf_trace.csv");
  const brb::DmmfReport report =
      brb::dmmf_experiment(cfg, args.seed, /*derive_rule=*/true, &trace_out);
  std::printf("# check: win fractions within %.3g of share*(1-miss); derived rule interim within 0.02\n",
              cfg.tolerance);
  for (std::size_t i = 0; i < report.win_fraction.size(); ++i)
    std::printf("agent %zu win_fraction %.6f expected %.6f\n", i, report.win_fraction[i],
                report.expected[i]);
  std::printf("stability %s  max_gap %.6f  interim_gap %.6f  pass %s\n",
              report.stability_ok ? "strict" : "violated", report.max_gap,
              report.interim_gap, report.pass ? "yes" : "no");
  if (report.has_rule) {
    auto rule_out = open_out(args, "derived_rule.csv");
    rule_out << report.rule.to_table();
  }
  return report.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repeated non-monetary allocation: rules, certificates, simulation"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* solve = app.add_subcommand("solve", "compute an allocation rule and its interim");
  add_common(solve, args);
  auto* verify = app.add_subcommand("verify-border", "feasibility of an interim target");
  add_common(verify, args);
  auto* keylemma = app.add_subcommand("keylemma", "subset inequality sweep");
  add_common(keylemma, args);
  auto* envelope = app.add_subcommand("envelope", "envelope grid check and CSV");
  add_common(envelope, args, /*config_required=*/false);
  auto* simulate = app.add_subcommand("simulate", "equilibrium simulation");
  add_common(simulate, args);
  auto* robustness = app.add_subcommand("robustness", "simulation against an adversary");
  add_common(robustness, args);
  auto* bestresponse = app.add_subcommand("bestresponse", "deviation scan");
  add_common(bestresponse, args);
  auto* dmmf = app.add_subcommand("dmmf", "dynamic max-min fairness runs");
  add_common(dmmf, args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(args);
    if (verify->parsed()) return cmd_verify_border(args);
    if (keylemma->parsed()) return cmd_keylemma(args);
    if (envelope->parsed()) return cmd_envelope(args);
    if (simulate->parsed()) return run_sim_command(args, /*want_trace=*/true);
    if (robustness->parsed()) return run_sim_command(args, /*want_trace=*/true);
    if (bestresponse->parsed()) return cmd_bestresponse(args);
    if (dmmf->parsed()) return cmd_dmmf(args);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
