#include "brb/robustcert.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace brb {
namespace {

constexpr double kPassTol = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

double modified_border_lhs(const FairShares& shares, SubsetId agent_set) {
  const int n = shares.agents();
  require(agent_set <= full_subset(n), "subset mask out of range");

  double all_miss = 1.0;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    all_miss *= 1.0 - shares.share(k);
    total += shares.share(k);
  }

  double in_sum = 0.0;
  double in_miss = 1.0;
  double in_ratio = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!subset_contains(agent_set, i)) continue;
    const double a = shares.share(i);
    in_sum += a;
    in_miss *= 1.0 - a;
    in_ratio += a / (1.0 - a);
  }
  const double out_sum = total - in_sum;
  double lhs = (1.0 - all_miss) * in_sum + in_miss;
  if (out_sum > 0.0 && in_ratio > 0.0)
    lhs += 0.5 * all_miss * in_ratio * out_sum;
  return lhs;
}

std::vector<CertificateReport> key_inequality_sweep(const FairShares& shares) {
  const int n = shares.agents();
  const SubsetId full = full_subset(n);
  const std::size_t count = static_cast<std::size_t>(full) + 1;

  double all_miss = 1.0;
  for (int k = 0; k < n; ++k) all_miss *= 1.0 - shares.share(k);

  // Subset sums built incrementally over the lowest set bit.
  std::vector<double> in_sum(count, 0.0), in_miss(count, 1.0), in_ratio(count, 0.0);
  for (SubsetId s = 1; s <= full; ++s) {
    const int low = std::countr_zero(s);
    const SubsetId rest = s & (s - 1);
    const double a = shares.share(low);
    in_sum[s] = in_sum[rest] + a;
    in_miss[s] = in_miss[rest] * (1.0 - a);
    in_ratio[s] = in_ratio[rest] + a / (1.0 - a);
  }
  const double total = in_sum[full];

  std::vector<CertificateReport> reports(count);
  for (SubsetId s = 0; s <= full; ++s) {
    const double out_sum = total - in_sum[s];
    double lhs = (1.0 - all_miss) * in_sum[s] + in_miss[s];
    if (out_sum > 0.0 && in_ratio[s] > 0.0)
      lhs += 0.5 * all_miss * in_ratio[s] * out_sum;
    reports[s] = {s, lhs, 1.0 - lhs, lhs <= 1.0 + kPassTol};
  }
  return reports;
}

double envelope_g(double x, int m) {
  require(x >= 0.0 && x <= 1.0, "x must lie in [0,1]");
  require(m >= 1, "m must be positive");
  // m = 1 simplifies to (2 - x^2)/2 after the (1 - x) factor cancels; the
  // general expression would hit 0/0 at x = 1.
  if (m == 1) return (2.0 - x * x) / 2.0;
  const double md = static_cast<double>(m);
  const double base = std::pow(1.0 - x / md, md);
  const double numerator = md * x * x + 2.0 * md * x + 2.0 * md - 2.0 * x * x - 2.0 * x;
  return base * numerator / (2.0 * (md - x));
}

double envelope_f(double x, int m) {
  return 1.0 - (1.0 - x) * (1.0 - envelope_g(x, m));
}

double robust_lower_bound(double alpha_i, double p_bar) {
  require(alpha_i >= 0.0 && alpha_i <= 1.0, "alpha must lie in [0,1]");
  require(p_bar >= 0.5 && p_bar <= 1.0, "the tie cap must lie in [1/2, 1]");
  return 1.0 - p_bar * (1.0 - alpha_i);
}

double anticorrelated_upper_bound(const AllocationRule& rule, const FairShares& shares,
                                  int agent) {
  const int n = shares.agents();
  require(rule.agents() == n, "rule dimension mismatch");
  require(agent >= 0 && agent < n, "agent out of range");
  double bound = shares.share(agent);
  for (int j = 0; j < n; ++j) {
    if (j == agent) continue;
    const SubsetId pair = (SubsetId{1} << agent) | (SubsetId{1} << j);
    bound += shares.share(j) * rule.prob(pair, agent);
  }
  return bound;
}

double hardness_bound(const FairShares& shares) {
  double sq = 0.0;
  for (double a : shares.all()) sq += a * a;
  return 0.5 + 0.5 * sq;
}

CentralizedBound centralized_upper_bound(const FairShares& shares) {
  double miss = 1.0;
  for (double a : shares.all()) miss *= 1.0 - a;
  return {1.0 - miss, 1.0 - 1.0 / std::exp(1.0)};
}

void write_sweep_csv(std::ostream& out, std::span<const CertificateReport> reports) {
  out << "mask,lhs,margin\n";
  char line[96];
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%u,%.12g,%.12g\n", r.subset, r.lhs, r.margin);
    out << line;
  }
}

void write_envelope_csv(std::ostream& out, int grid_points, int m_max) {
  require(grid_points >= 2 && m_max >= 1, "bad envelope grid");
  out << "X,m,f\n";
  char line[96];
  for (int m = 1; m <= m_max; ++m) {
    for (int k = 0; k < grid_points; ++k) {
      const double x = static_cast<double>(k) / (grid_points - 1);
      std::snprintf(line, sizeof(line), "%.12g,%d,%.12g\n", x, m, envelope_f(x, m));
      out << line;
    }
  }
}

}  // namespace brb
