#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "brb/allocation.hpp"
#include "brb/shares.hpp"

namespace brb {

struct CertificateReport {
  SubsetId subset = 0;
  double lhs = 0.0;
  double margin = 0.0;  // 1 - lhs
  bool pass = false;    // lhs <= 1 + 1e-12
};

// Left side of the doubleton-capped feasibility inequality for agent set I:
//   (1 - P) * sum_{i in I} a_i  +  prod_{i in I}(1 - a_i)
//     + (P/2) * sum_{i in I} a_i/(1-a_i) * sum_{j notin I} a_j
// with P = prod_k (1 - a_k). At most 1 for every valid share vector, which is
// exactly what makes the doubleton-capped rule always exist.
double modified_border_lhs(const FairShares& shares, SubsetId agent_set);

// Evaluates every subset of agents; all must pass for valid shares.
std::vector<CertificateReport> key_inequality_sweep(const FairShares& shares);

// Envelope of the sweep maximum over share vectors with |I| = m and total
// in-set share X: g is the tie-term profile, f the resulting bound. f <= 1 on
// [0,1] with f(0) = f(1) = 1, and g is nonincreasing.
double envelope_g(double x, int m);
double envelope_f(double x, int m);

// Utility floor 1 - p_bar*(1 - alpha_i) for an agent whose two-bidder ties
// are lost with probability at most p_bar >= 1/2.
double robust_lower_bound(double alpha_i, double p_bar);

// Ceiling alpha_i + sum_{j != i} alpha_j * p_i^{{i,j}} achievable against a
// coalition that bids one agent at a time.
double anticorrelated_upper_bound(const AllocationRule& rule, const FairShares& shares,
                                  int agent);

// 1/2 + (1/2) sum_i alpha_i^2: no rule protects every agent beyond this.
double hardness_bound(const FairShares& shares);

struct CentralizedBound {
  double value;          // 1 - prod_j (1 - alpha_j)
  double infimum_floor;  // 1 - 1/e, the infimum over all share vectors
};

// Ceiling on any mechanism, even one that sees realized values.
CentralizedBound centralized_upper_bound(const FairShares& shares);

// CSV emission: "mask,lhs,margin" and "X,m,f".
void write_sweep_csv(std::ostream& out, std::span<const CertificateReport> reports);
void write_envelope_csv(std::ostream& out, int grid_points, int m_max);

}  // namespace brb
