#include "brb/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

ValueDistribution ValueDistribution::bernoulli(double q) {
  require(q >= 0.0 && q <= 1.0, "bernoulli parameter must lie in [0,1]");
  ValueDistribution d(Kind::Bernoulli, 1.0);
  d.q_ = q;
  // Stored as atoms too, so all quantile arithmetic shares one code path.
  if (q < 1.0) {
    d.values_.push_back(0.0);
    d.probs_.push_back(1.0 - q);
  }
  if (q > 0.0) {
    d.values_.push_back(1.0);
    d.probs_.push_back(q);
  }
  return d;
}

ValueDistribution ValueDistribution::uniform01() {
  return ValueDistribution(Kind::Uniform01, 1.0);
}

ValueDistribution ValueDistribution::discrete(std::vector<double> values,
                                              std::vector<double> probs,
                                              std::optional<double> upper_bound) {
  require(!values.empty(), "discrete distribution needs at least one atom");
  require(values.size() == probs.size(), "values/probs size mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(std::isfinite(values[k]) && values[k] >= 0.0, "atom values must be nonnegative");
    require(std::isfinite(probs[k]) && probs[k] >= 0.0, "atom probabilities must be nonnegative");
    sum += probs[k];
  }
  require(std::abs(sum - 1.0) <= 1e-12, "atom probabilities must sum to 1");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  double max_value = 0.0;
  ValueDistribution d(Kind::DiscreteBounded, 0.0);
  for (std::size_t k : order) {
    if (probs[k] == 0.0) continue;
    max_value = std::max(max_value, values[k]);
    if (!d.values_.empty() && d.values_.back() == values[k]) {
      d.probs_.back() += probs[k];  // merge duplicate atoms
    } else {
      d.values_.push_back(values[k]);
      d.probs_.push_back(probs[k]);
    }
  }
  require(!d.values_.empty(), "discrete distribution has no mass");
  d.upper_bound_ = max_value;
  if (upper_bound) {
    require(*upper_bound >= max_value, "upper_bound below largest atom");
    d.upper_bound_ = *upper_bound;
  }
  return d;
}

double ValueDistribution::bernoulli_q() const {
  if (kind_ != Kind::Bernoulli) throw std::logic_error("not a Bernoulli distribution");
  return q_;
}

double ValueDistribution::mean() const {
  if (kind_ == Kind::Uniform01) return 0.5;
  double m = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) m += values_[k] * probs_[k];
  return m;
}

double ValueDistribution::sample(RngStream& stream) const {
  switch (kind_) {
    case Kind::Bernoulli:
      return stream.uniform01() < q_ ? 1.0 : 0.0;
    case Kind::Uniform01:
      return stream.uniform01();
    case Kind::DiscreteBounded:
      return values_[static_cast<std::size_t>(stream.categorical(probs_))];
  }
  return 0.0;
}

double ValueDistribution::bid_mass(const BidProbabilityFunction& rho) const {
  if (kind_ == Kind::Uniform01) {
    if (rho.threshold < 0.0) return 1.0;
    if (rho.threshold > 1.0) return 0.0;
    return 1.0 - rho.threshold;  // the atom at the threshold has measure zero
  }
  double m = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k) m += probs_[k] * rho(values_[k]);
  return m;
}

double ValueDistribution::bid_value(const BidProbabilityFunction& rho) const {
  if (kind_ == Kind::Uniform01) {
    const double lo = std::clamp(rho.threshold, 0.0, 1.0);
    return (1.0 - lo * lo) / 2.0;
  }
  double v = 0.0;
  for (std::size_t k = 0; k < values_.size(); ++k)
    v += probs_[k] * values_[k] * rho(values_[k]);
  return v;
}

double ideal_utility(const ValueDistribution& dist, double beta) {
  require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
  if (dist.kind() == ValueDistribution::Kind::Uniform01)
    return beta * (2.0 - beta) / 2.0;

  // Greedy top-quantile fill over atoms, highest value first; exact for the
  // unit-cost fractional knapsack this problem is.
  const auto values = dist.atom_values();
  const auto probs = dist.atom_probs();
  double remaining = beta;
  double total = 0.0;
  for (std::size_t k = values.size(); k-- > 0;) {
    const double take = std::min(remaining, probs[k]);
    total += take * values[k];
    remaining -= take;
    if (remaining <= 0.0) break;
  }
  return total;
}

BidProbabilityFunction ideal_bid_rule(const ValueDistribution& dist, double beta) {
  require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0,1]");
  if (dist.kind() == ValueDistribution::Kind::Uniform01)
    return BidProbabilityFunction{1.0 - beta, 0.0};

  const auto values = dist.atom_values();
  const auto probs = dist.atom_probs();
  double remaining = beta;
  for (std::size_t k = values.size(); k-- > 0;) {
    if (remaining < probs[k])
      return BidProbabilityFunction{values[k], remaining / probs[k]};
    remaining -= probs[k];
  }
  // beta covers the entire support
  return BidProbabilityFunction{values.front(), 1.0};
}

}  // namespace brb
