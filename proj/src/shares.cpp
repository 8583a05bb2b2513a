#include "brb/shares.hpp"

#include <cmath>
#include <stdexcept>

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

BidRates::BidRates(std::vector<double> rates) : rates_(std::move(rates)) {
  require(!rates_.empty() && rates_.size() <= kMaxAgents,
          "agent count must lie in [1,16]");
  for (double r : rates_)
    require(std::isfinite(r) && r > 0.0 && r <= 1.0, "bid rates must lie in (0,1]");
}

FairShares::FairShares(std::vector<double> shares) : shares_(std::move(shares)) {
  require(!shares_.empty() && shares_.size() <= kMaxAgents,
          "agent count must lie in [1,16]");
  double sum = 0.0;
  for (double a : shares_) {
    require(std::isfinite(a) && a > 0.0, "fair shares must be positive");
    require(shares_.size() == 1 ? a <= 1.0 : a < 1.0,
            "fair shares must be below 1 with two or more agents");
    sum += a;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "fair shares must sum to 1");
}

FairShares FairShares::symmetric(int n) {
  return FairShares(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
}

FairShares FairShares::unchecked(std::vector<double> shares) {
  FairShares s;
  s.shares_ = std::move(shares);
  return s;
}

}  // namespace brb
