#include "brb/strategies.hpp"

#include <stdexcept>

namespace brb {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

class QuantileStrategy final : public Strategy {
 public:
  QuantileStrategy(double beta, const ValueDistribution& dist, bool respect_tokens)
      : rule_(ideal_bid_rule(dist, beta)), respect_tokens_(respect_tokens) {}

  bool decide(const ObservableState& state) override {
    if (respect_tokens_ && state.own_tokens <= 0) return false;
    if (state.own_value > rule_.threshold) return true;
    if (state.own_value == rule_.threshold)
      return rule_.boundary_mass > 0.0 && stream_.bernoulli(rule_.boundary_mass);
    return false;
  }

 private:
  BidProbabilityFunction rule_;
  bool respect_tokens_;
};

class ConstantStrategy final : public Strategy {
 public:
  explicit ConstantStrategy(bool bid) : bid_(bid) {}
  bool decide(const ObservableState&) override { return bid_; }

 private:
  bool bid_;
};

class TurnTakingController final : public AdversaryController {
 public:
  TurnTakingController(int target, const FairShares& shares)
      : target_(target), shares_(shares.all().begin(), shares.all().end()) {
    require(shares.agents() >= 2, "turn taking needs at least two agents");
    require(target >= 0 && target < shares.agents(), "target out of range");
  }

  std::uint32_t decide(long, std::span<const long> tokens, const History&) override {
    const double u = stream_.uniform01();
    double acc = 0.0;
    for (int j = 0; j < static_cast<int>(shares_.size()); ++j) {
      if (j == target_) continue;
      acc += shares_[static_cast<std::size_t>(j)];
      if (u < acc) {
        if (tokens[static_cast<std::size_t>(j)] <= 0) return 0;  // exhausted, abstain
        return std::uint32_t{1} << j;
      }
    }
    return 0;  // silence, probability alpha_target
  }

 private:
  int target_;
  std::vector<double> shares_;
};

}  // namespace

StrategyProfile StrategyProfile::independent(
    std::vector<std::unique_ptr<Strategy>> strategies) {
  require(!strategies.empty() && strategies.size() <= kMaxAgents,
          "agent count must lie in [1,16]");
  for (const auto& s : strategies) require(s != nullptr, "missing strategy");
  StrategyProfile profile;
  profile.strategies_ = std::move(strategies);
  return profile;
}

StrategyProfile StrategyProfile::with_adversary(
    std::vector<std::unique_ptr<Strategy>> strategies,
    std::unique_ptr<AdversaryController> adversary, std::uint32_t coalition) {
  require(!strategies.empty() && strategies.size() <= kMaxAgents,
          "agent count must lie in [1,16]");
  require(adversary != nullptr, "missing adversary controller");
  const int n = static_cast<int>(strategies.size());
  require(coalition != 0 && coalition <= full_subset(n), "bad coalition mask");
  for (int i = 0; i < n; ++i) {
    const bool member = subset_contains(coalition, i);
    require(member == (strategies[static_cast<std::size_t>(i)] == nullptr),
            "each agent needs exactly one controller");
  }
  StrategyProfile profile;
  profile.strategies_ = std::move(strategies);
  profile.adversary_ = std::move(adversary);
  profile.coalition_ = coalition;
  return profile;
}

void StrategyProfile::bind_streams(std::uint64_t root_seed) {
  for (int i = 0; i < agents(); ++i)
    if (strategies_[static_cast<std::size_t>(i)])
      strategies_[static_cast<std::size_t>(i)]->bind(
          derive_stream(root_seed, StreamPurpose::Strategy, static_cast<std::uint64_t>(i)));
  if (adversary_) adversary_->bind(derive_stream(root_seed, StreamPurpose::Adversary));
}

std::unique_ptr<Strategy> aggressive_strategy(double beta, const ValueDistribution& dist) {
  return std::make_unique<QuantileStrategy>(beta, dist, /*respect_tokens=*/true);
}

std::unique_ptr<Strategy> threshold_deviation(double beta_prime,
                                              const ValueDistribution& dist) {
  return std::make_unique<QuantileStrategy>(beta_prime, dist, /*respect_tokens=*/false);
}

std::unique_ptr<Strategy> always_bid() { return std::make_unique<ConstantStrategy>(true); }

std::unique_ptr<Strategy> never_bid() { return std::make_unique<ConstantStrategy>(false); }

std::unique_ptr<AdversaryController> turn_taking_adversary(int target,
                                                           const FairShares& shares) {
  return std::make_unique<TurnTakingController>(target, shares);
}

}  // namespace brb
