#include "brb/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace brb {

FlowNetwork::FlowNetwork(int nodes, int source, int sink)
    : source_(source), sink_(sink), adjacency_(static_cast<std::size_t>(nodes)) {
  if (nodes < 2 || source < 0 || source >= nodes || sink < 0 || sink >= nodes ||
      source == sink)
    throw std::invalid_argument("bad flow network shape");
}

int FlowNetwork::add_edge(int from, int to, double cap) {
  if (from < 0 || from >= nodes() || to < 0 || to >= nodes() || from == to)
    throw std::invalid_argument("edge endpoints out of range");
  if (!(cap >= 0.0)) throw std::invalid_argument("negative edge capacity");
  const int id = static_cast<int>(half_.size());
  adjacency_[static_cast<std::size_t>(from)].push_back(id);
  half_.push_back({to, cap});
  from_.push_back(from);
  adjacency_[static_cast<std::size_t>(to)].push_back(id + 1);
  half_.push_back({from, 0.0});
  from_.push_back(to);
  orig_cap_.push_back(cap);
  return id;
}

FlowNetwork::EdgeView FlowNetwork::edge(int forward_id) const {
  return {from_[static_cast<std::size_t>(forward_id)],
          half_[static_cast<std::size_t>(forward_id)].to, capacity(forward_id),
          flow(forward_id)};
}

double FlowNetwork::flow(int forward_id) const {
  return orig_cap_[static_cast<std::size_t>(forward_id) / 2] -
         half_[static_cast<std::size_t>(forward_id)].residual;
}

double FlowNetwork::capacity(int forward_id) const {
  return orig_cap_[static_cast<std::size_t>(forward_id) / 2];
}

double FlowNetwork::worst_imbalance() const {
  std::vector<double> balance(static_cast<std::size_t>(nodes()), 0.0);
  for (int id = 0; id < static_cast<int>(half_.size()); id += 2) {
    const double f = flow(id);
    balance[static_cast<std::size_t>(from_[static_cast<std::size_t>(id)])] -= f;
    balance[static_cast<std::size_t>(half_[static_cast<std::size_t>(id)].to)] += f;
  }
  double worst = 0.0;
  for (int v = 0; v < nodes(); ++v) {
    if (v == source_ || v == sink_) continue;
    worst = std::max(worst, std::abs(balance[static_cast<std::size_t>(v)]));
  }
  return worst;
}

std::vector<bool> FlowNetwork::residual_reachable(double eps) const {
  std::vector<bool> seen(static_cast<std::size_t>(nodes()), false);
  std::deque<int> queue{source_};
  seen[static_cast<std::size_t>(source_)] = true;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int id : adjacency_[static_cast<std::size_t>(u)]) {
      const auto& e = half_[static_cast<std::size_t>(id)];
      if (e.residual > eps && !seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = true;
        queue.push_back(e.to);
      }
    }
  }
  return seen;
}

double FlowNetwork::dfs(int u, double limit, double eps, std::vector<int>& level,
                        std::vector<std::size_t>& iter) {
  if (u == sink_) return limit;
  for (std::size_t& it = iter[static_cast<std::size_t>(u)];
       it < adjacency_[static_cast<std::size_t>(u)].size(); ++it) {
    const int id = adjacency_[static_cast<std::size_t>(u)][it];
    auto& e = half_[static_cast<std::size_t>(id)];
    if (e.residual <= eps || level[static_cast<std::size_t>(e.to)] !=
                                 level[static_cast<std::size_t>(u)] + 1)
      continue;
    const double pushed = dfs(e.to, std::min(limit, e.residual), eps, level, iter);
    if (pushed > 0.0) {
      e.residual -= pushed;
      half_[static_cast<std::size_t>(id ^ 1)].residual += pushed;
      return pushed;
    }
  }
  return 0.0;
}

double max_flow(FlowNetwork& net, double eps) {
  double total = 0.0;
  std::vector<int> level(static_cast<std::size_t>(net.nodes()));
  std::vector<std::size_t> iter(static_cast<std::size_t>(net.nodes()));
  for (;;) {
    std::fill(level.begin(), level.end(), -1);
    std::deque<int> queue{net.source_};
    level[static_cast<std::size_t>(net.source_)] = 0;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int id : net.adjacency_[static_cast<std::size_t>(u)]) {
        const auto& e = net.half_[static_cast<std::size_t>(id)];
        if (e.residual > eps && level[static_cast<std::size_t>(e.to)] < 0) {
          level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(u)] + 1;
          queue.push_back(e.to);
        }
      }
    }
    if (level[static_cast<std::size_t>(net.sink_)] < 0) break;
    std::fill(iter.begin(), iter.end(), 0);
    for (;;) {
      const double pushed =
          net.dfs(net.source_, kInfiniteCapacity, eps, level, iter);
      if (pushed <= 0.0) break;
      total += pushed;
    }
  }
  return total;
}

}  // namespace brb
