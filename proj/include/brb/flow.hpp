#pragma once

#include <vector>

namespace brb {

// Sentinel for an uncapacitated edge. Total flow in these networks is a
// probability mass, so any value >= 1 is effectively infinite; 2 keeps a
// visible margin.
inline constexpr double kInfiniteCapacity = 2.0;

// Directed s-t flow network over double capacities with a Dinic max-flow
// solver. Edges are stored as residual half-edge pairs; the reverse of edge
// id e is id e^1, and callers only ever see the even (forward) ids.
class FlowNetwork {
 public:
  FlowNetwork(int nodes, int source, int sink);

  // Returns the forward edge id. cap must be nonnegative.
  int add_edge(int from, int to, double cap);

  int nodes() const { return static_cast<int>(adjacency_.size()); }
  int source() const { return source_; }
  int sink() const { return sink_; }
  int edge_count() const { return static_cast<int>(half_.size() / 2); }

  struct EdgeView {
    int from;
    int to;
    double cap;
    double flow;
  };
  EdgeView edge(int forward_id) const;
  double flow(int forward_id) const;
  double capacity(int forward_id) const;

  // Max over internal nodes of |inflow - outflow| under the current flow.
  double worst_imbalance() const;

  // Nodes reachable from the source through residual capacity > eps; the
  // complement side of the induced cut certifies the current flow's value.
  std::vector<bool> residual_reachable(double eps) const;

  friend double max_flow(FlowNetwork& net, double eps);

 private:
  struct HalfEdge {
    int to;
    double residual;
  };

  double dfs(int u, double limit, double eps, std::vector<int>& level,
             std::vector<std::size_t>& iter);

  int source_;
  int sink_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<HalfEdge> half_;
  std::vector<int> from_;         // tail of each half edge
  std::vector<double> orig_cap_;  // by forward id / 2
};

// Dinic's algorithm. Augments only along residual capacity > eps; on the
// small dense networks used here the result is exact far below 1e-9.
double max_flow(FlowNetwork& net, double eps = 1e-14);

}  // namespace brb
