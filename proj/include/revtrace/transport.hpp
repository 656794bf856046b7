#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace revtrace {

struct TransportPlan {
  double cost = 0;
  std::vector<std::vector<std::int64_t>> flow;  // flow[i][j], supply i to demand j
};

// Exact balanced transportation problem with integer masses, solved as a
// min-cost flow by successive shortest paths (Bellman-Ford on the residual
// graph, so negative reverse arcs are fine). Sizes here are tiny: a few dozen
// nodes per side.
inline TransportPlan min_cost_transport(const std::vector<std::int64_t>& supply,
                                        const std::vector<std::int64_t>& demand,
                                        const std::vector<std::vector<double>>& cost) {
  const std::size_t n = supply.size(), m = demand.size();
  if (std::accumulate(supply.begin(), supply.end(), std::int64_t{0}) !=
      std::accumulate(demand.begin(), demand.end(), std::int64_t{0}))
    throw std::invalid_argument("unbalanced transport problem");
  if (cost.size() != n) throw std::invalid_argument("cost matrix row count mismatch");
  for (const auto& row : cost)
    if (row.size() != m) throw std::invalid_argument("cost matrix column count mismatch");

  struct Arc {
    std::size_t to;
    std::int64_t cap;
    double cost;
    std::size_t rev;
  };
  const std::size_t source = n + m, sink = n + m + 1, nodes = n + m + 2;
  std::vector<std::vector<Arc>> g(nodes);
  auto add_arc = [&](std::size_t u, std::size_t v, std::int64_t cap, double c) {
    g[u].push_back({v, cap, c, g[v].size()});
    g[v].push_back({u, 0, -c, g[u].size() - 1});
  };
  for (std::size_t i = 0; i < n; ++i) add_arc(source, i, supply[i], 0.0);
  for (std::size_t j = 0; j < m; ++j) add_arc(n + j, sink, demand[j], 0.0);
  // Remember where each i->j arc lives to read the plan back.
  std::vector<std::vector<std::size_t>> arc_at(n, std::vector<std::size_t>(m));
  const std::int64_t unbounded = std::numeric_limits<std::int64_t>::max() / 4;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      arc_at[i][j] = g[i].size();
      add_arc(i, n + j, unbounded, cost[i][j]);
    }

  const double inf = std::numeric_limits<double>::infinity();
  TransportPlan plan;
  std::vector<double> dist(nodes);
  std::vector<std::size_t> prev_node(nodes), prev_arc(nodes);
  for (;;) {
    std::fill(dist.begin(), dist.end(), inf);
    dist[source] = 0;
    for (std::size_t round = 0; round + 1 < nodes; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (dist[u] == inf) continue;
        for (std::size_t k = 0; k < g[u].size(); ++k) {
          const Arc& a = g[u][k];
          if (a.cap > 0 && dist[u] + a.cost < dist[a.to] - 1e-15) {
            dist[a.to] = dist[u] + a.cost;
            prev_node[a.to] = u;
            prev_arc[a.to] = k;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[sink] == inf) break;

    std::int64_t push = unbounded;
    for (std::size_t v = sink; v != source; v = prev_node[v])
      push = std::min(push, g[prev_node[v]][prev_arc[v]].cap);
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      Arc& a = g[prev_node[v]][prev_arc[v]];
      a.cap -= push;
      g[v][a.rev].cap += push;
    }
  }

  plan.flow.assign(n, std::vector<std::int64_t>(m, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const Arc& a = g[i][arc_at[i][j]];
      const std::int64_t f = g[a.to][a.rev].cap;
      plan.flow[i][j] = f;
      plan.cost += static_cast<double>(f) * cost[i][j];
    }
  return plan;
}

}  // namespace revtrace
