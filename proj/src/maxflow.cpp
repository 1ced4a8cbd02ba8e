// Copyright 2026 The forestsched Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "forestsched/maxflow.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <string>

#include "forestsched/error.hpp"

namespace forestsched {

namespace {

constexpr Capacity kInfinityBudget = Capacity{1} << 61;

void check_vertex(const FlowGraph& g, int v) {
  if (v < 0 || v >= g.num_vertices()) {
    throw Error(ErrorCode::VertexNotInGraph, "vertex " + std::to_string(v));
  }
}

// Dinic's blocking-flow algorithm over a residual graph in CSR layout.
// Residual arc i and i^1 are a forward/backward pair.
class Dinic {
 public:
  explicit Dinic(const FlowGraph& g) : n_(g.num_vertices()) {
    const Capacity inf = g.infinity();
    std::vector<int> degree(n_ + 1, 0);
    for (const FlowArc& a : g.arcs()) {
      ++degree[a.tail];
      ++degree[a.head];
    }
    start_.assign(n_ + 1, 0);
    for (int v = 0; v < n_; ++v) start_[v + 1] = start_[v] + degree[v];
    const std::size_t m = g.arcs().size();
    to_.resize(2 * m);
    cap_.resize(2 * m);
    pair_.resize(2 * m);
    std::vector<int> fill(start_.begin(), start_.end() - 1);
    for (const FlowArc& a : g.arcs()) {
      int f = fill[a.tail]++;
      int b = fill[a.head]++;
      to_[f] = a.head;
      cap_[f] = a.capacity == FlowGraph::kInfinite ? inf : a.capacity;
      pair_[f] = b;
      to_[b] = a.tail;
      cap_[b] = 0;
      pair_[b] = f;
    }
    level_.resize(n_);
    iter_.resize(n_);
  }

  Capacity run(int s, int t, Capacity limit) {
    Capacity total = 0;
    while (total < limit && bfs(s, t)) {
      std::copy(start_.begin(), start_.end() - 1, iter_.begin());
      for (;;) {
        Capacity pushed = dfs(s, t, limit - total);
        if (pushed == 0) break;
        total = checked_add(total, pushed);
        if (total >= limit) break;
      }
    }
    return total;
  }

  std::vector<int> reachable_from(int s) const {
    std::vector<bool> seen(n_, false);
    std::vector<int> stack{s};
    std::vector<int> side;
    seen[s] = true;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      side.push_back(u);
      for (int e = start_[u]; e < start_[u + 1]; ++e) {
        if (cap_[e] > 0 && !seen[to_[e]]) {
          seen[to_[e]] = true;
          stack.push_back(to_[e]);
        }
      }
    }
    std::sort(side.begin(), side.end());
    return side;
  }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::vector<int> queue{s};
    level_[s] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int u = queue[head];
      for (int e = start_[u]; e < start_[u + 1]; ++e) {
        if (cap_[e] > 0 && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[u] + 1;
          queue.push_back(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  Capacity dfs(int u, int t, Capacity want) {
    if (u == t) return want;
    for (int& e = iter_[u]; e < start_[u + 1]; ++e) {
      int v = to_[e];
      if (cap_[e] <= 0 || level_[v] != level_[u] + 1) continue;
      Capacity got = dfs(v, t, std::min(want, cap_[e]));
      if (got > 0) {
        cap_[e] -= got;
        cap_[pair_[e]] += got;
        return got;
      }
    }
    return 0;
  }

  int n_;
  std::vector<int> start_;
  std::vector<int> to_;
  std::vector<Capacity> cap_;
  std::vector<int> pair_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

}  // namespace

void FlowGraph::add_arc(int tail, int head, Capacity capacity) {
  if (tail < 0 || tail >= num_vertices_ || head < 0 || head >= num_vertices_) {
    throw Error(ErrorCode::VertexNotInGraph,
                "arc " + std::to_string(tail) + "->" + std::to_string(head));
  }
  if (capacity < 0 && capacity != kInfinite) {
    throw Error(ErrorCode::PreconditionViolation, "negative arc capacity");
  }
  if (capacity != kInfinite) finite_total_ = checked_add(finite_total_, capacity);
  arcs_.push_back(FlowArc{tail, head, capacity});
}

Capacity FlowGraph::infinity() const {
  if (finite_total_ >= kInfinityBudget) {
    throw Error(ErrorCode::Overflow,
                "finite capacities sum past the unbounded-arc budget");
  }
  return finite_total_ + 1;
}

FlowResult max_flow(const FlowGraph& g, int source, int sink,
                    std::optional<Capacity> limit) {
  check_vertex(g, source);
  check_vertex(g, sink);
  if (source == sink) {
    throw Error(ErrorCode::PreconditionViolation, "source equals sink");
  }
  Dinic dinic(g);
  const Capacity cap = limit.value_or(std::numeric_limits<Capacity>::max());
  FlowResult result;
  result.value = dinic.run(source, sink, cap);
  if (!limit || result.value < *limit) {
    result.source_side = dinic.reachable_from(source);
  }
  return result;
}

Capacity cut_capacity(const FlowGraph& g, const std::vector<bool>& source_side) {
  const Capacity inf = g.infinity();
  Capacity total = 0;
  for (const FlowArc& a : g.arcs()) {
    if (source_side[a.tail] && !source_side[a.head]) {
      total = checked_add(total, a.capacity == FlowGraph::kInfinite ? inf : a.capacity);
    }
  }
  return total;
}

SinkMinimum min_flow_over_sinks(const FlowGraph& g, int source,
                                const std::vector<int>& sinks,
                                ParallelExecutor* pool) {
  if (sinks.empty()) {
    throw Error(ErrorCode::PreconditionViolation, "no sinks");
  }
  check_vertex(g, source);
  for (int t : sinks) {
    check_vertex(g, t);
    if (t == source) {
      throw Error(ErrorCode::PreconditionViolation, "source listed as a sink");
    }
  }
  std::vector<FlowResult> results(sinks.size());
  parallel_for(pool, sinks.size(),
               [&](std::size_t i) { results[i] = max_flow(g, source, sinks[i]); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < sinks.size(); ++i) {
    if (results[i].value < results[best].value ||
        (results[i].value == results[best].value && sinks[i] < sinks[best])) {
      best = i;
    }
  }
  return SinkMinimum{std::move(results[best]), sinks[best]};
}

bool all_sinks_reach(const FlowGraph& g, int source,
                     const std::vector<int>& sinks, Capacity threshold,
                     ParallelExecutor* pool) {
  std::atomic<bool> ok{true};
  parallel_for(pool, sinks.size(), [&](std::size_t i) {
    if (!ok.load(std::memory_order_relaxed)) return;
    if (max_flow(g, source, sinks[i], threshold).value < threshold) {
      ok.store(false, std::memory_order_relaxed);
    }
  });
  return ok.load();
}

Capacity AuxNetwork::required_flow() const {
  return checked_mul(static_cast<Capacity>(sinks.size()), source_capacity);
}

AuxNetwork build_allgather_aux(const Topology& t, const Rational& inv_x) {
  if (inv_x <= Rational(0)) {
    throw Error(ErrorCode::PreconditionViolation, "1/x must be positive");
  }
  // x = den/num of inv_x; clearing x's denominator multiplies by inv_x.num().
  AuxNetwork aux;
  aux.multiplier = inv_x.num();
  aux.source_capacity = inv_x.den();
  aux.graph = FlowGraph(t.num_nodes());
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    aux.graph.add_arc(t.link_src(i), t.link_dst(i),
                      checked_mul(t.links()[i].bandwidth, aux.multiplier));
  }
  aux.source = aux.graph.add_vertex();
  for (int c : t.compute_indices()) {
    aux.graph.add_arc(aux.source, c, aux.source_capacity);
    aux.sinks.push_back(c);
  }
  aux.required_flow();  // overflow check
  aux.graph.infinity();
  return aux;
}

AuxNetwork build_tree_aux(const CapacityDigraph& g,
                          const std::vector<int>& compute, Capacity per_source) {
  AuxNetwork aux;
  aux.source_capacity = per_source;
  aux.graph = FlowGraph(g.size());
  g.for_each_arc([&](int u, int v, Capacity c) { aux.graph.add_arc(u, v, c); });
  aux.source = aux.graph.add_vertex();
  for (int c : compute) {
    aux.graph.add_arc(aux.source, c, per_source);
    aux.sinks.push_back(c);
  }
  aux.required_flow();
  return aux;
}

bool trees_fit(const CapacityDigraph& g, const std::vector<int>& compute,
               Capacity k, ParallelExecutor* pool) {
  AuxNetwork aux = build_tree_aux(g, compute, k);
  return all_sinks_reach(aux.graph, aux.source, aux.sinks, aux.required_flow(), pool);
}

}  // namespace forestsched
