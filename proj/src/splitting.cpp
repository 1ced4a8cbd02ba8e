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

#include "forestsched/splitting.hpp"

#include <algorithm>
#include <atomic>
#include <string>

#include "forestsched/error.hpp"
#include "forestsched/maxflow.hpp"

namespace forestsched {

namespace {

FlowGraph with_source(const CapacityDigraph& d, const std::vector<int>& compute,
                      std::int64_t k, int* source) {
  FlowGraph g(d.size());
  d.for_each_arc([&](int a, int b, Capacity c) { g.add_arc(a, b, c); });
  *source = g.add_vertex();
  for (int c : compute) g.add_arc(*source, c, k);
  return g;
}

void add_infinite(FlowGraph& g, int a, int b) {
  if (a != b) g.add_arc(a, b, FlowGraph::kInfinite);
}

}  // namespace

Topology LogicalTopology::to_topology(const Topology& original) const {
  std::vector<Node> nodes;
  for (int c : compute) nodes.push_back(original.node(c));
  std::vector<Link> links;
  graph.for_each_arc([&](int a, int b, Capacity cap) {
    links.push_back(Link{original.node(a).id, original.node(b).id, cap});
  });
  return Topology(std::move(nodes), std::move(links));
}

Capacity compute_gamma(const CapacityDigraph& d, const std::vector<int>& compute,
                       std::int64_t k, int u, int w, int t, ParallelExecutor* pool) {
  const Capacity cap = std::min(d.capacity(u, w), d.capacity(w, t));
  if (cap <= 0) return 0;
  int s = -1;
  const FlowGraph base = with_source(d, compute, k, &s);
  const Capacity required =
      checked_mul(static_cast<Capacity>(compute.size()), k);
  const Capacity limit = checked_add(required, cap);

  std::vector<Capacity> terms(compute.size(), cap);
  std::atomic<bool> dead{false};
  parallel_for(pool, compute.size(), [&](std::size_t i) {
    if (dead.load(std::memory_order_relaxed)) return;
    const int v = compute[i];
    Capacity term = cap;
    if (v != u) {
      FlowGraph g1 = base;
      add_infinite(g1, u, s);
      add_infinite(g1, u, t);
      add_infinite(g1, v, w);
      term = std::min(term, max_flow(g1, u, w, limit).value - required);
    }
    if (term > 0) {
      FlowGraph g2 = base;
      add_infinite(g2, w, s);
      add_infinite(g2, u, t);
      add_infinite(g2, v, t);
      term = std::min(term, max_flow(g2, w, t, limit).value - required);
    }
    terms[i] = term;
    if (term <= 0) dead.store(true, std::memory_order_relaxed);
  });
  Capacity gamma = cap;
  for (Capacity term : terms) gamma = std::min(gamma, term);
  return std::max<Capacity>(gamma, 0);
}

SplitResult remove_switches(const ScaledTopology& d, const SplitOptions& options) {
  const Topology& topo = d.topology;
  SplitResult result;
  CapacityDigraph g = d.to_digraph();
  const std::vector<int>& compute = topo.compute_indices();
  const std::int64_t k = d.k;
  auto group_of = [&](int v) {
    return v < static_cast<int>(options.groups.size()) ? options.groups[v] : -1;
  };

  for (int w = 0; w < topo.num_nodes(); ++w) {
    if (topo.node(w).is_compute()) continue;
    result.stats.removed_capacity[w] = g.in_capacity(w);
    std::vector<int> heads;
    for (const auto& [t, c] : g.out(w)) heads.push_back(t);
    for (int t : heads) {
      while (g.capacity(w, t) > 0) {
        std::vector<int> tails;
        for (const auto& [u, c] : g.in(w)) tails.push_back(u);
        auto rank = [&](int u) {
          if (u == t) return 2;
          int gu = group_of(u), gt = group_of(t);
          return (gu >= 0 && gt >= 0 && gu != gt) ? 0 : 1;
        };
        std::stable_sort(tails.begin(), tails.end(),
                         [&](int a, int b) { return rank(a) < rank(b); });
        bool progress = false;
        for (int u : tails) {
          if (g.capacity(u, w) == 0) continue;
          Capacity gamma = compute_gamma(g, compute, k, u, w, t, options.pool);
          ++result.stats.gamma_evaluations;
          if (gamma == 0) continue;
          g.add(u, w, -gamma);
          g.add(w, t, -gamma);
          if (u == t) {
            result.stats.discarded_loops[w] += gamma;
          } else {
            g.add(u, t, gamma);
            result.emap[{u, t}][w] += gamma;
          }
          ++result.stats.splits;
          progress = true;
          if (options.on_split) options.on_split(g);
          if (g.capacity(w, t) == 0) break;
        }
        if (!progress) {
          throw Error(ErrorCode::StuckSplit,
                      "no ingress arc of switch " + topo.node(w).id.str() +
                          " splits with egress to " + topo.node(t).id.str());
        }
      }
    }
    if (!g.in(w).empty() || !g.out(w).empty()) {
      throw Error(ErrorCode::StuckSplit,
                  "switch " + topo.node(w).id.str() + " not isolated after splitting");
    }
  }

  result.logical.graph = std::move(g);
  result.logical.compute = compute;
  result.logical.k = k;
  return result;
}

PathRecovery::PathRecovery(const EMap& emap, const ScaledTopology& physical) {
  const Topology& t = physical.topology;
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    if (physical.capacity[i] > 0) {
      pools_[{t.link_src(i), t.link_dst(i)}].direct = physical.capacity[i];
    }
  }
  for (const auto& [arc, via] : emap) {
    for (const auto& [w, c] : via) pools_[arc].via[w] += c;
  }
}

Capacity PathRecovery::available(int u, int t) const {
  auto it = pools_.find({u, t});
  if (it == pools_.end()) return 0;
  Capacity total = it->second.direct;
  for (const auto& [w, c] : it->second.via) total = checked_add(total, c);
  return total;
}

std::vector<PathChunk> PathRecovery::expand(int u, int t, Capacity multiplicity) {
  std::vector<PathChunk> out;
  if (multiplicity <= 0) return out;
  auto it = pools_.find({u, t});
  if (it == pools_.end() || available(u, t) < multiplicity) {
    throw Error(ErrorCode::CapacityExhausted,
                "arc " + std::to_string(u) + "->" + std::to_string(t) + " needs " +
                    std::to_string(multiplicity) + ", has " +
                    std::to_string(available(u, t)));
  }
  Pool& pool = it->second;
  Capacity left = multiplicity;
  Capacity direct = std::min(left, pool.direct);
  if (direct > 0) {
    pool.direct -= direct;
    left -= direct;
    out.push_back(PathChunk{{u, t}, direct});
  }
  for (auto& [w, avail] : pool.via) {
    if (left == 0) break;
    Capacity take = std::min(left, avail);
    if (take == 0) continue;
    avail -= take;
    left -= take;
    std::vector<PathChunk> first = expand(u, w, take);
    std::vector<PathChunk> second = expand(w, t, take);
    // Pair up units of the two legs in order.
    std::size_t i = 0, j = 0;
    Capacity ri = first.empty() ? 0 : first[0].multiplicity;
    Capacity rj = second.empty() ? 0 : second[0].multiplicity;
    while (i < first.size() && j < second.size()) {
      Capacity m = std::min(ri, rj);
      std::vector<int> nodes = first[i].nodes;
      nodes.insert(nodes.end(), second[j].nodes.begin() + 1, second[j].nodes.end());
      auto same = std::find_if(out.begin(), out.end(),
                               [&](const PathChunk& p) { return p.nodes == nodes; });
      if (same != out.end()) {
        same->multiplicity += m;
      } else {
        out.push_back(PathChunk{std::move(nodes), m});
      }
      ri -= m;
      rj -= m;
      if (ri == 0 && ++i < first.size()) ri = first[i].multiplicity;
      if (rj == 0 && ++j < second.size()) rj = second[j].multiplicity;
    }
  }
  return out;
}

std::vector<Capacity> expand_all(const EMap& emap, const ScaledTopology& physical,
                                 const LogicalTopology& logical) {
  const Topology& t = physical.topology;
  PathRecovery recovery(emap, physical);
  std::vector<Capacity> usage(t.links().size(), 0);
  logical.graph.for_each_arc([&](int a, int b, Capacity c) {
    for (const PathChunk& p : recovery.expand(a, b, c)) {
      for (std::size_t h = 0; h + 1 < p.nodes.size(); ++h) {
        auto link = t.link_between(p.nodes[h], p.nodes[h + 1]);
        if (!link) {
          throw Error(ErrorCode::CapacityExhausted, "expanded hop is not a link");
        }
        usage[*link] += p.multiplicity;
      }
    }
  });
  return usage;
}

}  // namespace forestsched
