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

#pragma once

#include <optional>
#include <vector>

#include "forestsched/digraph.hpp"
#include "forestsched/parallel.hpp"
#include "forestsched/rational.hpp"
#include "forestsched/topology.hpp"

namespace forestsched {

struct FlowArc {
  int tail;
  int head;
  Capacity capacity;  // FlowGraph::kInfinite for unbounded arcs
};

/// Integer flow network. Unbounded arcs are stored symbolically and resolved
/// at solve time to (sum of finite capacities + 1), which no cut avoiding
/// them can reach.
class FlowGraph {
 public:
  static constexpr Capacity kInfinite = -1;

  explicit FlowGraph(int num_vertices = 0) : num_vertices_(num_vertices) {}

  int num_vertices() const { return num_vertices_; }
  int add_vertex() { return num_vertices_++; }
  void add_arc(int tail, int head, Capacity capacity);

  const std::vector<FlowArc>& arcs() const { return arcs_; }
  /// Resolved value of kInfinite; throws Overflow past the 61-bit budget so
  /// that a handful of unbounded arcs can still be summed safely.
  Capacity infinity() const;

 private:
  int num_vertices_;
  std::vector<FlowArc> arcs_;
  Capacity finite_total_ = 0;
};

struct FlowResult {
  Capacity value = 0;
  /// Source side of a minimum cut; present whenever value is the exact
  /// maximum (i.e. no limit was hit). Its cut capacity equals value.
  std::optional<std::vector<int>> source_side;
};

/// Exact maximum s-t flow (Dinic). With a limit the search stops once the
/// flow reaches it and reports min(maxflow, limit).
FlowResult max_flow(const FlowGraph& g, int source, int sink,
                    std::optional<Capacity> limit = std::nullopt);

/// Capacity of the cut (side, complement) with unbounded arcs resolved.
Capacity cut_capacity(const FlowGraph& g, const std::vector<bool>& source_side);

struct SinkMinimum {
  FlowResult flow;
  int sink = -1;
};

/// Minimum over independent per-sink maxflows from source; ties go to the
/// smallest sink vertex. Sinks may be evaluated in parallel.
SinkMinimum min_flow_over_sinks(const FlowGraph& g, int source,
                                const std::vector<int>& sinks,
                                ParallelExecutor* pool = nullptr);

/// True iff every sink receives at least `threshold` units. Stops early on
/// the first failing sink; answers are identical for any pool size.
bool all_sinks_reach(const FlowGraph& g, int source,
                     const std::vector<int>& sinks, Capacity threshold,
                     ParallelExecutor* pool = nullptr);

/// Flow network with an extra source vertex feeding every compute node.
struct AuxNetwork {
  FlowGraph graph;
  int source = -1;
  std::vector<int> sinks;           // compute vertices
  Capacity multiplier = 1;          // factor applied to the original capacities
  Capacity source_capacity = 0;     // capacity of each source arc after scaling

  /// N * (source arc capacity): the flow every sink must receive.
  Capacity required_flow() const;
};

/// Network for the optimality probe at 1/x = inv_x: arcs s->c of capacity x
/// for every compute node c, with all capacities multiplied by the numerator
/// of inv_x so the network is integral.
AuxNetwork build_allgather_aux(const Topology& t, const Rational& inv_x);

/// Same construction over an integer capacity graph: s->c arcs carry
/// `per_source` (the tree count k).
AuxNetwork build_tree_aux(const CapacityDigraph& g,
                          const std::vector<int>& compute, Capacity per_source);

/// k spanning out-trees per compute node fit into g (one tree per unit of
/// arc capacity) iff every compute node receives N*k in the tree aux network.
bool trees_fit(const CapacityDigraph& g, const std::vector<int>& compute,
               Capacity k, ParallelExecutor* pool = nullptr);

}  // namespace forestsched
