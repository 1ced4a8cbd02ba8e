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

#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "forestsched/digraph.hpp"
#include "forestsched/parallel.hpp"
#include "forestsched/topology.hpp"

namespace forestsched {

/// emap[(u, t)][w] = capacity of (u, t) obtained by splitting (u, w), (w, t).
/// Vertices are indices of the original topology.
using EMap = std::map<std::pair<int, int>, std::map<int, Capacity>>;

/// Switch-free graph left after splitting, still indexed by the original
/// topology's vertices (switch vertices are isolated).
struct LogicalTopology {
  CapacityDigraph graph;
  std::vector<int> compute;  // original vertex indices, ascending
  std::int64_t k = 1;

  /// Compute-only topology over the original ids, capacities as bandwidths.
  Topology to_topology(const Topology& original) const;
};

struct SplitOptions {
  /// Optional group per vertex (-1 = none). Ingress arcs whose tail is in a
  /// different group than the egress head are tried first.
  std::vector<int> groups;
  ParallelExecutor* pool = nullptr;
  /// Called with the working graph after every applied split.
  std::function<void(const CapacityDigraph&)> on_split;
};

struct SplitStats {
  std::int64_t gamma_evaluations = 0;
  std::int64_t splits = 0;
  /// Capacity removed as (u, w), (w, u) self loops, per switch.
  std::map<int, Capacity> discarded_loops;
  /// Ingress capacity of each switch when its turn came. Differs from the
  /// original ingress when an earlier switch split arcs shared with it.
  std::map<int, Capacity> removed_capacity;
};

struct SplitResult {
  LogicalTopology logical;
  EMap emap;
  SplitStats stats;
};

/// Largest amount by which (u, w), (w, t) can be split off while every
/// compute node still receives N*k from the aux source. w must be a switch.
Capacity compute_gamma(const CapacityDigraph& d, const std::vector<int>& compute,
                       std::int64_t k, int u, int w, int t,
                       ParallelExecutor* pool = nullptr);

/// Splits every switch out of d (capacities of d, k = d.k). Switches go in id
/// order, their egress arcs by head id, ingress arcs by tail id with the
/// self pairing (u == t) last.
SplitResult remove_switches(const ScaledTopology& d, const SplitOptions& options = {});

struct PathChunk {
  std::vector<int> nodes;
  Capacity multiplicity = 0;

  bool operator==(const PathChunk&) const = default;
};

/// Stateful expansion of logical arcs back into physical paths. Every unit
/// of physical capacity and of every emap entry is handed out at most once.
class PathRecovery {
 public:
  PathRecovery(const EMap& emap, const ScaledTopology& physical);

  /// Paths u -> ... -> t whose multiplicities sum to `multiplicity`. Direct
  /// physical capacity is used first, then emap entries by switch id.
  /// Throws CapacityExhausted when the arc runs dry.
  std::vector<PathChunk> expand(int u, int t, Capacity multiplicity);

  /// Remaining units available for (u, t), counting emap entries.
  Capacity available(int u, int t) const;

 private:
  struct Pool {
    Capacity direct = 0;
    std::map<int, Capacity> via;
  };

  std::map<std::pair<int, int>, Pool> pools_;
};

/// Expands every unit of logical capacity and returns the resulting usage
/// per physical link (indexed like physical.topology.links()).
std::vector<Capacity> expand_all(const EMap& emap, const ScaledTopology& physical,
                                 const LogicalTopology& logical);

}  // namespace forestsched
