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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forestsched/optimality.hpp"
#include "forestsched/packing.hpp"
#include "forestsched/parallel.hpp"
#include "forestsched/rational.hpp"
#include "forestsched/splitting.hpp"
#include "forestsched/topology.hpp"

namespace forestsched {

enum class Collective { kAllgather, kReduceScatter, kAllreduce };

std::string_view to_string(Collective c);
/// Accepts "allgather", "reduce_scatter"/"reduce-scatter", "allreduce".
Collective parse_collective(std::string_view text);

struct PhysicalPath {
  std::vector<NodeId> nodes;
  Capacity multiplicity = 0;
  /// Hops removed by in-switch multicast (counted from the front) or
  /// aggregation (counted from the back, in reduce phases).
  int elided_hops = 0;

  bool operator==(const PhysicalPath&) const = default;
};

/// One logical compute-to-compute transfer of a tree. In broadcast phases
/// src is the parent; in reduce phases src is the child.
struct ScheduleEdge {
  NodeId src;
  NodeId dst;
  std::vector<PhysicalPath> paths;

  bool operator==(const ScheduleEdge&) const = default;
};

struct ScheduleBatch {
  Capacity multiplicity = 0;
  std::vector<ScheduleEdge> edges;

  bool operator==(const ScheduleBatch&) const = default;
};

struct RootSchedule {
  NodeId root;
  std::vector<ScheduleBatch> batches;

  bool operator==(const RootSchedule&) const = default;
};

/// A single broadcast (allgather) or reduction (reduce_scatter) forest.
struct Phase {
  Collective collective = Collective::kAllgather;
  std::vector<RootSchedule> roots;

  bool operator==(const Phase&) const = default;
};

struct ScheduleMeta {
  std::int64_t num_compute = 0;
  std::int64_t k = 1;
  Rational inv_x;  // 1/x* (or U*/k for fixed-k schedules)
  Rational y;      // bandwidth per tree
  Rational U;
  std::string topology_digest;
  bool fixed_k = false;

  bool operator==(const ScheduleMeta&) const = default;
};

struct Schedule {
  Collective collective = Collective::kAllgather;
  ScheduleMeta meta;
  /// One phase, or reduce_scatter then allgather for allreduce.
  std::vector<Phase> phases;

  bool operator==(const Schedule&) const = default;
};

ScheduleMeta make_meta(const Topology& t, const OptimalityResult& opt, bool fixed_k);

/// Expands every batch of the forest into physical paths.
Schedule assemble_allgather(const Forest& forest, const EMap& emap,
                            const ScaledTopology& original, const ScheduleMeta& meta);

/// Reverses every path and edge; allgather and reduce_scatter swap.
Schedule reverse_for_reduce_scatter(const Schedule& s);

/// Two-phase allreduce; throws MismatchedForest unless both halves share
/// topology and parameters.
Schedule combine_allreduce(const Schedule& rs, const Schedule& ag);

/// Elides sends into multicast switches that already hold the tree's data.
Schedule prune_multicast(const Schedule& s, const Topology& t);
/// Mirror of prune_multicast for aggregation switches in reduce phases.
Schedule prune_aggregation(const Schedule& s, const Topology& t);

/// True when every compute node has the same ingress and egress bandwidth,
/// the setting in which the combined allreduce is expected to be optimal.
bool uniform_compute_bandwidth(const Topology& t);

/// (src, dst) hops elided from a path, in path order.
std::vector<std::pair<NodeId, NodeId>> elided_links(const PhysicalPath& p,
                                                    Collective phase);
/// Hops still carrying traffic.
std::vector<std::pair<NodeId, NodeId>> retained_links(const PhysicalPath& p,
                                                      Collective phase);

std::string schedule_to_json(const Schedule& s);
Schedule parse_schedule(std::string_view text);
/// One digraph per root (its first batch) of the first phase.
std::string schedule_to_dot(const Schedule& s);

struct GenerateOptions {
  Collective collective = Collective::kAllgather;
  std::optional<std::int64_t> fixed_k;
  bool prune = true;
  std::vector<int> groups;  // per vertex, for the splitting heuristic
  ParallelExecutor* pool = nullptr;
};

struct GenerateStats {
  std::int64_t gamma_evaluations = 0;
  std::int64_t mu_computations = 0;
  std::int64_t logical_arcs = 0;
};

struct GenerateResult {
  Schedule schedule;
  OptimalityResult optimum;  // values the schedule was built for
  GenerateStats stats;
};

/// Full pipeline: search, scale, split, pack, assemble, prune.
GenerateResult generate_schedule(const Topology& t, const GenerateOptions& options);

}  // namespace forestsched
