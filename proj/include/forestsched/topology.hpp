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

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forestsched/digraph.hpp"
#include "forestsched/rational.hpp"

namespace forestsched {

/// Opaque, non-empty node name. Ordering is plain lexicographic and is the
/// iteration order used everywhere determinism matters.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string value);

  const std::string& str() const { return value_; }
  auto operator<=>(const NodeId&) const = default;

 private:
  std::string value_;
};

enum class NodeKind { kCompute, kSwitch };

struct Node {
  NodeId id;
  NodeKind kind = NodeKind::kCompute;
  bool multicast = false;    // switches only
  bool aggregation = false;  // switches only

  bool is_compute() const { return kind == NodeKind::kCompute; }
  bool operator==(const Node&) const = default;
};

struct Link {
  NodeId src;
  NodeId dst;
  Capacity bandwidth = 0;

  bool operator==(const Link&) const = default;
};

/// Directed capacitated network of compute and switch nodes.
///
/// Construction canonicalises the input: nodes are sorted by id, parallel
/// links between the same ordered pair are merged by summing bandwidth, and
/// links are sorted by (src, dst). Vertex index i always refers to nodes()[i],
/// so index order equals id order. Structural errors (duplicate ids, unknown
/// endpoints, self loops, non-positive bandwidth) throw; the network-level
/// invariants are checked separately by validate().
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<Node> nodes, std::vector<Link> links);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Link>& links() const { return links_; }

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_compute() const { return static_cast<int>(compute_.size()); }
  /// Vertex indices of compute nodes, ascending.
  const std::vector<int>& compute_indices() const { return compute_; }

  const Node& node(int index) const { return nodes_[index]; }
  std::optional<int> index_of(const NodeId& id) const;
  int index_of_checked(const NodeId& id) const;

  /// Endpoints of links()[i] as vertex indices.
  int link_src(std::size_t i) const { return link_src_[i]; }
  int link_dst(std::size_t i) const { return link_dst_[i]; }
  /// Index into links() for the ordered pair, if such a link exists.
  std::optional<std::size_t> link_between(int src, int dst) const;

  Capacity egress(int v) const { return egress_[v]; }
  Capacity ingress(int v) const { return ingress_[v]; }

  /// Capacity graph with bandwidths as capacities.
  CapacityDigraph to_digraph() const;

  bool operator==(const Topology& o) const {
    return nodes_ == o.nodes_ && links_ == o.links_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Link> links_;
  std::vector<int> compute_;
  std::vector<int> link_src_;
  std::vector<int> link_dst_;
  std::vector<Capacity> egress_;
  std::vector<Capacity> ingress_;
  std::unordered_map<std::string, int> index_;
};

enum class TopologyViolationKind { kTooFewComputeNodes, kNotEulerian, kUnreachable };

struct TopologyViolation {
  TopologyViolationKind kind;
  std::optional<NodeId> node;
  std::string detail;
};

struct TopologyReport {
  std::vector<TopologyViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

std::string_view to_string(TopologyViolationKind kind);

Topology parse_topology(std::string_view text);
/// Canonical JSON; parse_topology(serialize_topology(t)) == t.
std::string serialize_topology(const Topology& t);

TopologyReport validate(const Topology& t);
/// Throws Error{InvalidTopology} with the report summary when not ok.
void require_valid(const Topology& t);

/// Topology with every link reversed. Eulerian inputs stay Eulerian and keep
/// every cut value, since B+(S) = B-(S).
Topology transpose(const Topology& t);

/// Stable 64-bit FNV-1a digest of the canonical serialization, as hex.
std::string topology_digest(const Topology& t);

/// Topology with integer capacities expressed in tree units. capacity[i]
/// belongs to topology.links()[i]. Capacities may be zero only for fixed-k
/// floor scaling, where such links carry no tree.
struct ScaledTopology {
  Topology topology;
  std::vector<Capacity> capacity;
  Rational scale{1};
  std::int64_t k = 1;

  CapacityDigraph to_digraph() const;
};

/// Multiplies every bandwidth by scale; each product must be an integer.
ScaledTopology scale_capacities(const Topology& t, const Rational& scale);

/// Parameters for synth_topology. Only the fields of the chosen family are
/// read.
struct GeneratorSpec {
  std::string family;  // "boxes" | "ring" | "fat-tree" | "random"

  // boxes: one switch per box plus a global switch joining every GPU
  int boxes = 2;
  int gpus_per_box = 4;
  Capacity intra_bandwidth = 10;
  Capacity inter_bandwidth = 1;

  // ring
  int ring_size = 4;
  Capacity ring_bandwidth = 1;
  bool bidirectional = true;

  // fat-tree: two tiers, `pods` leaf switches each serving gpus/pods GPUs,
  // every leaf wired to every spine
  int pods = 4;
  int gpus = 16;
  int spines = 0;  // 0 means spines == pods
  Capacity host_bandwidth = 4;
  Capacity uplink_bandwidth = 4;

  // random: Eulerian by construction (superposed weighted directed cycles)
  int random_compute = 4;
  int random_switches = 2;
  Capacity random_max_bandwidth = 8;
  int random_cycles = 4;
  std::uint64_t seed = 1;

  // capability flags applied to every generated switch (random family
  // draws them from the seed instead)
  bool switch_multicast = false;
  bool switch_aggregation = false;
};

Topology synth_topology(const GeneratorSpec& spec);

}  // namespace forestsched
