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

#include "forestsched/topology.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "forestsched/error.hpp"
#include "json.hpp"

namespace forestsched {

using json = nlohmann::ordered_json;

NodeId::NodeId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) {
    throw Error(ErrorCode::MalformedJson, "node id must be non-empty");
  }
}

Topology::Topology(std::vector<Node> nodes, std::vector<Link> links) {
  std::sort(nodes.begin(), nodes.end(),
            [](const Node& a, const Node& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0 && nodes[i].id == nodes[i - 1].id) {
      throw Error(ErrorCode::DuplicateNodeId, nodes[i].id.str());
    }
    if (nodes[i].is_compute() && (nodes[i].multicast || nodes[i].aggregation)) {
      throw Error(ErrorCode::InvalidTopology,
                  "capability flags set on compute node " + nodes[i].id.str());
    }
  }
  nodes_ = std::move(nodes);
  for (int i = 0; i < num_nodes(); ++i) {
    index_.emplace(nodes_[i].id.str(), i);
    if (nodes_[i].is_compute()) compute_.push_back(i);
  }

  std::map<std::pair<int, int>, Capacity> merged;
  for (const Link& l : links) {
    auto src = index_of(l.src);
    auto dst = index_of(l.dst);
    if (!src) throw Error(ErrorCode::UnknownNode, l.src.str());
    if (!dst) throw Error(ErrorCode::UnknownNode, l.dst.str());
    if (*src == *dst) {
      throw Error(ErrorCode::InvalidLink, "self loop on " + l.src.str());
    }
    if (l.bandwidth < 1) {
      throw Error(ErrorCode::InvalidLink, "bandwidth of " + l.src.str() +
                                              "->" + l.dst.str() +
                                              " must be >= 1");
    }
    Capacity& slot = merged[{*src, *dst}];
    slot = checked_add(slot, l.bandwidth);
  }

  egress_.assign(nodes_.size(), 0);
  ingress_.assign(nodes_.size(), 0);
  for (const auto& [ends, bw] : merged) {
    links_.push_back(Link{nodes_[ends.first].id, nodes_[ends.second].id, bw});
    link_src_.push_back(ends.first);
    link_dst_.push_back(ends.second);
    egress_[ends.first] = checked_add(egress_[ends.first], bw);
    ingress_[ends.second] = checked_add(ingress_[ends.second], bw);
  }
}

std::optional<int> Topology::index_of(const NodeId& id) const {
  auto it = index_.find(id.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Topology::index_of_checked(const NodeId& id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::UnknownNode, id.str());
  return *idx;
}

std::optional<std::size_t> Topology::link_between(int src, int dst) const {
  // links are sorted by (src, dst) index pairs
  auto first = std::lower_bound(
      link_src_.begin(), link_src_.end(), src);
  std::size_t lo = static_cast<std::size_t>(first - link_src_.begin());
  for (std::size_t i = lo; i < links_.size() && link_src_[i] == src; ++i) {
    if (link_dst_[i] == dst) return i;
  }
  return std::nullopt;
}

CapacityDigraph Topology::to_digraph() const {
  CapacityDigraph g(num_nodes());
  for (std::size_t i = 0; i < links_.size(); ++i) {
    g.add(link_src_[i], link_dst_[i], links_[i].bandwidth);
  }
  return g;
}

std::string_view to_string(TopologyViolationKind kind) {
  switch (kind) {
    case TopologyViolationKind::kTooFewComputeNodes: return "TooFewComputeNodes";
    case TopologyViolationKind::kNotEulerian: return "NotEulerian";
    case TopologyViolationKind::kUnreachable: return "Unreachable";
  }
  return "Unknown";
}

std::string TopologyReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i > 0) os << "; ";
    os << to_string(v.kind);
    if (v.node) os << "(" << v.node->str() << ")";
    if (!v.detail.empty()) os << ": " << v.detail;
  }
  return os.str();
}

TopologyReport validate(const Topology& t) {
  TopologyReport report;
  if (t.num_compute() < 2) {
    report.violations.push_back(
        {TopologyViolationKind::kTooFewComputeNodes, std::nullopt,
         "need at least 2 compute nodes, have " +
             std::to_string(t.num_compute())});
  }
  for (int v = 0; v < t.num_nodes(); ++v) {
    if (t.ingress(v) != t.egress(v)) {
      report.violations.push_back(
          {TopologyViolationKind::kNotEulerian, t.node(v).id,
           "ingress " + std::to_string(t.ingress(v)) + ", egress " +
               std::to_string(t.egress(v))});
    }
  }

  std::vector<std::vector<int>> adj(t.num_nodes());
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    adj[t.link_src(i)].push_back(t.link_dst(i));
  }
  std::vector<bool> flagged(t.num_nodes(), false);
  for (int from : t.compute_indices()) {
    std::vector<bool> seen(t.num_nodes(), false);
    std::deque<int> queue{from};
    seen[from] = true;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      for (int w : adj[u]) {
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
    for (int c : t.compute_indices()) {
      if (!seen[c] && !flagged[c]) {
        flagged[c] = true;
        report.violations.push_back({TopologyViolationKind::kUnreachable,
                                     t.node(c).id,
                                     "not reachable from " + t.node(from).id.str()});
      }
    }
  }
  return report;
}

void require_valid(const Topology& t) {
  TopologyReport report = validate(t);
  if (!report.ok()) throw Error(ErrorCode::InvalidTopology, report.summary());
}

namespace {

bool read_flag(const json& node, const char* key) {
  if (!node.contains(key)) return false;
  if (!node[key].is_boolean()) {
    throw Error(ErrorCode::MalformedJson, std::string(key) + " must be a boolean");
  }
  return node[key].get<bool>();
}

std::string read_string(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) {
    throw Error(ErrorCode::MalformedJson,
                std::string("missing string field '") + key + "'");
  }
  return obj[key].get<std::string>();
}

}  // namespace

Topology parse_topology(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array() ||
      !doc.contains("links") || !doc["links"].is_array()) {
    throw Error(ErrorCode::MalformedJson,
                "expected an object with 'nodes' and 'links' arrays");
  }

  std::vector<Node> nodes;
  std::set<std::string> seen;
  for (const json& n : doc["nodes"]) {
    Node node;
    node.id = NodeId(read_string(n, "id"));
    if (!seen.insert(node.id.str()).second) {
      throw Error(ErrorCode::DuplicateNodeId, node.id.str());
    }
    std::string kind = read_string(n, "kind");
    if (kind == "compute") {
      node.kind = NodeKind::kCompute;
    } else if (kind == "switch") {
      node.kind = NodeKind::kSwitch;
      node.multicast = read_flag(n, "multicast");
      node.aggregation = read_flag(n, "aggregation");
    } else {
      throw Error(ErrorCode::UnknownNodeKind, kind);
    }
    nodes.push_back(std::move(node));
  }

  std::vector<Link> links;
  for (const json& l : doc["links"]) {
    Link link;
    link.src = NodeId(read_string(l, "src"));
    link.dst = NodeId(read_string(l, "dst"));
    if (!l.contains("bandwidth") || !l["bandwidth"].is_number_integer()) {
      throw Error(ErrorCode::NonIntegerBandwidth,
                  link.src.str() + "->" + link.dst.str());
    }
    if (l["bandwidth"].is_number_unsigned() &&
        l["bandwidth"].get<std::uint64_t>() >
            static_cast<std::uint64_t>(std::numeric_limits<Capacity>::max())) {
      throw Error(ErrorCode::Overflow, "bandwidth exceeds 63 bits");
    }
    link.bandwidth = l["bandwidth"].get<Capacity>();
    links.push_back(std::move(link));
  }
  return Topology(std::move(nodes), std::move(links));
}

std::string serialize_topology(const Topology& t) {
  json doc;
  doc["nodes"] = json::array();
  for (const Node& n : t.nodes()) {
    json node;
    node["id"] = n.id.str();
    node["kind"] = n.is_compute() ? "compute" : "switch";
    if (!n.is_compute()) {
      node["multicast"] = n.multicast;
      node["aggregation"] = n.aggregation;
    }
    doc["nodes"].push_back(std::move(node));
  }
  doc["links"] = json::array();
  for (const Link& l : t.links()) {
    doc["links"].push_back(
        json{{"src", l.src.str()}, {"dst", l.dst.str()}, {"bandwidth", l.bandwidth}});
  }
  return doc.dump(2) + "\n";
}

Topology transpose(const Topology& t) {
  std::vector<Link> links;
  links.reserve(t.links().size());
  for (const Link& l : t.links()) links.push_back(Link{l.dst, l.src, l.bandwidth});
  return Topology(t.nodes(), std::move(links));
}

std::string topology_digest(const Topology& t) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : serialize_topology(t)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

CapacityDigraph ScaledTopology::to_digraph() const {
  CapacityDigraph g(topology.num_nodes());
  for (std::size_t i = 0; i < capacity.size(); ++i) {
    if (capacity[i] > 0) g.add(topology.link_src(i), topology.link_dst(i), capacity[i]);
  }
  return g;
}

ScaledTopology scale_capacities(const Topology& t, const Rational& scale) {
  if (scale <= Rational(0)) {
    throw Error(ErrorCode::PreconditionViolation, "scale must be positive");
  }
  ScaledTopology out{t, {}, scale, 1};
  out.capacity.reserve(t.links().size());
  for (const Link& l : t.links()) {
    Rational c = scale * Rational(l.bandwidth);  // throws Overflow
    if (!c.is_integer()) {
      throw Error(ErrorCode::NonIntegralScale,
                  scale.str() + " * " + std::to_string(l.bandwidth) + " on " +
                      l.src.str() + "->" + l.dst.str());
    }
    out.capacity.push_back(c.num());
  }
  return out;
}

namespace {

int digits(int v) { return static_cast<int>(std::to_string(v).size()); }

std::string padded(const std::string& prefix, int value, int width) {
  std::string s = std::to_string(value);
  if (static_cast<int>(s.size()) < width) s.insert(0, width - s.size(), '0');
  return prefix + s;
}

Node switch_node(std::string id, const GeneratorSpec& spec) {
  return Node{NodeId(std::move(id)), NodeKind::kSwitch, spec.switch_multicast,
              spec.switch_aggregation};
}

void add_both_ways(std::vector<Link>& links, const NodeId& a, const NodeId& b,
                   Capacity bw) {
  links.push_back(Link{a, b, bw});
  links.push_back(Link{b, a, bw});
}

void require_positive(Capacity bw, const char* what) {
  if (bw < 1) {
    throw Error(ErrorCode::InvalidGeneratorSpec, std::string(what) + " must be >= 1");
  }
}

Topology synth_boxes(const GeneratorSpec& spec) {
  if (spec.boxes < 1 || spec.gpus_per_box < 1 || spec.boxes * spec.gpus_per_box < 2) {
    throw Error(ErrorCode::InvalidGeneratorSpec, "boxes topology needs >= 2 GPUs");
  }
  require_positive(spec.intra_bandwidth, "intra bandwidth");
  require_positive(spec.inter_bandwidth, "inter bandwidth");
  const int bw = digits(spec.boxes);
  const int gw = digits(spec.gpus_per_box);
  std::vector<Node> nodes;
  std::vector<Link> links;
  NodeId global(padded("w", 0, bw));
  nodes.push_back(switch_node(global.str(), spec));
  for (int b = 1; b <= spec.boxes; ++b) {
    NodeId box(padded("w", b, bw));
    nodes.push_back(switch_node(box.str(), spec));
    for (int g = 1; g <= spec.gpus_per_box; ++g) {
      NodeId gpu(padded("c", b, bw) + padded("", g, gw));
      nodes.push_back(Node{gpu, NodeKind::kCompute, false, false});
      add_both_ways(links, gpu, box, spec.intra_bandwidth);
      add_both_ways(links, gpu, global, spec.inter_bandwidth);
    }
  }
  return Topology(std::move(nodes), std::move(links));
}

Topology synth_ring(const GeneratorSpec& spec) {
  if (spec.ring_size < 2) {
    throw Error(ErrorCode::InvalidGeneratorSpec, "ring needs >= 2 compute nodes");
  }
  require_positive(spec.ring_bandwidth, "ring bandwidth");
  const int w = digits(spec.ring_size);
  std::vector<Node> nodes;
  std::vector<Link> links;
  for (int i = 1; i <= spec.ring_size; ++i) {
    nodes.push_back(Node{NodeId(padded("c", i, w)), NodeKind::kCompute, false, false});
  }
  for (int i = 0; i < spec.ring_size; ++i) {
    const NodeId& a = nodes[i].id;
    const NodeId& b = nodes[(i + 1) % spec.ring_size].id;
    if (spec.ring_size == 2 && i == 1) break;  // a 2-ring is one pair
    if (spec.bidirectional || spec.ring_size == 2) {
      add_both_ways(links, a, b, spec.ring_bandwidth);
    } else {
      links.push_back(Link{a, b, spec.ring_bandwidth});
    }
  }
  return Topology(std::move(nodes), std::move(links));
}

Topology synth_fat_tree(const GeneratorSpec& spec) {
  if (spec.pods < 1 || spec.gpus < 2 || spec.gpus % spec.pods != 0) {
    throw Error(ErrorCode::InvalidGeneratorSpec,
                "fat-tree needs >= 2 GPUs divisible by the pod count");
  }
  require_positive(spec.host_bandwidth, "host bandwidth");
  require_positive(spec.uplink_bandwidth, "uplink bandwidth");
  const int spines = spec.spines > 0 ? spec.spines : spec.pods;
  const int per_pod = spec.gpus / spec.pods;
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<NodeId> spine_ids;
  for (int s = 1; s <= spines; ++s) {
    spine_ids.emplace_back(padded("s", s, digits(spines)));
    nodes.push_back(switch_node(spine_ids.back().str(), spec));
  }
  for (int p = 1; p <= spec.pods; ++p) {
    NodeId leaf(padded("l", p, digits(spec.pods)));
    nodes.push_back(switch_node(leaf.str(), spec));
    for (const NodeId& spine : spine_ids) {
      add_both_ways(links, leaf, spine, spec.uplink_bandwidth);
    }
    for (int g = 1; g <= per_pod; ++g) {
      NodeId gpu(padded("c", (p - 1) * per_pod + g, digits(spec.gpus)));
      nodes.push_back(Node{gpu, NodeKind::kCompute, false, false});
      add_both_ways(links, gpu, leaf, spec.host_bandwidth);
    }
  }
  return Topology(std::move(nodes), std::move(links));
}

Topology synth_random(const GeneratorSpec& spec) {
  if (spec.random_compute < 2 || spec.random_switches < 0) {
    throw Error(ErrorCode::InvalidGeneratorSpec,
                "random topology needs >= 2 compute nodes");
  }
  require_positive(spec.random_max_bandwidth, "max bandwidth");
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };

  std::vector<Node> nodes;
  for (int i = 1; i <= spec.random_compute; ++i) {
    nodes.push_back(Node{NodeId(padded("c", i, 2)), NodeKind::kCompute, false, false});
  }
  for (int i = 1; i <= spec.random_switches; ++i) {
    bool mc = uniform(0, 1) == 1;
    bool ag = uniform(0, 1) == 1;
    nodes.push_back(Node{NodeId(padded("w", i, 2)), NodeKind::kSwitch, mc, ag});
  }
  const int n = static_cast<int>(nodes.size());
  std::map<std::pair<int, int>, Capacity> bw;

  auto add_cycle = [&](const std::vector<int>& cycle) {
    Capacity slack = spec.random_max_bandwidth;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      auto key = std::make_pair(cycle[i], cycle[(i + 1) % cycle.size()]);
      auto it = bw.find(key);
      slack = std::min(slack, spec.random_max_bandwidth - (it == bw.end() ? 0 : it->second));
    }
    if (slack < 1) return;
    Capacity weight = uniform(1, slack);
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      bw[{cycle[i], cycle[(i + 1) % cycle.size()]}] += weight;
    }
  };

  // A Hamiltonian cycle first makes every node reachable from every other.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  add_cycle(order);
  for (int c = 0; c < spec.random_cycles; ++c) {
    int len = static_cast<int>(uniform(2, n));
    std::shuffle(order.begin(), order.end(), rng);
    add_cycle(std::vector<int>(order.begin(), order.begin() + len));
  }

  std::vector<Link> links;
  for (const auto& [ends, c] : bw) {
    links.push_back(Link{nodes[ends.first].id, nodes[ends.second].id, c});
  }
  return Topology(std::move(nodes), std::move(links));
}

}  // namespace

Topology synth_topology(const GeneratorSpec& spec) {
  Topology t;
  if (spec.family == "boxes") {
    t = synth_boxes(spec);
  } else if (spec.family == "ring") {
    t = synth_ring(spec);
  } else if (spec.family == "fat-tree") {
    t = synth_fat_tree(spec);
  } else if (spec.family == "random") {
    t = synth_random(spec);
  } else {
    throw Error(ErrorCode::UnsupportedFamily, spec.family);
  }
  require_valid(t);
  return t;
}

}  // namespace forestsched
