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

#include "test_support.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fstest {

using forestsched::Link;
using forestsched::Node;
using forestsched::NodeId;
using forestsched::NodeKind;

std::string two_box_json(Capacity intra, Capacity inter, bool multicast) {
  std::ostringstream s;
  const char* flag = multicast ? "true" : "false";
  s << "{\"nodes\": [";
  for (int b = 1; b <= 2; ++b) {
    for (int g = 1; g <= 4; ++g) s << "{\"id\": \"c" << b << g << "\", \"kind\": \"compute\"},";
  }
  for (int w = 0; w <= 2; ++w) {
    s << "{\"id\": \"w" << w << "\", \"kind\": \"switch\", \"multicast\": " << flag
      << "}" << (w < 2 ? "," : "");
  }
  s << "], \"links\": [";
  bool first = true;
  auto link = [&](const std::string& a, const std::string& b, Capacity bw) {
    s << (first ? "" : ",") << "{\"src\": \"" << a << "\", \"dst\": \"" << b
      << "\", \"bandwidth\": " << bw << "}";
    first = false;
  };
  for (int b = 1; b <= 2; ++b) {
    for (int g = 1; g <= 4; ++g) {
      std::string c = "c" + std::to_string(b) + std::to_string(g);
      std::string box = "w" + std::to_string(b);
      link(c, box, intra);
      link(box, c, intra);
      link(c, "w0", inter);
      link("w0", c, inter);
    }
  }
  s << "]}";
  return s.str();
}

Topology two_box(Capacity intra, Capacity inter, bool multicast) {
  return forestsched::parse_topology(two_box_json(intra, inter, multicast));
}

namespace {

Node compute(const std::string& id) { return Node{NodeId(id), NodeKind::kCompute, false, false}; }
Node sw(const std::string& id) { return Node{NodeId(id), NodeKind::kSwitch, false, false}; }
Link link(const std::string& a, const std::string& b, Capacity bw) {
  return Link{NodeId(a), NodeId(b), bw};
}

}  // namespace

Topology two_node(Capacity bw) {
  return Topology({compute("a"), compute("b")}, {link("a", "b", bw), link("b", "a", bw)});
}

Topology ring(int n, Capacity bw, bool bidirectional) {
  std::vector<Node> nodes;
  std::vector<Link> links;
  auto name = [](int i) { return "r" + std::to_string(i); };
  for (int i = 0; i < n; ++i) nodes.push_back(compute(name(i)));
  for (int i = 0; i < n; ++i) {
    links.push_back(link(name(i), name((i + 1) % n), bw));
    if (bidirectional) links.push_back(link(name((i + 1) % n), name(i), bw));
  }
  return Topology(nodes, links);
}

Topology star(Capacity bw) {
  return Topology({compute("a"), compute("b"), sw("w")},
                  {link("a", "w", bw), link("w", "a", bw), link("b", "w", bw),
                   link("w", "b", bw)});
}

Topology switch_chain() {
  return Topology({compute("c1"), compute("c2"), sw("w1"), sw("w2")},
                  {link("c1", "w1", 1), link("w1", "w2", 1), link("w2", "c2", 1),
                   link("c2", "w2", 1), link("w2", "w1", 1), link("w1", "c1", 1)});
}

Topology random_topology(std::uint64_t seed, int max_vertices, Capacity max_bw) {
  std::mt19937_64 rng(seed * 7919 + 17);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  forestsched::GeneratorSpec spec;
  spec.family = "random";
  spec.random_compute = pick(2, std::min(7, max_vertices));
  spec.random_switches = pick(0, std::min(4, max_vertices - spec.random_compute));
  spec.random_max_bandwidth = max_bw;
  spec.random_cycles = pick(1, 6);
  spec.seed = seed;
  return forestsched::synth_topology(spec);
}

std::vector<Topology> handcrafted_suite() {
  std::vector<Topology> out;
  out.push_back(two_box());
  out.push_back(two_box(10, 1, true));
  out.push_back(two_box(3, 2));
  out.push_back(star(1));
  out.push_back(star(3));
  out.push_back(switch_chain());
  out.push_back(two_node(3));
  out.push_back(ring(4, 1, false));
  out.push_back(ring(5, 2, true));
  forestsched::GeneratorSpec ft;
  ft.family = "fat-tree";
  ft.pods = 2;
  ft.gpus = 6;
  ft.spines = 2;
  ft.host_bandwidth = 2;
  ft.uplink_bandwidth = 1;
  out.push_back(forestsched::synth_topology(ft));
  return out;
}

Capacity brute_min_cut(const FlowGraph& g, int s, int t) {
  const int n = g.num_vertices();
  if (n > 20) throw std::runtime_error("brute_min_cut: too many vertices");
  const Capacity inf = g.infinity();
  Capacity best = -1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    Capacity cut = 0;
    for (const auto& a : g.arcs()) {
      if ((mask >> a.tail & 1u) && !(mask >> a.head & 1u)) {
        cut += a.capacity == FlowGraph::kInfinite ? inf : a.capacity;
      }
    }
    if (best < 0 || cut < best) best = cut;
  }
  return best;
}

bool brute_trees_fit(const CapacityDigraph& g, const std::vector<int>& compute,
                     std::int64_t k) {
  const int n = g.size();
  if (n > 22) throw std::runtime_error("brute_trees_fit: too many vertices");
  std::vector<char> is_compute(n, 0);
  for (int c : compute) is_compute[c] = 1;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::int64_t inside = 0;
    for (int c : compute) inside += mask >> c & 1u;
    if (inside == static_cast<std::int64_t>(compute.size()) || inside == 0) continue;
    Capacity cut = 0;
    g.for_each_arc([&](int a, int b, Capacity c) {
      if ((mask >> a & 1u) && !(mask >> b & 1u)) cut += c;
    });
    if (cut < k * inside) return false;
  }
  return true;
}

Capacity brute_gamma(const CapacityDigraph& g, const std::vector<int>& compute,
                     std::int64_t k, int u, int w, int t) {
  Capacity cap = std::min(g.capacity(u, w), g.capacity(w, t));
  for (Capacity gamma = cap; gamma > 0; --gamma) {
    CapacityDigraph h = g;
    h.add(u, w, -gamma);
    h.add(w, t, -gamma);
    if (u != t) h.add(u, t, gamma);
    if (brute_trees_fit(h, compute, k)) return gamma;
  }
  return 0;
}

Capacity brute_mu(const CapacityDigraph& residual,
                  const std::vector<forestsched::TreeBatch>& batches, std::size_t current,
                  int x, int y, const std::vector<int>& compute) {
  const forestsched::TreeBatch& b1 = batches[current];
  Capacity best = std::min(residual.capacity(x, y), b1.multiplicity);
  const int n = static_cast<int>(compute.size());
  std::vector<int> pos(residual.size(), -1);
  for (int i = 0; i < n; ++i) pos[compute[i]] = i;
  auto inside = [&](std::uint32_t mask, int v) { return pos[v] >= 0 && (mask >> pos[v] & 1u); };
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!inside(mask, x) || inside(mask, y)) continue;
    bool r1_inside = std::all_of(b1.vertices.begin(), b1.vertices.end(),
                                 [&](int v) { return inside(mask, v); });
    if (r1_inside) continue;
    Capacity cut = 0;
    residual.for_each_arc([&](int a, int b, Capacity c) {
      if (inside(mask, a) && !inside(mask, b)) cut += c;
    });
    Capacity p = 0;
    for (std::size_t j = 0; j < batches.size(); ++j) {
      if (j == current) continue;
      const auto& vs = batches[j].vertices;
      if (std::all_of(vs.begin(), vs.end(), [&](int v) { return inside(mask, v); })) {
        p += batches[j].multiplicity;
      }
    }
    best = std::min(best, cut - p);
  }
  return std::max<Capacity>(best, 0);
}

int idx(const Topology& t, const std::string& id) { return t.index_of_checked(NodeId(id)); }

}  // namespace fstest
