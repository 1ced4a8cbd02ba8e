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

#include <map>
#include <set>

#include "doctest.h"
#include "forestsched/error.hpp"
#include "forestsched/optimality.hpp"
#include "forestsched/packing.hpp"
#include "forestsched/splitting.hpp"
#include "test_support.hpp"

using namespace forestsched;

namespace {

LogicalTopology logical_for(const Topology& t) {
  OptimalityResult opt = bottleneck_search(t);
  ScaledTopology s = scale_capacities(t, opt.U);
  s.k = opt.k;
  return remove_switches(s).logical;
}

std::vector<TreeBatch> initial_batches(const LogicalTopology& lt) {
  std::vector<TreeBatch> out;
  for (int r : lt.compute) out.push_back(TreeBatch{r, lt.k, {r}, {}});
  return out;
}

// Every batch is an out-tree over all compute nodes rooted at its root.
void check_forest(const Forest& f, const LogicalTopology& lt) {
  const std::size_t n = lt.compute.size();
  std::map<int, Capacity> per_root;
  std::map<std::pair<int, int>, Capacity> used;
  for (const TreeBatch& b : f.batches) {
    CHECK_GT(b.multiplicity, 0);
    per_root[b.root] += b.multiplicity;
    CHECK_EQ(b.vertices.size(), n);
    CHECK_EQ(b.edges.size(), n - 1);
    std::set<int> reached = {b.root};
    std::map<int, int> indegree;
    for (const auto& [x, y] : b.edges) {
      CHECK(reached.count(x));
      CHECK_FALSE(reached.count(y));
      reached.insert(y);
      ++indegree[y];
      used[{x, y}] += b.multiplicity;
    }
    CHECK_EQ(indegree.count(b.root), 0u);
    CHECK_EQ(reached, std::set<int>(lt.compute.begin(), lt.compute.end()));
  }
  for (int r : lt.compute) CHECK_EQ(per_root[r], lt.k);
  for (const auto& [arc, u] : used) {
    CHECK_LE(u, lt.graph.capacity(arc.first, arc.second));
    CHECK_EQ(f.residual.capacity(arc.first, arc.second),
             lt.graph.capacity(arc.first, arc.second) - u);
  }
  for (std::size_t i = 1; i < f.batches.size(); ++i) {
    CHECK_LE(f.batches[i - 1].root, f.batches[i].root);
  }
}

}  // namespace

TEST_CASE("first arc out of a root takes the whole batch") {
  Topology t = fstest::two_box();
  LogicalTopology lt = logical_for(t);
  std::vector<TreeBatch> batches = initial_batches(lt);
  for (std::size_t i = 0; i < batches.size(); ++i) {
    int x = batches[i].root;
    for (const auto& [y, c] : lt.graph.out(x)) {
      if (c < lt.k) continue;
      CHECK_EQ(compute_mu(lt.graph, batches, i, x, y, lt.compute.size()), lt.k);
    }
  }
}

TEST_CASE("mu never exceeds the arc capacity") {
  CapacityDigraph g(2);
  g.add(0, 1, 1);
  g.add(1, 0, 2);
  std::vector<TreeBatch> batches = {TreeBatch{0, 2, {0}, {}}, TreeBatch{1, 2, {1}, {}}};
  CHECK_LE(compute_mu(g, batches, 0, 0, 1, 2), 1);
  CHECK_EQ(compute_mu(g, batches, 0, 0, 1, 2), fstest::brute_mu(g, batches, 0, 0, 1, {0, 1}));
}

TEST_CASE("cross-box arc from c11") {
  Topology t = fstest::two_box();
  LogicalTopology lt = logical_for(t);
  std::vector<TreeBatch> batches = initial_batches(lt);
  int c11 = fstest::idx(t, "c11");
  std::size_t cur = 0;
  while (batches[cur].root != c11) ++cur;
  bool found = false;
  for (const auto& [y, c] : lt.graph.out(c11)) {
    if (t.node(y).id.str()[1] != '2') continue;
    found = true;
    Capacity mu = compute_mu(lt.graph, batches, cur, c11, y, lt.compute.size());
    CHECK_EQ(mu, 1);
    CHECK_EQ(mu, fstest::brute_mu(lt.graph, batches, cur, c11, y, lt.compute));
  }
  CHECK(found);
}

TEST_CASE("mu matches brute force from the initial state") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Topology t = fstest::random_topology(seed, 9, 5);
    LogicalTopology lt = logical_for(t);
    std::vector<TreeBatch> batches = initial_batches(lt);
    for (std::size_t i = 0; i < batches.size(); ++i) {
      int x = batches[i].root;
      for (const auto& [y, c] : lt.graph.out(x)) {
        CHECK_EQ(compute_mu(lt.graph, batches, i, x, y, lt.compute.size()),
                 fstest::brute_mu(lt.graph, batches, i, x, y, lt.compute));
      }
    }
  }
}

TEST_CASE("two-box forest") {
  Topology t = fstest::two_box();
  LogicalTopology lt = logical_for(t);
  Forest f = pack_spanning_trees(lt);
  CHECK_EQ(f.batches.size(), 8u);
  check_forest(f, lt);
}

TEST_CASE("two-node forest") {
  Topology t = fstest::two_node(1);
  LogicalTopology lt = logical_for(t);
  Forest f = pack_spanning_trees(lt);
  REQUIRE_EQ(f.batches.size(), 2u);
  CHECK_EQ(f.batches[0].edges, std::vector<std::pair<int, int>>{{0, 1}});
  CHECK_EQ(f.batches[1].edges, std::vector<std::pair<int, int>>{{1, 0}});
}

TEST_CASE("unidirectional ring forces path trees") {
  Topology t = fstest::ring(4, 3, false);
  OptimalityResult opt = bottleneck_search(t);
  CHECK_EQ(opt.k, 1);
  CHECK_EQ(opt.U, Rational(1));
  LogicalTopology lt = logical_for(t);
  Forest f = pack_spanning_trees(lt);
  REQUIRE_EQ(f.batches.size(), 4u);
  for (const TreeBatch& b : f.batches) {
    REQUIRE_EQ(b.edges.size(), 3u);
    int at = b.root;
    for (const auto& [x, y] : b.edges) {
      CHECK_EQ(x, at);
      CHECK_EQ(y, (at + 1) % 4);
      at = y;
    }
  }
  check_forest(f, lt);
}

TEST_CASE("batches split when capacity forces it") {
  // Ring with k = 2 per root on a bidirectional ring: trees may split.
  Topology t = fstest::ring(5, 2, true);
  LogicalTopology lt = logical_for(t);
  Forest f = pack_spanning_trees(lt);
  check_forest(f, lt);
}

TEST_CASE("packing fails loudly on an infeasible logical graph") {
  LogicalTopology lt;
  lt.graph = CapacityDigraph(3);
  lt.graph.add(0, 1, 1);
  lt.graph.add(1, 2, 1);
  lt.graph.add(2, 0, 1);
  lt.compute = {0, 1, 2};
  lt.k = 2;
  try {
    pack_spanning_trees(lt);
    FAIL("expected NoAddableEdge");
  } catch (const Error& e) {
    CHECK_EQ(e.code(), ErrorCode::NoAddableEdge);
  }
}

TEST_CASE("packing is deterministic and within the mu ceiling") {
  for (const Topology& t : fstest::handcrafted_suite()) {
    LogicalTopology lt = logical_for(t);
    Forest a = pack_spanning_trees(lt);
    Forest b = pack_spanning_trees(lt);
    CHECK_EQ(a.batches, b.batches);
    check_forest(a, lt);
    const std::int64_t n = static_cast<std::int64_t>(lt.compute.size());
    const std::int64_t m = static_cast<std::int64_t>(lt.graph.num_arcs());
    CHECK_LE(a.mu_computations, m * n * n);
  }
}
