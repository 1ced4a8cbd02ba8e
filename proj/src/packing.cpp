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

#include "forestsched/packing.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "forestsched/error.hpp"
#include "forestsched/maxflow.hpp"

namespace forestsched {

bool TreeBatch::contains(int v) const {
  return std::find(vertices.begin(), vertices.end(), v) != vertices.end();
}

Capacity compute_mu(const CapacityDigraph& residual,
                    const std::vector<TreeBatch>& batches, std::size_t current,
                    int x, int y, std::size_t num_compute) {
  const TreeBatch& batch = batches[current];
  const Capacity g_xy = residual.capacity(x, y);
  if (g_xy <= 0 || batch.multiplicity <= 0) return 0;

  FlowGraph net(residual.size());
  residual.for_each_arc([&](int a, int b, Capacity c) { net.add_arc(a, b, c); });
  // Complete batches add m to the flow and m to the subtracted sum, so they
  // are left out entirely.
  Capacity others = 0;
  for (std::size_t j = 0; j < batches.size(); ++j) {
    const TreeBatch& other = batches[j];
    if (j == current || other.vertices.size() == num_compute) continue;
    others = checked_add(others, other.multiplicity);
    if (other.vertices.size() == 1) {
      if (other.vertices[0] != x) net.add_arc(x, other.vertices[0], other.multiplicity);
      continue;
    }
    int hub = net.add_vertex();
    net.add_arc(x, hub, other.multiplicity);
    for (int v : other.vertices) net.add_arc(hub, v, FlowGraph::kInfinite);
  }
  const Capacity cap = std::min(g_xy, batch.multiplicity);
  Capacity flow = max_flow(net, x, y, checked_add(others, cap)).value;
  return std::max<Capacity>(0, std::min(cap, flow - others));
}

Forest pack_spanning_trees(const LogicalTopology& lt) {
  const std::vector<int>& compute = lt.compute;
  const std::size_t n = compute.size();
  Forest forest;
  forest.residual = lt.graph;
  std::vector<TreeBatch>& batches = forest.batches;
  std::deque<std::size_t> queue;
  for (int r : compute) {
    batches.push_back(TreeBatch{r, lt.k, {r}, {}});
    queue.push_back(batches.size() - 1);
  }

  while (!queue.empty()) {
    const std::size_t cur = queue.front();
    queue.pop_front();
    std::vector<char> member(forest.residual.size(), 0);
    for (int v : batches[cur].vertices) member[v] = 1;

    while (batches[cur].vertices.size() < n) {
      bool added = false;
      // Frontier arcs in (tail, head) order.
      std::vector<std::pair<int, int>> frontier;
      for (int x = 0; x < forest.residual.size(); ++x) {
        if (!member[x]) continue;
        for (const auto& [y, c] : forest.residual.out(x)) {
          if (!member[y]) frontier.emplace_back(x, y);
        }
      }
      for (const auto& [x, y] : frontier) {
        Capacity mu = compute_mu(forest.residual, batches, cur, x, y, n);
        ++forest.mu_computations;
        if (mu == 0) continue;
        if (mu < batches[cur].multiplicity) {
          TreeBatch copy = batches[cur];
          copy.multiplicity -= mu;
          batches[cur].multiplicity = mu;
          batches.push_back(std::move(copy));
          queue.push_back(batches.size() - 1);
        }
        batches[cur].edges.emplace_back(x, y);
        batches[cur].vertices.push_back(y);
        member[y] = 1;
        forest.residual.add(x, y, -mu);
        added = true;
        break;
      }
      if (!added) {
        std::string arcs;
        for (const auto& [x, y] : frontier) {
          arcs += " " + std::to_string(x) + "->" + std::to_string(y);
        }
        throw Error(ErrorCode::NoAddableEdge,
                    "batch rooted at vertex " + std::to_string(batches[cur].root) +
                        " with " + std::to_string(batches[cur].vertices.size()) +
                        " vertices; frontier:" + (arcs.empty() ? " empty" : arcs));
      }
    }
  }

  std::stable_sort(batches.begin(), batches.end(),
                   [](const TreeBatch& a, const TreeBatch& b) { return a.root < b.root; });
  return forest;
}

}  // namespace forestsched
