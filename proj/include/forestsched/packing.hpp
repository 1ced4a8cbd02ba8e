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
#include <utility>
#include <vector>

#include "forestsched/digraph.hpp"
#include "forestsched/splitting.hpp"

namespace forestsched {

/// m identical out-trees rooted at `root`. `vertices` lists the tree's
/// vertices in the order they were reached; `edges` are (parent, child)
/// in the same order.
struct TreeBatch {
  int root = -1;
  Capacity multiplicity = 0;
  std::vector<int> vertices;
  std::vector<std::pair<int, int>> edges;

  bool contains(int v) const;
  bool operator==(const TreeBatch&) const = default;
};

struct Forest {
  /// Sorted by root, then by creation order.
  std::vector<TreeBatch> batches;
  /// Capacity left on every logical arc.
  CapacityDigraph residual;
  std::int64_t mu_computations = 0;
};

/// Largest multiplicity with which arc (x, y) can join batches[current]
/// while the remaining demands stay packable in `residual`. Batches with
/// num_compute vertices count as complete.
Capacity compute_mu(const CapacityDigraph& residual,
                    const std::vector<TreeBatch>& batches, std::size_t current,
                    int x, int y, std::size_t num_compute);

/// k spanning out-trees per compute node of lt, as batches. Roots are
/// processed in id order, each batch grown to completion before the next;
/// split-off copies join the end of the queue.
Forest pack_spanning_trees(const LogicalTopology& lt);

}  // namespace forestsched
