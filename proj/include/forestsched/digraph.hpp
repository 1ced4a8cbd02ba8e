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

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

namespace forestsched {

using Capacity = std::int64_t;

/// Mutable integer-capacity digraph over vertices [0, n). One arc per ordered
/// pair; an arc disappears when its capacity drops to zero. Neighbour maps
/// are ordered, so iteration order follows vertex index.
class CapacityDigraph {
 public:
  explicit CapacityDigraph(int num_vertices = 0);

  int size() const { return static_cast<int>(out_.size()); }
  std::size_t num_arcs() const { return num_arcs_; }

  Capacity capacity(int tail, int head) const;
  /// Adds delta (possibly negative) to arc (tail, head). Self loops and
  /// negative results are rejected.
  void add(int tail, int head, Capacity delta);

  const std::map<int, Capacity>& out(int v) const { return out_[v]; }
  const std::map<int, Capacity>& in(int v) const { return in_[v]; }
  Capacity out_capacity(int v) const;
  Capacity in_capacity(int v) const;

  template <class Fn>
  void for_each_arc(Fn&& fn) const {
    for (int u = 0; u < size(); ++u) {
      for (const auto& [v, c] : out_[u]) fn(u, v, c);
    }
  }

  bool operator==(const CapacityDigraph&) const = default;

 private:
  std::vector<std::map<int, Capacity>> out_;
  std::vector<std::map<int, Capacity>> in_;
  std::size_t num_arcs_ = 0;
};

}  // namespace forestsched
