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

#include "forestsched/digraph.hpp"

#include <string>

#include "forestsched/error.hpp"
#include "forestsched/rational.hpp"

namespace forestsched {

CapacityDigraph::CapacityDigraph(int num_vertices)
    : out_(num_vertices), in_(num_vertices) {}

Capacity CapacityDigraph::capacity(int tail, int head) const {
  auto it = out_[tail].find(head);
  return it == out_[tail].end() ? 0 : it->second;
}

void CapacityDigraph::add(int tail, int head, Capacity delta) {
  if (tail == head) {
    throw Error(ErrorCode::InvalidLink, "self loop on vertex " +
                                            std::to_string(tail));
  }
  if (delta == 0) return;
  Capacity next = checked_add(capacity(tail, head), delta);
  if (next < 0) {
    throw Error(ErrorCode::PreconditionViolation,
                "arc capacity would become negative");
  }
  if (next == 0) {
    out_[tail].erase(head);
    in_[head].erase(tail);
    --num_arcs_;
    return;
  }
  bool inserted = out_[tail].insert_or_assign(head, next).second;
  in_[head][tail] = next;
  if (inserted) ++num_arcs_;
}

Capacity CapacityDigraph::out_capacity(int v) const {
  Capacity total = 0;
  for (const auto& [w, c] : out_[v]) total = checked_add(total, c);
  return total;
}

Capacity CapacityDigraph::in_capacity(int v) const {
  Capacity total = 0;
  for (const auto& [w, c] : in_[v]) total = checked_add(total, c);
  return total;
}

}  // namespace forestsched
