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

#include <string>
#include <string_view>
#include <vector>

#include "forestsched/optimality.hpp"
#include "forestsched/rational.hpp"
#include "forestsched/schedule.hpp"
#include "forestsched/topology.hpp"

namespace forestsched {

struct CutWitness {
  std::vector<int> members;  // vertex indices, ascending
  Capacity compute_count = 0;
  Capacity exit_bandwidth = 0;
  Rational ratio;
};

struct BottleneckOracle {
  Rational inv_x_star;
  CutWitness witness;
};

/// max |S ∩ Vc| / B+(S) over every S with S not containing all compute
/// nodes, by enumerating all 2^|V| subsets. Ties prefer the smallest |S|,
/// then the lexicographically smallest sorted index list.
BottleneckOracle brute_force_bottleneck(const Topology& t);

enum class ViolationKind {
  kNotSpanning,
  kNotATree,
  kWrongRootCount,
  kCapacityExceeded,
  kDeliveryGap,
};

std::string_view to_string(ViolationKind kind);

struct ScheduleViolation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  bool ok = false;
  std::vector<ScheduleViolation> violations;
  Rational achieved_time;  // per unit M
  Rational bound_time;     // per unit M

  bool has(ViolationKind kind) const;
  std::string to_json() const;
};

/// Per-link usage of a single phase (retained hops only), indexed like
/// t.links(). Hops that are not links of t are ignored here.
std::vector<Capacity> link_usage(const Phase& phase, const Topology& t);

/// max_e usage(e) / (N k b_e), summed over phases; per unit M.
Rational congestion_time(const Schedule& s, const Topology& t);

/// Rebuilds every check from the schedule and the topology alone, against
/// the given optimum (1/x* or U*/k, k and U).
ValidationReport validate_schedule(const Schedule& s, const Topology& t,
                                   const OptimalityResult& meta);

}  // namespace forestsched
