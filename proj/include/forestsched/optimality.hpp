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
#include <vector>

#include "forestsched/parallel.hpp"
#include "forestsched/rational.hpp"
#include "forestsched/topology.hpp"

namespace forestsched {

/// One probe of a binary search: the interval before the probe, the probed
/// value and whether it was feasible.
struct SearchStep {
  Rational lo;
  Rational hi;
  Rational probe;
  bool feasible = false;
};

struct ScheduleParams {
  Rational U;
  std::int64_t k = 1;
  Rational y;
};

struct OptimalityResult {
  Rational inv_x_star;
  Rational U;
  std::int64_t k = 1;
  Rational y;
  int search_iterations = 0;
  Rational final_lo;
  Rational final_hi;
  std::vector<SearchStep> history;
};

/// min over compute v of B-(v).
Capacity min_compute_ingress(const Topology& t);

/// True iff every compute node receives N*x from the aux source at
/// 1/x = inv_x, i.e. inv_x >= 1/x*.
bool allgather_feasible(const Topology& t, const Rational& inv_x,
                        ParallelExecutor* pool = nullptr);

/// Exact 1/x* by binary search on 1/x plus fraction recovery, with the
/// schedule parameters attached. t must be valid.
OptimalityResult bottleneck_search(const Topology& t,
                                   ParallelExecutor* pool = nullptr);

/// The fraction in [lo, hi] with denominator <= max_den. Throws NoFraction
/// if there is none, or if there is more than one.
Rational recover_fraction(const Rational& lo, const Rational& hi,
                          std::int64_t max_den);

/// For 1/x* = p/q: U = p / gcd(q, b...), k = U x*, y = 1/U.
ScheduleParams derive_schedule_params(const Rational& inv_x_star,
                                      const std::vector<Capacity>& bandwidths);

struct FixedKResult {
  std::int64_t k = 1;
  Rational U_star;
  Rational achieved_inv_throughput;
  std::vector<Capacity> floored_capacities;  // per topology link
  bool floored_eulerian = false;
  int search_iterations = 0;
};

/// floor(U * b_e) for every link.
std::vector<Capacity> floor_capacities(const Topology& t, const Rational& U);

/// k trees per compute node fit into G(floor(U b_e)).
bool floored_trees_fit(const Topology& t, const Rational& U, std::int64_t k,
                       ParallelExecutor* pool = nullptr);

/// Smallest U such that k trees per compute node fit into G(floor(U b_e)).
/// Does not require the floored graph to be Eulerian.
FixedKResult fixed_k_bound(const Topology& t, std::int64_t k,
                           ParallelExecutor* pool = nullptr);

/// fixed_k_bound, additionally requiring the floored graph to be Eulerian
/// so that it can be split; throws NotEulerianAfterFloor otherwise.
FixedKResult fixed_k_search(const Topology& t, std::int64_t k,
                            ParallelExecutor* pool = nullptr);

}  // namespace forestsched
