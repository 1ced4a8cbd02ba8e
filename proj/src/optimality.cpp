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

#include "forestsched/optimality.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "forestsched/error.hpp"
#include "forestsched/maxflow.hpp"

namespace forestsched {

namespace {

std::int64_t count_fractions(const Rational& lo, const Rational& hi,
                             std::int64_t max_den, std::int64_t stop_at) {
  std::int64_t found = 0;
  for (std::int64_t q = 1; q <= max_den && found < stop_at; ++q) {
    std::int64_t first = (lo * Rational(q)).ceil();
    std::int64_t last = (hi * Rational(q)).floor();
    for (std::int64_t p = first; p <= last && found < stop_at; ++p) {
      if (std::gcd(p, q) == 1) ++found;
    }
  }
  return found;
}

Capacity max_bandwidth(const Topology& t) {
  Capacity m = 0;
  for (const Link& l : t.links()) m = std::max(m, l.bandwidth);
  return m;
}

}  // namespace

Capacity min_compute_ingress(const Topology& t) {
  if (t.num_compute() == 0) {
    throw Error(ErrorCode::InvalidTopology, "no compute nodes");
  }
  Capacity m = t.ingress(t.compute_indices().front());
  for (int c : t.compute_indices()) m = std::min(m, t.ingress(c));
  return m;
}

bool allgather_feasible(const Topology& t, const Rational& inv_x,
                        ParallelExecutor* pool) {
  AuxNetwork aux = build_allgather_aux(t, inv_x);
  return all_sinks_reach(aux.graph, aux.source, aux.sinks, aux.required_flow(),
                         pool);
}

Rational recover_fraction(const Rational& lo, const Rational& hi,
                          std::int64_t max_den) {
  if (max_den < 1 || lo > hi || lo < Rational(0)) {
    throw Error(ErrorCode::PreconditionViolation,
                "recover_fraction needs 0 <= lo <= hi and max_den >= 1");
  }
  Rational best = simplest_between(lo, hi);
  if (best.den() > max_den) {
    throw Error(ErrorCode::NoFraction, "no fraction with denominator <= " +
                                           std::to_string(max_den) + " in [" +
                                           lo.str() + ", " + hi.str() + "]");
  }
  // Two distinct fractions with denominators <= X are at least 1/X^2 apart,
  // so narrow intervals hold at most one; otherwise count explicitly.
  Rational width = hi - lo;
  bool unique = width * Rational(max_den) * Rational(max_den) < Rational(1);
  if (!unique && count_fractions(lo, hi, max_den, 2) > 1) {
    throw Error(ErrorCode::NoFraction,
                "more than one fraction with denominator <= " +
                    std::to_string(max_den) + " in [" + lo.str() + ", " +
                    hi.str() + "]");
  }
  return best;
}

ScheduleParams derive_schedule_params(const Rational& inv_x_star,
                                      const std::vector<Capacity>& bandwidths) {
  if (inv_x_star <= Rational(0)) {
    throw Error(ErrorCode::PreconditionViolation, "1/x* must be positive");
  }
  std::int64_t g = inv_x_star.den();
  for (Capacity b : bandwidths) g = std::gcd(g, b);
  ScheduleParams params;
  params.U = Rational(inv_x_star.num(), g);
  params.k = inv_x_star.den() / g;
  params.y = params.U.reciprocal();
  return params;
}

OptimalityResult bottleneck_search(const Topology& t, ParallelExecutor* pool) {
  require_valid(t);
  const std::int64_t n = t.num_compute();
  const Capacity min_in = min_compute_ingress(t);
  const Rational tolerance(1, checked_mul(min_in, min_in));

  OptimalityResult result;
  Rational lo(n - 1, min_in);
  Rational hi(n - 1);
  while (hi - lo >= tolerance) {
    Rational mid = (lo + hi) / Rational(2);
    bool ok = allgather_feasible(t, mid, pool);
    result.history.push_back(SearchStep{lo, hi, mid, ok});
    if (ok) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++result.search_iterations;
  }
  result.final_lo = lo;
  result.final_hi = hi;
  result.inv_x_star = recover_fraction(lo, hi, min_in);
  if (!allgather_feasible(t, result.inv_x_star, pool)) {
    throw Error(ErrorCode::NoFraction,
                "recovered 1/x* = " + result.inv_x_star.str() + " is infeasible");
  }

  std::vector<Capacity> bandwidths;
  for (const Link& l : t.links()) bandwidths.push_back(l.bandwidth);
  ScheduleParams params = derive_schedule_params(result.inv_x_star, bandwidths);
  result.U = params.U;
  result.k = params.k;
  result.y = params.y;
  return result;
}

std::vector<Capacity> floor_capacities(const Topology& t, const Rational& U) {
  std::vector<Capacity> caps;
  caps.reserve(t.links().size());
  for (const Link& l : t.links()) caps.push_back((U * Rational(l.bandwidth)).floor());
  return caps;
}

bool floored_trees_fit(const Topology& t, const Rational& U, std::int64_t k,
                       ParallelExecutor* pool) {
  std::vector<Capacity> caps = floor_capacities(t, U);
  CapacityDigraph g(t.num_nodes());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (caps[i] > 0) g.add(t.link_src(i), t.link_dst(i), caps[i]);
  }
  return trees_fit(g, t.compute_indices(), k, pool);
}

FixedKResult fixed_k_bound(const Topology& t, std::int64_t k,
                           ParallelExecutor* pool) {
  if (k < 1) throw Error(ErrorCode::PreconditionViolation, "k must be >= 1");
  require_valid(t);
  const std::int64_t n = t.num_compute();
  const Capacity max_b = max_bandwidth(t);
  const Rational tolerance(1, checked_mul(max_b, max_b));

  FixedKResult result;
  result.k = k;
  Rational lo(checked_mul(n - 1, k), min_compute_ingress(t));
  Rational hi(checked_mul(n - 1, k));
  while (hi - lo >= tolerance) {
    Rational mid = (lo + hi) / Rational(2);
    if (floored_trees_fit(t, mid, k, pool)) {
      hi = mid;
    } else {
      lo = mid;
    }
    ++result.search_iterations;
  }
  result.U_star = recover_fraction(lo, hi, max_b);
  if (!floored_trees_fit(t, result.U_star, k, pool)) {
    throw Error(ErrorCode::NoFraction,
                "recovered U* = " + result.U_star.str() + " is infeasible");
  }
  result.achieved_inv_throughput = result.U_star / Rational(k);
  result.floored_capacities = floor_capacities(t, result.U_star);

  std::vector<Capacity> in(t.num_nodes(), 0), out(t.num_nodes(), 0);
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    out[t.link_src(i)] += result.floored_capacities[i];
    in[t.link_dst(i)] += result.floored_capacities[i];
  }
  result.floored_eulerian = in == out;
  return result;
}

FixedKResult fixed_k_search(const Topology& t, std::int64_t k,
                            ParallelExecutor* pool) {
  FixedKResult result = fixed_k_bound(t, k, pool);
  if (!result.floored_eulerian) {
    throw Error(ErrorCode::NotEulerianAfterFloor,
                "G(floor(U* b_e)) with U* = " + result.U_star.str() +
                    " is not Eulerian; switches cannot be split");
  }
  return result;
}

}  // namespace forestsched
