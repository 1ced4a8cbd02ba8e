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

#include "forestsched/verify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "forestsched/error.hpp"
#include "json.hpp"

namespace forestsched {

namespace {

constexpr int kMaxBruteForceVertices = 22;

std::vector<int> mask_members(std::uint32_t mask, int n) {
  std::vector<int> out;
  for (int v = 0; v < n; ++v) {
    if (mask >> v & 1u) out.push_back(v);
  }
  return out;
}

struct PhaseCheck {
  const Topology& t;
  const OptimalityResult& meta;
  ValidationReport& report;

  void fail(ViolationKind kind, std::string detail) {
    report.violations.push_back(ScheduleViolation{kind, std::move(detail)});
  }

  std::optional<int> compute_index(const NodeId& id) {
    auto v = t.index_of(id);
    if (!v || !t.node(*v).is_compute()) return std::nullopt;
    return v;
  }

  void roots(const Phase& p) {
    std::map<NodeId, Capacity> per_root;
    for (const RootSchedule& r : p.roots) {
      if (!compute_index(r.root)) {
        fail(ViolationKind::kWrongRootCount, "root " + r.root.str() + " is not a compute node");
        continue;
      }
      for (const ScheduleBatch& b : r.batches) per_root[r.root] += b.multiplicity;
    }
    for (int c : t.compute_indices()) {
      Capacity m = per_root.count(t.node(c).id) ? per_root[t.node(c).id] : 0;
      if (m != meta.k) {
        fail(ViolationKind::kWrongRootCount,
             "root " + t.node(c).id.str() + " has " + std::to_string(m) + " trees, expected " +
                 std::to_string(meta.k));
      }
    }
  }

  // p is in broadcast form (edges parent -> child, elided prefixes).
  void batch(const NodeId& root, const ScheduleBatch& b, bool reduce) {
    const std::string where = "batch of " + root.str();
    std::map<NodeId, std::vector<const ScheduleEdge*>> children;
    std::set<NodeId> has_parent;
    bool tree_ok = true;
    for (const ScheduleEdge& e : b.edges) {
      if (!compute_index(e.src) || !compute_index(e.dst)) {
        fail(ViolationKind::kNotATree,
             where + ": edge " + e.src.str() + "->" + e.dst.str() + " leaves the compute nodes");
        tree_ok = false;
        continue;
      }
      if (e.dst == root || !has_parent.insert(e.dst).second) {
        fail(ViolationKind::kNotATree, where + ": " + e.dst.str() + " has two parents");
        tree_ok = false;
      }
      children[e.src].push_back(&e);
    }
    std::set<NodeId> reached{root};
    std::vector<NodeId> stack{root};
    std::size_t walked = 0;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (const ScheduleEdge* e : children[u]) {
        ++walked;
        if (reached.insert(e->dst).second) stack.push_back(e->dst);
      }
    }
    if (tree_ok && walked != b.edges.size()) {
      fail(ViolationKind::kNotATree, where + ": edges unreachable from the root");
    }
    for (int c : t.compute_indices()) {
      if (!reached.count(t.node(c).id)) {
        fail(ViolationKind::kNotSpanning, where + " misses " + t.node(c).id.str());
      }
    }

    // Physical paths must realise each edge, then deliver by fixed point.
    for (const ScheduleEdge& e : b.edges) {
      Capacity total = 0;
      for (const PhysicalPath& path : e.paths) {
        total += path.multiplicity;
        if (path.nodes.size() < 2 || path.nodes.front() != e.src || path.nodes.back() != e.dst) {
          fail(ViolationKind::kDeliveryGap,
               where + ": a path of " + e.src.str() + "->" + e.dst.str() + " has wrong endpoints");
        }
      }
      if (total != b.multiplicity) {
        fail(ViolationKind::kDeliveryGap,
             where + ": " + e.src.str() + "->" + e.dst.str() + " carries " +
                 std::to_string(total) + " of " + std::to_string(b.multiplicity));
      }
    }
    auto capable = [&](const NodeId& id) {
      auto v = t.index_of(id);
      if (!v) return false;
      const Node& n = t.node(*v);
      return !n.is_compute() && (reduce ? n.aggregation : n.multicast);
    };
    std::set<NodeId> has{root};
    std::set<NodeId> held;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const ScheduleEdge& e : b.edges) {
        for (const PhysicalPath& path : e.paths) {
          if (path.nodes.size() < 2 || path.nodes.front() != e.src || path.nodes.back() != e.dst) {
            continue;
          }
          const std::size_t start = static_cast<std::size_t>(path.elided_hops);
          const NodeId& from = path.nodes[start];
          bool fed = start == 0 ? has.count(from) > 0 : capable(from) && held.count(from) > 0;
          if (!fed) continue;
          if (has.insert(path.nodes.back()).second) changed = true;
          if (path.multiplicity != b.multiplicity) continue;
          for (std::size_t j = start; j + 1 < path.nodes.size(); ++j) {
            if (capable(path.nodes[j]) && held.insert(path.nodes[j]).second) changed = true;
          }
        }
      }
    }
    for (int c : t.compute_indices()) {
      if (!has.count(t.node(c).id)) {
        fail(ViolationKind::kDeliveryGap, where + ": data never reaches " + t.node(c).id.str());
      }
    }
  }
};

Rational phase_time(const std::vector<Capacity>& usage, const Topology& t, std::int64_t k) {
  Rational worst(0);
  const Capacity denom_base = checked_mul(t.num_compute(), k);
  for (std::size_t i = 0; i < usage.size(); ++i) {
    if (usage[i] == 0) continue;
    Rational time(usage[i], checked_mul(denom_base, t.links()[i].bandwidth));
    worst = std::max(worst, time);
  }
  return worst;
}

}  // namespace

BottleneckOracle brute_force_bottleneck(const Topology& t) {
  const int n = t.num_nodes();
  if (n > kMaxBruteForceVertices) {
    throw Error(ErrorCode::TooLarge, std::to_string(n) + " vertices exceed the " +
                                         std::to_string(kMaxBruteForceVertices) +
                                         "-vertex enumeration budget");
  }
  std::vector<std::vector<std::pair<int, Capacity>>> out(n), in(n);
  for (std::size_t i = 0; i < t.links().size(); ++i) {
    out[t.link_src(i)].emplace_back(t.link_dst(i), t.links()[i].bandwidth);
    in[t.link_dst(i)].emplace_back(t.link_src(i), t.links()[i].bandwidth);
  }
  const Capacity n_compute = t.num_compute();

  std::uint32_t mask = 0;
  Capacity exit_bw = 0;
  Capacity count = 0;
  bool found = false;
  std::uint32_t best_mask = 0;
  Capacity best_count = 0, best_exit = 1;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t step = 1; step < total; ++step) {
    // Gray code: flip the lowest set bit position of step.
    int v = __builtin_ctzll(step);
    const bool adding = !(mask >> v & 1u);
    for (const auto& [u, c] : out[v]) {
      if (!(mask >> u & 1u)) exit_bw += adding ? c : -c;
    }
    for (const auto& [u, c] : in[v]) {
      if (mask >> u & 1u) exit_bw += adding ? -c : c;
    }
    mask ^= 1u << v;
    if (t.node(v).is_compute()) count += adding ? 1 : -1;

    if (count == n_compute || exit_bw == 0) continue;
    const __int128 lhs = static_cast<__int128>(count) * best_exit;
    const __int128 rhs = static_cast<__int128>(best_count) * exit_bw;
    bool better = !found || lhs > rhs;
    if (found && lhs == rhs) {
      int size = __builtin_popcount(mask);
      int best_size = __builtin_popcount(best_mask);
      better = size < best_size ||
               (size == best_size && mask_members(mask, n) < mask_members(best_mask, n));
    }
    if (better) {
      found = true;
      best_mask = mask;
      best_count = count;
      best_exit = exit_bw;
    }
  }
  if (!found) {
    throw Error(ErrorCode::PreconditionViolation, "no cut with positive exit bandwidth");
  }
  BottleneckOracle result;
  result.witness.members = mask_members(best_mask, n);
  result.witness.compute_count = best_count;
  result.witness.exit_bandwidth = best_exit;
  result.witness.ratio = Rational(best_count, best_exit);
  result.inv_x_star = result.witness.ratio;
  return result;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kNotSpanning: return "NotSpanning";
    case ViolationKind::kNotATree: return "NotATree";
    case ViolationKind::kWrongRootCount: return "WrongRootCount";
    case ViolationKind::kCapacityExceeded: return "CapacityExceeded";
    case ViolationKind::kDeliveryGap: return "DeliveryGap";
  }
  return "Unknown";
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [&](const ScheduleViolation& v) { return v.kind == kind; });
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json j;
  j["ok"] = ok;
  j["achieved_time"] = achieved_time.str();
  j["bound_time"] = bound_time.str();
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const ScheduleViolation& v : violations) {
    list.push_back({{"kind", std::string(to_string(v.kind))}, {"detail", v.detail}});
  }
  j["violations"] = list;
  return j.dump(2) + "\n";
}

std::vector<Capacity> link_usage(const Phase& phase, const Topology& t) {
  std::vector<Capacity> usage(t.links().size(), 0);
  for (const RootSchedule& r : phase.roots) {
    for (const ScheduleBatch& b : r.batches) {
      for (const ScheduleEdge& e : b.edges) {
        for (const PhysicalPath& p : e.paths) {
          for (const auto& [a, c] : retained_links(p, phase.collective)) {
            auto u = t.index_of(a);
            auto v = t.index_of(c);
            if (!u || !v) continue;
            if (auto link = t.link_between(*u, *v)) {
              usage[*link] = checked_add(usage[*link], p.multiplicity);
            }
          }
        }
      }
    }
  }
  return usage;
}

Rational congestion_time(const Schedule& s, const Topology& t) {
  Rational total(0);
  for (const Phase& p : s.phases) total += phase_time(link_usage(p, t), t, s.meta.k);
  return total;
}

ValidationReport validate_schedule(const Schedule& s, const Topology& t,
                                   const OptimalityResult& meta) {
  ValidationReport report;
  PhaseCheck check{t, meta, report};
  const std::size_t expected_phases = s.collective == Collective::kAllreduce ? 2 : 1;
  if (s.phases.size() != expected_phases) {
    check.fail(ViolationKind::kWrongRootCount, "unexpected number of phases");
  }
  Rational achieved(0);
  for (const Phase& phase : s.phases) {
    const bool reduce = phase.collective == Collective::kReduceScatter;
    check.roots(phase);
    Schedule tmp{phase.collective, s.meta, {phase}};
    const Phase bcast = reduce ? reverse_for_reduce_scatter(tmp).phases[0] : phase;
    for (const RootSchedule& r : bcast.roots) {
      for (const ScheduleBatch& b : r.batches) check.batch(r.root, b, reduce);
    }

    for (const RootSchedule& r : phase.roots) {
      for (const ScheduleBatch& b : r.batches) {
        for (const ScheduleEdge& e : b.edges) {
          for (const PhysicalPath& p : e.paths) {
            for (const auto& [a, c] : retained_links(p, phase.collective)) {
              auto u = t.index_of(a);
              auto v = t.index_of(c);
              if (!u || !v || !t.link_between(*u, *v)) {
                check.fail(ViolationKind::kCapacityExceeded,
                           "hop " + a.str() + "->" + c.str() + " is not a link");
              }
            }
          }
        }
      }
    }
    std::vector<Capacity> usage = link_usage(phase, t);
    for (std::size_t i = 0; i < usage.size(); ++i) {
      Rational limit = meta.U * Rational(t.links()[i].bandwidth);
      if (Rational(usage[i]) > limit) {
        check.fail(ViolationKind::kCapacityExceeded,
                   "link " + t.links()[i].src.str() + "->" + t.links()[i].dst.str() +
                       " carries " + std::to_string(usage[i]) + " > " + limit.str());
      }
    }
    achieved += phase_time(usage, t, meta.k);
  }
  report.achieved_time = achieved;
  report.bound_time = meta.inv_x_star / Rational(t.num_compute()) *
                      Rational(static_cast<std::int64_t>(expected_phases));
  report.ok = report.violations.empty() && report.achieved_time == report.bound_time;
  return report;
}

}  // namespace forestsched
