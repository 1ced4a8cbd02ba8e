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

#include "forestsched/schedule.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "forestsched/error.hpp"
#include "json.hpp"

namespace forestsched {

namespace {

using json = nlohmann::ordered_json;

bool is_reduce(Collective c) { return c == Collective::kReduceScatter; }

Phase reverse_phase(const Phase& p) {
  Phase out;
  out.collective =
      is_reduce(p.collective) ? Collective::kAllgather : Collective::kReduceScatter;
  for (const RootSchedule& r : p.roots) {
    RootSchedule rr{r.root, {}};
    for (const ScheduleBatch& b : r.batches) {
      ScheduleBatch rb{b.multiplicity, {}};
      for (const ScheduleEdge& e : b.edges) {
        ScheduleEdge re{e.dst, e.src, {}};
        for (const PhysicalPath& path : e.paths) {
          PhysicalPath rp = path;
          std::reverse(rp.nodes.begin(), rp.nodes.end());
          re.paths.push_back(std::move(rp));
        }
        rb.edges.push_back(std::move(re));
      }
      rr.batches.push_back(std::move(rb));
    }
    out.roots.push_back(std::move(rr));
  }
  return out;
}

// Broadcast-form pruning: walk each tree from its root (children in id
// order) and cut the prefix of any path that re-enters a capable switch
// already holding the data.
Phase prune_broadcast(const Phase& p, const Topology& t, bool aggregation) {
  auto capable = [&](const NodeId& id) {
    const Node& n = t.node(t.index_of_checked(id));
    return !n.is_compute() && (aggregation ? n.aggregation : n.multicast);
  };
  Phase out = p;
  for (RootSchedule& r : out.roots) {
    for (ScheduleBatch& b : r.batches) {
      std::map<NodeId, std::vector<std::size_t>> children;
      for (std::size_t i = 0; i < b.edges.size(); ++i) children[b.edges[i].src].push_back(i);
      for (auto& [src, list] : children) {
        std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t c) {
          return b.edges[a].dst < b.edges[c].dst;
        });
      }
      std::set<NodeId> held;
      std::set<NodeId> seen{r.root};
      std::deque<NodeId> queue{r.root};
      while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        auto it = children.find(u);
        if (it == children.end()) continue;
        for (std::size_t ei : it->second) {
          ScheduleEdge& e = b.edges[ei];
          for (PhysicalPath& path : e.paths) {
            path.elided_hops = 0;
            for (std::size_t j = path.nodes.size() - 1; j-- > 1;) {
              if (capable(path.nodes[j]) && held.count(path.nodes[j])) {
                path.elided_hops = static_cast<int>(j);
                break;
              }
            }
            if (path.multiplicity == b.multiplicity) {
              for (std::size_t j = path.elided_hops; j + 1 < path.nodes.size(); ++j) {
                if (capable(path.nodes[j])) held.insert(path.nodes[j]);
              }
            }
          }
          if (seen.insert(e.dst).second) queue.push_back(e.dst);
        }
      }
    }
  }
  return out;
}

json path_to_json(const PhysicalPath& p) {
  json j;
  json nodes = json::array();
  for (const NodeId& n : p.nodes) nodes.push_back(n.str());
  j["path"] = nodes;
  j["multiplicity"] = p.multiplicity;
  if (p.elided_hops > 0) j["elided_hops"] = p.elided_hops;
  return j;
}

json roots_to_json(const Phase& phase) {
  json roots = json::array();
  for (const RootSchedule& r : phase.roots) {
    json jr;
    jr["root"] = r.root.str();
    json batches = json::array();
    for (const ScheduleBatch& b : r.batches) {
      json jb;
      jb["multiplicity"] = b.multiplicity;
      json edges = json::array();
      json pruned = json::array();
      for (const ScheduleEdge& e : b.edges) {
        json je;
        je["src"] = e.src.str();
        je["dst"] = e.dst.str();
        json paths = json::array();
        for (const PhysicalPath& p : e.paths) {
          paths.push_back(path_to_json(p));
          for (const auto& [a, c] : elided_links(p, phase.collective)) {
            pruned.push_back(json{{"src", a.str()}, {"dst", c.str()}});
          }
        }
        je["paths"] = paths;
        edges.push_back(je);
      }
      jb["edges"] = edges;
      jb["pruned"] = pruned;
      batches.push_back(jb);
    }
    jr["batches"] = batches;
    roots.push_back(jr);
  }
  return roots;
}

Capacity positive_int(const json& j, const char* what) {
  if (!j.is_number_integer()) {
    throw Error(ErrorCode::MalformedSchedule, std::string(what) + " must be an integer");
  }
  Capacity v = j.get<Capacity>();
  if (v < 0) throw Error(ErrorCode::MalformedSchedule, std::string(what) + " is negative");
  return v;
}

Phase roots_from_json(const json& roots, Collective c) {
  Phase phase;
  phase.collective = c;
  for (const json& jr : roots) {
    RootSchedule r{NodeId(jr.at("root").get<std::string>()), {}};
    for (const json& jb : jr.at("batches")) {
      ScheduleBatch b{positive_int(jb.at("multiplicity"), "multiplicity"), {}};
      for (const json& je : jb.at("edges")) {
        ScheduleEdge e{NodeId(je.at("src").get<std::string>()),
                       NodeId(je.at("dst").get<std::string>()),
                       {}};
        for (const json& jp : je.at("paths")) {
          PhysicalPath p;
          for (const json& n : jp.at("path")) p.nodes.emplace_back(n.get<std::string>());
          p.multiplicity = positive_int(jp.at("multiplicity"), "multiplicity");
          if (jp.contains("elided_hops")) {
            p.elided_hops = static_cast<int>(positive_int(jp["elided_hops"], "elided_hops"));
          }
          if (p.nodes.size() < 2 ||
              p.elided_hops >= static_cast<int>(p.nodes.size()) - 1) {
            throw Error(ErrorCode::MalformedSchedule, "path too short");
          }
          e.paths.push_back(std::move(p));
        }
        b.edges.push_back(std::move(e));
      }
      r.batches.push_back(std::move(b));
    }
    phase.roots.push_back(std::move(r));
  }
  return phase;
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string_view to_string(Collective c) {
  switch (c) {
    case Collective::kAllgather: return "allgather";
    case Collective::kReduceScatter: return "reduce_scatter";
    case Collective::kAllreduce: return "allreduce";
  }
  return "unknown";
}

Collective parse_collective(std::string_view text) {
  if (text == "allgather") return Collective::kAllgather;
  if (text == "reduce_scatter" || text == "reduce-scatter") return Collective::kReduceScatter;
  if (text == "allreduce") return Collective::kAllreduce;
  throw Error(ErrorCode::MalformedSchedule, "unknown collective " + std::string(text));
}

ScheduleMeta make_meta(const Topology& t, const OptimalityResult& opt, bool fixed_k) {
  ScheduleMeta m;
  m.num_compute = t.num_compute();
  m.k = opt.k;
  m.inv_x = opt.inv_x_star;
  m.y = opt.y;
  m.U = opt.U;
  m.topology_digest = topology_digest(t);
  m.fixed_k = fixed_k;
  return m;
}

Schedule assemble_allgather(const Forest& forest, const EMap& emap,
                            const ScaledTopology& original, const ScheduleMeta& meta) {
  const Topology& t = original.topology;
  PathRecovery recovery(emap, original);
  Schedule s;
  s.collective = Collective::kAllgather;
  s.meta = meta;
  Phase phase;
  phase.collective = Collective::kAllgather;
  for (const TreeBatch& tb : forest.batches) {
    if (phase.roots.empty() || phase.roots.back().root != t.node(tb.root).id) {
      phase.roots.push_back(RootSchedule{t.node(tb.root).id, {}});
    }
    ScheduleBatch b{tb.multiplicity, {}};
    for (const auto& [x, y] : tb.edges) {
      ScheduleEdge e{t.node(x).id, t.node(y).id, {}};
      for (const PathChunk& chunk : recovery.expand(x, y, tb.multiplicity)) {
        PhysicalPath p;
        for (int v : chunk.nodes) p.nodes.push_back(t.node(v).id);
        p.multiplicity = chunk.multiplicity;
        e.paths.push_back(std::move(p));
      }
      b.edges.push_back(std::move(e));
    }
    phase.roots.back().batches.push_back(std::move(b));
  }
  s.phases.push_back(std::move(phase));
  return s;
}

Schedule reverse_for_reduce_scatter(const Schedule& s) {
  if (s.collective == Collective::kAllreduce) {
    throw Error(ErrorCode::PreconditionViolation, "cannot reverse an allreduce schedule");
  }
  Schedule out;
  out.collective = is_reduce(s.collective) ? Collective::kAllgather
                                            : Collective::kReduceScatter;
  out.meta = s.meta;
  for (const Phase& p : s.phases) out.phases.push_back(reverse_phase(p));
  return out;
}

Schedule combine_allreduce(const Schedule& rs, const Schedule& ag) {
  if (rs.collective != Collective::kReduceScatter || ag.collective != Collective::kAllgather) {
    throw Error(ErrorCode::MismatchedForest,
                "allreduce needs a reduce_scatter and an allgather schedule");
  }
  const ScheduleMeta& a = rs.meta;
  const ScheduleMeta& b = ag.meta;
  if (a.topology_digest != b.topology_digest || a.num_compute != b.num_compute ||
      a.k != b.k || a.U != b.U || a.inv_x != b.inv_x || a.fixed_k != b.fixed_k) {
    throw Error(ErrorCode::MismatchedForest,
                "reduce_scatter and allgather schedules were built for different "
                "topologies or parameters");
  }
  Schedule out;
  out.collective = Collective::kAllreduce;
  out.meta = ag.meta;
  out.phases.push_back(rs.phases.at(0));
  out.phases.push_back(ag.phases.at(0));
  return out;
}

Schedule prune_multicast(const Schedule& s, const Topology& t) {
  Schedule out = s;
  for (Phase& p : out.phases) {
    if (p.collective == Collective::kAllgather) p = prune_broadcast(p, t, false);
  }
  return out;
}

Schedule prune_aggregation(const Schedule& s, const Topology& t) {
  Schedule out = s;
  for (Phase& p : out.phases) {
    if (is_reduce(p.collective)) p = reverse_phase(prune_broadcast(reverse_phase(p), t, true));
  }
  return out;
}

bool uniform_compute_bandwidth(const Topology& t) {
  const std::vector<int>& c = t.compute_indices();
  for (int v : c) {
    if (t.ingress(v) != t.ingress(c.front()) || t.egress(v) != t.egress(c.front())) {
      return false;
    }
  }
  return true;
}

std::vector<std::pair<NodeId, NodeId>> elided_links(const PhysicalPath& p,
                                                    Collective phase) {
  std::vector<std::pair<NodeId, NodeId>> out;
  const std::size_t hops = p.nodes.size() - 1;
  const std::size_t cut = static_cast<std::size_t>(p.elided_hops);
  for (std::size_t h = 0; h < hops; ++h) {
    bool elided = is_reduce(phase) ? h >= hops - cut : h < cut;
    if (elided) out.emplace_back(p.nodes[h], p.nodes[h + 1]);
  }
  return out;
}

std::vector<std::pair<NodeId, NodeId>> retained_links(const PhysicalPath& p,
                                                      Collective phase) {
  std::vector<std::pair<NodeId, NodeId>> out;
  const std::size_t hops = p.nodes.size() - 1;
  const std::size_t cut = static_cast<std::size_t>(p.elided_hops);
  for (std::size_t h = 0; h < hops; ++h) {
    bool elided = is_reduce(phase) ? h >= hops - cut : h < cut;
    if (!elided) out.emplace_back(p.nodes[h], p.nodes[h + 1]);
  }
  return out;
}

std::string schedule_to_json(const Schedule& s) {
  json j;
  j["collective"] = std::string(to_string(s.collective));
  j["num_compute_nodes"] = s.meta.num_compute;
  j["trees_per_root"] = s.meta.k;
  j["optimal_inv_x"] = s.meta.inv_x.str();
  j["tree_bandwidth"] = s.meta.y.str();
  j["scale_U"] = s.meta.U.str();
  j["fixed_k"] = s.meta.fixed_k;
  j["topology_digest"] = s.meta.topology_digest;
  if (s.collective == Collective::kAllreduce) {
    json phases = json::array();
    for (const Phase& p : s.phases) {
      json jp;
      jp["collective"] = std::string(to_string(p.collective));
      jp["roots"] = roots_to_json(p);
      phases.push_back(jp);
    }
    j["phases"] = phases;
  } else {
    j["roots"] = s.phases.empty() ? json::array() : roots_to_json(s.phases[0]);
  }
  return j.dump(2) + "\n";
}

Schedule parse_schedule(std::string_view text) {
  try {
    json j = json::parse(text);
    Schedule s;
    s.collective = parse_collective(j.at("collective").get<std::string>());
    s.meta.num_compute = positive_int(j.at("num_compute_nodes"), "num_compute_nodes");
    s.meta.k = positive_int(j.at("trees_per_root"), "trees_per_root");
    s.meta.inv_x = Rational::parse(j.at("optimal_inv_x").get<std::string>());
    s.meta.y = Rational::parse(j.at("tree_bandwidth").get<std::string>());
    s.meta.U = Rational::parse(j.at("scale_U").get<std::string>());
    s.meta.fixed_k = j.value("fixed_k", false);
    s.meta.topology_digest = j.value("topology_digest", std::string());
    if (s.collective == Collective::kAllreduce) {
      for (const json& jp : j.at("phases")) {
        Collective c = parse_collective(jp.at("collective").get<std::string>());
        if (c == Collective::kAllreduce) {
          throw Error(ErrorCode::MalformedSchedule, "nested allreduce phase");
        }
        s.phases.push_back(roots_from_json(jp.at("roots"), c));
      }
      if (s.phases.size() != 2) {
        throw Error(ErrorCode::MalformedSchedule, "allreduce needs two phases");
      }
    } else {
      s.phases.push_back(roots_from_json(j.at("roots"), s.collective));
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedSchedule, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedSchedule) throw;
    throw Error(ErrorCode::MalformedSchedule, e.what());
  }
}

std::string schedule_to_dot(const Schedule& s) {
  std::ostringstream out;
  for (const Phase& p : s.phases) {
    for (const RootSchedule& r : p.roots) {
      if (r.batches.empty()) continue;
      std::string name = r.root.str();
      if (s.collective == Collective::kAllreduce) {
        name = std::string(to_string(p.collective)) + "/" + name;
      }
      out << "digraph " << dot_quote(name) << " {\n";
      out << "  " << dot_quote(r.root.str()) << " [shape=doublecircle];\n";
      for (const ScheduleEdge& e : r.batches.front().edges) {
        for (const PhysicalPath& path : e.paths) {
          for (const auto& [a, b] : retained_links(path, p.collective)) {
            out << "  " << dot_quote(a.str()) << " -> " << dot_quote(b.str())
                << " [label=\"" << path.multiplicity << "\"];\n";
          }
        }
      }
      out << "}\n";
    }
  }
  return out.str();
}

namespace {

struct AllgatherBuild {
  Schedule schedule;
  OptimalityResult optimum;
  GenerateStats stats;
};

AllgatherBuild build_allgather(const Topology& t, const GenerateOptions& options) {
  AllgatherBuild out;
  ScaledTopology scaled;
  if (options.fixed_k) {
    FixedKResult fk = fixed_k_search(t, *options.fixed_k, options.pool);
    out.optimum.inv_x_star = fk.achieved_inv_throughput;
    out.optimum.U = fk.U_star;
    out.optimum.k = fk.k;
    out.optimum.y = fk.U_star.reciprocal();
    out.optimum.search_iterations = fk.search_iterations;
    scaled = ScaledTopology{t, fk.floored_capacities, fk.U_star, fk.k};
  } else {
    out.optimum = bottleneck_search(t, options.pool);
    scaled = scale_capacities(t, out.optimum.U);
    scaled.k = out.optimum.k;
  }
  SplitOptions split_options;
  split_options.groups = options.groups;
  split_options.pool = options.pool;
  SplitResult split = remove_switches(scaled, split_options);
  Forest forest = pack_spanning_trees(split.logical);
  out.stats.gamma_evaluations = split.stats.gamma_evaluations;
  out.stats.mu_computations = forest.mu_computations;
  out.stats.logical_arcs = static_cast<std::int64_t>(split.logical.graph.num_arcs());
  out.schedule = assemble_allgather(forest, split.emap, scaled,
                                    make_meta(t, out.optimum, options.fixed_k.has_value()));
  return out;
}

void add_stats(GenerateStats& a, const GenerateStats& b) {
  a.gamma_evaluations += b.gamma_evaluations;
  a.mu_computations += b.mu_computations;
  a.logical_arcs += b.logical_arcs;
}

}  // namespace

GenerateResult generate_schedule(const Topology& t, const GenerateOptions& options) {
  require_valid(t);
  GenerateResult result;
  Schedule ag, rs;
  if (options.collective != Collective::kReduceScatter) {
    AllgatherBuild b = build_allgather(t, options);
    ag = options.prune ? prune_multicast(b.schedule, t) : b.schedule;
    result.optimum = b.optimum;
    add_stats(result.stats, b.stats);
  }
  if (options.collective != Collective::kAllgather) {
    // Out-trees of the transposed network reverse into in-trees of t.
    AllgatherBuild b = build_allgather(transpose(t), options);
    rs = reverse_for_reduce_scatter(b.schedule);
    rs.meta.topology_digest = topology_digest(t);
    if (options.prune) rs = prune_aggregation(rs, t);
    if (options.collective == Collective::kReduceScatter) result.optimum = b.optimum;
    add_stats(result.stats, b.stats);
  }
  switch (options.collective) {
    case Collective::kAllgather: result.schedule = std::move(ag); break;
    case Collective::kReduceScatter: result.schedule = std::move(rs); break;
    case Collective::kAllreduce: result.schedule = combine_allreduce(rs, ag); break;
  }
  return result;
}

}  // namespace forestsched
