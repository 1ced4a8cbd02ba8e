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

#include "forestsched/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "forestsched/error.hpp"
#include "forestsched/optimality.hpp"
#include "forestsched/schedule.hpp"
#include "forestsched/topology.hpp"
#include "forestsched/verify.hpp"
#include "json.hpp"

namespace forestsched {

namespace {

using json = nlohmann::ordered_json;

struct Config {
  std::string topology;
  std::string output;
  std::string schedule;
  std::string collective = "allgather";
  std::optional<std::int64_t> fixed_k;
  bool no_multicast = false;
  bool brute_force = false;
  std::string groups;
  unsigned threads = 0;
  bool json_out = false;
  GeneratorSpec synth;
  bool unidirectional = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MalformedJson, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MalformedJson, "cannot write " + path);
  f << text;
}

Topology load_topology(const Config& c) {
  Topology t = parse_topology(read_file(c.topology));
  require_valid(t);
  return t;
}

std::unique_ptr<ParallelExecutor> make_pool(const Config& c) {
  if (c.threads == 1) return nullptr;
  auto pool = std::make_unique<ParallelExecutor>(c.threads);
  if (pool->threads() == 1) return nullptr;
  return pool;
}

std::vector<int> load_groups(const Config& c, const Topology& t) {
  if (c.groups.empty()) return {};
  json j;
  try {
    j = json::parse(read_file(c.groups));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, "groups: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(ErrorCode::MalformedJson, "groups must map node id to group");
  std::vector<int> groups(t.num_nodes(), -1);
  std::map<std::string, int> ids;
  for (const auto& [node, group] : j.items()) {
    std::string name = group.is_string() ? group.get<std::string>() : group.dump();
    int id = ids.emplace(name, static_cast<int>(ids.size())).first->second;
    groups[t.index_of_checked(NodeId(node))] = id;
  }
  return groups;
}

std::string members_text(const Topology& t, const std::vector<int>& members) {
  std::string s = "{";
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (i) s += ",";
    s += t.node(members[i]).id.str();
  }
  return s + "}";
}

int cmd_optimality(const Config& c, std::ostream& out, std::ostream& err) {
  Topology t;
  try {
    t = load_topology(c);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  auto pool = make_pool(c);
  OptimalityResult r = bottleneck_search(t, pool.get());
  std::optional<BottleneckOracle> oracle;
  if (c.brute_force) oracle = brute_force_bottleneck(t);
  const bool agree = !oracle || oracle->inv_x_star == r.inv_x_star;

  if (c.json_out) {
    json j;
    j["inv_x_star"] = r.inv_x_star.str();
    j["U"] = r.U.str();
    j["k"] = r.k;
    j["y"] = r.y.str();
    j["iterations"] = r.search_iterations;
    if (oracle) {
      j["brute_force_inv_x_star"] = oracle->inv_x_star.str();
      json w = json::array();
      for (int v : oracle->witness.members) w.push_back(t.node(v).id.str());
      j["witness"] = w;
      j["agree"] = agree;
    }
    out << j.dump(2) << "\n";
  } else {
    out << "1/x* = " << r.inv_x_star << ", k = " << r.k << ", y = " << r.y << "\n";
    out << "U = " << r.U << "\n";
    out << "iterations = " << r.search_iterations << "\n";
    if (oracle) {
      out << "brute force 1/x* = " << oracle->inv_x_star << ", witness "
          << members_text(t, oracle->witness.members) << "\n";
      out << (agree ? "oracle agrees" : "ORACLE DISAGREES") << "\n";
    }
  }
  return agree ? kExitOk : kExitCheckFailed;
}

int cmd_generate(const Config& c, std::ostream& out, std::ostream& err) {
  Topology t;
  GenerateOptions options;
  try {
    t = load_topology(c);
    options.collective = parse_collective(c.collective);
    options.groups = load_groups(c, t);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  if (c.fixed_k && *c.fixed_k < 1) {
    err << "--fixed-k must be at least 1\n";
    return kExitInputError;
  }
  options.fixed_k = c.fixed_k;
  options.prune = !c.no_multicast;
  auto pool = make_pool(c);
  options.pool = pool.get();

  GenerateResult result;
  try {
    result = generate_schedule(t, options);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  ValidationReport report = validate_schedule(result.schedule, t, result.optimum);
  if (!report.ok) {
    err << "self-validation failed\n" << report.to_json();
    return kExitSelfCheckFailed;
  }
  const std::string text = schedule_to_json(result.schedule);
  try {
    write_output(c.output, text, out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  const bool note = options.collective == Collective::kAllreduce && !uniform_compute_bandwidth(t);
  if (!c.output.empty() && c.output != "-") {
    if (c.json_out) {
      json j;
      j["collective"] = std::string(to_string(result.schedule.collective));
      j["inv_x_star"] = result.schedule.meta.inv_x.str();
      j["k"] = result.schedule.meta.k;
      j["time"] = report.achieved_time.str();
      j["bound"] = report.bound_time.str();
      j["valid"] = report.ok;
      j["uniform_compute_bandwidth"] = uniform_compute_bandwidth(t);
      out << j.dump(2) << "\n";
    } else {
      out << to_string(result.schedule.collective) << ": 1/x* = " << result.schedule.meta.inv_x
          << ", k = " << result.schedule.meta.k << ", time = " << report.achieved_time
          << " per unit M (bound " << report.bound_time << "), valid\n";
    }
  }
  if (note) {
    err << "note: compute nodes differ in bandwidth; the combined allreduce time "
           "may not be the allreduce optimum\n";
  }
  return kExitOk;
}

int cmd_verify(const Config& c, std::ostream& out, std::ostream& err) {
  Topology t;
  Schedule s;
  try {
    t = load_topology(c);
    s = parse_schedule(read_file(c.schedule));
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  auto pool = make_pool(c);
  OptimalityResult meta;
  try {
    if (s.meta.fixed_k) {
      FixedKResult fk = fixed_k_bound(t, s.meta.k, pool.get());
      meta.inv_x_star = fk.achieved_inv_throughput;
      meta.U = fk.U_star;
      meta.k = fk.k;
      meta.y = fk.U_star.reciprocal();
    } else {
      meta = bottleneck_search(t, pool.get());
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  ValidationReport report = validate_schedule(s, t, meta);
  if (c.json_out) {
    out << report.to_json();
  } else {
    out << (report.ok ? "ok" : "INVALID") << ": time = " << report.achieved_time
        << " per unit M, bound = " << report.bound_time << "\n";
    for (const ScheduleViolation& v : report.violations) {
      out << to_string(v.kind) << ": " << v.detail << "\n";
    }
  }
  return report.ok ? kExitOk : kExitCheckFailed;
}

int cmd_synth(Config c, std::ostream& out, std::ostream& err) {
  c.synth.bidirectional = !c.unidirectional;
  try {
    write_output(c.output, serialize_topology(synth_topology(c.synth)), out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

int cmd_export_dot(const Config& c, std::ostream& out, std::ostream& err) {
  try {
    Schedule s = parse_schedule(read_file(c.schedule));
    write_output(c.output, schedule_to_dot(s), out);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Throughput-optimal collective schedules from network topologies",
               "forestsched"};
  app.require_subcommand(1);
  Config c;

  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  };

  CLI::App* opt = app.add_subcommand("optimality", "compute 1/x*, U, k and y");
  opt->add_option("-t,--topology", c.topology, "topology JSON")->required();
  opt->add_flag("--brute-force", c.brute_force, "cross-check by cut enumeration");
  opt->add_flag("--json", c.json_out, "machine-readable output");
  add_threads(opt);

  CLI::App* gen = app.add_subcommand("generate", "write an optimal schedule");
  gen->add_option("-t,--topology", c.topology, "topology JSON")->required();
  gen->add_option("-o,--output", c.output, "schedule output path (default stdout)");
  gen->add_option("--collective", c.collective, "allgather | reduce-scatter | allreduce")
      ->check(CLI::IsMember({"allgather", "reduce-scatter", "reduce_scatter", "allreduce"}));
  gen->add_option("--fixed-k", c.fixed_k, "trees per root");
  gen->add_flag("--no-multicast", c.no_multicast, "skip in-network pruning");
  gen->add_option("--groups", c.groups, "JSON map node id -> group for splitting");
  gen->add_flag("--json", c.json_out, "machine-readable summary");
  add_threads(gen);

  CLI::App* ver = app.add_subcommand("verify", "validate a schedule against a topology");
  ver->add_option("-t,--topology", c.topology, "topology JSON")->required();
  ver->add_option("-s,--schedule", c.schedule, "schedule JSON")->required();
  ver->add_flag("--json", c.json_out, "machine-readable report");
  add_threads(ver);

  CLI::App* syn = app.add_subcommand("synth", "generate a synthetic topology");
  syn->add_option("--family", c.synth.family, "boxes | ring | fat-tree | random")->required();
  syn->add_option("-o,--output", c.output, "topology output path (default stdout)");
  syn->add_option("--boxes", c.synth.boxes);
  syn->add_option("--gpus-per-box", c.synth.gpus_per_box);
  syn->add_option("--intra", c.synth.intra_bandwidth);
  syn->add_option("--inter", c.synth.inter_bandwidth);
  syn->add_option("--ring-size", c.synth.ring_size);
  syn->add_option("--ring-bandwidth", c.synth.ring_bandwidth);
  syn->add_flag("--unidirectional", c.unidirectional);
  syn->add_option("--pods", c.synth.pods);
  syn->add_option("--gpus", c.synth.gpus);
  syn->add_option("--spines", c.synth.spines);
  syn->add_option("--host-bandwidth", c.synth.host_bandwidth);
  syn->add_option("--uplink-bandwidth", c.synth.uplink_bandwidth);
  syn->add_option("--compute", c.synth.random_compute);
  syn->add_option("--switches", c.synth.random_switches);
  syn->add_option("--max-bandwidth", c.synth.random_max_bandwidth);
  syn->add_option("--cycles", c.synth.random_cycles);
  syn->add_option("--seed", c.synth.seed);
  syn->add_flag("--multicast", c.synth.switch_multicast);
  syn->add_flag("--aggregation", c.synth.switch_aggregation);

  CLI::App* dot = app.add_subcommand("export-dot", "render a schedule as DOT");
  dot->add_option("-s,--schedule", c.schedule, "schedule JSON")->required();
  dot->add_option("-o,--output", c.output, "DOT output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (opt->parsed()) return cmd_optimality(c, out, err);
    if (gen->parsed()) return cmd_generate(c, out, err);
    if (ver->parsed()) return cmd_verify(c, out, err);
    if (syn->parsed()) return cmd_synth(c, out, err);
    if (dot->parsed()) return cmd_export_dot(c, out, err);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace forestsched
