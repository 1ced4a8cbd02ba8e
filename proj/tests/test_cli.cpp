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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "forestsched/cli.hpp"
#include "forestsched/schedule.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace forestsched;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "forestsched");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("forestsched_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name, const std::string& contents) const {
    std::string p = (path_ / name).string();
    std::ofstream(p) << contents;
    return p;
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("optimality subcommand") {
  TempDir dir;
  std::string two_box = dir.file("two_box.json", fstest::two_box_json());
  Run r = run({"optimality", "-t", two_box});
  CHECK_EQ(r.code, 0);
  CHECK_NE(r.out.find("1/x* = 1/1, k = 1, y = 1/1"), std::string::npos);

  std::string pair = dir.file("pair.json", serialize_topology(fstest::two_node(3)));
  r = run({"optimality", "-t", pair});
  CHECK_EQ(r.code, 0);
  CHECK_NE(r.out.find("1/x* = 1/3"), std::string::npos);

  std::string ring = dir.file("ring4.json", serialize_topology(fstest::ring(4, 1, false)));
  r = run({"optimality", "-t", ring, "--brute-force"});
  CHECK_EQ(r.code, 0);
  CHECK_NE(r.out.find("1/x* = 3/1"), std::string::npos);
  CHECK_NE(r.out.find("brute force 1/x* = 3/1"), std::string::npos);
  CHECK_NE(r.out.find("oracle agrees"), std::string::npos);

  r = run({"optimality", "-t", two_box, "--json"});
  CHECK_EQ(r.code, 0);
  nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK_EQ(j["inv_x_star"], "1/1");
}

TEST_CASE("optimality input errors") {
  TempDir dir;
  CHECK_EQ(run({"optimality", "-t", dir.path("missing.json")}).code, 1);
  std::string broken = dir.file("broken.json", "{\"nodes\": [");
  CHECK_EQ(run({"optimality", "-t", broken}).code, 1);
  std::string unbalanced = dir.file("unbalanced.json", R"({"nodes": [
      {"id": "a", "kind": "compute"}, {"id": "b", "kind": "compute"}],
      "links": [{"src": "a", "dst": "b", "bandwidth": 2},
                {"src": "b", "dst": "a", "bandwidth": 1}]})");
  Run r = run({"optimality", "-t", unbalanced});
  CHECK_EQ(r.code, 1);
  CHECK_NE(r.err.find("NotEulerian"), std::string::npos);
  CHECK_EQ(run({"optimality"}).code, 1);
  CHECK_EQ(run({"bogus"}).code, 1);
}

TEST_CASE("generate and verify round trip") {
  TempDir dir;
  std::string topo = dir.file("two_box.json", fstest::two_box_json());
  std::string sched = dir.path("s.json");
  Run g = run({"generate", "-t", topo, "-o", sched});
  CHECK_EQ(g.code, 0);
  Schedule s = parse_schedule(slurp(sched));
  CHECK_EQ(s.phases.at(0).roots.size(), 8u);

  Run v = run({"verify", "-t", topo, "-s", sched});
  CHECK_EQ(v.code, 0);
  CHECK_EQ(v.out.rfind("ok", 0), 0u);

  Run vj = run({"verify", "-t", topo, "-s", sched, "--json"});
  CHECK_EQ(vj.code, 0);
  CHECK_EQ(nlohmann::json::parse(vj.out)["ok"], true);

  // tampered: remove one edge
  nlohmann::json j = nlohmann::json::parse(slurp(sched));
  j["roots"][0]["batches"][0]["edges"].erase(0);
  std::string tampered = dir.file("t.json", j.dump(2));
  Run bad = run({"verify", "-t", topo, "-s", tampered});
  CHECK_EQ(bad.code, 2);
  CHECK_NE(bad.out.find("NotSpanning"), std::string::npos);

  // wrong topology
  std::string thin = dir.file("thin.json", fstest::two_box_json(1, 1));
  Run wrong = run({"verify", "-t", thin, "-s", sched});
  CHECK_EQ(wrong.code, 2);
  CHECK((wrong.out.find("CapacityExceeded") != std::string::npos ||
         wrong.out.find("DeliveryGap") != std::string::npos));

  std::string garbage = dir.file("garbage.json", "[1, 2");
  CHECK_EQ(run({"verify", "-t", topo, "-s", garbage}).code, 1);
}

TEST_CASE("generate to stdout and collectives") {
  TempDir dir;
  std::string topo = dir.file("two_box.json", fstest::two_box_json());
  Run g = run({"generate", "-t", topo});
  CHECK_EQ(g.code, 0);
  CHECK_EQ(parse_schedule(g.out).phases.size(), 1u);

  std::string ar = dir.path("ar.json");
  Run a = run({"generate", "-t", topo, "--collective", "allreduce", "-o", ar, "--json"});
  CHECK_EQ(a.code, 0);
  nlohmann::json summary = nlohmann::json::parse(a.out);
  CHECK_EQ(summary["time"], "1/4");
  CHECK_EQ(summary["bound"], "1/4");
  Schedule s = parse_schedule(slurp(ar));
  CHECK_EQ(s.phases.size(), 2u);
  CHECK_EQ(run({"verify", "-t", topo, "-s", ar}).code, 0);

  std::string rs = dir.path("rs.json");
  CHECK_EQ(run({"generate", "-t", topo, "--collective", "reduce-scatter", "-o", rs}).code, 0);
  CHECK_EQ(run({"verify", "-t", topo, "-s", rs}).code, 0);

  CHECK_EQ(run({"generate", "-t", topo, "--collective", "gossip"}).code, 1);
  CHECK_EQ(run({"generate", "-t", topo, "--fixed-k", "0"}).code, 1);
}

TEST_CASE("generate with fixed k and groups") {
  TempDir dir;
  std::string topo = dir.file("two_box.json", fstest::two_box_json());
  std::string out = dir.path("k2.json");
  CHECK_EQ(run({"generate", "-t", topo, "--fixed-k", "2", "-o", out}).code, 0);
  Schedule s = parse_schedule(slurp(out));
  CHECK_EQ(s.meta.k, 2);
  for (const RootSchedule& r : s.phases[0].roots) {
    Capacity total = 0;
    for (const ScheduleBatch& b : r.batches) total += b.multiplicity;
    CHECK_EQ(total, 2);
  }
  CHECK_EQ(run({"verify", "-t", topo, "-s", out}).code, 0);

  std::string groups = dir.file("groups.json", R"({"c11": 1, "c12": 1, "c13": 1, "c14": 1,
      "c21": 2, "c22": 2, "c23": 2, "c24": 2})");
  std::string g = dir.path("g.json");
  CHECK_EQ(run({"generate", "-t", topo, "--groups", groups, "-o", g}).code, 0);
  CHECK_EQ(run({"verify", "-t", topo, "-s", g}).code, 0);
  std::string bad_groups = dir.file("bad_groups.json", R"({"nope": 1})");
  CHECK_EQ(run({"generate", "-t", topo, "--groups", bad_groups}).code, 1);
}

TEST_CASE("multicast pruning toggle") {
  TempDir dir;
  std::string topo = dir.file("mc.json", fstest::two_box_json(10, 1, true));
  Run pruned = run({"generate", "-t", topo});
  Run plain = run({"generate", "-t", topo, "--no-multicast"});
  CHECK_EQ(pruned.code, 0);
  CHECK_EQ(plain.code, 0);
  CHECK_NE(pruned.out, plain.out);
  CHECK_NE(pruned.out.find("elided_hops"), std::string::npos);
  CHECK_EQ(plain.out.find("elided_hops"), std::string::npos);
}

TEST_CASE("synth and export-dot") {
  TempDir dir;
  Run s = run({"synth", "--family", "boxes", "--boxes", "2", "--gpus-per-box", "4",
               "--intra", "10", "--inter", "1"});
  CHECK_EQ(s.code, 0);
  CHECK_EQ(parse_topology(s.out), fstest::two_box());
  CHECK_EQ(run({"synth", "--family", "torus"}).code, 1);
  Run ring = run({"synth", "--family", "ring", "--ring-size", "4", "--unidirectional"});
  CHECK_EQ(parse_topology(ring.out).links().size(), 4u);

  std::string topo = dir.file("t.json", s.out);
  std::string sched = dir.path("s.json");
  REQUIRE_EQ(run({"generate", "-t", topo, "-o", sched}).code, 0);
  Run dot = run({"export-dot", "-s", sched});
  CHECK_EQ(dot.code, 0);
  CHECK_EQ(dot.out, schedule_to_dot(parse_schedule(slurp(sched))));
  std::string dot_file = dir.path("s.dot");
  CHECK_EQ(run({"export-dot", "-s", sched, "-o", dot_file}).code, 0);
  CHECK_EQ(slurp(dot_file), dot.out);
}

TEST_CASE("thread count does not change any output") {
  TempDir dir;
  std::vector<std::string> topos = {
      dir.file("a.json", fstest::two_box_json(10, 1, true)),
      dir.file("b.json", serialize_topology(fstest::random_topology(7))),
      dir.file("c.json", serialize_topology(fstest::handcrafted_suite().back())),
  };
  for (const std::string& t : topos) {
    for (const char* collective : {"allgather", "allreduce"}) {
      Run one = run({"generate", "-t", t, "--collective", collective, "--threads", "1"});
      Run four = run({"generate", "-t", t, "--collective", collective, "--threads", "4"});
      CHECK_EQ(one.code, 0);
      CHECK_EQ(one.out, four.out);
    }
    Run o1 = run({"optimality", "-t", t, "--brute-force", "--threads", "1"});
    Run o4 = run({"optimality", "-t", t, "--brute-force", "--threads", "4"});
    CHECK_EQ(o1.out, o4.out);
  }
}
