// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "../tools/commands.hpp"
#include "obbeval/detection_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "obbeval");
  std::ostringstream out, err;
  const int code = obbeval::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class Workspace {
 public:
  Workspace() {
    static int counter = 0;
    root_ = fs::temp_directory_path() /
            ("obbeval_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(root_);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  std::string path(const std::string& rel) const { return (root_ / rel).string(); }
  std::string write(const std::string& rel, const std::string& text) const {
    const fs::path p = root_ / rel;
    fs::create_directories(p.parent_path());
    std::ofstream(p) << text;
    return p.string();
  }
  std::string read(const std::string& rel) const {
    std::ifstream in(root_ / rel);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

 private:
  fs::path root_;
};

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Three images: two ships in a, a plane in b, nothing in c.
void write_gt(const Workspace& ws, const std::string& dir = "gt") {
  ws.write(dir + "/a.txt",
           "100 100 200 100 200 150 100 150 ship 0\n"
           "400 400 480 400 480 440 400 440 ship 0\n");
  ws.write(dir + "/b.txt", "10 10 90 10 90 60 10 60 plane 0\n");
  ws.write(dir + "/c.txt", "");
  ws.write("categories.txt", "# classes\nplane\nship\n");
}

}  // namespace

TEST_CASE("encode writes one response per image") {
  Workspace ws;
  write_gt(ws);
  const auto r = run({"encode", ws.path("gt"), "--categories", ws.path("categories.txt"), "-o",
                      ws.path("responses.tsv")});
  REQUIRE(r.code == 0);
  const auto lines = lines_of(ws.read("responses.tsv"));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].rfind("a\tship<loc_", 0) == 0);
  CHECK(lines[1].rfind("b\tplane<loc_", 0) == 0);
  CHECK(lines[2] == "c\t");
}

TEST_CASE("encode rejects unknown categories") {
  Workspace ws;
  write_gt(ws);
  ws.write("gt/d.txt", "1 1 5 1 5 5 1 5 tank 0\n");
  const auto r = run({"encode", ws.path("gt"), "--categories", ws.path("categories.txt"), "-o",
                      ws.path("responses.tsv")});
  CHECK(r.code != 0);
  CHECK(r.err.find("tank") != std::string::npos);
  CHECK_FALSE(fs::exists(ws.path("responses.tsv")));
}

TEST_CASE("decode inverts encode") {
  Workspace ws;
  write_gt(ws);
  REQUIRE(run({"encode", ws.path("gt"), "--categories", ws.path("categories.txt"), "-o",
               ws.path("responses.tsv")}).code == 0);
  const auto r = run({"decode", ws.path("responses.tsv"), "--categories",
                      ws.path("categories.txt"), "-o", ws.path("dets.txt")});
  REQUIRE(r.code == 0);
  const auto dets = obbeval::read_detections(ws.path("dets.txt"));
  CHECK(dets.size() == 3);
  const auto warnings = json::parse(ws.read("dets.txt.warnings.json"));
  // Only the empty image warns.
  CHECK(warnings["summary"]["empty-response"] == 1);
  CHECK(warnings["summary"]["unknown-category"] == 0);

  // Decoded output scores perfectly against the source labels.
  const auto ev = run({"eval", ws.path("dets.txt"), ws.path("gt")});
  REQUIRE(ev.code == 0);
  const auto doc = json::parse(ev.out);
  CHECK(doc["report"]["map_nc"]["mean"] == 1.0);
  CHECK(doc["report"]["mf1"] == 1.0);
}

TEST_CASE("decode reports malformed responses") {
  Workspace ws;
  ws.write("categories.txt", "plane\nship\n");
  ws.write("responses.tsv",
           "a\tno objects found\n"
           "b\tship<loc_1><loc_2><loc_3><loc_4><loc_5><loc_6><loc_7>\n");
  const auto r = run({"decode", ws.path("responses.tsv"), "--categories",
                      ws.path("categories.txt"), "-o", ws.path("dets.txt"), "--warnings",
                      ws.path("w.json")});
  REQUIRE(r.code == 0);
  CHECK(obbeval::read_detections(ws.path("dets.txt")).empty());
  const auto w = json::parse(ws.read("w.json"));
  CHECK(w["summary"]["unknown-category"] == 1);
  CHECK(w["summary"]["dangling-coordinates"] == 1);
}

TEST_CASE("eval edge cases") {
  Workspace ws;
  write_gt(ws);
  ws.write("empty.txt", "");
  const auto none = run({"eval", ws.path("empty.txt"), ws.path("gt")});
  REQUIRE(none.code == 0);
  const auto doc = json::parse(none.out);
  CHECK(doc["report"]["map_nc"]["mean"] == 0.0);
  CHECK(doc["report"]["mf1"] == 0.0);
  CHECK(doc["report"]["map_nc"]["runs"].size() == 11);

  ws.write("nc.txt", "a 100 100 200 100 200 150 100 150 ship\n");
  const auto sweep = run({"eval", ws.path("nc.txt"), ws.path("gt"), "--sweep"});
  CHECK(sweep.code == 1);
  CHECK(sweep.err.find("confidence") != std::string::npos);

  ws.write("ghost.txt", "zz 100 100 200 100 200 150 100 150 ship 0.5\n");
  const auto ghost = run({"eval", ws.path("ghost.txt"), ws.path("gt")});
  CHECK(ghost.code == 1);
  CHECK(ghost.err.find("zz") != std::string::npos);

  ws.write("conf.txt",
           "a 100 100 200 100 200 150 100 150 ship 0.9\n"
           "a 600 600 700 600 700 650 600 650 ship 0.1\n");
  const auto swept = run({"eval", ws.path("conf.txt"), ws.path("gt"), "--sweep", "-o",
                          ws.path("report.json"), "--csv", ws.path("m.csv"), "--sweep-csv",
                          ws.path("s.csv")});
  REQUIRE(swept.code == 0);
  const auto rep = json::parse(ws.read("report.json"));
  CHECK(rep["sweep"]["points"].size() == 19);
  CHECK(lines_of(ws.read("s.csv")).size() == 20);
  CHECK(lines_of(ws.read("m.csv")).front() == "class,ap,f1,tp,fp,fn");
}

TEST_CASE("eval reads options from the environment") {
  Workspace ws;
  write_gt(ws);
  ws.write("empty.txt", "");
  ::setenv("OBBEVAL_IOU_THR", "0.7", 1);
  ::setenv("OBBEVAL_RUNS", "3", 1);
  const auto env = run({"eval", ws.path("empty.txt"), ws.path("gt")});
  const auto flag = run({"eval", ws.path("empty.txt"), ws.path("gt"), "--runs", "5"});
  ::unsetenv("OBBEVAL_IOU_THR");
  ::unsetenv("OBBEVAL_RUNS");
  REQUIRE(env.code == 0);
  const auto doc = json::parse(env.out);
  CHECK(doc["config"]["iou_threshold"] == 0.7);
  CHECK(doc["report"]["map_nc"]["runs"].size() == 4);
  // Flags win over the environment.
  CHECK(json::parse(flag.out)["report"]["map_nc"]["runs"].size() == 6);
}

TEST_CASE("usage errors") {
  Workspace ws;
  write_gt(ws);
  ws.write("empty.txt", "");
  CHECK(run({}).code != 0);
  CHECK(run({"eval", ws.path("empty.txt"), ws.path("gt"), "--interp", "coco"}).code != 0);
  CHECK(run({"eval", ws.path("empty.txt"), ws.path("gt"), "--sweep-grid", "0.1,0.2"}).code != 0);
  CHECK(run({"eval", ws.path("empty.txt"), ws.path("gt"), "--iou-thr", "1.5"}).code == 1);
  CHECK(run({"merge", ws.path("gt"), "--strategy", "concat", "--factors", "2", "-o",
             ws.path("m.json")}).code != 0);
  CHECK_FALSE(fs::exists(ws.path("m.json")));
  CHECK(run({"eval", ws.path("missing.txt"), ws.path("gt")}).code != 0);
}

TEST_CASE("merge strategies") {
  Workspace ws;
  write_gt(ws, "big");
  ws.write("small/x.txt", "1 1 5 1 5 5 1 5 ship 0\n");
  const auto concat = run({"merge", ws.path("big"), ws.path("small"), "-o", ws.path("c.json")});
  REQUIRE(concat.code == 0);
  const auto c = json::parse(ws.read("c.json"));
  CHECK(c["size"] == 4);
  CHECK(c["samples"][3] == "small/x");

  const auto balanced = run({"merge", ws.path("big"), ws.path("small"), "--strategy",
                             "balanced", "-o", ws.path("b.json")});
  REQUIRE(balanced.code == 0);
  const auto b = json::parse(ws.read("b.json"));
  CHECK(b["sources"][1]["repetition"] == 3);
  CHECK(b["size"] == 6);

  const auto manual = run({"merge", ws.path("big"), ws.path("small"), "--strategy",
                           "balanced", "--factors", "2,5", "-o", ws.path("f.json")});
  REQUIRE(manual.code == 0);
  CHECK(json::parse(ws.read("f.json"))["size"] == 11);
  CHECK(run({"merge", ws.path("big"), ws.path("small"), "--strategy", "balanced",
             "--factors", "2", "-o", ws.path("g.json")}).code != 0);
}

TEST_CASE("render draws one polygon per detection") {
  Workspace ws;
  ws.write("dets.txt",
           "a 10 10 50 10 50 40 10 40 ship 0.9\n"
           "a 60 60 90 60 90 80 60 80 plane\n");
  const auto r = run({"render", ws.path("dets.txt"), "-o", ws.path("svg"), "--image-id", "e",
                      "--image-size", "200x100"});
  REQUIRE(r.code == 0);
  const std::string a = ws.read("svg/a.svg");
  auto count = [](const std::string& s, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
    return n;
  };
  CHECK(count(a, "<polygon") == 2);
  CHECK(count(a, "class=\"legend-entry\"") == 2);
  CHECK(a.find("width=\"200\" height=\"100\"") != std::string::npos);
  const std::string e = ws.read("svg/e.svg");
  CHECK(count(e, "<polygon") == 0);
  CHECK(count(e, "class=\"canvas\"") == 1);
}
