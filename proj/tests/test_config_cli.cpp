#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "coneroute/cli.hpp"
#include "coneroute/config.hpp"
#include "coneroute/errors.hpp"

using namespace coneroute;
using nlohmann::json;

namespace {

// run_cli prints to std::cout; capture it for assertions.
struct Captured {
  int exit_code = 0;
  std::string out;
};

Captured cli(const std::vector<std::string>& args) {
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());
  Captured c;
  c.exit_code = run_cli(args);
  std::cout.rdbuf(old);
  c.out = sink.str();
  return c;
}

std::filesystem::path write_file(const std::string& name, const std::string& body) {
  std::filesystem::path p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p, std::ios::trunc) << body;
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const char* kChainConfig = R"(
# two-hop relay chain
n_relays = 2
links {
  1, 0, 0.5
  2, 1, 0.5
}
weight = { family = "geometric", K = 3.0 }
lambda = 0.1
horizon = 2000
seed = 42
policy = "fpolicy"
)";

}  // namespace

TEST_CASE("parser handles assignments, rows, blocks, and comments") {
  ConfigSection root = parse_config(
      "a = 1.5  # trailing comment\n"
      "name = \"hello # not a comment\"\n"
      "pair = (1, 2)\n"
      "outer {\n"
      "  b = [1, 2, 3]\n"
      "  1, 2, 0.25\n"
      "  inner {\n"
      "    c = word\n"
      "  }\n"
      "}\n"
      "a = 2.5\n");
  CHECK(root.find("a")->as_number("a") == 2.5);  // last assignment wins
  CHECK(root.find("name")->as_string("name") == "hello # not a comment");
  CHECK(root.find("pair")->as_numbers("pair") == std::vector<double>{1.0, 2.0});
  const ConfigSection* outer = root.child("outer");
  REQUIRE(outer != nullptr);
  CHECK(outer->find("b")->as_numbers("b") == std::vector<double>{1.0, 2.0, 3.0});
  REQUIRE(outer->lines.size() == 2);  // the assignment and the number row
  CHECK(outer->lines[1].numbers == std::vector<double>{1.0, 2.0, 0.25});
  REQUIRE(outer->child("inner") != nullptr);
  CHECK(outer->child("inner")->find("c")->as_string("c") == "word");

  CHECK_THROWS_WITH_AS(parse_config("open {\n"), doctest::Contains("ConfigError"), Error);
  CHECK_THROWS_WITH_AS(parse_config("}\n"), doctest::Contains("ConfigError"), Error);
  CHECK_THROWS_WITH_AS(parse_config("a = \"unterminated\n"), doctest::Contains("ConfigError"),
                       Error);
}

TEST_CASE("network loads from link triples and broadcast blocks alike") {
  ConfigSection links = parse_config(
      "n_relays = 1\n"
      "links = [(1, 0, 0.5)]\n");
  NetworkModel from_links = load_network(links);

  ConfigSection blocks = parse_config(
      "n_relays = 1\n"
      "broadcast {\n"
      "  node = 1\n"
      "  set = [0, 1], p = 0.5\n"
      "  set = [1], p = 0.5\n"
      "}\n");
  NetworkModel from_blocks = load_network(blocks);

  REQUIRE(from_links.broadcast(1).size() == from_blocks.broadcast(1).size());
  CHECK(from_links.p_min() == from_blocks.p_min());
  CHECK(from_links.reaches(1, 0));
  CHECK(from_blocks.reaches(1, 0));

  CHECK_THROWS_WITH_AS(load_network(parse_config("n_relays = 1\n")),
                       doctest::Contains("ConfigError"), Error);
}

TEST_CASE("weights load from the inline table form and the block form") {
  CHECK(load_weights(parse_config("")).geometric_k() == 3.0);  // default
  CHECK(load_weights(parse_config("weight = { family = \"geometric\", K = 2.0 }\n"))
            .geometric_k() == 2.0);

  WeightFunction table = load_weights(parse_config(
      "weight {\n"
      "  family = \"table\"\n"
      "  0, 1, 1.0\n"
      "  1, 1, 1.0\n"
      "  0, 2, 0.6\n"
      "}\n"));
  CHECK(table.eval(0, 2) == 0.6);
}

TEST_CASE("simulation config assembles model, weights, arrivals, and knobs") {
  SimConfig cfg = load_sim_config(parse_config(kChainConfig));
  CHECK(cfg.model.n_relays() == 2);
  CHECK(cfg.policy_spec == "fpolicy");
  CHECK(cfg.horizon == 2000);
  CHECK(cfg.seed == 42);
  CHECK(cfg.arrivals.lambda == std::vector<double>{0.1, 0.1});
  CHECK(cfg.weights->geometric_k() == 3.0);
}

TEST_CASE("resolve subcommand prints the ordering, boundary flag, and potential") {
  Captured c = cli({"resolve", "--q", "1,1", "--K", "3"});
  CHECK(c.exit_code == 0);
  json j = json::parse(c.out);
  CHECK(j["ordering"] == json::parse("[[1,2]]"));
  CHECK(j["on_boundary"] == false);

  c = cli({"resolve", "--q", "0.2,1", "--K", "3"});
  CHECK(json::parse(c.out)["ordering"] == json::parse("[[1],[2]]"));

  c = cli({"resolve", "--q", "1,3", "--K", "3"});
  j = json::parse(c.out);
  CHECK(j["ordering"] == json::parse("[[1],[2]]"));
  CHECK(j["on_boundary"] == true);
  CHECK(j["lyapunov_value"].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("usage and input errors exit with code 2") {
  CHECK(cli({"resolve"}).exit_code == 2);                          // missing --q
  CHECK(cli({"resolve", "--q", "1,oops"}).exit_code == 2);         // bad number
  CHECK(cli({"resolve", "--q", "-1,1"}).exit_code == 2);           // negative backlog
  CHECK(cli({"nonsense"}).exit_code == 2);                         // unknown subcommand
  CHECK(cli({"simulate", "--config", "/no/such/file"}).exit_code == 2);
  CHECK(cli({}).exit_code == 2);                                   // subcommand required
  CHECK(cli({"--help"}).exit_code == 0);
}

TEST_CASE("simulate writes a summary whose reruns are byte-identical") {
  std::filesystem::path cfg = write_file("cr_chain.cfg", kChainConfig);
  std::filesystem::path s1 = std::filesystem::temp_directory_path() / "cr_sum1.json";
  std::filesystem::path s2 = std::filesystem::temp_directory_path() / "cr_sum2.json";

  Captured c = cli({"simulate", "--config", cfg.string(), "--summary-out", s1.string()});
  REQUIRE(c.exit_code == 0);
  c = cli({"simulate", "--config", cfg.string(), "--summary-out", s2.string()});
  REQUIRE(c.exit_code == 0);
  CHECK(slurp(s1) == slurp(s2));

  json j = json::parse(slurp(s1));
  CHECK(j["policy"] == "fpolicy");
  CHECK(j["seed"] == 42);
  CHECK(j["arrivals_total"] == j["delivered"].get<long long>() +
                                   j["final_total_backlog"].get<long long>());

  // Zero arrivals: nothing delivered, nothing queued.
  c = cli({"simulate", "--config", cfg.string(), "--lambda", "0"});
  REQUIRE(c.exit_code == 0);
  j = json::parse(c.out);
  CHECK(j["delivered"] == 0);
  CHECK(j["avg_total_backlog"] == 0.0);

  // The trace is long-form slot,node,backlog CSV.
  std::filesystem::path tr = std::filesystem::temp_directory_path() / "cr_trace.csv";
  c = cli({"simulate", "--config", cfg.string(), "--horizon", "10", "--trace-out", tr.string()});
  REQUIRE(c.exit_code == 0);
  std::string trace = slurp(tr);
  CHECK(trace.rfind("slot,node,backlog\n", 0) == 0);
  int lines = 0;
  for (char ch : trace) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 1 + 10 * 2);  // header + horizon * relays
}

TEST_CASE("capacity subcommand reports feasibility, slack, and the boundary scale") {
  std::filesystem::path cfg = write_file("cr_single.cfg",
                                         "n_relays = 1\n"
                                         "links = [(1, 0, 0.5)]\n");
  Captured c = cli({"capacity", "--config", cfg.string(), "--lambda", "0.4"});
  REQUIRE(c.exit_code == 0);
  json j = json::parse(c.out);
  CHECK(j["feasible"] == true);
  CHECK(j["slack"].get<double>() == doctest::Approx(0.1).epsilon(1e-8));
  // theta_star scales the supplied direction: 1.25 * 0.4 = 0.5 = boundary.
  CHECK(std::abs(j["theta_star"].get<double>() - 1.25) <= 1e-5);

  c = cli({"capacity", "--config", cfg.string()});
  j = json::parse(c.out);
  CHECK(j["feasible"] == true);
  CHECK(j["theta_star"].is_null());  // no direction to scale
}

TEST_CASE("verify reports expected-fail for a ratio-violating K and exits 1 on real failures") {
  // K = 2 < 1 + 1/p_min on a p = 0.5 chain: the cost-ranking refinement
  // suite is marked expected-fail and the command still succeeds.
  std::filesystem::path cfg = write_file("cr_k2.cfg",
                                         "n_relays = 2\n"
                                         "links = [(1, 0, 0.5), (2, 1, 0.5)]\n"
                                         "weight = { family = \"geometric\", K = 2.0 }\n");
  // Drift samples sized so the 3-sigma margin clears the true mean (~-2.1
  // at these backlogs): 4000 samples put 3*SE near 0.7.
  Captured c = cli({"verify", "--config", cfg.string(), "--samples", "60", "--drift-samples",
                    "4000", "--seed", "3"});
  CHECK(c.exit_code == 0);
  json j = json::parse(c.out);
  bool saw_expected_fail = false;
  for (const auto& s : j["suites"])
    if (s["name"] == "orcd-refinement") saw_expected_fail = s["expected_fail"].get<bool>();
  CHECK(saw_expected_fail);

  // A weight table that breaks the split identity: cone uniqueness fails
  // with a counterexample backlog in the message, and the exit code is 1.
  std::filesystem::path broken = write_file("cr_broken.cfg",
                                            "n_relays = 2\n"
                                            "links = [(1, 0, 0.5), (2, 1, 0.5)]\n"
                                            "weight {\n"
                                            "  family = \"table\"\n"
                                            "  0, 1, 1.0\n"
                                            "  1, 1, 1.0\n"
                                            "  0, 2, 0.6\n"
                                            "}\n");
  c = cli({"verify", "--config", broken.string(), "--samples", "40", "--drift-samples", "200",
           "--seed", "3"});
  CHECK(c.exit_code == 1);
  j = json::parse(c.out);
  CHECK(j["passed"] == false);
  bool uniqueness_failed = false;
  for (const auto& s : j["suites"])
    if (s["name"] == "cone-oracle-equivalence" && !s["passed"].get<bool>() &&
        !s["expected_fail"].get<bool>())
      uniqueness_failed = s["message"].get<std::string>().find("q") != std::string::npos;
  CHECK(uniqueness_failed);
}

TEST_CASE("sweep runs the grid and keeps channel draws identical across policies") {
  std::filesystem::path out_dir = std::filesystem::temp_directory_path() / "cr_sweep";
  std::filesystem::remove_all(out_dir);
  std::string cfg_text = std::string(kChainConfig) +
                         "sweep {\n"
                         "  policies = [\"fpolicy\", \"backpressure\"]\n"
                         "  direction = [0.0, 1.0]\n"
                         "  scales = [0.25]\n"
                         "  seeds = [7]\n"
                         "  horizon = 4000\n"
                         "  out_dir = \"" +
                         (out_dir / "").string() + "\"\n}\n";
  std::filesystem::path cfg = write_file("cr_sweep.cfg", cfg_text);

  Captured c = cli({"sweep", "--config", cfg.string(), "--jobs", "2"});
  REQUIRE(c.exit_code == 0);
  json index = json::parse(c.out);
  REQUIRE(index["files"].size() == 2);

  std::vector<json> sums;
  for (const auto& f : index["files"])
    sums.push_back(json::parse(slurp(out_dir / f.get<std::string>())));
  // Arrival substreams are keyed by (seed, node, slot), never by policy, so
  // the paired runs see the same exogenous traffic.
  CHECK(sums[0]["arrivals_total"] == sums[1]["arrivals_total"]);
  CHECK(sums[0]["policy"] != sums[1]["policy"]);
  CHECK(sums[0]["seed"] == 7);
}
