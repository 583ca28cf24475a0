#include "coneroute/cli.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "coneroute/capacity.hpp"
#include "coneroute/cones.hpp"
#include "coneroute/config.hpp"
#include "coneroute/errors.hpp"
#include "coneroute/sim.hpp"
#include "coneroute/verify.hpp"

namespace coneroute {
namespace {

using nlohmann::json;

std::vector<double> parse_reals(const std::string& csv, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      fail(Errc::config_error, what + ": not a number: " + tok);
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) fail(Errc::config_error, what + ": not a number: " + tok);
    out.push_back(v);
  }
  if (out.empty()) fail(Errc::config_error, what + ": empty list");
  return out;
}

// All file output goes through a temp-file + rename so readers never observe
// a partially written file.
void write_atomic(const std::filesystem::path& path, const std::string& body) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::config_error, "cannot write " + tmp.string());
    out << body;
  }
  std::filesystem::rename(tmp, path);
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "slot,node,backlog\n";
  char buf[96];
  for (const TraceRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%lld\n", static_cast<long long>(r.slot), r.node,
                  static_cast<long long>(r.backlog));
    out += buf;
  }
  return out;
}

json summary_json(const SimStats& stats, const SimConfig& cfg) {
  json j;
  j["avg_total_backlog"] = stats.avg_total_backlog;
  j["mean_delay"] = stats.mean_delay;
  j["delivered"] = stats.delivered;
  j["policy"] = stats.policy;
  j["seed"] = stats.seed;
  j["arrivals_total"] = stats.arrivals_total;
  j["max_total_backlog"] = stats.max_total_backlog;
  j["final_total_backlog"] = stats.final_total_backlog;
  j["avg_backlog_per_node"] = stats.avg_backlog_per_node;
  j["horizon"] = cfg.horizon;
  j["lambda"] = cfg.arrivals.lambda;
  return j;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return out;
}

struct CliFlags {
  std::string config_path;
  std::string q_csv;
  double k_value = 3.0;
  bool path_connected = false;
  std::string policy;
  std::string lambda_csv;
  std::string trace_out;
  std::string summary_out;
  std::string out_dir;
  std::int64_t horizon = -1;
  std::int64_t warmup = -2;
  std::int64_t trace_every = -1;
  std::int64_t seed = -1;
  int samples = 400;
  int drift_samples = 2000;
  int jobs = 0;
};

int cmd_resolve(const CliFlags& fl) {
  std::vector<double> q = parse_reals(fl.q_csv, "--q");
  for (double v : q)
    if (!(v >= 0.0)) fail(Errc::config_error, "--q entries must be nonnegative");
  WeightFunction f = WeightFunction::geometric(fl.k_value);
  ConeResolution r = [&] {
    if (!fl.path_connected) return resolve_cone(q, f);
    if (fl.config_path.empty())
      fail(Errc::config_error, "--pc needs --config with the network");
    NetworkModel m = load_network(parse_config_file(fl.config_path));
    return resolve_cone_pc(q, f, m);
  }();
  json j;
  j["ordering"] = r.ordering.to_lists();
  j["on_boundary"] = r.on_boundary;
  j["lyapunov_value"] = lyapunov_value(q, f, r.ordering);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_simulate(const CliFlags& fl) {
  if (fl.config_path.empty()) fail(Errc::config_error, "simulate needs --config");
  SimConfig cfg = load_sim_config(parse_config_file(fl.config_path));
  if (!fl.policy.empty()) cfg.policy_spec = fl.policy;
  if (fl.seed >= 0) cfg.seed = static_cast<std::uint64_t>(fl.seed);
  if (fl.horizon >= 0) cfg.horizon = fl.horizon;
  if (fl.warmup >= -1) cfg.warmup = fl.warmup;
  if (!fl.lambda_csv.empty()) {
    std::vector<double> lam = parse_reals(fl.lambda_csv, "--lambda");
    if (lam.size() == 1) lam.assign(static_cast<std::size_t>(cfg.model.n_relays()), lam[0]);
    cfg.arrivals.lambda = std::move(lam);
  }
  if (fl.trace_every >= 0) cfg.trace_every = fl.trace_every;
  if (!fl.trace_out.empty() && cfg.trace_every <= 0) cfg.trace_every = 1;

  SimStats stats = run(cfg);
  if (!fl.trace_out.empty()) write_atomic(fl.trace_out, trace_csv(stats.trace));
  std::string summary = summary_json(stats, cfg).dump(2);
  if (fl.summary_out.empty())
    std::cout << summary << "\n";
  else
    write_atomic(fl.summary_out, summary + "\n");
  return 0;
}

int cmd_capacity(const CliFlags& fl) {
  if (fl.config_path.empty()) fail(Errc::config_error, "capacity needs --config");
  NetworkModel m = load_network(parse_config_file(fl.config_path));
  std::vector<double> lam;
  if (!fl.lambda_csv.empty()) {
    lam = parse_reals(fl.lambda_csv, "--lambda");
    if (lam.size() == 1) lam.assign(static_cast<std::size_t>(m.n_relays()), lam[0]);
  } else {
    lam.assign(static_cast<std::size_t>(m.n_relays()), 0.0);
  }
  CapacityResult r = stability_lp_feasible(m, lam);
  json j;
  j["feasible"] = r.feasible;
  j["slack"] = r.slack;
  bool any_positive = false;
  for (double v : lam) any_positive = any_positive || v > 0.0;
  if (any_positive)
    j["theta_star"] = scale_to_boundary(m, lam);
  else
    j["theta_star"] = nullptr;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_verify(const CliFlags& fl) {
  NetworkModel m = diamond_network();
  WeightFunction f = WeightFunction::geometric(fl.k_value);
  if (!fl.config_path.empty()) {
    ConfigSection root = parse_config_file(fl.config_path);
    m = load_network(root);
    f = load_weights(root);
  }
  VerifyOptions opt;
  opt.samples = fl.samples;
  opt.boundary_samples = std::max(1, fl.samples / 2);
  opt.drift_samples = fl.drift_samples;
  if (fl.seed >= 0) opt.seed = static_cast<std::uint64_t>(fl.seed);

  std::vector<SuiteResult> results = run_verify_suites(m, f, opt);
  json j;
  j["suites"] = json::array();
  for (const SuiteResult& r : results) {
    json s;
    s["name"] = r.name;
    s["passed"] = r.passed;
    s["expected_fail"] = r.expected_fail;
    s["checks"] = r.checks;
    s["message"] = r.message;
    j["suites"].push_back(s);
  }
  const bool ok = all_passed(results);
  j["passed"] = ok;
  std::cout << j.dump(2) << "\n";
  return ok ? 0 : 1;
}

int cmd_sweep(const CliFlags& fl) {
  if (fl.config_path.empty()) fail(Errc::config_error, "sweep needs --config");
  ConfigSection root = parse_config_file(fl.config_path);
  SimConfig base = load_sim_config(root);
  SweepSpec spec = load_sweep_spec(root);
  if (!fl.out_dir.empty()) spec.out_dir = fl.out_dir;
  std::filesystem::create_directories(spec.out_dir);

  struct Job {
    std::string policy;
    double scale = 0.0;
    std::uint64_t seed = 0;
    std::string file;
  };
  std::vector<Job> jobs;
  for (const std::string& policy : spec.policies)
    for (double scale : spec.scales)
      for (std::uint64_t seed : spec.seeds) {
        std::ostringstream name;
        name << "sum_" << jobs.size() << "_" << sanitize(policy) << "_x" << scale << "_s" << seed
             << ".json";
        jobs.push_back({policy, scale, seed, name.str()});
      }

  // Worker pool; each grid point owns its simulation and output file.
  unsigned n_workers = fl.jobs > 0 ? static_cast<unsigned>(fl.jobs)
                                   : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  std::mutex fail_mutex;
  std::string first_error;

  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        const Job& job = jobs[i];
        SimConfig cfg = base;
        cfg.policy_spec = job.policy;
        cfg.seed = job.seed;
        cfg.horizon = spec.horizon;
        cfg.warmup = spec.warmup;
        cfg.arrivals.lambda.resize(spec.direction.size());
        for (std::size_t k = 0; k < spec.direction.size(); ++k)
          cfg.arrivals.lambda[k] = job.scale * spec.direction[k];
        SimStats stats = run(cfg);
        json j = summary_json(stats, cfg);
        j["scale"] = job.scale;
        write_atomic(std::filesystem::path(spec.out_dir) / job.file, j.dump(2) + "\n");
        if (cfg.trace_every > 0) {
          std::filesystem::path tp = std::filesystem::path(spec.out_dir) / ("trace_" + job.file);
          tp.replace_extension(".csv");
          write_atomic(tp, trace_csv(stats.trace));
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(fail_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (!first_error.empty()) fail(Errc::config_error, "sweep job failed: " + first_error);

  json index;
  index["out_dir"] = spec.out_dir;
  index["files"] = json::array();
  for (const Job& job : jobs) index["files"].push_back(job.file);
  std::cout << index.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"priority-based broadcast-routing toolkit"};
  app.require_subcommand(1);
  CliFlags fl;

  CLI::App* resolve = app.add_subcommand("resolve", "rank ordering and potential for a backlog");
  resolve->add_option("--q", fl.q_csv, "comma-separated nonnegative backlogs")->required();
  resolve->add_option("--K", fl.k_value, "geometric weight parameter");
  resolve->add_flag("--pc", fl.path_connected, "restrict to path-connected orderings");
  resolve->add_option("--config", fl.config_path, "network config (needed with --pc)");

  CLI::App* simulate = app.add_subcommand("simulate", "run one seeded simulation");
  simulate->add_option("--config", fl.config_path, "experiment config file")->required();
  simulate->add_option("--policy", fl.policy, "policy spec override");
  simulate->add_option("--seed", fl.seed, "seed override");
  simulate->add_option("--horizon", fl.horizon, "horizon override");
  simulate->add_option("--warmup", fl.warmup, "warmup override");
  simulate->add_option("--lambda", fl.lambda_csv, "arrival rates override (scalar or list)");
  simulate->add_option("--trace-out", fl.trace_out, "write slot,node,backlog CSV here");
  simulate->add_option("--trace-every", fl.trace_every, "trace sampling stride");
  simulate->add_option("--summary-out", fl.summary_out, "write summary JSON here (default stdout)");

  CLI::App* capacity = app.add_subcommand("capacity", "arrival-vector feasibility and boundary");
  capacity->add_option("--config", fl.config_path, "network config file")->required();
  capacity->add_option("--lambda", fl.lambda_csv, "arrival rates (scalar or list)");

  CLI::App* verify = app.add_subcommand("verify", "run the property suites");
  verify->add_option("--config", fl.config_path, "network + weight config (default: diamond)");
  verify->add_option("--K", fl.k_value, "geometric weight parameter (no config)");
  verify->add_option("--seed", fl.seed, "suite seed");
  verify->add_option("--samples", fl.samples, "random backlogs per suite");
  verify->add_option("--drift-samples", fl.drift_samples, "one-slot samples per drift point");

  CLI::App* sweep = app.add_subcommand("sweep", "grid of simulations into per-point files");
  sweep->add_option("--config", fl.config_path, "config with a sweep block")->required();
  sweep->add_option("--out-dir", fl.out_dir, "output directory override");
  sweep->add_option("--jobs", fl.jobs, "worker threads (default: hardware)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (resolve->parsed()) return cmd_resolve(fl);
    if (simulate->parsed()) return cmd_simulate(fl);
    if (capacity->parsed()) return cmd_capacity(fl);
    if (verify->parsed()) return cmd_verify(fl);
    if (sweep->parsed()) return cmd_sweep(fl);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace coneroute
