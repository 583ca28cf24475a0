#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "coneroute/model.hpp"
#include "coneroute/policies.hpp"
#include "coneroute/rng.hpp"
#include "coneroute/weights.hpp"

namespace coneroute {

struct PacketRecord {
  std::int64_t birth_slot = 0;
};

// Per-relay FIFO queues with delivery bookkeeping. The backlog vector is the
// record counts, and every routed packet is an explicit record, so the
// "receiver actually got a packet" guard of the dynamics holds by
// construction.
struct QueueState {
  explicit QueueState(int n_relays) : queues(static_cast<std::size_t>(n_relays) + 1) {}

  std::vector<std::deque<PacketRecord>> queues;  // index 1..N; [0] stays empty
  std::int64_t slot = 0;
  std::int64_t delivered = 0;
  double delay_sum = 0.0;
  std::int64_t arrivals_total = 0;

  int n_relays() const { return static_cast<int>(queues.size()) - 1; }
  std::int64_t total_backlog() const;
  void backlog(std::vector<double>& out) const;  // out[i-1] = node i count

  // Seeds every queue with `counts[i-1]` packets of birth slot 0.
  static QueueState from_backlog(std::span<const double> counts);
};

struct ArrivalProcess {
  enum class Kind { bernoulli, batch_uniform };
  Kind kind = Kind::bernoulli;
  std::vector<double> lambda;  // per-relay mean arrival rates
  int a_max = 1;               // largest batch per slot

  // Exogenous arrivals for node i in one slot (0..a_max), mean lambda[i-1].
  int sample(int i, Rng& rng) const;
  void validate(int n_relays) const;
};

// Advances one slot: rank from the policy at Q(t), every backlogged relay
// samples its forwarder set and fixes a decision against slot-t ranks, all
// moves apply atomically, then exogenous arrivals append. Channel and
// arrival randomness come from substreams keyed (seed, purpose, node, slot),
// so outcomes are identical across policies run with the same seed.
struct StepResult {
  RoutingDecision decision;
  RankOrdering ordering;
};
StepResult step(QueueState& state, const NetworkModel& m, const RankPolicy& policy,
                const ArrivalProcess& arrivals, const Rng& base, TieRule tie);

struct SimConfig {
  NetworkModel model;
  std::string policy_spec = "fpolicy";
  std::optional<WeightFunction> weights{};  // required by the f-policies
  ArrivalProcess arrivals{};
  std::int64_t horizon = 0;
  std::int64_t warmup = -1;  // negative: default to horizon/10
  std::uint64_t seed = 0;
  TieRule tie = TieRule::lowest_index;
  std::int64_t trace_every = 0;  // 0 disables the trace
};

struct TraceRow {
  std::int64_t slot = 0;
  int node = 0;
  std::int64_t backlog = 0;
};

struct SimStats {
  double avg_total_backlog = 0.0;            // post-warmup time average of sum_i Q_i(t)
  std::vector<double> avg_backlog_per_node;  // post-warmup, indexed node-1
  double mean_delay = 0.0;                   // delivery slot minus birth slot, delivered packets
  std::int64_t delivered = 0;
  std::int64_t arrivals_total = 0;
  std::int64_t max_total_backlog = 0;
  std::int64_t final_total_backlog = 0;
  // Average total backlog over 100 equal slices of the full horizon; lets
  // callers compare late-run averages without storing per-slot data.
  std::vector<double> slice_avg;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<TraceRow> trace;
};

SimStats run(const SimConfig& cfg);

// Monte Carlo estimate of E[L*(Q(t+1)) - L*(Q(t)) | Q(t) = q] from n_samples
// independent one-slot transitions; q must be integral (packet counts).
struct DriftEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
};
DriftEstimate drift_estimate(std::span<const double> q, const NetworkModel& m,
                             const RankPolicy& policy, const WeightFunction& f,
                             const ArrivalProcess& arrivals, int n_samples, std::uint64_t seed);

}  // namespace coneroute
