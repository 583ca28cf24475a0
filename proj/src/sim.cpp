#include "coneroute/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "coneroute/cones.hpp"
#include "coneroute/errors.hpp"

namespace coneroute {

std::int64_t QueueState::total_backlog() const {
  std::int64_t total = 0;
  for (const auto& q : queues) total += static_cast<std::int64_t>(q.size());
  return total;
}

void QueueState::backlog(std::vector<double>& out) const {
  out.resize(queues.size() - 1);
  for (std::size_t i = 1; i < queues.size(); ++i)
    out[i - 1] = static_cast<double>(queues[i].size());
}

QueueState QueueState::from_backlog(std::span<const double> counts) {
  QueueState state(static_cast<int>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double c = counts[i];
    if (!(c >= 0.0) || std::abs(c - std::round(c)) > 1e-9)
      fail(Errc::invalid_argument, "backlog counts must be non-negative integers");
    state.queues[i + 1].resize(static_cast<std::size_t>(std::llround(c)));
  }
  return state;
}

void ArrivalProcess::validate(int n_relays) const {
  if (static_cast<int>(lambda.size()) != n_relays)
    fail(Errc::length_mismatch, "arrival rate vector does not match the relay count");
  if (a_max < 1) fail(Errc::invalid_argument, "a_max must be at least 1");
  for (double l : lambda) {
    if (!(l >= 0.0) || !std::isfinite(l))
      fail(Errc::invalid_argument, "arrival rates must be non-negative and finite");
    double cap = kind == Kind::bernoulli ? 1.0 : static_cast<double>(a_max) / 2.0;
    if (l > cap + 1e-12)
      fail(Errc::invalid_argument, "arrival rate exceeds what the process can realize");
  }
}

int ArrivalProcess::sample(int i, Rng& rng) const {
  double l = lambda[static_cast<std::size_t>(i) - 1];
  if (l <= 0.0) return 0;
  if (kind == Kind::bernoulli) return rng.next_double() < l ? 1 : 0;
  // Batch size uniform on {0..a_max}, thinned so the slot mean is exactly l:
  // E[U * B] = (a_max / 2) * p with p = 2 l / a_max.
  double p = 2.0 * l / static_cast<double>(a_max);
  if (rng.next_double() >= p) return 0;
  return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(a_max) + 1));
}

StepResult step(QueueState& state, const NetworkModel& m, const RankPolicy& policy,
                const ArrivalProcess& arrivals, const Rng& base, TieRule tie) {
  const int n = m.n_relays();
  if (state.n_relays() != n) fail(Errc::length_mismatch, "queue state does not match the model");
  arrivals.validate(n);

  std::vector<double> q;
  state.backlog(q);

  StepResult out{RoutingDecision{}, policy.rank(q)};
  std::vector<int> rank_of(static_cast<std::size_t>(n) + 1);
  out.ordering.fill_class_of(rank_of);

  // Fix every decision against the slot-t backlogs before moving anything.
  for (int i = 1; i <= n; ++i) {
    if (state.queues[static_cast<std::size_t>(i)].empty()) continue;
    Rng channel = base.derive({stream::channel, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(state.slot)});
    NodeMask s = m.sample_forwarder_set(i, channel);
    Rng tiebreak = base.derive({stream::tiebreak, static_cast<std::uint64_t>(i),
                                static_cast<std::uint64_t>(state.slot)});
    int j = select_forwarder(rank_of, i, s, tie, tiebreak);
    out.decision.entries.push_back({i, s, j});
  }

  // Apply atomically: pop every forwarded head-of-line packet first, then
  // append to receivers in transmitter order.
  std::vector<std::pair<int, PacketRecord>> moves;
  for (const auto& e : out.decision.entries) {
    if (e.forwarder == e.node) continue;  // retention
    auto& src = state.queues[static_cast<std::size_t>(e.node)];
    PacketRecord pkt = src.front();
    src.pop_front();
    if (e.forwarder == 0) {
      state.delivered += 1;
      state.delay_sum += static_cast<double>(state.slot - pkt.birth_slot);
    } else {
      moves.emplace_back(e.forwarder, pkt);
    }
  }
  for (const auto& [to, pkt] : moves) state.queues[static_cast<std::size_t>(to)].push_back(pkt);

  for (int i = 1; i <= n; ++i) {
    Rng arrival = base.derive({stream::arrival, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(state.slot)});
    int a = arrivals.sample(i, arrival);
    for (int k = 0; k < a; ++k)
      state.queues[static_cast<std::size_t>(i)].push_back(PacketRecord{state.slot});
    state.arrivals_total += a;
  }

  state.slot += 1;
  return out;
}

SimStats run(const SimConfig& cfg) {
  const int n = cfg.model.n_relays();
  if (cfg.horizon <= 0) fail(Errc::invalid_argument, "horizon must be positive");
  std::int64_t warmup = cfg.warmup >= 0 ? cfg.warmup : cfg.horizon / 10;
  if (warmup >= cfg.horizon) fail(Errc::invalid_argument, "warmup must be below the horizon");
  cfg.arrivals.validate(n);

  const WeightFunction* f = cfg.weights ? &*cfg.weights : nullptr;
  std::unique_ptr<RankPolicy> policy = make_policy(cfg.policy_spec, cfg.model, f);

  QueueState state(n);
  Rng base(cfg.seed);

  SimStats stats;
  stats.policy = policy->name();
  stats.seed = cfg.seed;
  stats.avg_backlog_per_node.assign(static_cast<std::size_t>(n), 0.0);
  stats.slice_avg.assign(100, 0.0);
  std::vector<std::int64_t> slice_count(100, 0);

  double total_sum = 0.0;
  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    std::int64_t total = state.total_backlog();
    stats.max_total_backlog = std::max(stats.max_total_backlog, total);
    std::size_t slice = static_cast<std::size_t>((t * 100) / cfg.horizon);
    stats.slice_avg[slice] += static_cast<double>(total);
    slice_count[slice] += 1;
    if (t >= warmup) {
      total_sum += static_cast<double>(total);
      for (int i = 1; i <= n; ++i)
        stats.avg_backlog_per_node[static_cast<std::size_t>(i) - 1] +=
            static_cast<double>(state.queues[static_cast<std::size_t>(i)].size());
    }
    if (cfg.trace_every > 0 && t % cfg.trace_every == 0) {
      for (int i = 1; i <= n; ++i)
        stats.trace.push_back(
            {t, i, static_cast<std::int64_t>(state.queues[static_cast<std::size_t>(i)].size())});
    }
    step(state, cfg.model, *policy, cfg.arrivals, base, cfg.tie);
  }

  const double measured = static_cast<double>(cfg.horizon - warmup);
  stats.avg_total_backlog = total_sum / measured;
  for (double& v : stats.avg_backlog_per_node) v /= measured;
  for (std::size_t k = 0; k < stats.slice_avg.size(); ++k)
    if (slice_count[k] > 0) stats.slice_avg[k] /= static_cast<double>(slice_count[k]);
  stats.delivered = state.delivered;
  stats.arrivals_total = state.arrivals_total;
  stats.mean_delay = state.delivered > 0 ? state.delay_sum / static_cast<double>(state.delivered) : 0.0;
  stats.final_total_backlog = state.total_backlog();

  if (stats.arrivals_total != stats.delivered + stats.final_total_backlog)
    fail(Errc::invalid_argument, "packet conservation violated during simulation");
  return stats;
}

DriftEstimate drift_estimate(std::span<const double> q, const NetworkModel& m,
                             const RankPolicy& policy, const WeightFunction& f,
                             const ArrivalProcess& arrivals, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) fail(Errc::invalid_argument, "drift estimation needs at least 1 sample");
  arrivals.validate(m.n_relays());

  ConeResolution r0 = resolve_cone(q, f);
  const double l0 = lyapunov_value(q, f, r0.ordering);

  Rng base(seed);
  std::vector<double> deltas(static_cast<std::size_t>(n_samples));
  std::vector<double> q1;
  for (int k = 0; k < n_samples; ++k) {
    QueueState state = QueueState::from_backlog(q);
    Rng sample = base.derive({stream::drift, static_cast<std::uint64_t>(k)});
    step(state, m, policy, arrivals, sample, TieRule::lowest_index);
    state.backlog(q1);
    ConeResolution r1 = resolve_cone(q1, f);
    deltas[static_cast<std::size_t>(k)] = lyapunov_value(q1, f, r1.ordering) - l0;
  }

  DriftEstimate est;
  est.n_samples = n_samples;
  for (double d : deltas) est.mean += d;
  est.mean /= static_cast<double>(n_samples);
  if (n_samples > 1) {
    double ss = 0.0;
    for (double d : deltas) ss += (d - est.mean) * (d - est.mean);
    est.std_error = std::sqrt(ss / (static_cast<double>(n_samples) * (n_samples - 1.0)));
  }
  return est;
}

}  // namespace coneroute
