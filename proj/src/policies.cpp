#include "coneroute/policies.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace coneroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_backlog_len(std::span<const double> q, int n) {
  if (static_cast<int>(q.size()) != n)
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  for (double v : q)
    if (!(std::isfinite(v) && v >= 0.0))
      fail(Errc::invalid_argument, "backlog entries must be finite and nonnegative");
}

}  // namespace

int select_forwarder(std::span<const int> rank_of, int i, NodeMask s, TieRule tie, Rng& rng) {
  if (!(s & node_bit(i))) fail(Errc::invalid_argument, "transmitter missing from its own set");
  if (s & node_bit(0)) return 0;  // destination heard it: forced delivery

  int best_rank = std::numeric_limits<int>::max();
  NodeMask best = 0;
  NodeMask rest = s;
  while (rest) {
    const int j = std::countr_zero(rest);
    rest &= rest - 1;
    const int rk = rank_of[j];
    if (rk < best_rank) {
      best_rank = rk;
      best = node_bit(j);
    } else if (rk == best_rank) {
      best |= node_bit(j);
    }
  }
  if (best & node_bit(i)) return i;  // retention-first within the min-rank class

  const int count = std::popcount(best);
  if (count == 1 || tie == TieRule::lowest_index) return std::countr_zero(best);
  int pick = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(count)));
  NodeMask rest2 = best;
  while (pick-- > 0) rest2 &= rest2 - 1;
  return std::countr_zero(rest2);
}

int select_forwarder(const RankOrdering& r, int i, NodeMask s, TieRule tie, Rng& rng) {
  std::vector<int> rank_of(static_cast<std::size_t>(r.n_relays()) + 1, 0);
  r.fill_class_of(rank_of);
  return select_forwarder(rank_of, i, s, tie, rng);
}

RankOrdering rank_backpressure(std::span<const double> q) {
  const int n = static_cast<int>(q.size());
  require_backlog_len(q, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return q[a] < q[b]; });

  std::vector<NodeMask> classes;
  for (int k = 0; k < n; ++k) {
    // Exact equality groups: backlogs are packet counts, so ties are exact.
    if (k > 0 && q[order[k]] == q[order[k - 1]])
      classes.back() |= node_bit(order[k] + 1);
    else
      classes.push_back(node_bit(order[k] + 1));
  }
  return RankOrdering(std::move(classes), n);
}

OrcdCosts orcd_costs(std::span<const double> q, const NetworkModel& m) {
  const int n = m.n_relays();
  require_backlog_len(q, n);
  if (!m.is_connected()) fail(Errc::not_connected, "congestion costs need a connected model");

  OrcdCosts out;
  out.v.assign(n + 1, kInf);
  out.v[0] = 0.0;
  NodeMask finalized = node_bit(0);

  for (int round = 0; round < n; ++round) {
    int best_node = -1;
    double best_val = kInf;
    for (int i = 1; i <= n; ++i) {
      if (finalized & node_bit(i)) continue;
      // Candidate assuming i's best move is always into the finalized set:
      // condition on the transmission reaching it.
      double p_hit = 0.0;
      double weighted = 0.0;
      for (const BroadcastEntry& e : m.broadcast(i)) {
        const NodeMask hit = e.set & finalized;
        if (hit == 0) continue;
        double mn = kInf;
        NodeMask rest = hit;
        while (rest) {
          mn = std::min(mn, out.v[std::countr_zero(rest)]);
          rest &= rest - 1;
        }
        p_hit += e.prob;
        weighted += e.prob * mn;
      }
      if (p_hit <= 0.0) continue;
      const double cand = (q[i - 1] + weighted) / p_hit;
      if (cand < best_val) {  // ties keep the lowest index (scanned first)
        best_val = cand;
        best_node = i;
      }
    }
    if (best_node < 0)
      fail(Errc::no_progress, "no unfinalized node reaches the finalized set");
    out.v[best_node] = best_val;
    finalized |= node_bit(best_node);
    out.finalization_order.push_back(best_node);
  }
  return out;
}

OrcdCosts orcd_costs_value_iteration(std::span<const double> q, const NetworkModel& m) {
  const int n = m.n_relays();
  require_backlog_len(q, n);
  if (!m.is_connected()) fail(Errc::not_connected, "congestion costs need a connected model");

  // Start from a large finite ceiling instead of literal infinity: a node
  // whose transmission can miss every settled node would otherwise feed
  // infinity back into itself forever. From above, the sweep decreases
  // geometrically onto the fixed point once the wave from the destination
  // arrives.
  const double ceiling = 1e18;
  OrcdCosts out;
  out.v.assign(n + 1, ceiling);
  out.v[0] = 0.0;
  std::vector<double> next(out.v);

  const int max_sweeps = 10000000;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double change = 0.0;
    for (int i = 1; i <= n; ++i) {
      double acc = 0.0;
      for (const BroadcastEntry& e : m.broadcast(i)) {
        double mn = ceiling;
        NodeMask rest = e.set;
        while (rest) {
          mn = std::min(mn, out.v[std::countr_zero(rest)]);
          rest &= rest - 1;
        }
        acc += e.prob * mn;
      }
      next[i] = q[i - 1] + acc;
      change = std::max(change, std::abs(next[i] - out.v[i]));
    }
    std::swap(out.v, next);
    out.iterations = sweep;
    if (change < 1e-10) break;
  }
  for (int i = 1; i <= n; ++i)
    if (!(out.v[i] < ceiling * 0.5))
      fail(Errc::no_progress, "fixed point left node " + std::to_string(i) + " unreachable");
  return out;
}

RankOrdering rank_orcd(std::span<const double> q, const NetworkModel& m) {
  const OrcdCosts costs = orcd_costs(q, m);
  const int n = m.n_relays();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 1);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return costs.v[a] < costs.v[b]; });

  std::vector<NodeMask> classes;
  for (int k = 0; k < n; ++k) {
    const double v = costs.v[order[k]];
    const double prev = k > 0 ? costs.v[order[k - 1]] : 0.0;
    if (k > 0 && std::abs(v - prev) <= 1e-12 * std::max(std::abs(v), std::abs(prev)))
      classes.back() |= node_bit(order[k]);
    else
      classes.push_back(node_bit(order[k]));
  }
  return RankOrdering(std::move(classes), n);
}

RankOrdering rank_fpolicy(std::span<const double> q, const WeightFunction& f) {
  return resolve_cone(q, f).ordering;
}

RankOrdering rank_pc_fpolicy(std::span<const double> q, const WeightFunction& f,
                             const NetworkModel& m) {
  return resolve_cone_pc(q, f, m).ordering;
}

bool respects_check(const std::vector<RankOrdering>& fine_stream,
                    const std::vector<RankOrdering>& coarse_stream) {
  if (fine_stream.size() != coarse_stream.size())
    fail(Errc::length_mismatch, "rank streams have different lengths");
  for (std::size_t t = 0; t < fine_stream.size(); ++t)
    if (!is_refinement(fine_stream[t], coarse_stream[t])) return false;
  return true;
}

namespace {

class BackpressurePolicy final : public RankPolicy {
 public:
  RankOrdering rank(std::span<const double> q) const override { return rank_backpressure(q); }
  const std::string& name() const override {
    static const std::string n = "backpressure";
    return n;
  }
};

class OrcdPolicy final : public RankPolicy {
 public:
  explicit OrcdPolicy(const NetworkModel& m) : m_(m) {}
  RankOrdering rank(std::span<const double> q) const override { return rank_orcd(q, m_); }
  const std::string& name() const override {
    static const std::string n = "orcd";
    return n;
  }

 private:
  const NetworkModel& m_;
};

class FPolicy final : public RankPolicy {
 public:
  explicit FPolicy(const WeightFunction& f) : f_(f) {}
  RankOrdering rank(std::span<const double> q) const override { return rank_fpolicy(q, f_); }
  const std::string& name() const override {
    static const std::string n = "fpolicy";
    return n;
  }

 private:
  WeightFunction f_;
};

class PcFPolicy final : public RankPolicy {
 public:
  PcFPolicy(const WeightFunction& f, const NetworkModel& m) : f_(f), m_(m) {}
  RankOrdering rank(std::span<const double> q) const override {
    return rank_pc_fpolicy(q, f_, m_);
  }
  const std::string& name() const override {
    static const std::string n = "pc-fpolicy";
    return n;
  }

 private:
  WeightFunction f_;
  const NetworkModel& m_;
};

class StaticPolicy final : public RankPolicy {
 public:
  StaticPolicy(RankOrdering r, std::string name) : r_(std::move(r)), name_(std::move(name)) {}
  RankOrdering rank(std::span<const double>) const override { return r_; }
  const std::string& name() const override { return name_; }

 private:
  RankOrdering r_;
  std::string name_;
};

}  // namespace

std::unique_ptr<RankPolicy> make_policy(const std::string& spec, const NetworkModel& m,
                                        const WeightFunction* f) {
  if (spec == "backpressure") return std::make_unique<BackpressurePolicy>();
  if (spec == "orcd") return std::make_unique<OrcdPolicy>(m);
  if (spec == "fpolicy" || spec == "pc-fpolicy") {
    if (f == nullptr)
      fail(Errc::config_error, "policy '" + spec + "' needs a weight function");
    if (spec == "fpolicy") return std::make_unique<FPolicy>(*f);
    return std::make_unique<PcFPolicy>(*f, m);
  }
  const std::string prefix = "static-priority:";
  if (spec.rfind(prefix, 0) == 0) {
    nlohmann::json j = nlohmann::json::parse(spec.substr(prefix.size()), nullptr, false);
    if (j.is_discarded() || !j.is_array())
      fail(Errc::config_error, "static-priority expects a JSON list of node lists");
    std::vector<std::vector<int>> classes;
    for (const auto& cls : j) {
      if (!cls.is_array()) fail(Errc::config_error, "static-priority classes must be lists");
      classes.emplace_back();
      for (const auto& v : cls) {
        if (!v.is_number_integer()) fail(Errc::config_error, "static-priority nodes must be integers");
        classes.back().push_back(v.get<int>());
      }
    }
    return std::make_unique<StaticPolicy>(RankOrdering::from_lists(classes, m.n_relays()), spec);
  }
  fail(Errc::config_error, "unknown policy spec '" + spec + "'");
}

}  // namespace coneroute
