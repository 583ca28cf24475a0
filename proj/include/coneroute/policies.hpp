#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "coneroute/cones.hpp"
#include "coneroute/model.hpp"
#include "coneroute/ranking.hpp"
#include "coneroute/rng.hpp"
#include "coneroute/weights.hpp"

namespace coneroute {

enum class TieRule { lowest_index, uniform_random };

// One slot's routing choices: an entry per transmitting relay. forwarder == i
// means the packet is retained; forwarder == 0 is a delivery.
struct RoutingDecision {
  struct Entry {
    int node = 0;
    NodeMask sampled_set = 0;
    int forwarder = 0;
  };
  std::vector<Entry> entries;
};

// Lowest-rank member of s under r; destination presence forces delivery, and
// the transmitter retains when it is itself in the min-rank subset. `tie`
// breaks between other co-ranked members.
int select_forwarder(const RankOrdering& r, int i, NodeMask s, TieRule tie, Rng& rng);

// Same, with the per-node class positions already extracted (rank_of[node];
// size N+1). Keeps the slot loop free of repeated rank lookups.
int select_forwarder(std::span<const int> rank_of, int i, NodeMask s, TieRule tie, Rng& rng);

// Classes of equal backlog, ordered by increasing backlog.
RankOrdering rank_backpressure(std::span<const double> q);

// Congestion costs V solving V_0 = 0, V_i = Q_i + sum_S P(S|i) min_{j in S} V_j.
struct OrcdCosts {
  std::vector<double> v;                // size N+1, v[0] == 0
  std::vector<int> finalization_order;  // relays in the order they were fixed
  int iterations = 0;                   // sweeps used (value iteration only)
};

// Dijkstra-style finalization: repeatedly fix the unfinalized relay with the
// smallest candidate cost computed against the finalized set.
OrcdCosts orcd_costs(std::span<const double> q, const NetworkModel& m);

// Reference fixed-point iteration from V = +inf off-destination, run until
// the largest change drops below 1e-10.
OrcdCosts orcd_costs_value_iteration(std::span<const double> q, const NetworkModel& m);

// Relays sorted by V ascending; values within 1e-12 relative share a class.
RankOrdering rank_orcd(std::span<const double> q, const NetworkModel& m);

RankOrdering rank_fpolicy(std::span<const double> q, const WeightFunction& f);
RankOrdering rank_pc_fpolicy(std::span<const double> q, const WeightFunction& f,
                             const NetworkModel& m);

// True iff the fine stream refines the coarse stream at every index.
bool respects_check(const std::vector<RankOrdering>& fine_stream,
                    const std::vector<RankOrdering>& coarse_stream);

// Slot-by-slot rank rule. Implementations are stateless between slots apart
// from memoized tables, so a policy object can be shared across runs of the
// same configuration.
class RankPolicy {
 public:
  virtual ~RankPolicy() = default;
  virtual RankOrdering rank(std::span<const double> q) const = 0;
  virtual const std::string& name() const = 0;
};

// Parses a policy spec string: "backpressure" | "orcd" | "fpolicy" |
// "pc-fpolicy" | "static-priority:<ordering-json>". The weight function is
// required by the f-policies and ignored by the rest.
std::unique_ptr<RankPolicy> make_policy(const std::string& spec, const NetworkModel& m,
                                        const WeightFunction* f);

}  // namespace coneroute
