#pragma once

#include <span>
#include <utility>
#include <vector>

#include "coneroute/model.hpp"

namespace coneroute {

// Conditional forwarder distribution for one (transmitter, outcome-set)
// block with 0 outside the set; `choice` sums to 1 over members of `set`.
struct CapacityWitnessEntry {
  int node = 0;
  NodeMask set = 0;
  std::vector<std::pair<int, double>> choice;
};

struct CapacityResult {
  bool feasible = false;  // strictly inside the stability region
  double slack = 0.0;     // largest epsilon with out - in >= lambda + epsilon per relay
  std::vector<CapacityWitnessEntry> witness;
};

// Max-slack flow LP: outcome sets containing the destination always deliver,
// every other set picks a forwarder distribution; feasible iff the optimal
// uniform slack is positive.
CapacityResult stability_lp_feasible(const NetworkModel& m, std::span<const double> lambda);

// Smallest per-relay margin out_k - in_k - lambda_k realized by a witness;
// equals the LP slack up to solver tolerance.
double witness_min_slack(const NetworkModel& m, std::span<const double> lambda,
                         const CapacityResult& r);

// Largest theta with theta * direction strictly feasible, found by doubling
// plus bisection to an interval of width 1e-7 (midpoint returned).
double scale_to_boundary(const NetworkModel& m, std::span<const double> direction);

}  // namespace coneroute
