#pragma once

#include <cstdint>
#include <vector>

#include "coneroute/errors.hpp"
#include "coneroute/rng.hpp"

namespace coneroute {

// Node subsets are bitmasks over {0, ..., N}: bit j set means node j is in
// the subset. Node 0 is the destination; nodes 1..N are relays.
using NodeMask = std::uint64_t;

inline constexpr int kMaxRelays = 63;

inline NodeMask node_bit(int j) { return NodeMask{1} << j; }

struct BroadcastEntry {
  NodeMask set = 0;    // receiver subset; always contains the transmitter
  double prob = 0.0;   // strictly positive after normalization
};

struct LinkProb {
  int from = 0;
  int to = 0;
  double prob = 0.0;
};

// Immutable network: N relays plus destination 0, and for every relay i a
// finite distribution P(S|i) over receiver subsets S of one transmission.
// Construction validates and normalizes: duplicate subsets merge, zero-
// probability entries drop, probabilities must sum to 1 within 1e-9 and are
// then renormalized exactly so downstream code can assume sum == 1.
class NetworkModel {
 public:
  // broadcast[i] holds node i's entries for i in 1..n_relays; broadcast[0]
  // must stay empty (the destination never transmits).
  NetworkModel(int n_relays, std::vector<std::vector<BroadcastEntry>> broadcast);

  // Independent per-link success probabilities induce a product-form
  // broadcast distribution: every outcome subset of i's link targets, with
  // i itself added to each subset.
  static NetworkModel from_link_probabilities(int n_relays, const std::vector<LinkProb>& links);

  int n_relays() const { return n_relays_; }
  const std::vector<BroadcastEntry>& broadcast(int i) const;

  // True iff some positive-probability set of i contains j, with j != i.
  bool reaches(int i, int j) const;
  // All nodes j != i that i reaches, as a mask.
  NodeMask reach_set(int i) const;
  // Mask of all relays (bits 1..N).
  NodeMask relay_mask() const { return relay_mask_; }

  // True iff every relay has a directed path of reaches-edges to node 0.
  bool is_connected() const;

  // Smallest positive P(S|i) over all nodes and sets.
  double p_min() const;

  // Draws S with probability P(S|i); deterministic given the rng state.
  NodeMask sample_forwarder_set(int i, Rng& rng) const;

 private:
  int n_relays_;
  std::vector<std::vector<BroadcastEntry>> broadcast_;
  std::vector<NodeMask> reach_;  // reach_[i] = union of i's sets minus i
  NodeMask relay_mask_;
};

// Nodes (members of `members`) that can reach node 0 through directed paths
// whose intermediate hops all lie inside `allowed`: returns true iff every
// member has such a path. Shared by connectivity and path-connectivity checks.
bool mask_reaches_destination(const NetworkModel& m, NodeMask members, NodeMask allowed);

}  // namespace coneroute
