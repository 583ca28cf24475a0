#pragma once

#include <span>
#include <vector>

#include "coneroute/model.hpp"
#include "coneroute/weights.hpp"

namespace coneroute {

// An ordered partition (C_1, ..., C_M) of the relays {1..N}. Lower-indexed
// classes have lower rank (higher routing priority). Classes are bitmasks,
// which makes equality structural and canonical by construction.
class RankOrdering {
 public:
  RankOrdering(std::vector<NodeMask> classes, int n_relays);
  static RankOrdering from_lists(const std::vector<std::vector<int>>& classes, int n_relays);
  // Single-class ordering ({1..N}).
  static RankOrdering whole(int n_relays);

  int n_relays() const { return n_relays_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  NodeMask class_mask(int i) const { return classes_[i]; }  // 0-based position
  const std::vector<NodeMask>& classes() const { return classes_; }

  // 0-based class position of a relay.
  int class_of(int node) const;
  // Fills rank_of[node] with class positions; rank_of must have size N+1
  // (entry 0 is left untouched). Avoids per-call allocation on hot paths.
  void fill_class_of(std::span<int> rank_of) const;

  std::vector<std::vector<int>> to_lists() const;

  bool operator==(const RankOrdering& other) const { return classes_ == other.classes_; }

 private:
  std::vector<NodeMask> classes_;
  int n_relays_;
};

// Compact JSON-style rendering, e.g. "[[2],[1,3]]" for ({2},{1,3}).
std::string ordering_to_string(const RankOrdering& r);

// Position (1-based) of the first class where the orderings differ.
int mismatch(const RankOrdering& r, const RankOrdering& r2);

// True iff every strict rank relation of `coarse` also holds in `fine`
// (reflexive: an ordering refines itself).
bool is_refinement(const RankOrdering& fine, const RankOrdering& coarse);

// True iff r is obtained from r2 by splitting exactly one class of r2 into an
// ordered pair of nonempty classes.
bool is_one_step_refinement(const RankOrdering& r, const RankOrdering& r2);

// All splits of one class into an ordered pair: a class of size s yields
// 2^s - 2 of them.
std::vector<RankOrdering> one_step_refinements(const RankOrdering& r);

// All M-1 merges of adjacent classes.
std::vector<RankOrdering> one_step_confinements(const RankOrdering& r);

// Refinements followed by confinements (disjoint by class count).
std::vector<RankOrdering> adjacency(const RankOrdering& r);

// True iff every node has a route to node 0 through nodes of rank no higher
// than its own.
bool is_path_connected(const RankOrdering& r, const NetworkModel& m);

// adjacency(r) filtered to path-connected orderings; r itself must be
// path-connected.
std::vector<RankOrdering> path_connected_adjacency(const RankOrdering& r, const NetworkModel& m);

// Prefix-weighted backlog sum over the first n classes:
//   sum_{i=1..n} f(|C^{i-1}|, |C_i|) * Q_{C_i}.
double penalty(std::span<const double> q, const RankOrdering& r, int n, const WeightFunction& f);

// Comparison at the mismatch position; `tie` records that the penalty values
// matched within 1e-12 relative tolerance, in which case `less` holds iff r
// is a one-step refinement of r2.
struct PenaltyOrder {
  bool less = false;
  bool tie = false;
};
PenaltyOrder compare_penalty(const RankOrdering& r, const RankOrdering& r2,
                             std::span<const double> q, const WeightFunction& f);
bool less_penalizes(const RankOrdering& r, const RankOrdering& r2, std::span<const double> q,
                    const WeightFunction& f);

namespace detail {

// Class-mask-level helpers shared with cone resolution, which works on
// orderings of node subsets that are not full partitions of {1..N}.

double class_backlog(std::span<const double> q, NodeMask c);

// Compare the orderings `a` vs `b` (same node universe) at their first
// differing class. Because earlier classes coincide, the penalty comparison
// reduces to the single differing term on each side.
PenaltyOrder compare_mask_orderings(std::span<const NodeMask> a, std::span<const NodeMask> b,
                                    std::span<const double> q, const WeightFunction& f);

bool masks_one_step_refinement(std::span<const NodeMask> r, std::span<const NodeMask> r2);

}  // namespace detail

}  // namespace coneroute
