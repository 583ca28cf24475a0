#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coneroute/model.hpp"
#include "coneroute/ranking.hpp"
#include "coneroute/weights.hpp"

namespace coneroute {

struct ConeResolution {
  RankOrdering ordering;
  // Some adjacency comparison was decided by the tie clause: q sits on (or
  // numerically near) a cone boundary.
  bool on_boundary = false;
  // Number of adjacent orderings the result was validated against.
  int checked_adjacency_count = 0;
};

// All ordered set partitions of {1..N} (guarded: N <= 8; the counts are the
// ordered Bell numbers, 4683 at N=6).
std::vector<RankOrdering> enumerate_rank_orderings(int n_relays);

// Exhaustive cone lookup over every rank ordering, reusable across many
// backlog vectors: the orderings, their adjacency structure, and the weight
// table are built once. Constructed with a model it restricts both the
// candidate set and the adjacency to path-connected orderings.
class ConeOracle {
 public:
  ConeOracle(int n_relays, const WeightFunction& f);
  ConeOracle(int n_relays, const WeightFunction& f, const NetworkModel& m);

  // Scans all (eligible) orderings and returns the unique one that penalizes
  // q less than its whole adjacency; NoCone / MultipleCones otherwise.
  ConeResolution resolve(std::span<const double> q) const;

  const std::vector<RankOrdering>& orderings() const { return orderings_; }

 private:
  struct Edge {    // one adjacency comparison, reduced to its differing terms
    NodeMask a_cls;     // this ordering's class at the mismatch position
    NodeMask b_cls;     // the neighbor's class at the mismatch position
    double wa;          // f(pre, |a_cls|)
    double wb;          // f(pre, |b_cls|)
    bool tie_wins;      // ordering is a one-step refinement of the neighbor
  };

  void build(const NetworkModel* m);

  int n_;
  WeightFunction f_;
  std::vector<RankOrdering> orderings_;
  std::vector<char> eligible_;
  std::vector<std::uint32_t> offset_;  // edges_[offset_[k] .. offset_[k+1])
  std::vector<Edge> edges_;
};

// Convenience single-shot wrappers around ConeOracle (slow when called
// repeatedly; tests that sweep many q should hold a ConeOracle).
ConeResolution resolve_cone_oracle(std::span<const double> q, const WeightFunction& f);
ConeResolution resolve_cone_pc_oracle(std::span<const double> q, const WeightFunction& f,
                                      const NetworkModel& m);

// Constructive resolution: recursively split off a top class that penalizes
// less than keeping one block, then re-merge suffix classes while merging
// wins. Equals the oracle wherever both run; validated against the (path-
// connected) adjacency before returning, which also sets the boundary flag.
ConeResolution resolve_cone(std::span<const double> q, const WeightFunction& f);
ConeResolution resolve_cone_pc(std::span<const double> q, const WeightFunction& f,
                               const NetworkModel& m);

// Piecewise-quadratic potential sum_i f(|C^{i-1}|, |C_i|) * Q_{C_i}^2 for a
// given ordering; pass resolve_cone(q).ordering for the resolved value L*.
double lyapunov_value(std::span<const double> q, const WeightFunction& f, const RankOrdering& r);

// Gradient of the same: component k in class C_j is 2 f(|C^{j-1}|, |C_j|) Q_{C_j}.
std::vector<double> lyapunov_gradient(std::span<const double> q, const WeightFunction& f,
                                      const RankOrdering& r);

}  // namespace coneroute
