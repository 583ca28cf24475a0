#include "coneroute/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <string>

namespace coneroute {

namespace {

std::string node_str(int i) { return std::to_string(i); }

}  // namespace

NetworkModel::NetworkModel(int n_relays, std::vector<std::vector<BroadcastEntry>> broadcast)
    : n_relays_(n_relays), broadcast_(std::move(broadcast)) {
  if (n_relays_ < 1) fail(Errc::invalid_argument, "need at least one relay");
  if (n_relays_ > kMaxRelays)
    fail(Errc::too_large, "at most " + std::to_string(kMaxRelays) + " relays supported");
  if (static_cast<int>(broadcast_.size()) != n_relays_ + 1)
    fail(Errc::invalid_argument, "broadcast table must have one slot per node 0..N");
  if (!broadcast_[0].empty())
    fail(Errc::bad_subset, "the destination (node 0) must not have broadcast entries");

  relay_mask_ = 0;
  for (int i = 1; i <= n_relays_; ++i) relay_mask_ |= node_bit(i);
  const NodeMask universe = relay_mask_ | node_bit(0);

  reach_.assign(n_relays_ + 1, 0);
  for (int i = 1; i <= n_relays_; ++i) {
    // Merge duplicate subsets, drop zero-probability entries.
    std::map<NodeMask, double> merged;
    double sum = 0.0;
    for (const BroadcastEntry& e : broadcast_[i]) {
      if (!std::isfinite(e.prob) || e.prob < 0.0)
        fail(Errc::prob_sum_error, "node " + node_str(i) + " has a negative or non-finite probability");
      if (e.set & ~universe)
        fail(Errc::bad_subset, "node " + node_str(i) + " lists a set with an index beyond N");
      if (e.prob == 0.0) continue;
      if (!(e.set & node_bit(i)))
        fail(Errc::self_not_in_set, "node " + node_str(i) + " is missing from one of its support sets");
      merged[e.set] += e.prob;
      sum += e.prob;
    }
    if (merged.empty())
      fail(Errc::no_positive_entry,
           "node " + node_str(i) + " has no positive-probability broadcast entry");
    if (std::abs(sum - 1.0) > 1e-9)
      fail(Errc::prob_sum_error,
           "node " + node_str(i) + " probabilities sum to " + std::to_string(sum));

    broadcast_[i].clear();
    for (const auto& [set, p] : merged) {
      broadcast_[i].push_back({set, p / sum});  // exact renormalization
      reach_[i] |= set & ~node_bit(i);
    }
  }
}

NetworkModel NetworkModel::from_link_probabilities(int n_relays, const std::vector<LinkProb>& links) {
  if (n_relays < 1 || n_relays > kMaxRelays)
    fail(Errc::invalid_argument, "relay count out of range");

  // Collect per-transmitter link lists; zero-probability links contribute
  // nothing to the product form and are dropped.
  std::vector<std::vector<std::pair<int, double>>> out(n_relays + 1);
  std::vector<std::vector<bool>> seen(n_relays + 1, std::vector<bool>(n_relays + 1, false));
  for (const LinkProb& l : links) {
    if (l.from < 1 || l.from > n_relays)
      fail(Errc::bad_subset, "link source " + node_str(l.from) + " is not a relay");
    if (l.to < 0 || l.to > n_relays)
      fail(Errc::bad_subset, "link target " + node_str(l.to) + " is not a node");
    if (l.to == l.from) fail(Errc::invalid_argument, "self-links are not allowed");
    if (!(l.prob >= 0.0 && l.prob <= 1.0))
      fail(Errc::invalid_argument, "link probability must lie in [0,1]");
    if (seen[l.from][l.to]) fail(Errc::invalid_argument, "duplicate link");
    seen[l.from][l.to] = true;
    if (l.prob > 0.0) out[l.from].push_back({l.to, l.prob});
  }

  std::vector<std::vector<BroadcastEntry>> broadcast(n_relays + 1);
  for (int i = 1; i <= n_relays; ++i) {
    const auto& targets = out[i];
    const int d = static_cast<int>(targets.size());
    if (d > 20) fail(Errc::degree_too_large, "node " + node_str(i) + " out-degree exceeds 20");
    for (std::uint32_t outcome = 0; outcome < (1u << d); ++outcome) {
      double p = 1.0;
      NodeMask set = node_bit(i);
      for (int k = 0; k < d; ++k) {
        if (outcome & (1u << k)) {
          p *= targets[k].second;
          set |= node_bit(targets[k].first);
        } else {
          p *= 1.0 - targets[k].second;
        }
      }
      if (p > 0.0) broadcast[i].push_back({set, p});
    }
  }
  return NetworkModel(n_relays, std::move(broadcast));
}

const std::vector<BroadcastEntry>& NetworkModel::broadcast(int i) const {
  if (i < 1 || i > n_relays_) fail(Errc::invalid_argument, "node " + node_str(i) + " is not a relay");
  return broadcast_[i];
}

bool NetworkModel::reaches(int i, int j) const {
  if (i < 1 || i > n_relays_ || j < 0 || j > n_relays_)
    fail(Errc::invalid_argument, "reaches: node index out of range");
  if (i == j) return false;
  return (reach_[i] & node_bit(j)) != 0;
}

NodeMask NetworkModel::reach_set(int i) const {
  if (i < 1 || i > n_relays_) fail(Errc::invalid_argument, "reach_set: node index out of range");
  return reach_[i];
}

bool mask_reaches_destination(const NetworkModel& m, NodeMask members, NodeMask allowed) {
  // Grow the set of nodes with a path to 0 through `allowed` until fixpoint.
  NodeMask can = node_bit(0);
  bool grew = true;
  while (grew) {
    grew = false;
    NodeMask todo = allowed & ~can;
    while (todo) {
      const int i = std::countr_zero(todo);
      todo &= todo - 1;
      if (m.reach_set(i) & can) {
        can |= node_bit(i);
        grew = true;
      }
    }
  }
  return (members & ~can) == 0;
}

bool NetworkModel::is_connected() const {
  return mask_reaches_destination(*this, relay_mask_, relay_mask_);
}

double NetworkModel::p_min() const {
  double best = 1.0;
  for (int i = 1; i <= n_relays_; ++i) {
    if (broadcast_[i].empty())
      fail(Errc::no_positive_entry, "node " + node_str(i) + " has no broadcast entries");
    for (const BroadcastEntry& e : broadcast_[i]) best = std::min(best, e.prob);
  }
  return best;
}

NodeMask NetworkModel::sample_forwarder_set(int i, Rng& rng) const {
  const auto& entries = broadcast(i);
  const double u = rng.next_double();
  double acc = 0.0;
  for (const BroadcastEntry& e : entries) {
    acc += e.prob;
    if (u < acc) return e.set;
  }
  return entries.back().set;  // u landed on accumulated rounding slack
}

}  // namespace coneroute
