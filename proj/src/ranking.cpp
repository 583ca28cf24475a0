#include "coneroute/ranking.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace coneroute {

RankOrdering::RankOrdering(std::vector<NodeMask> classes, int n_relays)
    : classes_(std::move(classes)), n_relays_(n_relays) {
  if (n_relays_ < 1 || n_relays_ > kMaxRelays)
    fail(Errc::invalid_argument, "relay count out of range");
  NodeMask expected = 0;
  for (int i = 1; i <= n_relays_; ++i) expected |= node_bit(i);

  NodeMask seen = 0;
  for (const NodeMask c : classes_) {
    if (c == 0) fail(Errc::empty_class, "rank ordering contains an empty class");
    if (c & seen) fail(Errc::not_a_partition, "rank ordering repeats a node");
    seen |= c;
  }
  if (seen != expected)
    fail(Errc::not_a_partition, "rank ordering classes must partition {1..N} exactly");
}

RankOrdering RankOrdering::from_lists(const std::vector<std::vector<int>>& classes, int n_relays) {
  std::vector<NodeMask> masks;
  masks.reserve(classes.size());
  for (const auto& cls : classes) {
    NodeMask m = 0;
    for (int node : cls) {
      if (node < 1 || node > n_relays)
        fail(Errc::not_a_partition, "node " + std::to_string(node) + " is not a relay index");
      m |= node_bit(node);
    }
    masks.push_back(m);
  }
  return RankOrdering(std::move(masks), n_relays);
}

RankOrdering RankOrdering::whole(int n_relays) {
  NodeMask all = 0;
  for (int i = 1; i <= n_relays; ++i) all |= node_bit(i);
  return RankOrdering({all}, n_relays);
}

int RankOrdering::class_of(int node) const {
  if (node < 1 || node > n_relays_) fail(Errc::invalid_argument, "class_of: not a relay index");
  for (int i = 0; i < num_classes(); ++i)
    if (classes_[i] & node_bit(node)) return i;
  fail(Errc::not_a_partition, "node missing from ordering");  // unreachable on valid orderings
}

void RankOrdering::fill_class_of(std::span<int> rank_of) const {
  for (int i = 0; i < num_classes(); ++i) {
    NodeMask c = classes_[i];
    while (c) {
      rank_of[std::countr_zero(c)] = i;
      c &= c - 1;
    }
  }
}

std::vector<std::vector<int>> RankOrdering::to_lists() const {
  std::vector<std::vector<int>> out;
  out.reserve(classes_.size());
  for (NodeMask c : classes_) {
    std::vector<int> cls;
    while (c) {
      cls.push_back(std::countr_zero(c));
      c &= c - 1;
    }
    out.push_back(std::move(cls));
  }
  return out;
}

namespace {

void require_same_universe(const RankOrdering& a, const RankOrdering& b) {
  if (a.n_relays() != b.n_relays())
    fail(Errc::length_mismatch, "orderings cover different node sets");
}

}  // namespace

std::string ordering_to_string(const RankOrdering& r) {
  std::string s = "[";
  for (int i = 0; i < r.num_classes(); ++i) {
    if (i) s += ",";
    s += "[";
    NodeMask c = r.class_mask(i);
    bool first = true;
    while (c) {
      if (!first) s += ",";
      s += std::to_string(std::countr_zero(c));
      first = false;
      c &= c - 1;
    }
    s += "]";
  }
  return s + "]";
}

int mismatch(const RankOrdering& r, const RankOrdering& r2) {
  require_same_universe(r, r2);
  const int upto = std::min(r.num_classes(), r2.num_classes());
  for (int i = 0; i < upto; ++i)
    if (r.class_mask(i) != r2.class_mask(i)) return i + 1;
  // Two distinct partitions of the same set cannot have one class list as a
  // proper prefix of the other, so reaching here means they are equal.
  fail(Errc::identical_orderings, "mismatch is undefined for equal orderings");
}

bool is_refinement(const RankOrdering& fine, const RankOrdering& coarse) {
  require_same_universe(fine, coarse);
  // Equivalent condition: every coarse class is a union of consecutive fine
  // classes, taken in order.
  int fi = 0;
  for (int ci = 0; ci < coarse.num_classes(); ++ci) {
    const NodeMask target = coarse.class_mask(ci);
    NodeMask acc = 0;
    while (acc != target) {
      if (fi >= fine.num_classes()) return false;
      const NodeMask next = fine.class_mask(fi);
      if (next & ~target) return false;  // fine class straddles coarse classes
      acc |= next;
      ++fi;
    }
  }
  return fi == fine.num_classes();
}

bool is_one_step_refinement(const RankOrdering& r, const RankOrdering& r2) {
  require_same_universe(r, r2);
  return detail::masks_one_step_refinement(r.classes(), r2.classes());
}

std::vector<RankOrdering> one_step_refinements(const RankOrdering& r) {
  std::vector<RankOrdering> out;
  const auto& classes = r.classes();
  for (int i = 0; i < r.num_classes(); ++i) {
    const NodeMask c = classes[i];
    if (std::popcount(c) < 2) continue;
    // All proper nonempty submasks of c become the new lower class.
    for (NodeMask sub = (c - 1) & c; sub; sub = (sub - 1) & c) {
      std::vector<NodeMask> next(classes.begin(), classes.begin() + i);
      next.push_back(sub);
      next.push_back(c ^ sub);
      next.insert(next.end(), classes.begin() + i + 1, classes.end());
      out.emplace_back(std::move(next), r.n_relays());
    }
  }
  return out;
}

std::vector<RankOrdering> one_step_confinements(const RankOrdering& r) {
  std::vector<RankOrdering> out;
  const auto& classes = r.classes();
  for (int i = 0; i + 1 < r.num_classes(); ++i) {
    std::vector<NodeMask> next(classes.begin(), classes.begin() + i);
    next.push_back(classes[i] | classes[i + 1]);
    next.insert(next.end(), classes.begin() + i + 2, classes.end());
    out.emplace_back(std::move(next), r.n_relays());
  }
  return out;
}

std::vector<RankOrdering> adjacency(const RankOrdering& r) {
  std::vector<RankOrdering> out = one_step_refinements(r);
  std::vector<RankOrdering> merges = one_step_confinements(r);
  out.insert(out.end(), std::make_move_iterator(merges.begin()),
             std::make_move_iterator(merges.end()));
  return out;  // class counts M+1 vs M-1, so the union is duplicate-free
}

bool is_path_connected(const RankOrdering& r, const NetworkModel& m) {
  if (r.n_relays() != m.n_relays())
    fail(Errc::length_mismatch, "ordering and model cover different node sets");
  NodeMask allowed = 0;
  for (int i = 0; i < r.num_classes(); ++i) {
    allowed |= r.class_mask(i);
    if (!mask_reaches_destination(m, r.class_mask(i), allowed)) return false;
  }
  return true;
}

std::vector<RankOrdering> path_connected_adjacency(const RankOrdering& r, const NetworkModel& m) {
  if (!is_path_connected(r, m))
    fail(Errc::not_path_connected, "adjacency requested for a non-path-connected ordering");
  std::vector<RankOrdering> out;
  for (RankOrdering& cand : adjacency(r))
    if (is_path_connected(cand, m)) out.push_back(std::move(cand));
  return out;
}

double penalty(std::span<const double> q, const RankOrdering& r, int n, const WeightFunction& f) {
  if (static_cast<int>(q.size()) != r.n_relays())
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  if (n < 1 || n > r.num_classes())
    fail(Errc::bad_prefix_length, "penalty prefix must lie in 1..M");
  double sum = 0.0;
  int pre = 0;
  for (int i = 0; i < n; ++i) {
    const NodeMask c = r.class_mask(i);
    const int size = std::popcount(c);
    sum += f.eval(pre, size) * detail::class_backlog(q, c);
    pre += size;
  }
  return sum;
}

PenaltyOrder compare_penalty(const RankOrdering& r, const RankOrdering& r2,
                             std::span<const double> q, const WeightFunction& f) {
  require_same_universe(r, r2);
  if (static_cast<int>(q.size()) != r.n_relays())
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  return detail::compare_mask_orderings(r.classes(), r2.classes(), q, f);
}

bool less_penalizes(const RankOrdering& r, const RankOrdering& r2, std::span<const double> q,
                    const WeightFunction& f) {
  return compare_penalty(r, r2, q, f).less;
}

namespace detail {

double class_backlog(std::span<const double> q, NodeMask c) {
  double sum = 0.0;
  while (c) {
    sum += q[std::countr_zero(c) - 1];  // q[k-1] is node k's backlog
    c &= c - 1;
  }
  return sum;
}

bool masks_one_step_refinement(std::span<const NodeMask> r, std::span<const NodeMask> r2) {
  if (r.size() != r2.size() + 1 || r2.empty()) return false;
  std::size_t i = 0;
  while (i < r2.size() && r[i] == r2[i]) ++i;
  if (i >= r2.size()) return false;
  if ((r[i] | r[i + 1]) != r2[i] || (r[i] & r[i + 1]) != 0) return false;
  if (r[i] == 0 || r[i + 1] == 0) return false;
  for (std::size_t j = i + 1; j < r2.size(); ++j)
    if (r[j + 1] != r2[j]) return false;
  return true;
}

PenaltyOrder compare_mask_orderings(std::span<const NodeMask> a, std::span<const NodeMask> b,
                                    std::span<const double> q, const WeightFunction& f) {
  // Find the first differing class; earlier classes coincide, so the penalty
  // comparison at the mismatch position reduces to the differing terms.
  std::size_t i = 0;
  int pre = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) {
    pre += std::popcount(a[i]);
    ++i;
  }
  if (i >= a.size() || i >= b.size())
    fail(Errc::identical_orderings, "penalty comparison needs two distinct orderings");

  const double ta = f.eval(pre, std::popcount(a[i])) * class_backlog(q, a[i]);
  const double tb = f.eval(pre, std::popcount(b[i])) * class_backlog(q, b[i]);

  PenaltyOrder out;
  if (std::abs(ta - tb) <= 1e-12 * std::max(std::abs(ta), std::abs(tb))) {
    out.tie = true;
    out.less = masks_one_step_refinement(a, b);  // equality breaks toward the refinement
  } else {
    out.less = ta < tb;
  }
  return out;
}

}  // namespace detail

}  // namespace coneroute
