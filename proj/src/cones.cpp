#include "coneroute/cones.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

namespace coneroute {

namespace {

std::string format_q(std::span<const double> q) {
  std::string s = "[";
  char buf[40];
  for (std::size_t i = 0; i < q.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", q[i]);
    if (i) s += ", ";
    s += buf;
  }
  return s + "]";
}

void require_backlog(std::span<const double> q) {
  if (q.empty()) fail(Errc::invalid_argument, "backlog vector is empty");
  for (double v : q)
    if (!(std::isfinite(v) && v >= 0.0))
      fail(Errc::invalid_argument, "backlog entries must be finite and nonnegative");
}

NodeMask relay_mask_for(int n) {
  NodeMask all = 0;
  for (int i = 1; i <= n; ++i) all |= node_bit(i);
  return all;
}

void enumerate_rec(NodeMask remaining, std::vector<NodeMask>& acc, int n_relays,
                   std::vector<RankOrdering>& out) {
  if (remaining == 0) {
    out.emplace_back(acc, n_relays);
    return;
  }
  // Every nonempty submask of `remaining` can be the next class.
  for (NodeMask sub = remaining; sub != 0; sub = (sub - 1) & remaining) {
    acc.push_back(sub);
    enumerate_rec(remaining ^ sub, acc, n_relays, out);
    acc.pop_back();
  }
}

}  // namespace

std::vector<RankOrdering> enumerate_rank_orderings(int n_relays) {
  if (n_relays < 1) fail(Errc::invalid_argument, "need at least one relay");
  if (n_relays > 8) fail(Errc::too_large, "ordering enumeration is guarded at N <= 8");
  std::vector<RankOrdering> out;
  std::vector<NodeMask> acc;
  enumerate_rec(relay_mask_for(n_relays), acc, n_relays, out);
  return out;
}

ConeOracle::ConeOracle(int n_relays, const WeightFunction& f) : n_(n_relays), f_(f) {
  build(nullptr);
}

ConeOracle::ConeOracle(int n_relays, const WeightFunction& f, const NetworkModel& m)
    : n_(n_relays), f_(f) {
  if (m.n_relays() != n_relays)
    fail(Errc::length_mismatch, "model relay count differs from the oracle size");
  if (!m.is_connected())
    fail(Errc::not_connected, "path-connected resolution needs a connected model");
  build(&m);
}

void ConeOracle::build(const NetworkModel* m) {
  if (f_.capacity() < n_) fail(Errc::domain_error, "weight table does not cover N classes");
  orderings_ = enumerate_rank_orderings(n_);
  eligible_.assign(orderings_.size(), 1);
  offset_.assign(orderings_.size() + 1, 0);
  edges_.clear();

  for (std::size_t k = 0; k < orderings_.size(); ++k) {
    const RankOrdering& r = orderings_[k];
    offset_[k] = static_cast<std::uint32_t>(edges_.size());
    if (m != nullptr && !is_path_connected(r, *m)) {
      eligible_[k] = 0;
      continue;
    }
    const std::vector<RankOrdering> nbrs =
        m != nullptr ? path_connected_adjacency(r, *m) : adjacency(r);
    for (const RankOrdering& nb : nbrs) {
      // Reduce the comparison to the first differing class on each side.
      const int upto = std::min(r.num_classes(), nb.num_classes());
      int i = 0;
      int pre = 0;
      while (i < upto && r.class_mask(i) == nb.class_mask(i)) {
        pre += std::popcount(r.class_mask(i));
        ++i;
      }
      if (i >= upto) fail(Errc::identical_orderings, "adjacency produced a duplicate ordering");
      Edge e;
      e.a_cls = r.class_mask(i);
      e.b_cls = nb.class_mask(i);
      e.wa = f_.eval(pre, std::popcount(e.a_cls));
      e.wb = f_.eval(pre, std::popcount(e.b_cls));
      e.tie_wins = detail::masks_one_step_refinement(r.classes(), nb.classes());
      edges_.push_back(e);
    }
  }
  offset_[orderings_.size()] = static_cast<std::uint32_t>(edges_.size());
}

ConeResolution ConeOracle::resolve(std::span<const double> q) const {
  require_backlog(q);
  if (static_cast<int>(q.size()) != n_)
    fail(Errc::length_mismatch, "backlog vector length differs from the oracle size");

  // Subset-sum table over the (small) relay universe: bit j of the index is
  // node j, so entry mask>>0 keeps the node-bit convention.
  std::vector<double> ss(std::size_t{1} << (n_ + 1), 0.0);
  for (NodeMask mask = 1; mask < ss.size(); ++mask) {
    const int low = std::countr_zero(mask);
    ss[mask] = ss[mask & (mask - 1)] + (low >= 1 ? q[low - 1] : 0.0);
  }

  int winner = -1;
  bool winner_boundary = false;
  for (std::size_t k = 0; k < orderings_.size(); ++k) {
    if (!eligible_[k]) continue;
    bool beats_all = true;
    bool any_tie = false;
    for (std::uint32_t e = offset_[k]; e < offset_[k + 1]; ++e) {
      const Edge& ed = edges_[e];
      const double ta = ed.wa * ss[ed.a_cls];
      const double tb = ed.wb * ss[ed.b_cls];
      if (std::abs(ta - tb) <= 1e-12 * std::max(std::abs(ta), std::abs(tb))) {
        any_tie = true;
        if (!ed.tie_wins) {
          beats_all = false;
          break;
        }
      } else if (!(ta < tb)) {
        beats_all = false;
        break;
      }
    }
    if (!beats_all) continue;
    if (winner >= 0)
      fail(Errc::multiple_cones, "both " + ordering_to_string(orderings_[winner]) + " and " +
                                     ordering_to_string(orderings_[k]) +
                                     " beat their adjacency at q=" + format_q(q));
    winner = static_cast<int>(k);
    winner_boundary = any_tie;
  }
  if (winner < 0)
    fail(Errc::no_cone, "no ordering beats its whole adjacency at q=" + format_q(q));
  return ConeResolution{orderings_[winner], winner_boundary,
                        static_cast<int>(offset_[winner + 1] - offset_[winner])};
}

ConeResolution resolve_cone_oracle(std::span<const double> q, const WeightFunction& f) {
  return ConeOracle(static_cast<int>(q.size()), f).resolve(q);
}

ConeResolution resolve_cone_pc_oracle(std::span<const double> q, const WeightFunction& f,
                                      const NetworkModel& m) {
  return ConeOracle(static_cast<int>(q.size()), f, m).resolve(q);
}

namespace {

// Recursive constructive resolution over node subsets. Weight arguments m,n
// always count nodes of the current sub-problem only, which the class-mask
// representation gives for free (prefix sizes are popcounts of the masks).
struct MaskResolver {
  std::span<const double> q;
  const WeightFunction& f;
  const NetworkModel* pc;  // non-null restricts splits to path-connected ones

  double backlog(NodeMask c) const { return detail::class_backlog(q, c); }

  bool split_path_connected(NodeMask c1, NodeMask c2) const {
    return mask_reaches_destination(*pc, c1, c1) &&
           mask_reaches_destination(*pc, c2, c1 | c2);
  }

  // (C1, C2) <_q (U) at the first class; a tie favors the split, which is the
  // one-step refinement.
  bool split_beats_whole(NodeMask c1, NodeMask u) const {
    const double ta = f.eval(0, std::popcount(c1)) * backlog(c1);
    const double tb = f.eval(0, std::popcount(u)) * backlog(u);
    if (std::abs(ta - tb) <= 1e-12 * std::max(std::abs(ta), std::abs(tb))) return true;
    return ta < tb;
  }

  std::vector<NodeMask> resolve(NodeMask u) const {
    const int n = std::popcount(u);
    if (n == 1) return {u};

    // Split search: smallest top-class size first; within a size, candidates
    // in decreasing top-class backlog (heavy backlogs belong to high ranks),
    // ties by ascending mask for determinism.
    NodeMask chosen = 0;
    std::vector<std::vector<std::pair<double, NodeMask>>> by_size(n);
    for (NodeMask sub = (u - 1) & u; sub; sub = (sub - 1) & u)
      by_size[std::popcount(sub)].push_back({backlog(sub), sub});
    for (int l = 1; l < n && chosen == 0; ++l) {
      auto& cands = by_size[l];
      std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      for (const auto& [sum, c2] : cands) {
        const NodeMask c1 = u ^ c2;
        if (pc != nullptr && !split_path_connected(c1, c2)) continue;
        if (split_beats_whole(c1, u)) {
          chosen = c2;
          break;
        }
      }
    }
    if (chosen == 0) return {u};

    std::vector<NodeMask> cls = resolve(u ^ chosen);
    cls.push_back(chosen);

    // Suffix merging: while merging the last two classes penalizes less,
    // merge. A tie keeps the finer ordering (the merge is the confinement).
    while (cls.size() >= 2) {
      int pre = 0;
      for (std::size_t i = 0; i + 2 < cls.size(); ++i) pre += std::popcount(cls[i]);
      const NodeMask prev = cls[cls.size() - 2];
      const NodeMask last = cls[cls.size() - 1];
      const double t_merged =
          f.eval(pre, std::popcount(prev | last)) * backlog(prev | last);
      const double t_cur = f.eval(pre, std::popcount(prev)) * backlog(prev);
      if (std::abs(t_merged - t_cur) <= 1e-12 * std::max(std::abs(t_merged), std::abs(t_cur)))
        break;
      if (!(t_merged < t_cur)) break;
      cls.pop_back();
      cls.pop_back();
      cls.push_back(prev | last);
    }
    return cls;
  }
};

ConeResolution validate_resolution(std::span<const double> q, const WeightFunction& f,
                                   std::vector<NodeMask> classes, const NetworkModel* pc) {
  RankOrdering r(std::move(classes), static_cast<int>(q.size()));
  const std::vector<RankOrdering> nbrs = pc != nullptr ? path_connected_adjacency(r, *pc)
                                                       : adjacency(r);
  bool boundary = false;
  for (const RankOrdering& nb : nbrs) {
    const PenaltyOrder cmp = detail::compare_mask_orderings(r.classes(), nb.classes(), q, f);
    if (!cmp.less)
      fail(Errc::no_cone, "constructed ordering " + ordering_to_string(r) +
                              " loses to adjacent " + ordering_to_string(nb) +
                              " at q=" + format_q(q) + " (weight conditions violated?)");
    boundary |= cmp.tie;
  }
  return ConeResolution{std::move(r), boundary, static_cast<int>(nbrs.size())};
}

}  // namespace

ConeResolution resolve_cone(std::span<const double> q, const WeightFunction& f) {
  require_backlog(q);
  const int n = static_cast<int>(q.size());
  if (n > 16) fail(Errc::too_large, "constructive resolution is guarded at N <= 16");
  if (f.capacity() < n) fail(Errc::domain_error, "weight table does not cover N classes");
  MaskResolver resolver{q, f, nullptr};
  return validate_resolution(q, f, resolver.resolve(relay_mask_for(n)), nullptr);
}

ConeResolution resolve_cone_pc(std::span<const double> q, const WeightFunction& f,
                               const NetworkModel& m) {
  require_backlog(q);
  const int n = static_cast<int>(q.size());
  if (n != m.n_relays())
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  if (n > 16) fail(Errc::too_large, "constructive resolution is guarded at N <= 16");
  if (f.capacity() < n) fail(Errc::domain_error, "weight table does not cover N classes");
  if (!m.is_connected())
    fail(Errc::not_connected, "path-connected resolution needs a connected model");
  MaskResolver resolver{q, f, &m};
  return validate_resolution(q, f, resolver.resolve(relay_mask_for(n)), &m);
}

double lyapunov_value(std::span<const double> q, const WeightFunction& f, const RankOrdering& r) {
  if (static_cast<int>(q.size()) != r.n_relays())
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  double sum = 0.0;
  int pre = 0;
  for (int i = 0; i < r.num_classes(); ++i) {
    const NodeMask c = r.class_mask(i);
    const double qc = detail::class_backlog(q, c);
    sum += f.eval(pre, std::popcount(c)) * qc * qc;
    pre += std::popcount(c);
  }
  return sum;
}

std::vector<double> lyapunov_gradient(std::span<const double> q, const WeightFunction& f,
                                      const RankOrdering& r) {
  if (static_cast<int>(q.size()) != r.n_relays())
    fail(Errc::length_mismatch, "backlog vector length differs from the relay count");
  std::vector<double> grad(q.size(), 0.0);
  int pre = 0;
  for (int i = 0; i < r.num_classes(); ++i) {
    const NodeMask c = r.class_mask(i);
    const double g = 2.0 * f.eval(pre, std::popcount(c)) * detail::class_backlog(q, c);
    NodeMask rest = c;
    while (rest) {
      grad[std::countr_zero(rest) - 1] = g;
      rest &= rest - 1;
    }
    pre += std::popcount(c);
  }
  return grad;
}

}  // namespace coneroute
