#include "coneroute/capacity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "coneroute/errors.hpp"

namespace coneroute {
namespace {

// Dense two-phase primal simplex maximizing c.x subject to A x = b, x >= 0.
// Bland's rule throughout, so the iteration count is finite; `ok` is false
// on infeasibility, unboundedness, or hitting the iteration cap.
struct LpSolution {
  bool ok = false;
  double value = 0.0;
  std::vector<double> x;
};

class Simplex {
 public:
  Simplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c)
      : t_(std::move(a)), rhs_(std::move(b)), c_(std::move(c)) {}

  LpSolution solve() {
    const std::size_t m = rhs_.size();
    const std::size_t n = c_.size();
    for (std::size_t r = 0; r < m; ++r) {
      if (rhs_[r] < 0.0) {
        rhs_[r] = -rhs_[r];
        for (double& v : t_[r]) v = -v;
      }
    }
    // Phase 1: append an artificial identity and drive its sum to zero.
    basis_.resize(m);
    for (std::size_t r = 0; r < m; ++r) {
      t_[r].resize(n + m, 0.0);
      t_[r][n + r] = 1.0;
      basis_[r] = static_cast<int>(n + r);
    }
    std::vector<double> phase1(n + m, 0.0);
    for (std::size_t j = n; j < n + m; ++j) phase1[j] = -1.0;
    set_objective(phase1);
    if (!iterate()) return {};
    if (zval_ < -1e-7) return {};  // artificial mass left: no feasible point

    // Remove artificials from the basis; rows they cannot leave are redundant.
    for (std::size_t r = 0; r < rhs_.size(); ++r) {
      if (basis_[r] < static_cast<int>(n)) continue;
      std::size_t j = 0;
      while (j < n && std::abs(t_[r][j]) <= 1e-9) ++j;
      if (j < n) pivot(r, j);
    }
    for (std::size_t r = rhs_.size(); r-- > 0;) {
      if (basis_[r] < static_cast<int>(n)) continue;
      t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r));
      rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(r));
      basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    }
    for (auto& row : t_) row.resize(n);

    set_objective(c_);
    if (!iterate()) return {};

    LpSolution out;
    out.ok = true;
    out.value = zval_;
    out.x.assign(n, 0.0);
    for (std::size_t r = 0; r < rhs_.size(); ++r)
      out.x[static_cast<std::size_t>(basis_[r])] = rhs_[r];
    return out;
  }

 private:
  // Reduced-cost row zc_[j] = z_j - c_j for the given objective; zval_ is the
  // objective value at the current basic solution.
  void set_objective(const std::vector<double>& c) {
    obj_ = c;
    zc_.assign(t_.empty() ? obj_.size() : t_[0].size(), 0.0);
    zval_ = 0.0;
    for (std::size_t j = 0; j < zc_.size(); ++j) {
      double z = 0.0;
      for (std::size_t r = 0; r < rhs_.size(); ++r)
        z += obj_[static_cast<std::size_t>(basis_[r])] * t_[r][j];
      zc_[j] = z - (j < obj_.size() ? obj_[j] : 0.0);
    }
    for (std::size_t r = 0; r < rhs_.size(); ++r)
      zval_ += obj_[static_cast<std::size_t>(basis_[r])] * rhs_[r];
  }

  void pivot(std::size_t pr, std::size_t pc) {
    const double piv = t_[pr][pc];
    for (double& v : t_[pr]) v /= piv;
    rhs_[pr] /= piv;
    for (std::size_t r = 0; r < rhs_.size(); ++r) {
      if (r == pr || t_[r][pc] == 0.0) continue;
      const double f = t_[r][pc];
      for (std::size_t j = 0; j < t_[r].size(); ++j) t_[r][j] -= f * t_[pr][j];
      rhs_[r] -= f * rhs_[pr];
      if (rhs_[r] < 0.0 && rhs_[r] > -1e-11) rhs_[r] = 0.0;
    }
    const double zf = zc_[pc];
    if (zf != 0.0) {
      for (std::size_t j = 0; j < zc_.size(); ++j) zc_[j] -= zf * t_[pr][j];
      zval_ -= zf * rhs_[pr];
    }
    basis_[pr] = static_cast<int>(pc);
  }

  bool iterate() {
    const std::size_t limit = 200000;
    for (std::size_t it = 0; it < limit; ++it) {
      // Bland: smallest improving column, then smallest basis index on ties.
      std::size_t enter = zc_.size();
      for (std::size_t j = 0; j < zc_.size(); ++j) {
        if (zc_[j] < -1e-9) {
          enter = j;
          break;
        }
      }
      if (enter == zc_.size()) return true;
      std::size_t leave = rhs_.size();
      double best = 0.0;
      for (std::size_t r = 0; r < rhs_.size(); ++r) {
        if (t_[r][enter] <= 1e-11) continue;
        const double ratio = rhs_[r] / t_[r][enter];
        if (leave == rhs_.size() || ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && basis_[r] < basis_[leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (leave == rhs_.size()) return false;  // unbounded column
      pivot(leave, enter);
    }
    return false;
  }

  std::vector<std::vector<double>> t_;
  std::vector<double> rhs_;
  std::vector<double> c_;
  std::vector<double> obj_;
  std::vector<double> zc_;
  std::vector<int> basis_;
  double zval_ = 0.0;
};

struct Block {
  int node = 0;
  NodeMask set = 0;
  double prob = 0.0;
  std::vector<int> members;  // forwarder options, ascending
  std::size_t var0 = 0;      // first LP column of this block
};

std::vector<Block> make_blocks(const NetworkModel& m, std::size_t* n_vars,
                               std::vector<double>* const_out) {
  std::vector<Block> blocks;
  const_out->assign(static_cast<std::size_t>(m.n_relays()), 0.0);
  std::size_t next = 0;
  for (int i = 1; i <= m.n_relays(); ++i) {
    for (const auto& e : m.broadcast(i)) {
      if (e.set & node_bit(0)) {
        (*const_out)[static_cast<std::size_t>(i) - 1] += e.prob;  // forced delivery
        continue;
      }
      Block b;
      b.node = i;
      b.set = e.set;
      b.prob = e.prob;
      for (NodeMask rest = e.set; rest != 0; rest &= rest - 1)
        b.members.push_back(std::countr_zero(rest));
      b.var0 = next;
      next += b.members.size();
      blocks.push_back(std::move(b));
    }
  }
  *n_vars = next;
  return blocks;
}

void check_lambda(const NetworkModel& m, std::span<const double> lambda) {
  if (static_cast<int>(lambda.size()) != m.n_relays())
    fail(Errc::length_mismatch, "arrival rate vector does not match the relay count");
  for (double l : lambda)
    if (!(l >= 0.0) || !std::isfinite(l))
      fail(Errc::invalid_argument, "arrival rates must be non-negative and finite");
}

}  // namespace

CapacityResult stability_lp_feasible(const NetworkModel& m, std::span<const double> lambda) {
  check_lambda(m, lambda);
  const std::size_t n_relays = static_cast<std::size_t>(m.n_relays());

  std::size_t n_choice = 0;
  std::vector<double> const_out;
  std::vector<Block> blocks = make_blocks(m, &n_choice, &const_out);

  // Columns: block choice vars, eps+ and eps-, one surplus per relay.
  const std::size_t col_ep = n_choice;
  const std::size_t col_en = n_choice + 1;
  const std::size_t col_s0 = n_choice + 2;
  const std::size_t n_cols = col_s0 + n_relays;
  const std::size_t n_rows = blocks.size() + n_relays;

  std::vector<std::vector<double>> a(n_rows, std::vector<double>(n_cols, 0.0));
  std::vector<double> b(n_rows, 0.0);
  std::vector<double> c(n_cols, 0.0);
  c[col_ep] = 1.0;
  c[col_en] = -1.0;

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (std::size_t k = 0; k < blocks[bi].members.size(); ++k) a[bi][blocks[bi].var0 + k] = 1.0;
    b[bi] = 1.0;
  }
  // Flow rows: out_k - in_k - eps - surplus_k = lambda_k - forced_out_k.
  for (std::size_t k = 1; k <= n_relays; ++k) {
    std::vector<double>& row = a[blocks.size() + k - 1];
    for (const Block& blk : blocks) {
      for (std::size_t idx = 0; idx < blk.members.size(); ++idx) {
        const int j = blk.members[idx];
        if (blk.node == static_cast<int>(k) && j != blk.node)
          row[blk.var0 + idx] += blk.prob;
        if (blk.node != static_cast<int>(k) && j == static_cast<int>(k))
          row[blk.var0 + idx] -= blk.prob;
      }
    }
    row[col_ep] = -1.0;
    row[col_en] = 1.0;
    row[col_s0 + k - 1] = -1.0;
    b[blocks.size() + k - 1] = lambda[k - 1] - const_out[k - 1];
  }

  LpSolution sol = Simplex(std::move(a), std::move(b), std::move(c)).solve();
  if (!sol.ok) fail(Errc::lp_numerical_failure, "stability LP did not solve");

  CapacityResult out;
  out.slack = sol.value;
  out.feasible = sol.value > 0.0;
  for (const Block& blk : blocks) {
    CapacityWitnessEntry w;
    w.node = blk.node;
    w.set = blk.set;
    for (std::size_t idx = 0; idx < blk.members.size(); ++idx)
      w.choice.emplace_back(blk.members[idx], std::max(0.0, sol.x[blk.var0 + idx]));
    out.witness.push_back(std::move(w));
  }
  return out;
}

double witness_min_slack(const NetworkModel& m, std::span<const double> lambda,
                         const CapacityResult& r) {
  check_lambda(m, lambda);
  const std::size_t n_relays = static_cast<std::size_t>(m.n_relays());
  std::vector<double> net(n_relays, 0.0);  // out_k - in_k
  for (int i = 1; i <= static_cast<int>(n_relays); ++i)
    for (const auto& e : m.broadcast(i))
      if (e.set & node_bit(0)) net[static_cast<std::size_t>(i) - 1] += e.prob;
  for (const auto& w : r.witness) {
    double p_set = 0.0;
    for (const auto& e : m.broadcast(w.node))
      if (e.set == w.set) p_set = e.prob;
    for (const auto& [j, x] : w.choice) {
      if (j == w.node) continue;
      net[static_cast<std::size_t>(w.node) - 1] += p_set * x;
      if (j != 0) net[static_cast<std::size_t>(j) - 1] -= p_set * x;
    }
  }
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n_relays; ++k) worst = std::min(worst, net[k] - lambda[k]);
  return worst;
}

double scale_to_boundary(const NetworkModel& m, std::span<const double> direction) {
  check_lambda(m, direction);
  bool any = false;
  for (double d : direction) any = any || d > 0.0;
  if (!any) fail(Errc::invalid_argument, "direction must have a positive entry");

  std::vector<double> lam(direction.size());
  auto feasible = [&](double theta) {
    for (std::size_t k = 0; k < lam.size(); ++k) lam[k] = theta * direction[k];
    return stability_lp_feasible(m, lam).feasible;
  };

  if (!feasible(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > static_cast<double>(1u << 30))
      fail(Errc::lp_numerical_failure, "no infeasible scale found");
  }
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace coneroute
