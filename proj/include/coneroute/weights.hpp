#pragma once

#include <functional>
#include <string>
#include <vector>

#include "coneroute/errors.hpp"

namespace coneroute {

// Bivariate class weight f(m, n): m completed (lower-ranked) nodes, n nodes
// in the class being weighted. Values are precomputed into a dense table at
// construction because eval sits on the hot path of cone resolution. A valid
// weight family is strictly positive on its domain; the condition checkers
// below treat any non-positive or non-finite value as a failure.
class WeightFunction {
 public:
  static constexpr int kDefaultCapacity = 32;  // largest m+n the table covers

  // The geometric family 1/(K^m (K^n - 1)). Requires K >= 1 + 1e-9; it
  // satisfies the split identity exactly for any K and the ratio condition
  // when K >= 1 + 1/p_min.
  static WeightFunction geometric(double K, int capacity = kDefaultCapacity);

  // Arbitrary rule, evaluated eagerly over the table domain. Used for custom
  // families and for negative-control tests; no positivity is enforced here.
  static WeightFunction from_rule(std::string name, const std::function<double(int, int)>& rule,
                                  int capacity = kDefaultCapacity);

  // Explicit (m, n, value) triples; eval outside the listed cells fails.
  struct Entry {
    int m = 0;
    int n = 0;
    double value = 0.0;
  };
  static WeightFunction from_table(std::string name, const std::vector<Entry>& entries);

  // f(m, n) for m >= 0, n >= 1, m+n <= capacity.
  double eval(int m, int n) const;

  int capacity() const { return capacity_; }
  const std::string& name() const { return name_; }
  // K for the geometric family, 0 otherwise.
  double geometric_k() const { return k_; }

 private:
  WeightFunction() = default;

  std::string name_;
  double k_ = 0.0;
  int capacity_ = 0;
  std::vector<double> table_;  // index m*(capacity_+1)+n; NaN marks missing cells
};

// Split identity: 1/f(m, n1+n2) = 1/f(m, n1) + 1/f(m+n1, n2) for all triples
// with m+n1+n2 <= n_max, within 1e-9 relative tolerance.
bool check_c1(const WeightFunction& f, int n_max);

// Prefix monotonicity: f(m, n1) >= f(m+n1, n2) for all valid triples.
bool check_c2(const WeightFunction& f, int n_max);

// Ratio bound: f(m, n1) / f(m+n1, n2) >= 1/p_min for all valid triples.
bool check_c3(const WeightFunction& f, double p_min, int n_max);

}  // namespace coneroute
