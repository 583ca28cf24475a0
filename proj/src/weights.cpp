#include "coneroute/weights.hpp"

#include <cmath>
#include <limits>

namespace coneroute {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int checked_capacity(int capacity) {
  if (capacity < 2) fail(Errc::invalid_argument, "weight table capacity must be at least 2");
  if (capacity > 4096) fail(Errc::too_large, "weight table capacity is unreasonably large");
  return capacity;
}

}  // namespace

WeightFunction WeightFunction::geometric(double K, int capacity) {
  if (!(K >= 1.0 + 1e-9))
    fail(Errc::invalid_argument, "geometric weight family requires K >= 1 + 1e-9");
  WeightFunction f = from_rule("geometric(K=" + std::to_string(K) + ")",
                               [K](int m, int n) { return 1.0 / (std::pow(K, m) * (std::pow(K, n) - 1.0)); },
                               capacity);
  f.k_ = K;
  return f;
}

WeightFunction WeightFunction::from_rule(std::string name,
                                         const std::function<double(int, int)>& rule, int capacity) {
  WeightFunction f;
  f.name_ = std::move(name);
  f.capacity_ = checked_capacity(capacity);
  f.table_.assign(static_cast<std::size_t>(f.capacity_ + 1) * (f.capacity_ + 1), kNaN);
  for (int m = 0; m <= f.capacity_; ++m)
    for (int n = 1; m + n <= f.capacity_; ++n)
      f.table_[static_cast<std::size_t>(m) * (f.capacity_ + 1) + n] = rule(m, n);
  return f;
}

WeightFunction WeightFunction::from_table(std::string name, const std::vector<Entry>& entries) {
  int cap = 2;
  for (const Entry& e : entries) {
    if (e.m < 0 || e.n < 1) fail(Errc::domain_error, "weight entries need m >= 0 and n >= 1");
    cap = std::max(cap, e.m + e.n);
  }
  WeightFunction f;
  f.name_ = std::move(name);
  f.capacity_ = checked_capacity(cap);
  f.table_.assign(static_cast<std::size_t>(f.capacity_ + 1) * (f.capacity_ + 1), kNaN);
  for (const Entry& e : entries)
    f.table_[static_cast<std::size_t>(e.m) * (f.capacity_ + 1) + e.n] = e.value;
  return f;
}

double WeightFunction::eval(int m, int n) const {
  if (m < 0 || n < 1 || m + n > capacity_)
    fail(Errc::domain_error, "weight argument (m=" + std::to_string(m) + ", n=" + std::to_string(n) +
                                 ") outside the table domain");
  const double v = table_[static_cast<std::size_t>(m) * (capacity_ + 1) + n];
  if (std::isnan(v))
    fail(Errc::domain_error, "weight table has no entry for (m=" + std::to_string(m) +
                                 ", n=" + std::to_string(n) + ")");
  return v;
}

namespace {

// All checkers demand strictly positive finite values on the swept domain:
// a weight family is only meaningful when f > 0, and sweeping inequalities
// over negative values would vacuously "pass" broken families.
bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

template <typename Check>
bool sweep_triples(const WeightFunction& f, int n_max, Check&& check) {
  if (n_max < 2) fail(Errc::invalid_argument, "condition sweep needs n_max >= 2");
  if (n_max > f.capacity()) fail(Errc::domain_error, "condition sweep exceeds the table capacity");
  for (int m = 0; m + 2 <= n_max; ++m)
    for (int n1 = 1; m + n1 + 1 <= n_max; ++n1)
      for (int n2 = 1; m + n1 + n2 <= n_max; ++n2) {
        const double a = f.eval(m, n1);
        const double b = f.eval(m + n1, n2);
        const double c = f.eval(m, n1 + n2);
        if (!positive_finite(a) || !positive_finite(b) || !positive_finite(c)) return false;
        if (!check(a, b, c)) return false;
      }
  return true;
}

}  // namespace

bool check_c1(const WeightFunction& f, int n_max) {
  return sweep_triples(f, n_max, [](double a, double b, double c) {
    const double lhs = 1.0 / c;
    const double rhs = 1.0 / a + 1.0 / b;
    return std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
  });
}

bool check_c2(const WeightFunction& f, int n_max) {
  return sweep_triples(f, n_max, [](double a, double b, double /*c*/) {
    return a - b >= -1e-12 * std::max(a, b);
  });
}

bool check_c3(const WeightFunction& f, double p_min, int n_max) {
  if (!(p_min > 0.0 && p_min <= 1.0)) fail(Errc::invalid_argument, "p_min must lie in (0, 1]");
  const double bound = (1.0 / p_min) * (1.0 - 1e-12);
  return sweep_triples(f, n_max,
                       [bound](double a, double b, double /*c*/) { return a / b >= bound; });
}

}  // namespace coneroute
