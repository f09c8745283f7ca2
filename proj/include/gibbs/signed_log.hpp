#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace gibbs {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// A real number stored as sign * exp(log_mag). sign is -1, 0 or +1;
// zero is canonically {0, -inf}.
struct SignedLog {
  int sign = 0;
  double log_mag = neg_inf;

  static SignedLog zero() { return {0, neg_inf}; }
  static SignedLog one() { return {1, 0.0}; }

  static SignedLog from_value(double x) {
    if (x == 0.0) return zero();
    return {x > 0 ? 1 : -1, std::log(std::fabs(x))};
  }

  // Positive number given directly in log space.
  static SignedLog from_log(double lx) { return {1, lx}; }

  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_mag); }

  bool is_zero() const { return sign == 0; }

  SignedLog operator*(const SignedLog& o) const {
    if (sign == 0 || o.sign == 0) return zero();
    return {sign * o.sign, log_mag + o.log_mag};
  }

  SignedLog operator/(const SignedLog& o) const {
    return {sign * o.sign, log_mag - o.log_mag};
  }

  SignedLog operator-() const { return {-sign, log_mag}; }
};

// log(exp(a) + exp(b)) with -inf handled.
inline double log_add(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  double hi = a > b ? a : b;
  double lo = a > b ? b : a;
  return hi + std::log1p(std::exp(lo - hi));
}

// log(exp(a) - exp(b)) for a >= b; returns -inf when equal.
inline double log_sub(double a, double b) {
  if (b == neg_inf) return a;
  if (a <= b) return neg_inf;
  return a + std::log1p(-std::exp(b - a));
}

inline SignedLog operator+(const SignedLog& a, const SignedLog& b) {
  if (a.sign == 0) return b;
  if (b.sign == 0) return a;
  if (a.sign == b.sign) return {a.sign, log_add(a.log_mag, b.log_mag)};
  if (a.log_mag == b.log_mag) return SignedLog::zero();
  return a.log_mag > b.log_mag
             ? SignedLog{a.sign, log_sub(a.log_mag, b.log_mag)}
             : SignedLog{b.sign, log_sub(b.log_mag, a.log_mag)};
}

// Streaming log-sum-exp accumulator for nonnegative terms.
class OnlineLogSum {
 public:
  void add(double log_term) { total_ = log_add(total_, log_term); }
  double log_total() const { return total_; }

 private:
  double total_ = neg_inf;
};

// Sum of signed log-space terms. Positive and negative parts accumulate
// separately in long double relative to the largest magnitude; if the result
// magnitude falls below cancel_rel times the largest term, *cancellation is
// set (when provided) and the long-double difference is still returned.
SignedLog signed_log_sum(std::span<const SignedLog> terms,
                         bool* cancellation = nullptr,
                         double cancel_rel = 1e-10);

}  // namespace gibbs
