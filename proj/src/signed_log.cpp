#include "gibbs/signed_log.hpp"

#include <cmath>

namespace gibbs {

SignedLog signed_log_sum(std::span<const SignedLog> terms, bool* cancellation,
                         double cancel_rel) {
  if (cancellation) *cancellation = false;
  double mx = neg_inf;
  for (const auto& t : terms)
    if (t.sign != 0 && t.log_mag > mx) mx = t.log_mag;
  if (mx == neg_inf) return SignedLog::zero();

  // Positive and negative parts accumulate separately in extended precision
  // relative to the largest magnitude, so the flagged cancellation threshold
  // is meaningful.
  long double pos = 0.0L, neg = 0.0L;
  for (const auto& t : terms) {
    if (t.sign == 0) continue;
    const long double e = expl(static_cast<long double>(t.log_mag - mx));
    if (t.sign > 0)
      pos += e;
    else
      neg += e;
  }
  const long double diff = pos - neg;
  const long double big = pos > neg ? pos : neg;
  if (cancellation && big > 0.0L && fabsl(diff) < cancel_rel * big)
    *cancellation = true;
  if (diff == 0.0L) return SignedLog::zero();
  return {diff > 0.0L ? 1 : -1,
          mx + static_cast<double>(logl(fabsl(diff)))};
}

}  // namespace gibbs
