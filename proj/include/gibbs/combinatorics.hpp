#pragma once

#include <cstdint>
#include <vector>

#include "gibbs/signed_log.hpp"

namespace gibbs {

// (x)_n = x (x+1) ... (x+n-1), any real x, n >= 0.
SignedLog rising_factorial(double x, std::int64_t n);

// log (x)_n for x > 0 (throws DomainError otherwise). lgamma-based, O(1).
double log_rising(double x, std::int64_t n);

double log_binomial(std::int64_t n, std::int64_t k);

// Generalized factorial coefficient C(n,k;sigma):
//   (sigma t)_n = sum_k C(n,k;sigma) (t)_k,
// equivalently C(n,k;sigma) = (1/k!) sum_j (-1)^j binom(k,j) (-j sigma)_n.
// Defined here for sigma < 1, sigma != 0. Sign is sign(sigma)^k.
SignedLog gen_factorial(std::int64_t n, std::int64_t k, double sigma);

// Noncentral generalized factorial coefficient C(m,j;sigma,gamma) =
// (1/j!) sum_i (-1)^i binom(j,i) (-gamma - i sigma)_m, so that
// C(m,0;sigma,gamma) = (-gamma)_m. sigma < 1, nonzero. gamma <= 0 runs in
// log space at any m; gamma > 0 alternates in sign and runs in linear
// space, sign-exact but limited to moderate m by the double exponent range.
SignedLog noncentral_gen_factorial(std::int64_t m, std::int64_t j,
                                   double sigma, double gamma);

// log |s(n,k)|, unsigned Stirling numbers of the first kind.
double stirling1_abs(std::int64_t n, std::int64_t k);

// log of the sigma-scaled coefficient C(m,j;sigma,gamma)/sigma^j, which obeys
//   R(m+1,j) = (m - gamma - sigma j) R(m,j) + R(m,j-1),  R(0,0) = 1,
// stays positive whenever gamma <= 0 (every factor m - gamma - sigma j > 0),
// and has removable sigma -> 0 limits: at gamma = 0 it is |s(m,j)|.
// Requires sigma < 1 and gamma <= 0; central case is gamma = 0.
double log_scaled_coeff(std::int64_t m, std::int64_t j, double sigma,
                        double gamma);

// Row j = 0..m of log_scaled_coeff at fixed m, computed in one sweep.
std::vector<double> log_scaled_coeff_row(std::int64_t m, double sigma,
                                         double gamma);

// log Gamma(a, x), upper incomplete gamma, x > 0, any real a.
double log_upper_inc_gamma(double a, double x);

}  // namespace gibbs
