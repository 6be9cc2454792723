#pragma once

#include <gmpxx.h>

#include <vector>

namespace matchstat {

using BigInt = mpz_class;

// Number of positions at which two independent uniform random permutations of
// n elements agree ("matches", equivalently fixed points of one permutation
// composed with the other's inverse). counts[k] is the exact number of
// permutations of n with exactly k fixed points; total is n!.

BigInt factorial(long n);
BigInt binomial(long n, long k);

// D_t, the number of derangements of t elements, via the recurrence
// D_t = (t-1)(D_{t-1} + D_{t-2}), D_0 = 1, D_1 = 0.
BigInt derangement_count(long t);

// C(n,k) * D(n-k): permutations of n with exactly k fixed points.
// Zero outside 0 <= k <= n.
BigInt match_count(long n, long k);

// P(m = k) for two random permutations of n elements. Exact big-integer
// arithmetic up to n = 20; the truncated alternating series
// (1/k!) * sum_{j=0}^{n-k} (-1)^j / j! beyond that.
double match_pmf(long n, long k);

// Upper tail P(m >= k). 1 for k <= 0, 0 for k > n.
double match_tail(long n, long k);

// Poisson(lambda) pmf and upper tail P(X >= k), evaluated in log space so
// large k cannot overflow.
double poisson_pmf(double lambda, long k);
double poisson_tail(double lambda, long k);

// The exact match distribution for one n, materialized.
struct MatchDistribution {
    long n = 0;
    std::vector<BigInt> counts;  // indexed k = 0..n
    BigInt total;                // n!

    static MatchDistribution make(long n);

    double pmf(long k) const;
    double tail(long k) const;
};

// The Poisson limit of the match distribution (lambda = 1 under a true null).
struct PoissonModel {
    double lambda = 1.0;

    double pmf(long k) const { return poisson_pmf(lambda, k); }
    double tail(long k) const { return poisson_tail(lambda, k); }
};

}  // namespace matchstat
