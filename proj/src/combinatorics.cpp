#include "matchstat/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace matchstat {

namespace {

// Largest n whose pmf is computed from exact integer counts. Beyond this the
// distribution is within 1e-16 of its Poisson(1) limit anyway and the
// truncated series is both faster and accurate to full double precision.
constexpr long kExactLimit = 20;

void require_positive_n(long n, const char* where) {
    if (n < 1) throw std::invalid_argument(std::string(where) + ": n must be >= 1");
}

double exact_ratio(const BigInt& num, const BigInt& den) {
    mpq_class q(num, den);
    q.canonicalize();
    return q.get_d();
}

// (1/k!) * sum_{j=0}^{n-k} (-1)^j / j!, the pmf in its limiting-series form.
double series_pmf(long n, long k) {
    const long jmax = std::min(n - k, 30L);  // terms below 1e-32 after j=30
    double sum = 0.0;
    double term = 1.0;  // (-1)^j / j!
    for (long j = 0; j <= jmax; ++j) {
        if (j > 0) term /= static_cast<double>(-j);
        sum += term;
    }
    if (sum <= 0.0) return 0.0;  // exactly zero at k = n-1
    return std::exp(std::log(sum) - std::lgamma(static_cast<double>(k) + 1.0));
}

}  // namespace

BigInt factorial(long n) {
    if (n < 0) throw std::invalid_argument("factorial: n must be nonnegative");
    BigInt r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

BigInt binomial(long n, long k) {
    if (n < 0) throw std::invalid_argument("binomial: n must be nonnegative");
    if (k < 0 || k > n) return 0;
    BigInt r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n),
                 static_cast<unsigned long>(k));
    return r;
}

BigInt derangement_count(long t) {
    if (t < 0) throw std::invalid_argument("derangement_count: t must be nonnegative");
    if (t == 0) return 1;
    if (t == 1) return 0;
    BigInt prev2 = 1;  // D_0
    BigInt prev = 0;   // D_1
    for (long i = 2; i <= t; ++i) {
        BigInt cur = (i - 1) * (prev + prev2);
        prev2 = std::move(prev);
        prev = std::move(cur);
    }
    return prev;
}

BigInt match_count(long n, long k) {
    require_positive_n(n, "match_count");
    if (k < 0 || k > n) return 0;
    return binomial(n, k) * derangement_count(n - k);
}

double match_pmf(long n, long k) {
    require_positive_n(n, "match_pmf");
    if (k < 0 || k > n) return 0.0;
    if (n <= kExactLimit) return exact_ratio(match_count(n, k), factorial(n));
    return series_pmf(n, k);
}

double match_tail(long n, long k) {
    require_positive_n(n, "match_tail");
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    if (n <= kExactLimit) {
        BigInt acc = 0;
        for (long j = k; j <= n; ++j) acc += match_count(n, j);
        return exact_ratio(acc, factorial(n));
    }
    if (k <= 8) {
        // Head is short and the tail is not yet tiny: complement is exact to
        // absolute 1e-16, which dominates here.
        double head = 0.0;
        for (long j = 0; j < k; ++j) head += series_pmf(n, j);
        return std::max(0.0, 1.0 - head);
    }
    // Far tail: sum forward, terms decay faster than 1/k.
    double acc = 0.0;
    for (long j = k; j <= n; ++j) {
        const double term = series_pmf(n, j);
        acc += term;
        if (j > k + 4 && term < acc * 1e-18) break;
    }
    return std::min(acc, 1.0);
}

double poisson_pmf(double lambda, long k) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson_pmf: lambda must be > 0");
    if (k < 0) return 0.0;
    const double kk = static_cast<double>(k);
    return std::exp(kk * std::log(lambda) - lambda - std::lgamma(kk + 1.0));
}

double poisson_tail(double lambda, long k) {
    if (!(lambda > 0.0)) throw std::invalid_argument("poisson_tail: lambda must be > 0");
    if (k <= 0) return 1.0;
    if (static_cast<double>(k) <= lambda + 1.0) {
        double head = 0.0;
        for (long j = 0; j < k; ++j) head += poisson_pmf(lambda, j);
        return std::max(0.0, 1.0 - head);
    }
    // Above the mode the term ratio lambda/(j+1) is < 1 and shrinking, so the
    // forward sum converges quickly and keeps full relative accuracy.
    double acc = 0.0;
    double term = poisson_pmf(lambda, k);
    for (long j = k;; ++j) {
        acc += term;
        term *= lambda / (static_cast<double>(j) + 1.0);
        if (term < acc * 1e-18 && static_cast<double>(j) > lambda) break;
    }
    return std::min(acc, 1.0);
}

MatchDistribution MatchDistribution::make(long n) {
    require_positive_n(n, "MatchDistribution::make");
    MatchDistribution d;
    d.n = n;
    d.total = factorial(n);
    d.counts.reserve(static_cast<std::size_t>(n) + 1);
    // Reuse the derangement recurrence: counts[k] = C(n,k) * D(n-k).
    std::vector<BigInt> derangements(static_cast<std::size_t>(n) + 1);
    derangements[0] = 1;
    if (n >= 1) derangements[1] = 0;
    for (long t = 2; t <= n; ++t)
        derangements[t] = (t - 1) * (derangements[t - 1] + derangements[t - 2]);
    for (long k = 0; k <= n; ++k)
        d.counts.push_back(binomial(n, k) * derangements[n - k]);
    return d;
}

double MatchDistribution::pmf(long k) const {
    if (k < 0 || k > n) return 0.0;
    return exact_ratio(counts[static_cast<std::size_t>(k)], total);
}

double MatchDistribution::tail(long k) const {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    BigInt acc = 0;
    for (long j = k; j <= n; ++j) acc += counts[static_cast<std::size_t>(j)];
    return exact_ratio(acc, total);
}

}  // namespace matchstat
