#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "matchstat/combinatorics.hpp"

using namespace matchstat;

namespace {

// Brute-force census: number of permutations of n with exactly k fixed
// points, by enumerating all n! permutations.
std::vector<long> fixed_point_census(int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<long> census(static_cast<std::size_t>(n) + 1, 0);
    do {
        int fixed = 0;
        for (int i = 0; i < n; ++i)
            if (perm[static_cast<std::size_t>(i)] == i) ++fixed;
        ++census[static_cast<std::size_t>(fixed)];
    } while (std::next_permutation(perm.begin(), perm.end()));
    return census;
}

double rounded4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

TEST_CASE("derangement counts match the enumeration oracle") {
    CHECK(derangement_count(0) == 1);
    CHECK(derangement_count(1) == 0);
    CHECK(derangement_count(4) == fixed_point_census(4)[0]);  // 9 of 24
    CHECK(derangement_count(4) == 9);
    for (int n = 2; n <= 8; ++n)
        CHECK(derangement_count(n) == fixed_point_census(n)[0]);
    CHECK_THROWS_AS(derangement_count(-1), std::invalid_argument);
}

TEST_CASE("derangement recurrence scales to big integers") {
    // D_30 exceeds 64 bits; check it against the inclusion-exclusion sum
    // n! * sum (-1)^j / j! computed exactly.
    const long n = 30;
    BigInt alt = 0;
    for (long j = 0; j <= n; ++j) {
        BigInt term = factorial(n) / factorial(j);
        alt += (j % 2 == 0) ? term : -term;
    }
    CHECK(derangement_count(n) == alt);
}

TEST_CASE("match_count equals C(n,k)*D(n-k) and the census") {
    CHECK(match_count(4, 4) == 1);
    CHECK(match_count(4, 3) == 0);
    CHECK(match_count(4, 0) == 9);
    for (int n = 1; n <= 7; ++n) {
        const auto census = fixed_point_census(n);
        for (long k = 0; k <= n; ++k)
            CHECK(match_count(n, k) == census[static_cast<std::size_t>(k)]);
    }
    CHECK(match_count(5, -1) == 0);
    CHECK(match_count(5, 6) == 0);
}

TEST_CASE("match_pmf reproduces the small-n table to 4 decimals") {
    CHECK(rounded4(match_pmf(4, 0)) == doctest::Approx(0.3750));
    CHECK(rounded4(match_pmf(4, 1)) == doctest::Approx(0.3333));  // 8/24 by census
    CHECK(match_count(4, 1) == 8);
    CHECK(rounded4(match_pmf(7, 5)) == doctest::Approx(0.0042));
    CHECK(rounded4(match_pmf(5, 1)) == doctest::Approx(0.3750));
}

TEST_CASE("match_tail sums the upper pmf") {
    CHECK(match_tail(4, 0) == 1.0);
    CHECK(match_tail(4, -3) == 1.0);
    CHECK(match_tail(4, 5) == 0.0);
    CHECK(match_tail(5, 4) == doctest::Approx(1.0 / 120.0).epsilon(1e-12));
    CHECK(rounded4(match_tail(5, 4)) == doctest::Approx(0.0083));
    CHECK(rounded4(match_tail(4, 4)) == doctest::Approx(0.0417));
}

TEST_CASE("counts: sum to n!, impossible n-1 cell, identity cell") {
    for (long n = 1; n <= 12; ++n) {
        const auto dist = MatchDistribution::make(n);
        BigInt sum = 0;
        for (const auto& c : dist.counts) sum += c;
        CHECK(sum == factorial(n));
        CHECK(dist.counts.back() == 1);
        if (n >= 2) CHECK(dist.counts[static_cast<std::size_t>(n - 1)] == 0);
        for (long k = 0; k <= n; ++k)
            CHECK(dist.counts[static_cast<std::size_t>(k)] == match_count(n, k));
    }
}

TEST_CASE("exact moments: E[m] = 1 and Var[m] = 1") {
    for (long n = 2; n <= 12; ++n) {
        const auto dist = MatchDistribution::make(n);
        // Integer identities: sum k*counts = n!, sum k^2*counts = 2*n!.
        BigInt first = 0, second = 0;
        for (long k = 0; k <= n; ++k) {
            first += k * dist.counts[static_cast<std::size_t>(k)];
            second += k * k * dist.counts[static_cast<std::size_t>(k)];
        }
        CHECK(first == factorial(n));
        CHECK(second == 2 * factorial(n));
        // Same in floating point through the pmf.
        double mean = 0.0, mean_sq = 0.0;
        for (long k = 0; k <= n; ++k) {
            mean += static_cast<double>(k) * match_pmf(n, k);
            mean_sq += static_cast<double>(k * k) * match_pmf(n, k);
        }
        CHECK(std::fabs(mean - 1.0) < 1e-12);
        CHECK(std::fabs(mean_sq - mean * mean - 1.0) < 1e-12);
    }
}

TEST_CASE("pmf at k = n-1 is identically zero") {
    for (long n : {2L, 3L, 7L, 12L, 20L, 25L, 60L}) CHECK(match_pmf(n, n - 1) == 0.0);
}

TEST_CASE("series evaluation agrees with exact rationals beyond the switch") {
    for (long n : {21L, 25L, 40L}) {
        const BigInt total = factorial(n);
        for (long k = 0; k <= std::min(n, 30L); ++k) {
            mpq_class exact(match_count(n, k), total);
            exact.canonicalize();
            CHECK(match_pmf(n, k) == doctest::Approx(exact.get_d()).epsilon(1e-12));
        }
    }
}

TEST_CASE("pmf converges to Poisson(1) fast") {
    for (long n = 7; n <= 60; ++n) {
        double worst = 0.0;
        for (long k = 0; k <= n; ++k)
            worst = std::max(worst, std::fabs(match_pmf(n, k) - poisson_pmf(1.0, k)));
        CHECK(worst < 0.005);
    }
}

TEST_CASE("poisson pmf and tail") {
    CHECK(rounded4(poisson_pmf(1.0, 0)) == doctest::Approx(0.3679));
    CHECK(rounded4(poisson_pmf(1.0, 2)) == doctest::Approx(0.1839));
    CHECK(poisson_pmf(2.0, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
    CHECK(poisson_tail(1.0, 0) == 1.0);
    CHECK(poisson_tail(1.0, 1) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-13));
    const double expected = 1.0 - std::exp(-1.0) * (1.0 + 1.0 + 0.5 + 1.0 / 6.0);
    CHECK(poisson_tail(1.0, 4) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(poisson_tail(1.0, 4) == doctest::Approx(0.01899).epsilon(1e-3));
    CHECK_THROWS_AS(poisson_pmf(0.0, 1), std::invalid_argument);
}

TEST_CASE("poisson pmf sums to one under adaptive truncation") {
    for (double lambda : {0.5, 1.0, 2.0, 10.0}) {
        const PoissonModel model{lambda};
        double sum = 0.0;
        long k = 0;
        for (;;) {
            const double term = model.pmf(k);
            sum += term;
            if (static_cast<double>(k) > lambda && term < 1e-18) break;
            ++k;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-12);
    }
}

TEST_CASE("poisson tail is numerically clean deep in the tail") {
    // Far-tail values stay positive and strictly decreasing.
    double prev = poisson_tail(1.0, 10);
    for (long k = 11; k <= 30; ++k) {
        const double cur = poisson_tail(1.0, k);
        CHECK(cur > 0.0);
        CHECK(cur < prev);
        prev = cur;
    }
}
