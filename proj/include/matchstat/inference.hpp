#pragma once

#include "matchstat/rank_stats.hpp"

namespace matchstat {

enum class TestMode { exact, asymptotic, t_test };

const char* test_mode_name(TestMode mode);

struct TestResult {
    double statistic = 0.0;  // m for the matching test, r for the Pearson test
    double p_value = 1.0;
    TestMode mode = TestMode::exact;
    double alpha = 0.05;
    bool reject = false;
    int n = 0;
};

// Matching-method test of independence: p = P(m >= observed m) under the
// null, from the exact match distribution or its Poisson(1) limit.
// Requires n >= 4.
TestResult matching_test(const RankedSample& rs, TestMode mode, double alpha);

// Smallest k whose upper tail is <= alpha, with the achieved size (the true
// Type I rate of the rule "reject iff m >= k"). Throws NoRejectionRegion
// when even k = n exceeds alpha.
struct CriticalValue {
    int m = 0;
    double achieved_size = 0.0;
};
CriticalValue critical_m(int n, double alpha, TestMode mode);

// Two-sided test of zero correlation: t = r * sqrt((n-2)/(1-r^2)) referred
// to Student's t with n-2 degrees of freedom. |r| = 1 reports p = 0.
TestResult pearson_test(const BivariateSample& s, double alpha);

// I_x(a, b), the regularized incomplete beta function, by Lentz's continued
// fraction. Relative accuracy ~1e-14 for moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

// P(T > t) for Student's t with nu degrees of freedom.
double student_t_sf(double t, double nu);

}  // namespace matchstat
