#include "matchstat/inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "matchstat/combinatorics.hpp"
#include "matchstat/errors.hpp"

namespace matchstat {

namespace {

constexpr int kMinTestSample = 4;

// Continued fraction for the incomplete beta function (Lentz's algorithm).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-30;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("regularized_incomplete_beta: continued fraction did not converge");
}

double checked_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in (0, 1)");
    return alpha;
}

}  // namespace

const char* test_mode_name(TestMode mode) {
    switch (mode) {
        case TestMode::exact: return "exact";
        case TestMode::asymptotic: return "asymptotic";
        case TestMode::t_test: return "t_test";
    }
    return "unknown";
}

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("regularized_incomplete_beta: a, b must be > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const bool flip = x > (a + 1.0) / (a + b + 2.0);
    if (flip) {
        std::swap(a, b);
        x = 1.0 - x;
    }
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    const double value = front * beta_cf(a, b, x) / a;
    return flip ? 1.0 - value : value;
}

double student_t_sf(double t, double nu) {
    if (!(nu > 0.0)) throw std::invalid_argument("student_t_sf: nu must be > 0");
    const double two_sided = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
    return t >= 0.0 ? 0.5 * two_sided : 1.0 - 0.5 * two_sided;
}

TestResult matching_test(const RankedSample& rs, TestMode mode, double alpha) {
    if (mode == TestMode::t_test)
        throw std::invalid_argument("matching_test: mode must be exact or asymptotic");
    checked_alpha(alpha);
    const int n = rs.n();
    if (n < kMinTestSample)
        throw SampleTooSmall("matching_test: need at least 4 observations");
    const int m = matching_statistic(rs);
    const double p = (mode == TestMode::exact) ? match_tail(n, m) : poisson_tail(1.0, m);
    return TestResult{static_cast<double>(m), p, mode, alpha, p <= alpha, n};
}

CriticalValue critical_m(int n, double alpha, TestMode mode) {
    if (mode == TestMode::t_test)
        throw std::invalid_argument("critical_m: mode must be exact or asymptotic");
    checked_alpha(alpha);
    if (n < kMinTestSample)
        throw SampleTooSmall("critical_m: need n >= 4");
    for (int k = 0; k <= n; ++k) {
        const double tail =
            (mode == TestMode::exact) ? match_tail(n, k) : poisson_tail(1.0, k);
        if (tail <= alpha) return CriticalValue{k, tail};
    }
    throw NoRejectionRegion("critical_m: no tail probability at or below alpha");
}

TestResult pearson_test(const BivariateSample& s, double alpha) {
    checked_alpha(alpha);
    const int n = static_cast<int>(s.size());
    if (n < kMinTestSample)
        throw SampleTooSmall("pearson_test: need at least 4 observations");
    const double r = pearson_r(s);
    double p;
    if (r == 1.0 || r == -1.0) {
        p = 0.0;  // degenerate: perfectly linear data
    } else {
        const double nu = static_cast<double>(n - 2);
        const double t = r * std::sqrt(nu / (1.0 - r * r));
        p = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
        p = std::clamp(p, 0.0, 1.0);
    }
    return TestResult{r, p, TestMode::t_test, alpha, p <= alpha, n};
}

}  // namespace matchstat
