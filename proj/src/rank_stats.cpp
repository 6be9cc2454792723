#include "matchstat/rank_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

#include "matchstat/errors.hpp"
#include "matchstat/rng.hpp"

namespace matchstat {

namespace {

void require_paired(const RankedSample& rs) {
    if (rs.rx.size() != rs.ry.size() || rs.rx.empty())
        throw std::invalid_argument("ranked sample: rx and ry must be nonempty and paired");
}

// Counts inversions of seq in place; tmp is scratch of the same size.
std::uint64_t merge_count(std::vector<int>& seq, std::vector<int>& tmp, std::size_t lo,
                          std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t inv = merge_count(seq, tmp, lo, mid) + merge_count(seq, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (seq[i] <= seq[j]) {
            tmp[k++] = seq[i++];
        } else {
            inv += mid - i;
            tmp[k++] = seq[j++];
        }
    }
    while (i < mid) tmp[k++] = seq[i++];
    while (j < hi) tmp[k++] = seq[j++];
    std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo),
              tmp.begin() + static_cast<std::ptrdiff_t>(hi),
              seq.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

}  // namespace

bool is_rank_permutation(std::span<const int> v) {
    const int n = static_cast<int>(v.size());
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    for (int r : v) {
        if (r < 1 || r > n || seen[static_cast<std::size_t>(r)]) return false;
        seen[static_cast<std::size_t>(r)] = true;
    }
    return true;
}

std::vector<int> rank_transform(std::span<const double> values, const TiePolicy& policy) {
    const std::size_t n = values.size();
    if (n < 2) throw std::invalid_argument("rank_transform: need at least 2 values");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("rank_transform: values must be finite");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    Stream stream(policy.seed);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        if (j - i > 1) {
            if (policy.mode == TieMode::reject)
                throw TiesPresent(
                    "tied values present; the matching statistic is undefined "
                    "without a tie-breaking convention");
            // Fisher-Yates over the tie group only.
            for (std::size_t t = j - 1; t > i; --t) {
                const std::size_t pick = i + stream.next_u64() % (t - i + 1);
                std::swap(order[t], order[pick]);
            }
        }
        i = j;
    }

    std::vector<int> ranks(n);
    for (std::size_t r = 0; r < n; ++r) ranks[order[r]] = static_cast<int>(r) + 1;
    return ranks;
}

RankedSample rank_sample(const BivariateSample& s, const TiePolicy& x_policy,
                         const TiePolicy& y_policy) {
    if (s.x.size() != s.y.size())
        throw std::invalid_argument("rank_sample: x and y must be paired");
    return RankedSample{rank_transform(s.x, x_policy), rank_transform(s.y, y_policy)};
}

RankedSample rank_sample(const BivariateSample& s, TieMode mode, std::uint64_t seed) {
    if (mode == TieMode::reject)
        return rank_sample(s, TiePolicy::rejecting(), TiePolicy::rejecting());
    return rank_sample(s, TiePolicy::randomized(hash_combine(seed, 1)),
                       TiePolicy::randomized(hash_combine(seed, 2)));
}

int matching_statistic(const RankedSample& rs) {
    require_paired(rs);
    int m = 0;
    for (std::size_t i = 0; i < rs.rx.size(); ++i)
        if (rs.rx[i] == rs.ry[i]) ++m;
    return m;
}

double spearman_rho(const RankedSample& rs) {
    require_paired(rs);
    const auto n = static_cast<std::int64_t>(rs.rx.size());
    if (n < 2) throw std::invalid_argument("spearman_rho: need n >= 2");
    std::int64_t d2 = 0;
    for (std::size_t i = 0; i < rs.rx.size(); ++i) {
        const std::int64_t d = rs.rx[i] - rs.ry[i];
        d2 += d * d;
    }
    return 1.0 - 6.0 * static_cast<double>(d2) /
                     (static_cast<double>(n) * static_cast<double>(n * n - 1));
}

double kendall_tau(const RankedSample& rs) {
    require_paired(rs);
    const auto n = rs.rx.size();
    if (n < 2) throw std::invalid_argument("kendall_tau: need n >= 2");
    // Order ry by ascending rx; discordant pairs are then exactly the
    // inversions of the resulting sequence (no ties in either vector).
    std::vector<int> seq(n);
    for (std::size_t i = 0; i < n; ++i)
        seq[static_cast<std::size_t>(rs.rx[i]) - 1] = rs.ry[i];
    std::vector<int> tmp(n);
    const std::uint64_t inv = merge_count(seq, tmp, 0, n);
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 1.0 - static_cast<double>(inv) / pairs * 2.0;
}

double pearson_r(const BivariateSample& s) {
    const std::size_t n = s.size();
    if (s.x.size() != s.y.size())
        throw std::invalid_argument("pearson_r: x and y must be paired");
    if (n < 2) throw std::invalid_argument("pearson_r: need n >= 2");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += s.x[i];
        my += s.y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = s.x[i] - mx;
        const double dy = s.y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ZeroVariance("pearson_r: a variable with zero variance has no correlation");
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

}  // namespace matchstat
