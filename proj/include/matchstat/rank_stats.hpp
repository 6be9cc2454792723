#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace matchstat {

// Paired observations on two variables, equal length, all finite.
struct BivariateSample {
    std::vector<double> x;
    std::vector<double> y;

    std::size_t size() const { return x.size(); }
};

// Paired rank vectors. rx and ry are each permutations of 1..n; rank 1 is the
// smallest observation.
struct RankedSample {
    std::vector<int> rx;
    std::vector<int> ry;

    int n() const { return static_cast<int>(rx.size()); }
};

enum class TieMode { reject, random };

struct TiePolicy {
    TieMode mode = TieMode::reject;
    std::uint64_t seed = 0;

    static TiePolicy rejecting() { return {TieMode::reject, 0}; }
    static TiePolicy randomized(std::uint64_t seed) { return {TieMode::random, seed}; }
};

// Ranks 1..n, 1 = smallest. Under TieMode::reject tied values throw
// TiesPresent; under TieMode::random each tie group gets distinct ranks in a
// uniformly random order drawn from the policy's seed.
std::vector<int> rank_transform(std::span<const double> values, const TiePolicy& policy);

// Ranks both coordinates. The two policies are separate so callers can hand
// each coordinate its own substream.
RankedSample rank_sample(const BivariateSample& s, const TiePolicy& x_policy,
                         const TiePolicy& y_policy);

// Single-seed form: under TieMode::random each coordinate gets its own
// substream derived from the seed (lane 1 for x, lane 2 for y).
RankedSample rank_sample(const BivariateSample& s, TieMode mode, std::uint64_t seed = 0);

// m: number of positions with equal ranks. Integer in [0, n], never n-1.
int matching_statistic(const RankedSample& rs);

// 1 - 6*sum(d_i^2) / (n(n^2-1)); exact for tie-free ranks.
double spearman_rho(const RankedSample& rs);

// Tau-a: (concordant - discordant) / C(n,2), via inversion counting.
double kendall_tau(const RankedSample& rs);

// Sample product-moment correlation, clamped to [-1, 1] against rounding.
// Throws ZeroVariance when either coordinate is constant.
double pearson_r(const BivariateSample& s);

// True when v is a permutation of 1..n. Used by validation and tests.
bool is_rank_permutation(std::span<const int> v);

}  // namespace matchstat
