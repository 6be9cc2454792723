#pragma once

#include <cstdint>
#include <vector>

#include "matchstat/rank_stats.hpp"
#include "matchstat/rng.hpp"

namespace matchstat {

// Rejection rule for the matching side of the power experiments: the fixed
// rule m >= 4, or the exact critical value at the configured alpha.
enum class RejectionRule { fixed_m_ge_4, exact_alpha };

struct ExperimentConfig {
    std::vector<int> n_list;
    std::vector<double> rho_list;
    long reps = 100000;
    std::uint64_t master_seed = 1;
    double alpha = 0.05;
    RejectionRule rejection_rule = RejectionRule::fixed_m_ge_4;
};

struct PowerCell {
    int n = 0;
    double rho = 0.0;
    double power_matching = 0.0;
    double power_pearson = 0.0;
    long reps_used = 0;
    double mc_stderr = 0.0;  // sqrt(p(1-p)/reps) for p = power_matching
};

// One relative-power cell: the population correlation chosen to give the
// conventional test a nominal power level at this n.
struct RelPowerCell {
    double nominal_power = 0.0;
    PowerCell cell;
};

// Null-case joint distribution of (m, r_s, tau) across replications.
struct JointStats {
    int n = 0;
    double corr_m_rho = 0.0;       // Pearson correlation of m with r_s
    double corr_rho_tau = 0.0;     // Pearson correlation of r_s with tau
    double std_slope_m_rho = 0.0;  // standardized slope of r_s on m
    double r_squared_m_rho = 0.0;
    double sd_m = 0.0;
    double sd_rho = 0.0;
};

struct DispersionRow {
    int n = 0;
    double sd_m = 0.0;
    double sd_rho = 0.0;
};

// Location of m relative to its null expectation of 1.
enum class MBucket { m_lt_1, m_eq_1, m_gt_1 };

const char* bucket_name(MBucket b);

struct IndicatorRow {
    int n = 0;
    double rho = 0.0;
    MBucket bucket = MBucket::m_lt_1;
    double prob_overestimate = 0.0;  // P(r > rho | bucket)
    long bucket_count = 0;
};

// X_i ~ N(0,1), Y_i = rho*X_i + sqrt(1-rho^2)*Z_i with Z_i ~ N(0,1); draws
// are interleaved x,z per observation. rho = +-1 couples Y to X exactly.
BivariateSample bivariate_normal_sample(int n, double rho, Stream& stream);

// All experiments derive one substream per (experiment kind, cell,
// replication, lane) from the master seed and reduce fixed-size replication
// blocks in index order, so output is byte-identical for a given config
// regardless of the worker count. threads = 0 means hardware concurrency.

// Rejection rates of the matching method and the two-sided Pearson test over
// the (n, rho) grid.
std::vector<PowerCell> power_experiment(const ExperimentConfig& config, int threads = 0);

// Same engine over the built-in grid pairing each n in {10, 30, 50, 100}
// with the four correlations at which the conventional test has nominal
// power 50/60/70/80%. config.n_list, when nonempty, filters the grid;
// config.rho_list is ignored.
std::vector<RelPowerCell> relative_power_experiment(const ExperimentConfig& config,
                                                    int threads = 0);

// Draws reps null samples of size n and summarizes the joint distribution of
// (m, r_s, tau).
JointStats joint_distribution_experiment(int n, long reps, std::uint64_t master_seed,
                                         int threads = 0);

// Null-case Monte Carlo standard deviations of m and r_s per n.
std::vector<DispersionRow> dispersion_experiment(const std::vector<int>& n_list, long reps,
                                                 std::uint64_t master_seed, int threads = 0);

// P(r > rho | m bucket) per rho, with r the raw-sample Pearson correlation
// and m computed from the ranked sample. Buckets: m = 0, m = 1, m >= 2.
std::vector<IndicatorRow> error_sign_experiment(int n, const std::vector<double>& rho_list,
                                                long reps, std::uint64_t master_seed,
                                                int threads = 0);

}  // namespace matchstat
