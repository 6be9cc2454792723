#include "matchstat/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>

#include "matchstat/errors.hpp"
#include "matchstat/inference.hpp"

namespace matchstat {

namespace {

// Fixed replication block size. Workers pick up (cell, block) tasks in any
// order; partial results land in an index-addressed slot and are reduced in
// block order, which keeps floating-point sums independent of scheduling.
constexpr long kBlockReps = 8192;

// Stream-derivation tags, one per experiment family.
constexpr std::uint64_t kKindPower = 1;
constexpr std::uint64_t kKindJoint = 2;
constexpr std::uint64_t kKindDispersion = 3;
constexpr std::uint64_t kKindIndicator = 4;

// Lanes within one replication.
constexpr std::uint64_t kLaneData = 0;
constexpr std::uint64_t kLaneTieX = 1;
constexpr std::uint64_t kLaneTieY = 2;

// Stream identity of a cell comes from its contents, not its grid position,
// so a cell's estimate is unchanged by adding or reordering other cells.
std::uint64_t cell_word(int n, double rho) {
    return hash_combine(static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(rho));
}

int resolve_threads(int threads) {
    if (threads > 0) return threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs fn(cell, rep_begin, rep_end, partial) over every (cell, block) task
// and returns the partials laid out cell-major, block-minor.
template <typename Partial, typename BlockFn>
std::vector<Partial> run_blocks(std::size_t n_cells, long reps, int threads, BlockFn fn) {
    const std::size_t blocks =
        static_cast<std::size_t>((reps + kBlockReps - 1) / kBlockReps);
    std::vector<Partial> partials(n_cells * blocks);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1, std::memory_order_relaxed);
            if (task >= partials.size()) return;
            const std::size_t cell = task / blocks;
            const long lo = static_cast<long>(task % blocks) * kBlockReps;
            const long hi = std::min(reps, lo + kBlockReps);
            fn(cell, lo, hi, partials[task]);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = resolve_threads(threads);
    pool.reserve(static_cast<std::size_t>(n_threads) - 1);
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return partials;
}

template <typename Partial>
Partial reduce_cell(const std::vector<Partial>& partials, std::size_t n_cells,
                    std::size_t cell) {
    const std::size_t blocks = partials.size() / n_cells;
    Partial acc{};
    for (std::size_t b = 0; b < blocks; ++b) acc.merge(partials[cell * blocks + b]);
    return acc;
}

RankedSample rank_replication(const BivariateSample& s, std::uint64_t master,
                              std::uint64_t kind, std::uint64_t cell, std::uint64_t rep) {
    return rank_sample(
        s, TiePolicy::randomized(substream_seed(master, {kind, cell, rep, kLaneTieX})),
        TiePolicy::randomized(substream_seed(master, {kind, cell, rep, kLaneTieY})));
}

void validate_common(long reps, double alpha) {
    if (reps < 1) throw std::invalid_argument("experiment: reps must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("experiment: alpha must be in (0, 1)");
}

void validate_cell(int n, double rho) {
    if (n < 4) throw std::invalid_argument("experiment: every n must be >= 4");
    if (!(std::fabs(rho) < 1.0))
        throw std::invalid_argument("experiment: every |rho| must be < 1");
}

struct PowerSums {
    long reject_matching = 0;
    long reject_pearson = 0;

    void merge(const PowerSums& o) {
        reject_matching += o.reject_matching;
        reject_pearson += o.reject_pearson;
    }
};

struct CellSpec {
    int n;
    double rho;
};

std::vector<PowerCell> run_power_cells(const std::vector<CellSpec>& cells, long reps,
                                       std::uint64_t master, double alpha,
                                       RejectionRule rule, int threads) {
    validate_common(reps, alpha);
    for (const auto& c : cells) validate_cell(c.n, c.rho);

    // Per-cell matching rejection threshold, fixed up front.
    std::vector<int> m_crit(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
        m_crit[i] = (rule == RejectionRule::fixed_m_ge_4)
                        ? 4
                        : critical_m(cells[i].n, alpha, TestMode::exact).m;

    auto partials = run_blocks<PowerSums>(
        cells.size(), reps, threads,
        [&](std::size_t cell, long lo, long hi, PowerSums& out) {
            const int n = cells[cell].n;
            const double rho = cells[cell].rho;
            const std::uint64_t word = cell_word(n, rho);
            for (long rep = lo; rep < hi; ++rep) {
                Stream data(substream_seed(
                    master, {kKindPower, word, static_cast<std::uint64_t>(rep), kLaneData}));
                const BivariateSample s = bivariate_normal_sample(n, rho, data);
                const RankedSample rs = rank_replication(
                    s, master, kKindPower, word, static_cast<std::uint64_t>(rep));
                if (matching_statistic(rs) >= m_crit[cell]) ++out.reject_matching;
                try {
                    if (pearson_test(s, alpha).reject) ++out.reject_pearson;
                } catch (const ZeroVariance&) {
                    // constant sample: the conventional test cannot reject
                }
            }
        });

    std::vector<PowerCell> result;
    result.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const PowerSums sums = reduce_cell(partials, cells.size(), i);
        PowerCell cell;
        cell.n = cells[i].n;
        cell.rho = cells[i].rho;
        cell.reps_used = reps;
        cell.power_matching =
            static_cast<double>(sums.reject_matching) / static_cast<double>(reps);
        cell.power_pearson =
            static_cast<double>(sums.reject_pearson) / static_cast<double>(reps);
        cell.mc_stderr = std::sqrt(cell.power_matching * (1.0 - cell.power_matching) /
                                   static_cast<double>(reps));
        result.push_back(cell);
    }
    return result;
}

struct JointSums {
    double m = 0, m2 = 0, r = 0, r2 = 0, t = 0, t2 = 0, mr = 0, rt = 0;

    void merge(const JointSums& o) {
        m += o.m;
        m2 += o.m2;
        r += o.r;
        r2 += o.r2;
        t += o.t;
        t2 += o.t2;
        mr += o.mr;
        rt += o.rt;
    }
};

struct MomentSums {
    double m = 0, m2 = 0, r = 0, r2 = 0;

    void merge(const MomentSums& o) {
        m += o.m;
        m2 += o.m2;
        r += o.r;
        r2 += o.r2;
    }
};

struct IndicatorSums {
    long count[3] = {0, 0, 0};
    long over[3] = {0, 0, 0};

    void merge(const IndicatorSums& o) {
        for (int b = 0; b < 3; ++b) {
            count[b] += o.count[b];
            over[b] += o.over[b];
        }
    }
};

double sample_sd(double sum, double sum_sq, long reps) {
    const double r = static_cast<double>(reps);
    const double var = (sum_sq - sum * sum / r) / (r - 1.0);
    return std::sqrt(std::max(var, 0.0));
}

}  // namespace

const char* bucket_name(MBucket b) {
    switch (b) {
        case MBucket::m_lt_1: return "m_lt_1";
        case MBucket::m_eq_1: return "m_eq_1";
        case MBucket::m_gt_1: return "m_gt_1";
    }
    return "unknown";
}

BivariateSample bivariate_normal_sample(int n, double rho, Stream& stream) {
    if (n < 1) throw std::invalid_argument("bivariate_normal_sample: n must be >= 1");
    if (!(std::fabs(rho) <= 1.0))
        throw std::invalid_argument("bivariate_normal_sample: |rho| must be <= 1");
    const double coupling = std::sqrt(1.0 - rho * rho);
    BivariateSample s;
    s.x.resize(static_cast<std::size_t>(n));
    s.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double x = stream.next_normal();
        const double z = stream.next_normal();
        s.x[static_cast<std::size_t>(i)] = x;
        s.y[static_cast<std::size_t>(i)] = rho * x + coupling * z;
    }
    return s;
}

std::vector<PowerCell> power_experiment(const ExperimentConfig& config, int threads) {
    if (config.n_list.empty() || config.rho_list.empty())
        throw std::invalid_argument("power_experiment: n_list and rho_list must be nonempty");
    std::vector<CellSpec> cells;
    cells.reserve(config.n_list.size() * config.rho_list.size());
    for (int n : config.n_list)
        for (double rho : config.rho_list) cells.push_back({n, rho});
    return run_power_cells(cells, config.reps, config.master_seed, config.alpha,
                           config.rejection_rule, threads);
}

std::vector<RelPowerCell> relative_power_experiment(const ExperimentConfig& config,
                                                    int threads) {
    // Correlations at which the two-sided Pearson test has nominal power
    // 50/60/70/80% at alpha = .05, per sample size.
    struct RelSpec {
        int n;
        double rho;
        double nominal;
    };
    static const RelSpec grid[] = {
        {10, .62, .50},   {10, .67, .60},   {10, .72, .70},   {10, .78, .80},
        {30, .36, .50},   {30, .40, .60},   {30, .442, .70},  {30, .49, .80},
        {50, .277, .50},  {50, .311, .60},  {50, .346, .70},  {50, .386, .80},
        {100, .196, .50}, {100, .221, .60}, {100, .247, .70}, {100, .277, .80},
    };

    std::vector<RelSpec> selected;
    for (const auto& spec : grid) {
        if (config.n_list.empty() ||
            std::find(config.n_list.begin(), config.n_list.end(), spec.n) !=
                config.n_list.end())
            selected.push_back(spec);
    }
    if (selected.empty())
        throw std::invalid_argument(
            "relative_power_experiment: n_list must intersect {10, 30, 50, 100}");

    std::vector<CellSpec> cells;
    cells.reserve(selected.size());
    for (const auto& spec : selected) cells.push_back({spec.n, spec.rho});
    std::vector<PowerCell> powers = run_power_cells(
        cells, config.reps, config.master_seed, config.alpha, config.rejection_rule, threads);

    std::vector<RelPowerCell> result;
    result.reserve(selected.size());
    for (std::size_t i = 0; i < selected.size(); ++i)
        result.push_back(RelPowerCell{selected[i].nominal, powers[i]});
    return result;
}

JointStats joint_distribution_experiment(int n, long reps, std::uint64_t master_seed,
                                         int threads) {
    validate_common(reps, 0.05);
    validate_cell(n, 0.0);
    if (reps < 2)
        throw std::invalid_argument("joint_distribution_experiment: reps must be >= 2");

    const std::uint64_t word = cell_word(n, 0.0);
    auto partials = run_blocks<JointSums>(
        1, reps, threads, [&](std::size_t, long lo, long hi, JointSums& out) {
            for (long rep = lo; rep < hi; ++rep) {
                Stream data(substream_seed(
                    master_seed,
                    {kKindJoint, word, static_cast<std::uint64_t>(rep), kLaneData}));
                const BivariateSample s = bivariate_normal_sample(n, 0.0, data);
                const RankedSample rs = rank_replication(
                    s, master_seed, kKindJoint, word, static_cast<std::uint64_t>(rep));
                const double m = matching_statistic(rs);
                const double r = spearman_rho(rs);
                const double t = kendall_tau(rs);
                out.m += m;
                out.m2 += m * m;
                out.r += r;
                out.r2 += r * r;
                out.t += t;
                out.t2 += t * t;
                out.mr += m * r;
                out.rt += r * t;
            }
        });

    const JointSums s = reduce_cell(partials, 1, 0);
    const double r = static_cast<double>(reps);
    const double cov_mr = (s.mr - s.m * s.r / r) / (r - 1.0);
    const double cov_rt = (s.rt - s.r * s.t / r) / (r - 1.0);
    const double var_m = (s.m2 - s.m * s.m / r) / (r - 1.0);
    const double var_r = (s.r2 - s.r * s.r / r) / (r - 1.0);
    const double var_t = (s.t2 - s.t * s.t / r) / (r - 1.0);

    JointStats out;
    out.n = n;
    out.sd_m = std::sqrt(std::max(var_m, 0.0));
    out.sd_rho = std::sqrt(std::max(var_r, 0.0));
    out.corr_m_rho = cov_mr / (out.sd_m * out.sd_rho);
    out.corr_rho_tau = cov_rt / std::sqrt(var_r * var_t);
    // Slope of r_s on m in standardized units; its product with the
    // correlation is the regression R^2.
    out.std_slope_m_rho = (cov_mr / var_m) * (out.sd_m / out.sd_rho);
    out.r_squared_m_rho = out.std_slope_m_rho * out.corr_m_rho;
    return out;
}

std::vector<DispersionRow> dispersion_experiment(const std::vector<int>& n_list, long reps,
                                                 std::uint64_t master_seed, int threads) {
    if (n_list.empty())
        throw std::invalid_argument("dispersion_experiment: n_list must be nonempty");
    if (reps < 2) throw std::invalid_argument("dispersion_experiment: reps must be >= 2");
    for (int n : n_list) validate_cell(n, 0.0);

    auto partials = run_blocks<MomentSums>(
        n_list.size(), reps, threads,
        [&](std::size_t cell, long lo, long hi, MomentSums& out) {
            const int n = n_list[cell];
            const std::uint64_t word = cell_word(n, 0.0);
            for (long rep = lo; rep < hi; ++rep) {
                Stream data(substream_seed(
                    master_seed,
                    {kKindDispersion, word, static_cast<std::uint64_t>(rep), kLaneData}));
                const BivariateSample s = bivariate_normal_sample(n, 0.0, data);
                const RankedSample rs = rank_replication(
                    s, master_seed, kKindDispersion, word, static_cast<std::uint64_t>(rep));
                const double m = matching_statistic(rs);
                const double r = spearman_rho(rs);
                out.m += m;
                out.m2 += m * m;
                out.r += r;
                out.r2 += r * r;
            }
        });

    std::vector<DispersionRow> rows;
    rows.reserve(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const MomentSums s = reduce_cell(partials, n_list.size(), i);
        rows.push_back(DispersionRow{n_list[i], sample_sd(s.m, s.m2, reps),
                                     sample_sd(s.r, s.r2, reps)});
    }
    return rows;
}

std::vector<IndicatorRow> error_sign_experiment(int n, const std::vector<double>& rho_list,
                                                long reps, std::uint64_t master_seed,
                                                int threads) {
    if (rho_list.empty())
        throw std::invalid_argument("error_sign_experiment: rho_list must be nonempty");
    validate_common(reps, 0.05);
    for (double rho : rho_list) validate_cell(n, rho);

    auto partials = run_blocks<IndicatorSums>(
        rho_list.size(), reps, threads,
        [&](std::size_t cell, long lo, long hi, IndicatorSums& out) {
            const double rho = rho_list[cell];
            const std::uint64_t word = cell_word(n, rho);
            for (long rep = lo; rep < hi; ++rep) {
                Stream data(substream_seed(
                    master_seed,
                    {kKindIndicator, word, static_cast<std::uint64_t>(rep), kLaneData}));
                const BivariateSample s = bivariate_normal_sample(n, rho, data);
                const RankedSample rs = rank_replication(
                    s, master_seed, kKindIndicator, word, static_cast<std::uint64_t>(rep));
                const int m = matching_statistic(rs);
                const int bucket = m == 0 ? 0 : (m == 1 ? 1 : 2);
                ++out.count[bucket];
                // r is the raw-sample Pearson correlation, not the rank one.
                try {
                    if (pearson_r(s) > rho) ++out.over[bucket];
                } catch (const ZeroVariance&) {
                    // constant sample: r undefined, count as non-overestimate
                }
            }
        });

    static const MBucket buckets[3] = {MBucket::m_lt_1, MBucket::m_eq_1, MBucket::m_gt_1};
    std::vector<IndicatorRow> rows;
    rows.reserve(rho_list.size() * 3);
    for (std::size_t i = 0; i < rho_list.size(); ++i) {
        const IndicatorSums s = reduce_cell(partials, rho_list.size(), i);
        for (int b = 0; b < 3; ++b) {
            IndicatorRow row;
            row.n = n;
            row.rho = rho_list[i];
            row.bucket = buckets[b];
            row.bucket_count = s.count[b];
            row.prob_overestimate =
                s.count[b] > 0 ? static_cast<double>(s.over[b]) / static_cast<double>(s.count[b])
                               : std::numeric_limits<double>::quiet_NaN();
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace matchstat
