#include "matchstat/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <ostream>

#include "matchstat/combinatorics.hpp"
#include "matchstat/errors.hpp"
#include "matchstat/inference.hpp"
#include "matchstat/montecarlo.hpp"
#include "matchstat/rng.hpp"
#include "matchstat/table_io.hpp"

namespace matchstat::cli {

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

const std::vector<int> kDefaultPowerNs = {10, 30, 50, 100, 200};
const std::vector<double> kDefaultRhoGrid = {-.7, -.525, -.35, -.175, 0.0,
                                             .175, .35,   .525, .7};

struct OutputParams {
    std::string format = "csv";
    std::string out_path;
    bool no_header = false;

    io::EmitOptions emit() const {
        return io::EmitOptions{format == "json" ? io::Format::json : io::Format::csv,
                               !no_header};
    }
};

struct SeedParam {
    std::uint64_t value = kDefaultSeed;
    CLI::Option* option = nullptr;

    // --seed wins; else the MATCHSTAT_SEED environment variable; else 1.
    std::uint64_t resolve() const {
        if (option != nullptr && option->count() > 0) return value;
        if (const char* env = std::getenv("MATCHSTAT_SEED")) {
            std::uint64_t parsed = 0;
            const char* last = env + std::string_view(env).size();
            const auto [ptr, ec] = std::from_chars(env, last, parsed);
            if (ec != std::errc{} || ptr != last)
                throw CLI::ValidationError("MATCHSTAT_SEED",
                                           "must be an unsigned 64-bit integer");
            return parsed;
        }
        return kDefaultSeed;
    }
};

void add_output_params(CLI::App* sub, OutputParams& p) {
    sub->add_option("--format", p.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    sub->add_option("--out", p.out_path, "write output to a file instead of stdout");
    sub->add_flag("--no-header", p.no_header, "suppress the CSV header row");
}

void add_seed_param(CLI::App* sub, SeedParam& p) {
    p.option = sub->add_option("--seed", p.value,
                               "master seed (default: MATCHSTAT_SEED or 1)");
}

template <typename Fn>
void with_output(const OutputParams& p, std::ostream& fallback, Fn fn) {
    if (p.out_path.empty()) {
        fn(fallback);
        return;
    }
    std::ofstream file(p.out_path, std::ios::binary);
    if (!file) throw DataError("cannot open output file: " + p.out_path);
    fn(file);
}

RejectionRule parse_rule(const std::string& rule) {
    return rule == "exact-alpha" ? RejectionRule::exact_alpha
                                 : RejectionRule::fixed_m_ge_4;
}

// ---------------------------------------------------------------------------
// table1 / pmf

void exec_table1(int max_n, int decimals, const OutputParams& op, std::ostream& fallback) {
    with_output(op, fallback, [&](std::ostream& out) {
        if (op.emit().format == io::Format::json) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (long k = 0; k <= max_n; ++k) {
                nlohmann::ordered_json row;
                row["k"] = k;
                for (long n = 4; n <= max_n; ++n) {
                    const std::string key = "n=" + std::to_string(n);
                    if (k <= n)
                        row[key] = match_pmf(n, k);
                    else
                        row[key] = nullptr;
                }
                row["poisson"] = poisson_pmf(1.0, k);
                rows.push_back(row);
            }
            out << rows.dump(2) << "\n";
            return;
        }
        if (op.emit().header) {
            out << "k";
            for (long n = 4; n <= max_n; ++n) out << ",n=" << n;
            out << ",poisson\n";
        }
        for (long k = 0; k <= max_n; ++k) {
            out << k;
            for (long n = 4; n <= max_n; ++n) {
                out << ',';
                if (k <= n) out << io::fixed(match_pmf(n, k), decimals);
            }
            out << ',' << io::fixed(poisson_pmf(1.0, k), decimals) << '\n';
        }
    });
}

void exec_pmf(long n, long k, const OutputParams& op, std::ostream& fallback) {
    const double pmf = match_pmf(n, k);
    const double tail = match_tail(n, k);
    with_output(op, fallback, [&](std::ostream& out) {
        if (op.emit().format == io::Format::json) {
            nlohmann::ordered_json row = {
                {"n", n}, {"k", k}, {"pmf", pmf}, {"tail", tail}};
            out << row.dump(2) << "\n";
            return;
        }
        if (op.emit().header) out << "n,k,pmf,tail\n";
        out << n << ',' << k << ',' << io::fixed(pmf) << ',' << io::fixed(tail) << '\n';
    });
}

// ---------------------------------------------------------------------------
// test

void exec_test(const std::string& input, const std::string& mode,
               const std::string& tie_policy, double alpha, std::uint64_t seed,
               const OutputParams& op, std::ostream& fallback) {
    std::ifstream file(input, std::ios::binary);
    if (!file) throw DataError("cannot open input file: " + input);
    const io::InputTable table = io::read_input_table(file);
    if (table.rows() < 4)
        throw DataError("need at least 4 data rows, got " + std::to_string(table.rows()));

    BivariateSample sample{table.x, table.y};
    const TieMode ties = tie_policy == "random" ? TieMode::random : TieMode::reject;
    const RankedSample rs = rank_sample(sample, ties, seed);
    const TestMode test_mode =
        mode == "asymptotic" ? TestMode::asymptotic : TestMode::exact;
    const TestResult result = matching_test(rs, test_mode, alpha);
    with_output(op, fallback,
                [&](std::ostream& out) { io::write_test_result(out, result, op.emit()); });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{
        "matchstat: exact fixed-point match distributions, the matching-method "
        "test of independence, and reproducible Monte Carlo experiments"};
    app.require_subcommand(1);

    // table1
    auto* table1 = app.add_subcommand(
        "table1", "pmf table of the match distribution (n = 4..max) next to Poisson(1)");
    int table1_max_n = 7;
    int table1_decimals = 4;
    OutputParams table1_out;
    table1->add_option("--max-n", table1_max_n, "largest n column (also the largest k row)")
        ->check(CLI::Range(4, 400))
        ->capture_default_str();
    table1->add_option("--decimals", table1_decimals, "printed decimal places")
        ->check(CLI::Range(1, 17))
        ->capture_default_str();
    add_output_params(table1, table1_out);

    // pmf
    auto* pmf = app.add_subcommand(
        "pmf", "P(m = k) and P(m >= k) for the match distribution at one (n, k)");
    long pmf_n = 0, pmf_k = 0;
    OutputParams pmf_out;
    pmf->add_option("--n", pmf_n, "set size")->required()->check(CLI::PositiveNumber);
    pmf->add_option("--k", pmf_k, "number of matches")->required();
    add_output_params(pmf, pmf_out);

    // test
    auto* test = app.add_subcommand(
        "test", "matching-method test of independence on a two-column data file");
    std::string test_input, test_mode = "exact", test_ties = "reject";
    double test_alpha = 0.05;
    SeedParam test_seed;
    OutputParams test_out;
    test->add_option("--input", test_input, "two-column delimited file (optional header)")
        ->required();
    test->add_option("--mode", test_mode, "p-value from the exact distribution or its Poisson limit")
        ->check(CLI::IsMember({"exact", "asymptotic"}))
        ->capture_default_str();
    test->add_option("--alpha", test_alpha, "significance level")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    test->add_option("--tie-policy", test_ties, "reject ties or break them at random")
        ->check(CLI::IsMember({"reject", "random"}))
        ->capture_default_str();
    add_seed_param(test, test_seed);
    add_output_params(test, test_out);

    // shared experiment parameters
    struct ExperimentParams {
        std::vector<int> ns;
        std::vector<double> rhos;
        long reps = 100000;
        SeedParam seed;
        std::string rule = "m-ge-4";
        double alpha = 0.05;
        int threads = 0;
        OutputParams out;
    };
    auto add_experiment_params = [](CLI::App* sub, ExperimentParams& p, bool with_rho,
                                    bool with_rule) {
        if (with_rho)
            sub->add_option("--rho", p.rhos, "population correlation (repeatable)")
                ->check(CLI::Range(-0.9999999, 0.9999999));
        sub->add_option("--reps", p.reps, "replications per cell")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        add_seed_param(sub, p.seed);
        if (with_rule) {
            sub->add_option("--rule", p.rule, "matching rejection rule")
                ->check(CLI::IsMember({"m-ge-4", "exact-alpha"}))
                ->capture_default_str();
            sub->add_option("--alpha", p.alpha, "significance level")
                ->check(CLI::Range(0.0, 1.0))
                ->capture_default_str();
        }
        sub->add_option("--threads", p.threads, "worker threads (0 = hardware)")
            ->check(CLI::Range(0, 1024))
            ->capture_default_str();
        add_output_params(sub, p.out);
    };

    auto* power = app.add_subcommand(
        "power", "rejection rates of the matching method and the Pearson test over an (n, rho) grid");
    ExperimentParams power_p;
    power->add_option("--n", power_p.ns, "sample size (repeatable)")
        ->check(CLI::Range(4, 1000000));
    add_experiment_params(power, power_p, true, true);

    auto* relpower = app.add_subcommand(
        "relpower",
        "matching power at the correlations giving the Pearson test 50/60/70/80% power");
    ExperimentParams relpower_p;
    relpower->add_option("--n", relpower_p.ns, "restrict to these n (subset of 10,30,50,100)")
        ->check(CLI::IsMember({10, 30, 50, 100}));
    add_experiment_params(relpower, relpower_p, false, true);

    auto* rae = app.add_subcommand(
        "rae", "null-case joint distribution of (m, r_s, tau): correlations, slope, spreads");
    ExperimentParams rae_p;
    rae->add_option("--n", rae_p.ns, "sample size (repeatable)")
        ->check(CLI::Range(4, 1000000));
    add_experiment_params(rae, rae_p, false, false);

    auto* dispersion = app.add_subcommand(
        "dispersion", "null-case Monte Carlo standard deviations of m and r_s per n");
    ExperimentParams dispersion_p;
    dispersion->add_option("--n", dispersion_p.ns, "sample size (repeatable)")
        ->check(CLI::Range(4, 1000000));
    add_experiment_params(dispersion, dispersion_p, false, false);

    auto* indicator = app.add_subcommand(
        "indicator", "P(r > rho) conditioned on the location of m relative to 1");
    ExperimentParams indicator_p;
    int indicator_n = 15;
    indicator->add_option("--n", indicator_n, "sample size")
        ->check(CLI::Range(4, 1000000))
        ->capture_default_str();
    add_experiment_params(indicator, indicator_p, true, false);

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("matchstat");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());

        if (*table1) {
            exec_table1(table1_max_n, table1_decimals, table1_out, out);
        } else if (*pmf) {
            exec_pmf(pmf_n, pmf_k, pmf_out, out);
        } else if (*test) {
            exec_test(test_input, test_mode, test_ties, test_alpha,
                      test_seed.resolve(), test_out, out);
        } else if (*power) {
            ExperimentConfig config;
            config.n_list = power_p.ns.empty() ? kDefaultPowerNs : power_p.ns;
            config.rho_list = power_p.rhos.empty() ? kDefaultRhoGrid : power_p.rhos;
            config.reps = power_p.reps;
            config.master_seed = power_p.seed.resolve();
            config.alpha = power_p.alpha;
            config.rejection_rule = parse_rule(power_p.rule);
            const auto cells = power_experiment(config, power_p.threads);
            with_output(power_p.out, out, [&](std::ostream& o) {
                io::write_power_table(o, cells, power_p.out.emit());
            });
        } else if (*relpower) {
            ExperimentConfig config;
            config.n_list = relpower_p.ns;  // empty = whole grid
            config.reps = relpower_p.reps;
            config.master_seed = relpower_p.seed.resolve();
            config.alpha = relpower_p.alpha;
            config.rejection_rule = parse_rule(relpower_p.rule);
            const auto cells = relative_power_experiment(config, relpower_p.threads);
            with_output(relpower_p.out, out, [&](std::ostream& o) {
                io::write_relpower_table(o, cells, relpower_p.out.emit());
            });
        } else if (*rae) {
            const std::vector<int> ns = rae_p.ns.empty() ? std::vector<int>{10, 50} : rae_p.ns;
            const std::uint64_t seed = rae_p.seed.resolve();
            std::vector<JointStats> rows;
            rows.reserve(ns.size());
            for (int n : ns)
                rows.push_back(
                    joint_distribution_experiment(n, rae_p.reps, seed, rae_p.threads));
            with_output(rae_p.out, out, [&](std::ostream& o) {
                io::write_rae_table(o, rows, rae_p.out.emit());
            });
        } else if (*dispersion) {
            const std::vector<int> ns =
                dispersion_p.ns.empty() ? std::vector<int>{10, 50} : dispersion_p.ns;
            const auto rows = dispersion_experiment(ns, dispersion_p.reps,
                                                    dispersion_p.seed.resolve(),
                                                    dispersion_p.threads);
            with_output(dispersion_p.out, out, [&](std::ostream& o) {
                io::write_dispersion_table(o, rows, dispersion_p.out.emit());
            });
        } else if (*indicator) {
            const std::vector<double> rhos =
                indicator_p.rhos.empty() ? kDefaultRhoGrid : indicator_p.rhos;
            const auto rows =
                error_sign_experiment(indicator_n, rhos, indicator_p.reps,
                                      indicator_p.seed.resolve(), indicator_p.threads);
            with_output(indicator_p.out, out, [&](std::ostream& o) {
                io::write_indicator_table(o, rows, indicator_p.out.emit());
            });
        }
        return 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace matchstat::cli
