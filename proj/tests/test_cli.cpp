#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "matchstat/cli.hpp"
#include "matchstat/inference.hpp"
#include "matchstat/montecarlo.hpp"
#include "matchstat/rng.hpp"
#include "matchstat/table_io.hpp"

using namespace matchstat;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

RunResult run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

class TempFile {
  public:
    explicit TempFile(const std::string& contents) {
        static int counter = 0;
        path_ = (std::filesystem::temp_directory_path() /
                 ("matchstat_test_" + std::to_string(++counter) + ".csv"))
                    .string();
        std::ofstream f(path_, std::ios::binary);
        f << contents;
    }
    ~TempFile() { std::remove(path_.c_str()); }
    const std::string& path() const { return path_; }

  private:
    std::string path_;
};

}  // namespace

TEST_CASE("table1 reproduces the 4-decimal grid") {
    const auto result = run_cli({"table1", "--max-n", "7"});
    REQUIRE(result.code == 0);
    const auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 9);
    CHECK(lines[0] == "k,n=4,n=5,n=6,n=7,poisson");
    CHECK(lines[1] == "0,0.3750,0.3667,0.3681,0.3679,0.3679");
    CHECK(lines[2] == "1,0.3333,0.3750,0.3667,0.3681,0.3679");
    CHECK(lines[3] == "2,0.2500,0.1667,0.1875,0.1833,0.1839");
    CHECK(lines[4] == "3,0.0000,0.0833,0.0556,0.0625,0.0613");
    CHECK(lines[5] == "4,0.0417,0.0000,0.0208,0.0139,0.0153");
    CHECK(lines[6] == "5,,0.0083,0.0000,0.0042,0.0031");
    CHECK(lines[7] == "6,,,0.0014,0.0000,0.0005");
    CHECK(lines[8] == "7,,,,0.0002,0.0001");
}

TEST_CASE("pmf emits one row with pmf and tail") {
    const auto result = run_cli({"pmf", "--n", "4", "--k", "0"});
    REQUIRE(result.code == 0);
    const auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "n,k,pmf,tail");
    CHECK(lines[1] == "4,0,0.375000,1.000000");

    const auto no_header = run_cli({"pmf", "--n", "4", "--k", "0", "--no-header"});
    CHECK(lines_of(no_header.out).size() == 1);
}

TEST_CASE("test subcommand runs the worked example") {
    TempFile file("x,y\n1,10\n2,20\n3,30\n4,40\n");
    const auto result =
        run_cli({"test", "--input", file.path(), "--mode", "exact", "--alpha", "0.05"});
    REQUIRE(result.code == 0);
    const auto lines = lines_of(result.out);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "statistic,p_value,mode,alpha,reject,n");
    CHECK(lines[1] == "4.000000,0.041667,exact,0.050000,true,4");

    const auto asym = run_cli(
        {"test", "--input", file.path(), "--mode", "asymptotic", "--no-header"});
    CHECK(lines_of(asym.out)[0] == "4.000000,0.018988,asymptotic,0.050000,true,4");
}

TEST_CASE("test subcommand emits JSON when asked") {
    TempFile file("1,10\n2,20\n3,5\n4,40\n5,50\n");
    const auto result = run_cli({"test", "--input", file.path(), "--format", "json"});
    REQUIRE(result.code == 0);
    const auto j = nlohmann::json::parse(result.out);
    CHECK(j["mode"] == "exact");
    CHECK(j["n"] == 5);
    CHECK(j["statistic"] == 4.0);
    CHECK(j["reject"] == true);
}

TEST_CASE("data errors exit with code 2 and a row number") {
    TempFile short_file("1,10\n2,20\n3,30\n");
    const auto too_few = run_cli({"test", "--input", short_file.path()});
    CHECK(too_few.code == 2);

    TempFile bad_row("1,10\n2,20\nbroken,row\n4,40\n");
    const auto unparseable = run_cli({"test", "--input", bad_row.path()});
    CHECK(unparseable.code == 2);
    CHECK(unparseable.err.find("row 3") != std::string::npos);

    TempFile tied("1,10\n1,20\n3,30\n4,40\n");
    const auto ties = run_cli({"test", "--input", tied.path()});
    CHECK(ties.code == 2);

    const auto random_ties = run_cli(
        {"test", "--input", tied.path(), "--tie-policy", "random", "--seed", "5"});
    CHECK(random_ties.code == 0);

    const auto missing = run_cli({"test", "--input", "/nonexistent/file.csv"});
    CHECK(missing.code == 2);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"pmf", "--n", "4"}).code == 1);             // missing --k
    CHECK(run_cli({"pmf", "--n", "-2", "--k", "0"}).code == 1);
    CHECK(run_cli({"table1", "--max-n", "3"}).code == 1);
    CHECK(run_cli({"power", "--format", "yaml"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"test", "--help"}).code == 0);
}

TEST_CASE("file round-trip matches the in-process test result") {
    Stream stream(substream_seed(12, {5}));
    const BivariateSample sample = bivariate_normal_sample(20, 0.5, stream);
    std::ostringstream contents;
    contents.precision(17);
    for (std::size_t i = 0; i < sample.size(); ++i)
        contents << sample.x[i] << "," << sample.y[i] << "\n";
    TempFile file(contents.str());

    const auto from_cli = run_cli({"test", "--input", file.path(), "--mode", "exact",
                                   "--alpha", "0.05", "--tie-policy", "random",
                                   "--seed", "7"});
    REQUIRE(from_cli.code == 0);

    const TestResult api = matching_test(rank_sample(sample, TieMode::random, 7),
                                         TestMode::exact, 0.05);
    std::ostringstream expected;
    io::write_test_result(expected, api, io::EmitOptions{});
    CHECK(from_cli.out == expected.str());
}

TEST_CASE("fixed seeds give byte-identical output across reruns and thread counts") {
    const std::vector<std::string> base = {"power", "--n",   "10",  "--rho", "0.35",
                                           "--reps", "3000", "--seed", "11"};
    auto with_threads = [&](const char* t) {
        auto args = base;
        args.push_back("--threads");
        args.push_back(t);
        return run_cli(args);
    };
    const auto a = with_threads("1");
    const auto b = with_threads("2");
    const auto c = with_threads("3");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    CHECK(run_cli(base).out == a.out);
}

TEST_CASE("MATCHSTAT_SEED is honored when --seed is absent") {
    TempFile file("1,10\n1,20\n3,30\n4,40\n5,50\n");
    const auto explicit_seed = run_cli({"test", "--input", file.path(), "--tie-policy",
                                        "random", "--seed", "99"});
    REQUIRE(explicit_seed.code == 0);

    ::setenv("MATCHSTAT_SEED", "99", 1);
    const auto env_seed =
        run_cli({"test", "--input", file.path(), "--tie-policy", "random"});
    ::unsetenv("MATCHSTAT_SEED");
    REQUIRE(env_seed.code == 0);
    CHECK(env_seed.out == explicit_seed.out);

    ::setenv("MATCHSTAT_SEED", "not-a-number", 1);
    const auto bad_env =
        run_cli({"test", "--input", file.path(), "--tie-policy", "random"});
    ::unsetenv("MATCHSTAT_SEED");
    CHECK(bad_env.code == 1);
}

TEST_CASE("--out writes the same bytes as stdout") {
    const std::string out_path =
        (std::filesystem::temp_directory_path() / "matchstat_out_test.csv").string();
    const auto to_stdout = run_cli({"dispersion", "--n", "10", "--reps", "2000"});
    const auto to_file = run_cli(
        {"dispersion", "--n", "10", "--reps", "2000", "--out", out_path});
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.empty());
    std::ifstream f(out_path, std::ios::binary);
    std::stringstream read_back;
    read_back << f.rdbuf();
    std::remove(out_path.c_str());
    CHECK(read_back.str() == to_stdout.out);
}

TEST_CASE("experiment tables have the documented schemas") {
    const auto power = run_cli({"power", "--n", "10", "--rho", "0", "--reps", "500"});
    CHECK(lines_of(power.out)[0] == "n,rho,power_matching,power_pearson,reps,mc_stderr");

    const auto rae = run_cli({"rae", "--n", "10", "--reps", "500"});
    CHECK(lines_of(rae.out)[0] == "n,corr_m_rho,corr_rho_tau,std_slope,r_squared,sd_m,sd_rho");

    const auto indicator =
        run_cli({"indicator", "--n", "15", "--rho", "0", "--reps", "500"});
    const auto ind_lines = lines_of(indicator.out);
    CHECK(ind_lines[0] == "n,rho,bucket,prob_overestimate,count");
    REQUIRE(ind_lines.size() == 4);
    CHECK(ind_lines[1].find("m_lt_1") != std::string::npos);

    const auto relpower =
        run_cli({"relpower", "--n", "10", "--reps", "200"});
    CHECK(lines_of(relpower.out)[0] ==
          "n,rho,nominal_power,power_matching,power_pearson,reps,mc_stderr");
    CHECK(lines_of(relpower.out).size() == 5);

    const auto json_power =
        run_cli({"power", "--n", "10", "--rho", "0", "--reps", "500", "--format", "json"});
    const auto j = nlohmann::json::parse(json_power.out);
    REQUIRE(j.is_array());
    CHECK(j[0]["n"] == 10);
    CHECK(j[0]["reps"] == 500);
}
