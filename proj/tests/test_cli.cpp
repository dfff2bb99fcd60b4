#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef LIGHTCD_CLI_PATH
#define LIGHTCD_CLI_PATH "lightcd"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(LIGHTCD_CLI_PATH) + " " + args + " >cli_stdout.txt 2>cli_stderr.txt";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

}  // namespace

TEST_CASE("generate writes a series, a truth sidecar and a manifest") {
    CHECK(run_cli("generate --family nonlinear --n 9 --segments 5 "
                  "--segment-len 30 --seed 2 --out cli_gen") == 0);
    CHECK(exists("cli_gen.csv"));
    CHECK(exists("cli_gen.manifest.json"));
    std::ifstream truth("cli_gen.truth.txt");
    REQUIRE(truth.good());
    int lines = 0;
    std::string line;
    while (std::getline(truth, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 4);
}

TEST_CASE("generate is byte-identical under a fixed seed") {
    REQUIRE(run_cli("generate --family linear --n 6 --segments 3 "
                    "--segment-len 20 --seed 5 --out cli_gen_a") == 0);
    REQUIRE(run_cli("generate --family linear --n 6 --segments 3 "
                    "--segment-len 20 --seed 5 --out cli_gen_b") == 0);
    CHECK(slurp("cli_gen_a.csv") == slurp("cli_gen_b.csv"));
    CHECK(slurp("cli_gen_a.truth.txt") == slurp("cli_gen_b.truth.txt"));
}

TEST_CASE("generate rejects n too small for any structured block") {
    CHECK(run_cli("generate --family linear --n 2 --out cli_gen_bad") == 2);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("detect") == 2);                   // missing required flags
    CHECK(run_cli("nonsense-subcommand") == 2);
    CHECK(run_cli("--help") == 0);
}

TEST_CASE("detect runs end to end and is reproducible") {
    REQUIRE(run_cli("generate --family gaussian --n 9 --segments 3 "
                    "--segment-len 200 --seed 7 --out cli_series") == 0);
    const std::string flags =
        "detect --input cli_series.csv -m 50 --seed 3 --lambda 50 "
        "--set pca.c=20 --out cli_det_a";
    REQUIRE(run_cli(flags) == 0);
    CHECK(exists("cli_det_a.scores.jsonl"));
    CHECK(exists("cli_det_a.events.json"));
    CHECK(exists("cli_det_a.manifest.json"));

    REQUIRE(run_cli("detect --input cli_series.csv -m 50 --seed 3 --lambda 50 "
                    "--set pca.c=20 --out cli_det_b") == 0);
    CHECK(slurp("cli_det_a.scores.jsonl") == slurp("cli_det_b.scores.jsonl"));
    CHECK(slurp("cli_det_a.events.json") == slurp("cli_det_b.events.json"));

    const std::string first_line = slurp("cli_det_a.scores.jsonl");
    CHECK(first_line.find("\"t\":") != std::string::npos);
    CHECK(first_line.find("\"score\":") != std::string::npos);
    CHECK(first_line.find("\"ph_statistic\":") != std::string::npos);
    CHECK(first_line.find("\"alarm\":") != std::string::npos);
}

TEST_CASE("detect aborts on malformed input with exit code 1") {
    {
        std::ofstream bad("cli_bad.csv");
        bad << "1,2,3\n4,5\n";
    }
    CHECK(run_cli("detect --input cli_bad.csv -m 10 --out cli_bad_out") == 1);
    const std::string err = slurp("cli_stderr.txt");
    CHECK(err.find("line 2") != std::string::npos);
}

TEST_CASE("calibrate reports a deterministic recommendation") {
    REQUIRE(run_cli("generate --family gaussian --n 9 --segments 1 "
                    "--segment-len 400 --seed 9 --out cli_cal_series") == 0);
    REQUIRE(run_cli("calibrate --input cli_cal_series.csv -m 60 --seed 4 "
                    "--set pca.c=20 --out cli_cal") == 0);
    const std::string out_a = slurp("cli_stdout.txt");
    CHECK(out_a.find("recommended_lambda=") != std::string::npos);
    REQUIRE(run_cli("calibrate --input cli_cal_series.csv -m 60 --seed 4 "
                    "--set pca.c=20") == 0);
    CHECK(slurp("cli_stdout.txt") == out_a);
}

TEST_CASE("bench writes one row per cell plus a long-format file") {
    REQUIRE(run_cli("bench --n-list 9 --m-list 40 --family linear "
                    "--variant full --seeds 1 --segments 3 --segment-len 150 "
                    "--set pca.c=20 --out cli_bench") == 0);
    const std::string table = slurp("cli_bench.csv");
    CHECK(table.find("n,m,family,variant,seed,tp,fp,fn") == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 2);  // header + 1 cell
    const std::string longfmt = slurp("cli_bench.long.csv");
    CHECK(std::count(longfmt.begin(), longfmt.end(), '\n') == 5);  // header + 4
}

TEST_CASE("environment overrides use the documented prefix") {
    REQUIRE(run_cli("generate --family gaussian --n 6 --segments 2 "
                    "--segment-len 120 --seed 1 --out cli_env_series") == 0);
    setenv("LIGHTCD_PCA_C", "notanumber", 1);
    CHECK(run_cli("detect --input cli_env_series.csv -m 30 --out cli_env_out") == 2);
    unsetenv("LIGHTCD_PCA_C");
}
