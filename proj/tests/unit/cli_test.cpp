#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SELCOMP_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p)) out += buf.data();
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "selcomp_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, SolveOneArmed) {
    const auto r = run("solve-one-armed --lambda 0.5 --cost 0.01");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("n_max = 22"), std::string::npos) << r.out;
}

TEST(Cli, IndexabilityCsv) {
    const auto path = scratch("indexability.csv");
    const auto r = run("counterexample --name indexability --lambda-lo 0 --lambda-hi 1.5 --step 0.25 --out " +
                       path.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("inversion detected: yes"), std::string::npos) << r.out;
    const auto csv = slurp(path);
    EXPECT_EQ(csv.rfind("lambda,gap_observe_u1,gap_observe_u2\n", 0), 0u);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
}

TEST(Cli, UnboundedSummary) {
    const auto r = run("counterexample --name unbounded --cost 0.005");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("continuation set at c = 0.005: -1 0 1 (stable"), std::string::npos) << r.out;
}

TEST(Cli, ErrorsExitWithValidationCode) {
    EXPECT_EQ(run("no-such-command").code, 2);
    EXPECT_EQ(run("solve-one-armed --lambda 2 --cost 0.01").code, 2);
    EXPECT_EQ(run("bench-cost --policies UCB1 --trials 2").code, 2);
    EXPECT_EQ(run("solve-one-armed --out /nonexistent-dir/x.csv").code, 2);
    const auto bad = scratch("bad.json");
    std::ofstream(bad) << "{\"schema\": \"selcomp-experiment/1\", \"frobnicate\": 3}";
    EXPECT_EQ(run("bench-budget --config " + bad.string()).code, 2);
    const auto wrong_mode = scratch("wrong_mode.json");
    std::ofstream(wrong_mode) << "{\"schema\": \"selcomp-experiment/1\", \"mode\": \"cost-sweep\"}";
    EXPECT_EQ(run("bench-budget --config " + wrong_mode.string()).code, 2);
}

TEST(Cli, CommandLineOverridesConfig) {
    const auto cfg = scratch("budget.json");
    std::ofstream(cfg) << "{\"schema\": \"selcomp-experiment/1\", \"mode\": \"budget-sweep\", \"k\": 4, "
                          "\"budgets\": [8, 16], \"trials\": 3, \"seed\": 5}";
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    ASSERT_EQ(run("bench-budget --config " + cfg.string() + " --out " + a.string()).code, 0);
    ASSERT_EQ(run("bench-budget --config " + cfg.string() + " --trials 5 --out " + b.string()).code, 0);
    const auto sa = slurp(a), sb = slurp(b);
    EXPECT_NE(sa.find(",3,"), std::string::npos) << sa;
    EXPECT_NE(sb.find(",5,"), std::string::npos) << sb;
    EXPECT_EQ(std::count(sa.begin(), sa.end(), '\n'), 7);
}

TEST(Cli, BenchIsReproducible) {
    const auto a = scratch("r1.csv"), b = scratch("r2.csv");
    const std::string args = "bench-cost --k 4 --trials 6 --costs 0.01 --grid 17 --seed 2 --out ";
    ASSERT_EQ(run(args + a.string()).code, 0);
    ASSERT_EQ(run(args + b.string() + " --workers 2").code, 0);
    EXPECT_EQ(slurp(a), slurp(b));
}

TEST(Cli, MctsMatch) {
    const auto r = run("mcts-match --a minimax --b random --games 20 --branching 3 --depth 3");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("minimax vs random: win rate"), std::string::npos) << r.out;
}
