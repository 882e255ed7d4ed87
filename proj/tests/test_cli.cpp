#include <opticsbench/bench_score.hpp>
#include <opticsbench/image_io.hpp>
#include <opticsbench/kernel_io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace opticsbench;
namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
    static const fs::path d = [] {
        auto p = fs::temp_directory_path() / "opticsbench_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return d;
}

// Exit status of the CLI; stdout and stderr go to files in the work directory.
int run(const std::string& args) {
    const std::string cmd = std::string(OPTICSBENCH_CLI_PATH) + " " + args + " > " + (workdir() / "stdout").string() +
                            " 2> " + (workdir() / "stderr").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, HelpAndUsageErrors) {
    EXPECT_EQ(run("--help"), 0);
    EXPECT_NE(slurp(workdir() / "stdout").find("generate"), std::string::npos);
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("charts --no-such-flag"), 2);
    EXPECT_EQ(run("corrupt --in x"), 2);  // missing required options
}

TEST(Cli, ChartsAreWritten) {
    const auto dir = workdir() / "charts";
    ASSERT_EQ(run("charts --out-dir " + dir.string()), 0);
    const Image8 edge = read_image(dir / "slanted_edge.png");
    EXPECT_EQ(edge.width, 224);
    EXPECT_TRUE(fs::exists(dir / "spilled_coins.png"));
    EXPECT_NE(slurp(workdir() / "stderr").find("charts"), std::string::npos);  // resolved config echo
}

TEST(Cli, RuntimeErrorsExitWithOne) {
    EXPECT_EQ(run("corrupt --in " + workdir().string() + " --out " + (workdir() / "o").string() + " --kernels " +
                  (workdir() / "missing.okf").string()),
              1);
    EXPECT_FALSE(slurp(workdir() / "stderr").empty());
    EXPECT_EQ(run("charts --angle 20 --out-dir " + (workdir() / "c2").string()), 1);
}

TEST(Cli, MeasureKernels) {
    KernelStack s;
    Kernel k = delta_kernel();
    k.label = {Corruption::coma, 3, 0};
    s.insert(k);
    write_kernel_file(s, workdir() / "one.okf");
    ASSERT_EQ(run("measure --kernels " + (workdir() / "one.okf").string() + " --label coma/3/0 --against defocus_blur/3/0"), 0);
    EXPECT_NE(slurp(workdir() / "stdout").find("composite"), std::string::npos);
    EXPECT_EQ(run("measure --kernels " + (workdir() / "one.okf").string() + " --label coma/4/0"), 1);
}

TEST(Cli, ScoreWritesReports) {
    PredictionLog log{"net", {}};
    log.rows.push_back({"a", "clean", 0, "x", "x"});
    for (int s = 1; s <= 5; ++s)
        for (const char* c : {"defocus_blur", "coma"}) {
            log.rows.push_back({"a", c, s, "x", "x"});
            log.rows.push_back({"b", c, s, "x", (s > 2 && std::string(c) == "coma") ? "y" : "x"});
        }
    {
        std::ofstream os(workdir() / "net.csv");
        write_prediction_log(os, log);
    }
    const auto prefix = workdir() / "scores";
    ASSERT_EQ(run("score --log " + (workdir() / "net.csv").string() + " --out " + prefix.string()), 0);
    const std::string csv = slurp(prefix.string() + ".csv");
    EXPECT_NE(csv.find("net,coma,3,50,100,-50,-50"), std::string::npos) << csv;
    EXPECT_TRUE(fs::exists(prefix.string() + ".txt"));
}
