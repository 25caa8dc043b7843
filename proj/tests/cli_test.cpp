#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;  // stdout + stderr
};

const char* cli_path() {
  const char* p = std::getenv("KLSUM_CLI_PATH");
  return p ? p : "./klsum";
}

fs::path scratch_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() /
             ("klsum_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path log = scratch_dir() / "last_run.log";
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + log.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(Cli, PrintsPinnedExamples) {
  const auto kl = run_cli("kl2 --a 1 --q 3");
  EXPECT_EQ(kl.exit_code, 0) << kl.out;
  EXPECT_NE(kl.out.find("-0.577350"), std::string::npos) << kl.out;

  const auto d = run_cli("delta --X 20 --q 3 --a 1");
  EXPECT_EQ(d.exit_code, 0) << d.out;
  EXPECT_EQ(d.out, "-1.5\n");
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto unknown = run_cli("kl2 --a 1 --q 3 --badflag");
  EXPECT_EQ(unknown.exit_code, 2);
  EXPECT_NE(unknown.out.find("--badflag"), std::string::npos) << unknown.out;

  EXPECT_EQ(run_cli("delta --X 20 --q 3").exit_code, 2);  // missing --a
  EXPECT_EQ(run_cli("nonsense-command").exit_code, 2);
  EXPECT_EQ(run_cli("").exit_code, 2);  // a subcommand is required

  // Library-level validation surfaces as a usage error with a message.
  const auto nonunit = run_cli("delta --X 20 --q 6 --a 3");
  EXPECT_EQ(nonunit.exit_code, 2);
  EXPECT_NE(nonunit.out.find("coprime"), std::string::npos) << nonunit.out;

  EXPECT_EQ(run_cli("delta --X 20 --q 3 --a 1 --threads bogus").exit_code, 2);
  EXPECT_EQ(run_cli("cubic --X 250 --paths").exit_code, 2);
}

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run_cli("--help").exit_code, 0);
  EXPECT_EQ(run_cli("kl2 --help").exit_code, 0);
}

TEST(Cli, CsvArtifactShape) {
  const fs::path out = scratch_dir() / "delta.csv";
  const auto r = run_cli("delta --X 20 --q 3 --a 1 --out " + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const std::string text = slurp(out);
  EXPECT_EQ(text.rfind("# tool=klsum\n# version=", 0), 0u) << text;
  EXPECT_NE(text.find("# command=delta\n"), std::string::npos);
  EXPECT_NE(text.find("X,q,a,ap_sum,coprime_sum,exact,delta,trivial_scale\n"),
            std::string::npos);
  EXPECT_NE(text.find("-3/2"), std::string::npos);  // exact rational column
  EXPECT_NE(text.find(",-1.5,"), std::string::npos);
  EXPECT_FALSE(fs::exists(out.string() + ".tmp"));  // atomic write left no residue
}

TEST(Cli, JsonArtifactParses) {
  const fs::path out = scratch_dir() / "delta.json";
  const auto r =
      run_cli("delta --X 20 --q 3 --a 1 --format json --out " + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const auto j = nlohmann::json::parse(slurp(out));
  EXPECT_EQ(j["meta"]["command"], "delta");
  EXPECT_EQ(j["meta"]["tool"], "klsum");
  ASSERT_EQ(j["rows"].size(), 1u);
  EXPECT_EQ(j["rows"][0][5], "-3/2");
}

TEST(Cli, TableAndSweepArtifacts) {
  const fs::path out = scratch_dir() / "table.csv";
  const auto r = run_cli("kl2 --a 1 --q 12 --table --out " + out.string());
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const std::string text = slurp(out);
  EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '\n')),
            5 + 1 + 12);  // meta block, header, one row per residue

  const fs::path sweep = scratch_dir() / "sweep.csv";
  const auto s = run_cli("complete-sweep --max-p 13 --count 10 --seed 9 --out " +
                         sweep.string());
  EXPECT_EQ(s.exit_code, 0) << s.out;
  EXPECT_NE(slurp(sweep).find("p,h,a1,a2,b1,b2,corr_re"), std::string::npos);
}

TEST(Cli, SeedDeterminesSweeps) {
  const fs::path a = scratch_dir() / "seed_a.csv";
  const fs::path b = scratch_dir() / "seed_b.csv";
  const fs::path c = scratch_dir() / "seed_c.csv";
  ASSERT_EQ(run_cli("bilinear-sweep --count 8 --cap 50000 --seed 11 --out " +
                    a.string()).exit_code, 0);
  ASSERT_EQ(run_cli("bilinear-sweep --count 8 --cap 50000 --seed 11 --out " +
                    b.string()).exit_code, 0);
  ASSERT_EQ(run_cli("bilinear-sweep --count 8 --cap 50000 --seed 12 --out " +
                    c.string()).exit_code, 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(slurp(a), slurp(c));
}

TEST(Cli, ThreadCountNeverChangesBytes) {
  const fs::path one = scratch_dir() / "ap1.csv";
  const fs::path three = scratch_dir() / "ap3.csv";
  ASSERT_EQ(run_cli("ap-run --X 2000 --Q 150 --eps 0.012 --threads 1 --out " +
                    one.string()).exit_code, 0);
  ASSERT_EQ(run_cli("ap-run --X 2000 --Q 150 --eps 0.012 --threads 3 --out " +
                    three.string()).exit_code, 0);
  const std::string bytes = slurp(one);
  EXPECT_EQ(bytes, slurp(three));
  EXPECT_EQ(bytes.find("threads"), std::string::npos);  // nothing run-dependent
}

TEST(Cli, EnvThreadDefaultHonored) {
  const fs::path flag = scratch_dir() / "env_flag.csv";
  const fs::path env = scratch_dir() / "env_env.csv";
  ASSERT_EQ(run_cli("avg-delta --r 1 --s 1 --U 4 --X 500 --threads 2 --out " +
                    flag.string()).exit_code, 0);
  const std::string cmd = "KLSUM_THREADS=2 " + std::string(cli_path()) +
                          " avg-delta --r 1 --s 1 --U 4 --X 500 --out " +
                          env.string() + " > /dev/null 2>&1";
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_EQ(slurp(flag), slurp(env));
  EXPECT_EQ(WEXITSTATUS(std::system(
                ("KLSUM_THREADS=0 " + std::string(cli_path()) +
                 " avg-delta --r 1 --s 1 --U 4 --X 500 > /dev/null 2>&1")
                    .c_str())),
            2);  // bad env value is still a usage error
}

TEST(Cli, QvdcAndPoissonSweepsSucceed) {
  const auto q = run_cli("qvdc-sweep --count 6 --seed 3");
  EXPECT_EQ(q.exit_code, 0) << q.out;
  const auto p = run_cli("poisson-check --count 2 --su-cap 500 --seed 3");
  EXPECT_EQ(p.exit_code, 0) << p.out;
  EXPECT_NE(p.out.find("0 violations"), std::string::npos) << p.out;
}

TEST(Cli, VerifyAllSmokeTable) {
  const fs::path out = scratch_dir() / "verify.csv";
  const auto r = run_cli(
      "verify-all --max-p 37 --seed 1 --pairs 500 --twist-pairs 5 --p2-max 20 "
      "--sweep-specs 50 --parseval-specs 5 --poisson-specs 2 --poisson-cap 1000 "
      "--bilinear-cap 50000 --bilinear-random 5 --out " +
      out.string());
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_NE(r.out.find("18 checks, 0 failed"), std::string::npos) << r.out;
  const std::string text = slurp(out);
  EXPECT_NE(text.find("check,pass,checked,violations,worst,note\n"),
            std::string::npos);
  EXPECT_EQ(static_cast<int>(std::count(text.begin(), text.end(), '\n')),
            6 + 1 + 18);  // meta block, header, 18 roster rows
}

}  // namespace
