#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "selfheal/trace.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using selfheal::testing::asset;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

Result cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SELFHEAL_CLI + "\" " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("selfheal_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  EXPECT_EQ(cli("metrics table --n -4").code, 2);
  EXPECT_EQ(cli("check --prop x").code, 2);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, RunWritesTrace) {
  const auto out = scratch("run.csv");
  EXPECT_EQ(cli("run ccs_nominal --until 100 -o " + q(out)).code, 0);
  const auto t = selfheal::Trace::from_csv(selfheal::read_file(out));
  EXPECT_EQ(t.end_ns(), 100);
  EXPECT_EQ(t.first_time("Target", 50), 35);
  EXPECT_EQ(t.metadata().at("scenario"), "ccs_nominal");
}

TEST(Cli, GoldenToStdoutMatchesShipped) {
  const auto r = cli("golden " + q(asset("scenarios/ccs_nominal.json")));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(selfheal::signal_projection(selfheal::Trace::from_csv(r.out)),
            selfheal::signal_projection(
                selfheal::Trace::from_csv(selfheal::read_file(asset("golden/ccs_nominal.csv")))));
}

TEST(Cli, RuntimeErrorsExitOne) {
  EXPECT_EQ(cli("run no_such_scenario").code, 1);
  EXPECT_EQ(cli("run ccs_nominal --until 7").code, 1);
  EXPECT_EQ(cli("metrics table --n 3").code, 1);
  EXPECT_EQ(cli("metrics series --n-min 8 --n-max 4").code, 1);
  const auto bad = scratch("bad.fbd");
  std::ofstream(bad) << "in a:bool\nlevel 1:\nblk y = XOR(a, a)\n";
  EXPECT_EQ(cli("place --netlist " + q(bad)).code, 1);
}

TEST(Cli, CheckVerdicts) {
  const auto prop = q(asset("props/done_correct.prop"));
  const auto bad = cli("check --trace " + q(asset("traces/counterexample.csv")) + " --prop " + prop +
                       " --golden " + q(asset("traces/counterexample_golden.csv")));
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.out, "VIOLATED at 40 ns\n");
  const auto good = cli("check --trace " + q(asset("traces/counterexample_golden.csv")) +
                        " --prop " + prop + " --golden " +
                        q(asset("traces/counterexample_golden.csv")));
  EXPECT_EQ(good.code, 0);
  EXPECT_EQ(good.out, "HOLDS\n");
  const auto inline_prop = cli("check --trace " + q(asset("traces/counterexample.csv")) +
                               " --prop \"G(run.lat0 <= 1)\"");
  EXPECT_EQ(inline_prop.out, "HOLDS\n");
  EXPECT_EQ(cli("check --trace " + q(asset("traces/counterexample.csv")) + " --prop \"G(nope)\"").code,
            1);
}

TEST(Cli, MetricsAndPlace) {
  const auto t = cli("metrics table --n 4 --spf 4");
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("proposed,8,12,0,1,150"), std::string::npos);
  const auto p = cli("place --netlist " + q(asset("netlists/edg.fbd")) + " --layers 2");
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("B,uv,L.B0,"), std::string::npos);
}

TEST(Cli, CampaignAndLatency) {
  const auto c = cli("campaign edg_permanent ccs_transients -j 2");
  EXPECT_EQ(c.code, 0);
  EXPECT_NE(c.out.find("ccs_transients,3,3,0,0,"), std::string::npos);
  const auto trace = scratch("perm.csv");
  ASSERT_EQ(cli("run edg_permanent -o " + q(trace)).code, 0);
  const auto l = cli("latency --trace " + q(trace));
  EXPECT_EQ(l.code, 0);
  EXPECT_NE(l.out.find(",110\n"), std::string::npos);
  EXPECT_NE(l.out.find(",135\n"), std::string::npos);
}
