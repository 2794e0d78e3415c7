// End-to-end tests of the command-line tool: exit codes, output layout, and
// byte-for-byte determinism. Each test shells out to the built binary.

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

const std::string kCli = MUSEL_CLI_PATH;
const std::string kConfigDir = MUSEL_CONFIG_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args) {
  const std::string out_path = "/tmp/musel_cli_stdout.txt";
  const std::string err_path = "/tmp/musel_cli_stderr.txt";
  const std::string cmd = kCli + " " + args + " > " + out_path + " 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

// A small censored-design config so CLI runs stay fast.
std::string small_config() {
  const std::string path = "/tmp/musel_cli_small.cfg";
  write_file(path,
             "model = censored\n"
             "n = 40\n"
             "p = 60\n"
             "s = 1\n"
             "theta_value = 0.5\n"
             "sigma = 0.05/1.96\n"
             "censor_t = 0.9\n"
             "reps = 2\n"
             "seed = 5\n"
             "row = mu2 delta=0.1 epsilon=auto theta-set=nonneg\n"
             "row = mu2 delta=0.1 epsilon=auto theta-set=nonneg threshold=fixed:0.1\n");
  return path;
}

}  // namespace

TEST(CliSimulate, MarkdownLayoutAndExitZero) {
  const RunResult r = run("simulate --config " + small_config());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("| Estimator | Err1 | Err2 | Nb1 | Nb2 | Exact |"), std::string::npos);
  EXPECT_NE(r.out.find("| MU(0.1) |"), std::string::npos);
  EXPECT_NE(r.out.find("| T-MU(0.1) |"), std::string::npos);
}

TEST(CliSimulate, RerunsAreByteIdentical) {
  const std::string cfg = small_config();
  ASSERT_EQ(run("simulate --config " + cfg + " --reps 1 --seed 7 --out /tmp/musel_a.md").exit_code, 0);
  ASSERT_EQ(run("simulate --config " + cfg + " --reps 1 --seed 7 --out /tmp/musel_b.md").exit_code, 0);
  const std::string a = slurp("/tmp/musel_a.md");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, slurp("/tmp/musel_b.md"));
}

TEST(CliSimulate, UnknownConfigKeyNamedAndExitTwo) {
  write_file("/tmp/musel_bad.cfg", "bogus_key = 1\n");
  const RunResult r = run("simulate --config /tmp/musel_bad.cfg");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("bogus_key"), std::string::npos);
}

TEST(CliSimulate, JsonFormat) {
  const RunResult r = run("simulate --config " + small_config() + " --format json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["reps"], 2);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["label"], "MU(0.1)");
}

TEST(CliElbow, SingleDeltaOneRow) {
  const RunResult r = run("elbow --config " + kConfigDir + "/elbow.cfg --reps 1 --delta 0.1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("delta,mean_nb1\n0.1,", 0), 0u) << r.out;
}

TEST(CliElbow, MalformedGridExitTwo) {
  write_file("/tmp/musel_elbow_bad.cfg",
             "model = censored\nrow = mu2 epsilon=auto\ngrid = 0.05 oops\n");
  const RunResult r = run("elbow --config /tmp/musel_elbow_bad.cfg");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("grid"), std::string::npos);
}

TEST(CliVerify, CertifiedSuiteHolds) {
  write_file("/tmp/musel_verify.cfg",
             "suite = orthogonal\ncount = 10\nn = 32\np = 8\ns = 2\n"
             "delta = 0.05\nepsilon = 0.01\nnoise = mixed\nseed = 11\n");
  const RunResult r = run("verify --config /tmp/musel_verify.cfg");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["violations"], 0);
  EXPECT_GT(j["checked"].get<std::size_t>(), 0u);
  EXPECT_GT(j["not_applicable"].get<std::size_t>(), 0u);  // noisy reps skip T1/T5
}

TEST(CliVerify, EmptySuiteExitTwo) {
  write_file("/tmp/musel_verify_empty.cfg", "suite = orthogonal\ncount = 0\n");
  EXPECT_EQ(run("verify --config /tmp/musel_verify_empty.cfg").exit_code, 2);
}

TEST(CliPortfolio, BundledConfigRetrievesVisibleConstituents) {
  const RunResult r = run("portfolio --config " + kConfigDir + "/portfolio.cfg");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  const auto retrieved = j["result"]["retrieved"].get<std::vector<std::string>>();
  bool a001 = false, a009 = false, a017 = false;
  for (const std::string& t : retrieved) {
    a001 |= t == "A001";
    a009 |= t == "A009";
    a017 |= t == "A017";
  }
  EXPECT_TRUE(a001);
  EXPECT_TRUE(a017);
  EXPECT_FALSE(a009);  // the suppressed asset must never be picked
}

TEST(CliPortfolio, MissingPanelExitThree) {
  write_file("/tmp/musel_portfolio_bad.cfg",
             "panel = /tmp/definitely_missing_panel.csv\nassets = A001\n");
  EXPECT_EQ(run("portfolio --config /tmp/musel_portfolio_bad.cfg").exit_code, 3);
}

TEST(CliEstimate, IdentityDesignRecoversFirstBasisVector) {
  write_file("/tmp/musel_Z.csv", "1,0,0\n0,1,0\n0,0,1\n");
  write_file("/tmp/musel_y.csv", "1\n0\n0\n");
  const RunResult r =
      run("estimate --Z /tmp/musel_Z.csv --y /tmp/musel_y.csv --variant mu1 --delta 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const nlohmann::json j = nlohmann::json::parse(r.out);
  const auto theta = j["estimate"]["theta"].get<std::vector<double>>();
  ASSERT_EQ(theta.size(), 3u);
  EXPECT_NEAR(theta[0], 1.0, 1e-9);
  EXPECT_NEAR(theta[1], 0.0, 1e-9);
  EXPECT_NEAR(theta[2], 0.0, 1e-9);
}

TEST(CliEstimate, DimensionMismatchExitThree) {
  write_file("/tmp/musel_Z.csv", "1,0,0\n0,1,0\n0,0,1\n");
  write_file("/tmp/musel_y2.csv", "1\n0\n");
  const RunResult r =
      run("estimate --Z /tmp/musel_Z.csv --y /tmp/musel_y2.csv --variant mu1");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_NE(r.err.find("dimension mismatch"), std::string::npos);
}

TEST(CliEstimate, DantzigAliasEqualsMuTwoAtZeroDelta) {
  write_file("/tmp/musel_Z.csv", "1,0,0\n0,1,0\n0,0,1\n");
  write_file("/tmp/musel_y.csv", "1\n0\n0\n");
  const RunResult d = run(
      "estimate --Z /tmp/musel_Z.csv --y /tmp/musel_y.csv --variant dantzig --epsilon 0.05");
  const RunResult m = run(
      "estimate --Z /tmp/musel_Z.csv --y /tmp/musel_y.csv --variant mu2 --delta 0 "
      "--epsilon 0.05");
  ASSERT_EQ(d.exit_code, 0);
  ASSERT_EQ(m.exit_code, 0);
  const double l1_d = nlohmann::json::parse(d.out)["estimate"]["l1_norm"];
  const double l1_m = nlohmann::json::parse(m.out)["estimate"]["l1_norm"];
  EXPECT_NEAR(l1_d, l1_m, 1e-12);
}

TEST(CliEstimate, InfeasibleExitFour) {
  write_file("/tmp/musel_Z.csv", "1,0,0\n0,1,0\n0,0,1\n");
  write_file("/tmp/musel_y.csv", "1\n0\n0\n");
  const RunResult r = run(
      "estimate --Z /tmp/musel_Z.csv --y /tmp/musel_y.csv --variant mu1 --delta 0 "
      "--theta-set l1ball:0.000001");
  EXPECT_EQ(r.exit_code, 4);
}
