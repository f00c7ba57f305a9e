#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  const fs::path dir = fs::path(WELDBENCH_SCRATCH);
  fs::create_directories(dir);
  const fs::path capture = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + WELDBENCH_CLI + "\" " + args + " > \"" + capture.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  std::ifstream f(capture);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path(WELDBENCH_SCRATCH) / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, MalformedConfigExitsTwoWithoutOutput) {
  const fs::path out = fresh_dir("malformed");
  const fs::path cfg = fs::path(WELDBENCH_SCRATCH) / "bad.json";
  std::ofstream(cfg) << "{ \"validate\": { \"suite\": ";
  const auto r = cli("--config \"" + cfg.string() + "\" --out \"" + out.string() + "\" validate");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(out) && !fs::is_empty(out));
}

TEST(Cli, WrongTypeInConfigExitsTwo) {
  const fs::path out = fresh_dir("wrongtype");
  const fs::path cfg = fs::path(WELDBENCH_SCRATCH) / "wrongtype.json";
  std::ofstream(cfg) << R"({"moment": {"kappa": "two"}})";
  EXPECT_EQ(cli("--config \"" + cfg.string() + "\" --out \"" + out.string() + "\" exact moment").code, 2);
  EXPECT_FALSE(fs::exists(out) && !fs::is_empty(out));
}

TEST(Cli, UnknownSuiteAndMissingConfigExitTwo) {
  EXPECT_EQ(cli("validate nosuch").code, 2);
  EXPECT_EQ(cli("--config /nonexistent/config.json validate specfun").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("--samples 10 mc gmc --kind reflection --gamma 1.2 --beta 1.4 --cells 64").code, 2);
}

TEST(Cli, ExactMomentRows) {
  const auto r = cli("exact moment --kappa 2 --rho-minus 0 --rho-plus 0 --lambda 0 -1 5");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("kappa,"), std::string::npos);
  std::istringstream is(r.out);
  std::string header, zero, minus_one, five;
  std::getline(is, header);
  std::getline(is, zero);
  std::getline(is, minus_one);
  std::getline(is, five);
  EXPECT_NE(zero.find(",1,"), std::string::npos) << zero;
  EXPECT_NE(five.find("inf"), std::string::npos) << five;
}

TEST(Cli, PoleIsReportedPerCell) {
  const auto r = cli("exact reflection --gamma 1 --beta 1.5");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("pole"), std::string::npos);
}

TEST(Cli, ConfigValuesAndFlagPrecedence) {
  const fs::path cfg = fs::path(WELDBENCH_SCRATCH) / "moment.json";
  std::ofstream(cfg) << R"({"moment": {"kappa": 3, "rho_minus": 1, "rho_plus": 0.5, "lambda": [-0.5]}})";
  const auto a = cli("--config \"" + cfg.string() + "\" exact moment");
  const auto b = cli("exact moment --kappa 3 --rho-minus 1 --rho-plus 0.5 --lambda -0.5");
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto c = cli("--config \"" + cfg.string() + "\" exact moment --kappa 2");
  EXPECT_EQ(c.out.find("\n3,"), std::string::npos);
  EXPECT_NE(c.out.find("\n2,"), std::string::npos);
}

TEST(Cli, ValidateWritesDeterministicFiles) {
  const fs::path a = fresh_dir("validate_a"), b = fresh_dir("validate_b");
  EXPECT_EQ(cli("--seed 7 --out \"" + a.string() + "\" validate specfun").code, 0);
  EXPECT_EQ(cli("--seed 7 --out \"" + b.string() + "\" validate specfun").code, 0);
  for (const char* name : {"specfun.csv", "specfun.json"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Cli, PlotOfEmptyTableGivesEmptyAxes) {
  const fs::path out = fresh_dir("plot_empty");
  const fs::path table = fs::path(WELDBENCH_SCRATCH) / "empty.csv";
  std::ofstream(table) << "";
  EXPECT_EQ(cli("--out \"" + out.string() + "\" plot --kind moment-vs-lambda --table \"" + table.string() + "\"").code, 0);
  const std::string svg = slurp(out / "moment-vs-lambda.svg");
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_EQ(svg.find("<polyline"), std::string::npos);
}

TEST(Cli, SweepExactMode) {
  const auto r = cli("sweep --kappa 2 --rho-minus 0 --rho-plus 0 --lambda 0 -1 9 --mode exact");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find(",inf,"), std::string::npos);
}
