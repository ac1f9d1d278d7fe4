#include "cli.hpp"

#include <gtest/gtest.h>

#include <clocale>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "qkdrates");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qkdrates::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("QKD_TEST_TMP");
  fs::path dir = env ? fs::path(env) : fs::temp_directory_path() / "qkdrates_tests";
  dir /= name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

}  // namespace

TEST(Cli, AsymptoticToStdout) {
  const auto r = run({"asymptotic", "--d", "2..7", "--mubs", "3", "--qmax", "0.3", "--step", "0.01", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  EXPECT_EQ(ls.front(), "d,mubs,Q,rate,lambda_q");
  EXPECT_EQ(ls.size(), 1u + 6 * 31);
  EXPECT_EQ(ls[1].substr(0, 8), "2,3,0,1,");
}

TEST(Cli, RejectsFourBases) {
  const auto r = run({"finite", "--d", "2", "--mubs", "4"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("mubs must be 2 or 3"), std::string::npos) << r.err;
}

TEST(Cli, ThresholdSingleAndTable) {
  auto r = run({"threshold", "--d", "2", "--mubs", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 6), "0.1261");
  EXPECT_NEAR(std::stod(r.out), 0.1261930832768212, 1e-11);
  r = run({"threshold", "--d", "2,3", "--mubs", "2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 3u);
}

TEST(Cli, ChannelJson) {
  const auto r = run({"channel", "3", "2", "0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.size(), 9u);
  double total = 0;
  for (const auto& [k, v] : j.items()) total += v.get<double>();
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(j["0,0"].get<double>(), 0.81, 1e-12);
  EXPECT_EQ(run({"channel", "2", "2", "0.9"}).code, 2);
}

TEST(Cli, EntropyJson) {
  const auto r = run({"entropy", "2", "2", "0.05"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["H"].get<double>(), 0.71360, 1e-5);
  EXPECT_NEAR(j["V"].get<double>(), 0.85713, 1e-5);
}

TEST(Cli, MubCheckCsv) {
  const auto r = run({"mub-check", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  EXPECT_EQ(ls.front(), "basis_a,basis_b,i,j,deviation");
  EXPECT_EQ(ls.size(), 1u + 3 * 25);
  for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_LT(std::abs(std::stod(ls[i].substr(ls[i].rfind(',') + 1))), 1e-10);
}

TEST(Cli, FiniteCsvAndSvg) {
  const auto dir = scratch("cli_finite");
  const auto r = run({"finite", "--d", "2,3", "--mubs", "2", "--nmin", "1e4", "--nmax", "1e6", "--points", "3",
                      "--out", (dir / "f.csv").string(), "--svg", (dir / "f.svg").string(), "--threads", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir / "f.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto ls = lines(ss.str());
  EXPECT_EQ(ls.front(), "d,mubs,bound,Q,eps,N,k_opt,nu,rate,secret_bits");
  EXPECT_EQ(ls.size(), 1u + 2 * 3 * 3);
  EXPECT_GT(fs::file_size(dir / "f.svg"), 500u);
}

TEST(Cli, ConfigFileInjectionAndUnknownKeys) {
  const auto dir = scratch("cli_config");
  {
    std::ofstream cfg(dir / "a.cfg");
    cfg << "# threshold settings\nmubs = 3\nd = 7\n";
  }
  auto r = run({"threshold", "--config", (dir / "a.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 0.2703226337547751, 1e-11);
  r = run({"threshold", "--d", "2", "--config", (dir / "a.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(std::stod(r.out), 0.1261930832768212, 1e-11);
  {
    std::ofstream cfg(dir / "b.cfg");
    cfg << "mubs=2\nwavelength=800\n";
  }
  r = run({"threshold", "--d", "2", "--config", (dir / "b.cfg").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("wavelength"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("render-mubs"), std::string::npos);
  r = run({"finite", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("--nmax"), std::string::npos);
  EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, SimulateJson) {
  const auto r = run({"simulate", "--d", "3", "--mubs", "3", "--q", "0.05", "--rounds", "200000", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["d"], 3);
  EXPECT_EQ(j["report"]["tallies"].size(), 3u);
  EXPECT_EQ(j["report"]["chosen_bound"], "second-order");
  EXPECT_EQ(run({"simulate", "--d", "3", "--mubs", "3", "--rounds", "200000", "--seed", "4", "--q", "0.05"}).out, r.out);
  EXPECT_EQ(run({"simulate", "--d", "3", "--mubs", "3", "--bound", "uncertainty"}).code, 1);
}

TEST(Cli, RenderNeedsOutputDirectory) {
  EXPECT_EQ(run({"render-mubs", "--d", "3"}).code, 1);
  const auto dir = scratch("cli_render");
  const auto r = run({"render-mubs", "--d", "2", "--grid", "32", "--tile", "16", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "montage.png"));
}

TEST(Cli, CsvIgnoresLocale) {
  const char* prev = std::setlocale(LC_ALL, nullptr);
  const std::string saved = prev ? prev : "C";
  if (!std::setlocale(LC_ALL, "de_DE.UTF-8") && !std::setlocale(LC_ALL, "fr_FR.UTF-8")) GTEST_SKIP();
  const auto r = run({"asymptotic", "--d", "2", "--mubs", "2", "--qmax", "0.02", "--step", "0.01"});
  std::setlocale(LC_ALL, saved.c_str());
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("2,2,0.01,"), std::string::npos) << r.out;
}

TEST(Cli, IntList) {
  using qkdrates::cli::parse_int_list;
  EXPECT_EQ(parse_int_list("2..4"), (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(parse_int_list("3"), (std::vector<int>{3}));
  EXPECT_EQ(parse_int_list("2, 5"), (std::vector<int>{2, 5}));
  EXPECT_THROW(parse_int_list("x"), qkdrates::ValidationError);
  EXPECT_THROW(parse_int_list("5..2"), qkdrates::ValidationError);
}
