#include <gtest/gtest.h>

#include <json.hpp>
#include <string>

#include "cli_runner.hpp"

using cli_runner::run;
using nlohmann::json;

namespace {

const std::string kConfig = std::string("--config '") + FRACDIFF_SOURCE_DIR + "/tools/configs/interval_two_param.json' ";

const char* kSingleObservation = R"({"t0":40,"d0":0.01,"phi1_abs":1,"lambda_obs":9.869604401089358})";

std::string write_config(const std::string& name, const std::string& text) {
  const auto path = cli_runner::scratch_dir() / name;
  cli_runner::write_file(path, text);
  return "--config '" + path.string() + "' ";
}

struct ScratchCleanup {
  ~ScratchCleanup() { std::filesystem::remove_all(cli_runner::scratch_dir()); }
} cleanup;

}  // namespace

TEST(Cli, MittagLefflerByArgumentAndByZ) {
  const auto r = run("ml --rho 1.0 --z -1");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("value").get<double>(), 0.36787944117144233);

  const auto contour = run("ml --rho 0.5 --lambda 9.869604401089358 --t 20");
  ASSERT_EQ(contour.exit_code, 0);
  EXPECT_EQ(json::parse(contour.out).at("route"), "contour");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").exit_code, 2);
  EXPECT_EQ(run("ml --rho 1.0 --lambda 1 --t 1").exit_code, 2);
  EXPECT_EQ(run("frobnicate").exit_code, 2);
  EXPECT_EQ(run("invert --sigma 1 --sigma-box 0.5,2", kSingleObservation).exit_code, 2);
}

TEST(Cli, ConfigErrorsExitThree) {
  EXPECT_EQ(run("--config /nonexistent/x.json forward").exit_code, 3);
  EXPECT_EQ(run(write_config("bad.json", "{\"model\":") + "forward").exit_code, 3);
  EXPECT_EQ(run("invert --sigma 1", "{\"t0\":40,\"d0\":0.1,\"extra\":1}").exit_code, 3);
}

TEST(Cli, ForwardCsvToStdoutAndFile) {
  const auto r = run(kConfig + "forward");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("t,observation,tail_bound\n", 0), 0u);

  const auto path = cli_runner::scratch_dir() / "forward.csv";
  const auto to_file = run(kConfig + "--out '" + path.string() + "' forward");
  ASSERT_EQ(to_file.exit_code, 0);
  EXPECT_TRUE(to_file.out.empty());
  EXPECT_EQ(cli_runner::slurp(path), r.out);
}

TEST(Cli, FirstProblemRecovery) {
  const auto obs = run(kConfig + "observe --t0 40");
  ASSERT_EQ(obs.exit_code, 0);
  const auto r = run("invert --sigma 1.3", obs.out);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto result = json::parse(r.out);
  EXPECT_EQ(result.at("status"), "ok");
  EXPECT_NEAR(result.at("rho").get<double>(), 0.6, 1e-8);
}

TEST(Cli, InadmissibleExitsFiveWithReport) {
  const auto r = run("invert --sigma 1", R"({"t0":40,"d0":1.5,"phi1_abs":1,"lambda_obs":9.869604401089358})");
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_EQ(json::parse(r.out).at("status"), "inadmissible");
  EXPECT_EQ(run("check --sigma 1", R"({"t0":40,"d0":0.9,"phi1_abs":1,"lambda_obs":9.869604401089358})").exit_code, 5);
}

TEST(Cli, EqualTimesHitTheSpacingGate) {
  const auto r = run("invert", R"({"t0":100,"d0":0.001,"t1":100,"d1":0.001,"phi1_abs":1,"lambda_obs":9.869604401089358})");
  EXPECT_EQ(r.exit_code, 5);
}

TEST(Cli, SubUnitLambdaBranch) {
  const auto cfg = write_config("half.json", R"({"model":{"type":"custom","eigenvalues":[0.5,2,4.5]},
    "initial":{"coefficients":[1,0.5,0.25]},"frac":{"rho":0.6,"sigma":1.4},"times":[1]})");
  const auto obs = run(cfg + "observe --t0 1e4 --t1 100");
  ASSERT_EQ(obs.exit_code, 0);
  const auto r = run("invert", obs.out);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto result = json::parse(r.out);
  EXPECT_NEAR(result.at("rho").get<double>(), 0.6, 1e-6);
  EXPECT_NEAR(result.at("sigma").get<double>(), 1.4, 1e-6);
  EXPECT_EQ(result.at("report").at("determinant_sign"), -1);
}

TEST(Cli, ZeroFirstCoefficientWarns) {
  const auto cfg = write_config("zero.json", R"({"model":{"type":"interval","modes":2},
    "initial":{"coefficients":[0,1]},"frac":{"rho":0.5,"sigma":1},"times":[1]})");
  const auto r = run(cfg + "observe --t0 10");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, TwoParameterOutputIsDeterministic) {
  const auto obs = run(kConfig + "observe --t0 1e4 --t1 100");
  ASSERT_EQ(obs.exit_code, 0);
  const auto one = run("--threads 1 invert", obs.out);
  const auto four = run("--threads 4 invert", obs.out);
  ASSERT_EQ(one.exit_code, 0);
  EXPECT_EQ(one.out, four.out);
  EXPECT_TRUE(json::parse(one.out).at("multistart").at("consistent").get<bool>());
}

TEST(Cli, SelftestPassesAndDetectsFaults) {
  EXPECT_EQ(run("selftest quick").exit_code, 0);
  const auto faulty = run("selftest quick --inject-fault gamma-table");
  EXPECT_EQ(faulty.exit_code, 1);
  EXPECT_NE(faulty.out.find("FAIL"), std::string::npos);
}
