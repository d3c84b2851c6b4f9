#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fracdiff/error.hpp"
#include "fracdiff/experiment.hpp"

using namespace fracdiff;

namespace {
constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no fracdiff::Error thrown";
  return ErrorCode::io;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kSingleModeHeat = R"({
  "model": {"type": "interval", "length": 1, "modes": 1},
  "initial": {"preset": "mode1"},
  "frac": {"rho": 1, "sigma": 1},
  "times": [0.01, 0.1, 0.5]
})";
}  // namespace

TEST(Config, ParsesAllModelKinds) {
  EXPECT_EQ(parse_experiment(kSingleModeHeat).model.kind(), DomainKind::interval);
  const auto rect = parse_experiment(R"({"model":{"type":"rectangle","lx":1,"ly":2,"modes":5},
    "initial":{"coefficients":[1,0.5]},"frac":{"rho":0.5,"sigma":1},"times":[1]})");
  EXPECT_EQ(rect.model.kind(), DomainKind::rectangle);
  EXPECT_EQ(rect.model.size(), 5);
  const auto custom = parse_experiment(R"({"model":{"type":"custom","eigenvalues":[1,2,3]},
    "initial":{"preset":"decay_1_over_k"},"frac":{"rho":0.5,"sigma":1},"times":[1],
    "output":{"format":"json","path":"x.json"},"tol":1e-6})");
  EXPECT_EQ(custom.initial.size(), 3);
  EXPECT_DOUBLE_EQ(custom.initial.coefficient(3), 1.0 / 3.0);
  EXPECT_EQ(custom.format, OutputFormat::json);
  EXPECT_EQ(custom.output_path.value(), "x.json");
  EXPECT_EQ(custom.tol, 1e-6);
}

TEST(Config, SchemaViolationsAreConfigErrors) {
  const std::vector<std::string> bad = {
      "{not json",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[1],"extra":0})",
      R"({"model":{"type":"disk","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":1.5,"sigma":1},"times":[1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[-1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5},"times":[1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1","colour":1},"frac":{"rho":0.5,"sigma":1},"times":[1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[1],"output":{"format":"xml"}})",
      R"({"model":{"type":"custom","eigenvalues":[3,2]},"initial":{"preset":"mode1"},"frac":{"rho":0.5,"sigma":1},"times":[1]})",
      R"({"model":{"type":"interval","modes":2},"initial":{"coefficients":[1,2,3]},"frac":{"rho":0.5,"sigma":1},"times":[1]})",
  };
  for (const auto& text : bad) EXPECT_EQ(code_of([&] { parse_experiment(text); }), ErrorCode::config) << text;
}

TEST(ForwardTable, SingleModeHeatIsExponential) {
  const auto rows = csv_rows(forward_table(parse_experiment(kSingleModeHeat)));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "observation", "tail_bound"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double t = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][1]), std::exp(-kPi2 * t), 1e-15);
  }
}

TEST(ForwardTable, TailBoundNonIncreasing) {
  auto cfg = parse_experiment(R"({"model":{"type":"interval","modes":10},"initial":{"preset":"decay_1_over_k"},
    "frac":{"rho":0.4,"sigma":1},"times":[0.001,0.01,0.1,1,10],"tol":1e-3})");
  const auto rows = csv_rows(forward_table(cfg));
  double previous = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double b = std::stod(rows[i][2]);
    EXPECT_LE(b, previous);
    previous = b;
  }
}

TEST(ForwardTable, JsonFormat) {
  auto cfg = parse_experiment(kSingleModeHeat);
  cfg.format = OutputFormat::json;
  const std::string out = forward_table(cfg);
  EXPECT_EQ(out.rfind("{\"modes\":1,\"rows\":[{\"t\":0.01,\"observation\":", 0), 0u) << out;
}

TEST(FieldTable, IntervalAndRectangleColumns) {
  const auto interval = parse_experiment(R"({"model":{"type":"interval","modes":4},"initial":{"preset":"mode1"},
    "frac":{"rho":1,"sigma":1},"times":[0.1],"field":{"points":[[0],[0.5],[1]]}})");
  const auto rows = csv_rows(field_table(interval));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "t", "u"}));
  EXPECT_EQ(std::stod(rows[1][2]), 0.0);
  EXPECT_NEAR(std::stod(rows[2][2]), std::exp(-0.1 * kPi2) * std::sqrt(2.0), 1e-14);
  EXPECT_EQ(std::stod(rows[3][2]), 0.0);

  const auto rect = parse_experiment(R"({"model":{"type":"rectangle","lx":1,"ly":1,"modes":3},"initial":{"preset":"mode1"},
    "frac":{"rho":0.5,"sigma":1},"times":[0.1,1],"field":{"points":[[0.5,0.5]]}})");
  const auto rrows = csv_rows(field_table(rect));
  ASSERT_EQ(rrows.size(), 3u);
  EXPECT_EQ(rrows[0], (std::vector<std::string>{"x", "y", "t", "u"}));
}

TEST(Observe, UnitEigenvalueSubstitution) {
  const auto cfg = parse_experiment(R"({"model":{"type":"custom","eigenvalues":[1,4]},"initial":{"coefficients":[1,0.5]},
    "frac":{"rho":0.5,"sigma":1},"times":[1]})");
  const auto one = observe_experiment(cfg, 10.0, std::nullopt);
  EXPECT_EQ(one.observation.lambda_obs, 1.0);
  const auto two = observe_experiment(cfg, 1e4, 100.0);
  EXPECT_EQ(two.observation.lambda_obs, 4.0);
  EXPECT_EQ(two.observation.phi1_abs, 0.5);
}

TEST(Observe, ZeroCoefficientFlag) {
  const auto cfg = parse_experiment(R"({"model":{"type":"interval","modes":2},"initial":{"coefficients":[0,1]},
    "frac":{"rho":0.5,"sigma":1},"times":[1]})");
  const auto o = observe_experiment(cfg, 1.0, std::nullopt);
  EXPECT_TRUE(o.zero_coefficient);
  EXPECT_EQ(o.observation.d0, 0.0);
}

TEST(ObservationJson, RoundTripWithFixedKeyOrder) {
  ObservationSet obs;
  obs.t0 = 1e4;
  obs.d0 = 0.1 + 0.2;
  obs.t1 = 100.0;
  obs.d1 = 1.0 / 3.0;
  obs.phi1_abs = 2.0;
  obs.lambda_obs = kPi2;
  const std::string text = observation_to_json(obs);
  EXPECT_EQ(text,
            "{\"t0\":10000,\"d0\":0.30000000000000004,\"t1\":100,\"d1\":0.33333333333333331,"
            "\"phi1_abs\":2,\"lambda_obs\":9.869604401089358}\n");
  const auto back = observation_from_json(text);
  EXPECT_EQ(back.d0, obs.d0);
  EXPECT_EQ(*back.d1, *obs.d1);
  EXPECT_EQ(back.lambda_obs, obs.lambda_obs);
  EXPECT_EQ(observation_to_json(back), text);
}

TEST(ObservationJson, RejectsUnknownKeys) {
  EXPECT_EQ(code_of([] { observation_from_json(R"({"t0":1,"d0":0.1,"noise":0})"); }), ErrorCode::config);
  EXPECT_EQ(code_of([] { observation_from_json("[1,2]"); }), ErrorCode::config);
}

TEST(FormatNumber, SeventeenDigitsAndNull) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(NAN), "null");
  EXPECT_EQ(format_number(INFINITY), "null");
}
