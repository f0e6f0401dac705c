// Copyright 2026 The wpcr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <string>

#include <gtest/gtest.h>

#include "wpcr/experiment.hpp"

namespace wpcr {
namespace {

ErrorKind parse_error_kind(const std::string& kind, const std::string& text) {
  try {
    parse_spec(kind, Json::parse(text));
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return ErrorKind::kNumericFailure;
}

std::string parse_error_message(const std::string& kind, const std::string& text) {
  try {
    parse_spec(kind, Json::parse(text));
  } catch (const Error& e) {
    return e.message();
  }
  return "";
}

TEST(Spec, Defaults) {
  const ExperimentSpec s = parse_spec("decompose", Json::object());
  EXPECT_EQ(s.kind, "decompose");
  EXPECT_TRUE(s.prior.has_value());
  EXPECT_EQ(s.deltas.values, (std::vector<double>{0.1, 0.05}));
  EXPECT_EQ(s.p, 1.0);
  EXPECT_EQ(s.threads, 1u);
}

TEST(Spec, FullDecompose) {
  const ExperimentSpec s = parse_spec("", Json::parse(R"({
    "experiment": "decompose", "space": {"kind": "hypercube", "dim": 2},
    "prior": {"dp": {"q": 3, "H": {"kind": "uniform"}}},
    "p0": {"kind": "truncated_gaussian", "mean": [0.3, 0.6], "sd": [0.2, 0.2]},
    "n_grid": [10, 20], "delta": 0.25, "p": 2, "replications": 10,
    "posterior_draws": 4, "seed": 99, "threads": 2})"));
  EXPECT_EQ(s.kind, "decompose");
  EXPECT_EQ(s.space.dim(), 2u);
  EXPECT_EQ(std::get<DirichletProcessPrior>(*s.prior).q, 3.0);
  EXPECT_EQ(s.deltas.values, std::vector<double>{0.25});
  EXPECT_EQ(s.seed, 99u);
}

TEST(Spec, FiniteSpaceLabels) {
  const ExperimentSpec s = parse_spec("wasserstein", Json::parse(R"({
    "space": {"kind": "finite", "points": ["a", "b", "c"],
              "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
    "mu": {"kind": "discrete", "atoms": ["a", "c"]},
    "nu": {"kind": "discrete", "atoms": ["b"]}})"));
  const RunResult r = run(s);
  EXPECT_DOUBLE_EQ(r.summary["value"].get<double>(), 1.0);
  EXPECT_EQ(parse_error_kind("wasserstein", R"({
    "space": {"kind": "finite", "points": ["a"], "dist": [[0]]},
    "mu": {"kind": "discrete", "atoms": ["z"]},
    "nu": {"kind": "discrete", "atoms": ["a"]}})"),
            ErrorKind::kInvalidParameter);
}

TEST(Spec, PairListMeasure) {
  const ExperimentSpec s = parse_spec("wasserstein", Json::parse(R"({
    "mu": [[0.0, 1], [1.0, 3]], "nu": [[0.25, 1]]})"));
  EXPECT_NEAR(run(s).summary["value"].get<double>(), 0.25 * 0.25 + 0.75 * 0.75,
              1e-12);
}

TEST(Spec, ValidationNamesTheField) {
  EXPECT_NE(parse_error_message("gc-rate", R"({"n_grid": [4, 2]})").find("'n_grid'"),
            std::string::npos);
  EXPECT_NE(parse_error_message("gc-rate", R"({"p0": {"kind": "nope"}})").find("'p0.kind'"),
            std::string::npos);
  EXPECT_NE(parse_error_message("gc-rate", R"({"extra": 1})").find("'extra'"),
            std::string::npos);
  EXPECT_NE(parse_error_message("gc-rate", R"({"p": 0.5})").find("'p'"),
            std::string::npos);
}

TEST(Spec, LocateField) {
  const std::string text = "{\n  \"prior\": {\n    \"dp\": {\n      \"q\": -1\n    }\n  },\n  \"q_values\": [1]\n}\n";
  EXPECT_EQ(locate_field(text, "config field 'prior.dp.q': must be >= 0"), 4u);
  EXPECT_EQ(locate_field(text, "config field 'q_values[0]': bad"), 7u);
  EXPECT_EQ(locate_field(text, "config field 'missing': bad"), 0u);
  EXPECT_EQ(locate_field(text, "no field here"), 0u);
}

TEST(Spec, ErrorKindsAndExitCodes) {
  EXPECT_EQ(parse_error_kind("gc-rate", R"({"experiment": "decompose"})"),
            ErrorKind::kInvalidParameter);
  EXPECT_EQ(parse_error_kind("decompose", R"({"delta": 5})"),
            ErrorKind::kInvalidParameter);
  EXPECT_EQ(parse_error_kind("decompose", R"({"prior": {"egp": {}}})"),
            ErrorKind::kInvalidParameter);
  const ErrorKind hyp = parse_error_kind("decompose", R"({"delta_schedule":
      {"kind": "corollary", "d": 2, "s": 0.25, "alpha": 0.5, "p": 1}})");
  EXPECT_EQ(hyp, ErrorKind::kHypothesisViolated);
  EXPECT_EQ(exit_code_for(HypothesisViolated("x")), 2);
  EXPECT_EQ(exit_code_for(InvalidSamplePlan("x")), 2);
  EXPECT_EQ(exit_code_for(UnsupportedMeasure("x")), 2);
  EXPECT_EQ(exit_code_for(NumericFailure("x")), 3);
  EXPECT_EQ(exit_code_for(DegenerateWeights("x")), 3);
}

TEST(Spec, CorollarySchedule) {
  const ExperimentSpec s = parse_spec("decompose", Json::parse(R"({
    "delta_schedule": {"kind": "corollary", "d": 1, "s": 0, "alpha": 0.5, "p": 1}})"));
  ASSERT_EQ(s.deltas.kind, DeltaSchedule::Kind::kCorollary);
  const auto d = s.deltas.deltas_for(16, 1.0);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(s.deltas.deltas_for(1, 1.0)[0], 1.0);
}

TEST(Spec, EchoOmitsThreadsAndOut) {
  const ExperimentSpec s = parse_spec(
      "gc-rate", Json::parse(R"({"threads": 4, "out": "/tmp/x", "seed": 5})"));
  const std::string echo = s.echo();
  EXPECT_EQ(echo.find("threads"), std::string::npos);
  EXPECT_EQ(echo.find("/tmp/x"), std::string::npos);
  EXPECT_NE(echo.find("\"seed\":5"), std::string::npos);
}

TEST(Csv, Layout) {
  CsvTable t{"t.csv", {"a", "b"}, {}};
  t.add({"1", fmt17(0.1)});
  EXPECT_EQ(t.render("{}"), "# config: {}\na,b\n1,0.10000000000000001\n");
  EXPECT_EQ(fmt17(1.0 / 3.0), "0.33333333333333331");
}

TEST(Run, WassersteinOracle) {
  const ExperimentSpec s = parse_spec("wasserstein", Json::parse(R"({
    "mu": {"kind": "discrete", "atoms": [0, 1]},
    "nu": {"kind": "discrete", "atoms": [0.5]}, "p": 2})"));
  const RunResult r = run(s);
  EXPECT_NEAR(r.summary["value"].get<double>(), 0.5, 1e-12);
  EXPECT_NEAR(r.summary["value_1d"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(r.tables[0].rows.size(), 2u);
}

TEST(Run, SummaryCarriesProvenance) {
  const ExperimentSpec s = parse_spec(
      "gc-rate", Json::parse(R"({"n_grid": [4, 8], "replications": 5, "seed": 7})"));
  const RunResult r = run(s);
  EXPECT_EQ(r.summary["seed"].get<std::uint64_t>(), 7u);
  EXPECT_EQ(r.summary["version"].get<std::string>(), WPCR_VERSION);
  EXPECT_EQ(r.summary["config"]["n_grid"], Json::parse("[4, 8]"));
}

TEST(Run, SeedDeterminism) {
  const Json c = Json::parse(R"({"n_grid": [8, 16], "replications": 10, "seed": 3})");
  const std::string a = run(parse_spec("gc-rate", c)).tables[0].render("");
  const std::string b = run(parse_spec("gc-rate", c)).tables[0].render("");
  EXPECT_EQ(a, b);
  Json c2 = c;
  c2["seed"] = 4;
  EXPECT_NE(a, run(parse_spec("gc-rate", c2)).tables[0].render(""));
}

TEST(Run, DecomposeIndependentOfThreads) {
  Json c = Json::parse(R"({"n_grid": [16], "delta": 0.25, "replications": 8,
                          "posterior_draws": 4, "seed": 11})");
  const ExperimentSpec s1 = parse_spec("decompose", c);
  c["threads"] = 3;
  const ExperimentSpec s3 = parse_spec("decompose", c);
  EXPECT_EQ(s1.echo(), s3.echo());
  EXPECT_EQ(run(s1).tables[0].render(s1.echo()),
            run(s3).tables[0].render(s3.echo()));
}

TEST(Run, DecomposeRows) {
  const ExperimentSpec s = parse_spec("decompose", Json::parse(R"({
    "n_grid": [32], "delta": [0.25, 0.1], "replications": 8, "posterior_draws": 4})"));
  const RunResult r = run(s);
  ASSERT_EQ(r.tables[0].rows.size(), 14u);
  EXPECT_EQ(r.tables[0].rows[0][3], "T1");
  EXPECT_EQ(r.tables[0].rows[5][3], "T4_max");
  EXPECT_EQ(r.tables[0].rows[6][3], "eps");
  EXPECT_EQ(r.summary["estimator"], "upper-bound estimator");
}

TEST(Run, DfSweepPasses) {
  const ExperimentSpec s = parse_spec("df-sweep", Json::parse(R"({
    "n_grid": [1, 50], "p_values": [0.2, 0.7], "h_values": [0.05, 0.2],
    "chi": [{"kind": "uniform"}, {"kind": "beta", "a": 2, "b": 2}]})"));
  const RunResult r = run(s);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.tables[0].rows.size(), 16u);
}

TEST(Run, EgpCheckConstantBeta) {
  const ExperimentSpec s = parse_spec("egp-check", Json::parse(R"({
    "prior": {"egp": {"a": 1.5, "beta": {"kind": "constant", "c": 2}}},
    "n_grid": [3], "pairs": 3})"));
  const RunResult r = run(s);
  EXPECT_TRUE(r.pass);
  bool saw_match = false;
  for (const auto& row : r.tables[0].rows) saw_match |= row[0] == "dp_match";
  EXPECT_TRUE(saw_match);
}

}  // namespace
}  // namespace wpcr
