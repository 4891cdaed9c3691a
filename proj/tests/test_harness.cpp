#include "wrcg/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wrcg;

namespace {

std::filesystem::path scratch_dir() {
  auto p = std::filesystem::temp_directory_path() / "wrcg_harness_test";
  std::filesystem::create_directories(p);
  return p;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(f, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(RunSpec, JsonRoundTrip) {
  RunSpec s;
  s.problem = ProblemKind::Rosenbrock;
  s.dim = 7;
  s.method = Method::EuclidCg;
  s.sigma_sq = 12.5;
  s.rcg.max_iters = 321;
  s.rcg.tol_df = 1e-7;
  s.rcg.df_patience = 3;
  s.rcg.jet = JetKind::NormalOnly;
  s.rcg.fd.r = 1e-4;
  s.minimize = true;
  s.seed = 9;
  const RunSpec t = RunSpec::from_json(s.to_json());
  EXPECT_EQ(t.to_json(), s.to_json());
}

TEST(RunSpec, DefaultSigmaDependsOnProblem) {
  RunSpec s;
  s.problem = ProblemKind::Rosenbrock;
  EXPECT_EQ(s.effective_sigma_sq(), 9e4);
  s.sigma_sq = 4.0;
  EXPECT_EQ(s.effective_sigma_sq(), 4.0);
}

TEST(RunSpec, RejectsUnknownNames) {
  nlohmann::json j = RunSpec{}.to_json();
  j["problem"] = "banana";
  EXPECT_THROW(RunSpec::from_json(j), InvalidArgument);
}

TEST(RunSpecExit, InvalidSpecReturnsOne) {
  RunSpec s;
  s.dim = 1;
  std::ostringstream err;
  EXPECT_EQ(run_spec(s, nullptr, &err), 1);
  EXPECT_NE(err.str().find("error"), std::string::npos);
  s = {};
  s.sigma_sq = -1.0;
  EXPECT_EQ(run_spec(s), 1);
}

TEST(Execute, SummaryAndTraceAgree) {
  const auto dir = scratch_dir();
  RunSpec s;
  s.dim = 4;
  s.trace_out = (dir / "trace.csv").string();
  s.summary_out = (dir / "summary.json").string();
  const RunOutcome o = execute(s);
  const auto lines = read_lines(s.trace_out);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.front(), kTraceHeader);
  EXPECT_EQ(long(lines.size()) - 1, o.summary["iterations"].get<long>());
  EXPECT_EQ(o.summary["trace_rows"].get<size_t>(), lines.size() - 1);
  std::ifstream f(s.summary_out);
  const auto j = nlohmann::json::parse(f);
  EXPECT_EQ(j, o.summary);
  for (const char* key : {"version", "stop_reason", "final_f", "gap_to_max", "evals", "warnings", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["version"], kVersion);
}

TEST(Execute, RosenbrockBasinLabel) {
  EXPECT_EQ(rosenbrock_basin(-1e-6), "global");
  EXPECT_EQ(rosenbrock_basin(-3.987), "local");
  EXPECT_EQ(rosenbrock_basin(-1.0), "unresolved");
  RunSpec s;
  s.problem = ProblemKind::Rosenbrock;
  s.rcg.max_iters = 5;
  EXPECT_TRUE(execute(s).summary.contains("basin"));
}

TEST(Execute, MinimizeFlipsSign) {
  RunSpec s;
  s.problem = ProblemKind::Quadratic;
  s.dim = 3;
  s.rcg.max_iters = 2;
  s.minimize = true;
  const auto j = execute(s).summary;
  EXPECT_TRUE(j["gap_to_max"].is_null());
  EXPECT_LE(j["final_f"].get<double>(), -1.5);
}

TEST(Execute, TinyFdStepWarns) {
  RunSpec s;
  s.rcg.fd.r = 1e-20;
  s.rcg.max_iters = 1;
  EXPECT_EQ(execute(s).summary["warnings"].size(), 1u);
}

TEST(Execute, TracesAreDeterministic) {
  const auto dir = scratch_dir();
  RunSpec s;
  s.problem = ProblemKind::Rosenbrock;
  s.dim = 3;
  s.trace_out = (dir / "a.csv").string();
  execute(s);
  const auto a = read_lines(s.trace_out);
  s.trace_out = (dir / "b.csv").string();
  execute(s);
  const auto b = read_lines(s.trace_out);
  ASSERT_EQ(a.size(), b.size());
  // Wall-clock is the last two columns; everything before it must match.
  for (size_t i = 0; i < a.size(); ++i) {
    auto strip = [](const std::string& l) {
      auto pos = l.rfind(',');
      pos = l.rfind(',', pos - 1);
      return l.substr(0, pos);
    };
    EXPECT_EQ(strip(a[i]), strip(b[i])) << i;
  }
}

TEST(Sweep, RowsFollowRequestOrder) {
  RunSpec base;
  base.rcg.max_iters = 20;
  const std::vector<Index> dims{6, 2, 4};
  const auto rows = sweep(base, dims, {Method::Rcg, Method::EuclidCg}, 3);
  ASSERT_EQ(rows.size(), 6u);
  for (size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].dim, dims[i % 3]);
    EXPECT_EQ(rows[i].method, i < 3 ? Method::Rcg : Method::EuclidCg);
    EXPECT_TRUE(rows[i].error.empty());
  }
  EXPECT_EQ(rows[3].hvp_calls, 0);
  EXPECT_GT(rows[0].hvp_calls, 0);
  std::ostringstream os;
  write_sweep_csv(os, rows);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), kSweepHeader);
}

TEST(Sweep, ParallelMatchesSerial) {
  RunSpec base;
  const auto a = sweep(base, {2, 3, 5}, {Method::Rcg}, 1);
  const auto b = sweep(base, {2, 3, 5}, {Method::Rcg}, 3);
  for (size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].iterations, b[i].iterations);
    EXPECT_EQ(a[i].final_f, b[i].final_f);
  }
}

TEST(Sweep, RejectsEmptyInputs) {
  EXPECT_THROW(sweep(RunSpec{}, {}, {Method::Rcg}), InvalidArgument);
  EXPECT_THROW(sweep(RunSpec{}, {2}, {}), InvalidArgument);
  EXPECT_THROW(sweep(RunSpec{}, {1}, {Method::Rcg}), InvalidArgument);
}
