#pragma once

#include "wrcg/euclidean_cg.hpp"
#include "wrcg/problems.hpp"
#include "wrcg/rcg.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace wrcg {

enum class Method { Rcg, EuclidCg };

inline std::string to_string(Method m) { return m == Method::Rcg ? "rcg" : "euclid_cg"; }

inline std::optional<Method> parse_method(std::string_view s) {
  if (s == "rcg") return Method::Rcg;
  if (s == "euclid_cg") return Method::EuclidCg;
  return std::nullopt;
}

inline std::string to_string(JetKind k) { return k == JetKind::Geodesic ? "geodesic" : "normal"; }

inline std::optional<JetKind> parse_jet(std::string_view s) {
  if (s == "geodesic") return JetKind::Geodesic;
  if (s == "normal") return JetKind::NormalOnly;
  return std::nullopt;
}

struct RunSpec {
  ProblemKind problem = ProblemKind::Squiggle;
  Index dim = 2;
  Method method = Method::Rcg;
  std::optional<double> sigma_sq;
  RcgConfig rcg;
  bool minimize = false;
  unsigned long seed = 0;
  std::string trace_out;
  std::string summary_out;

  double effective_sigma_sq() const { return sigma_sq.value_or(default_sigma_sq(problem)); }

  void validate() const {
    if (dim < 1) throw InvalidArgument("dimension must be positive");
    if (problem != ProblemKind::Quadratic && dim < 2) throw InvalidArgument(to_string(problem) + " needs D >= 2");
    WarpConfig{effective_sigma_sq()}.validate();
    rcg.validate();
  }

  nlohmann::json to_json() const {
    return {
        {"problem", to_string(problem)},
        {"dim", dim},
        {"method", to_string(method)},
        {"sigma_sq", effective_sigma_sq()},
        {"max_iters", rcg.max_iters},
        {"tol_df", rcg.tol_df},
        {"tol_grad", rcg.tol_grad},
        {"wolfe_c1", rcg.wolfe_c1},
        {"wolfe_c2", rcg.wolfe_c2},
        {"t_init", rcg.t_init},
        {"max_line_search_evals", rcg.max_line_search_evals},
        {"restart_on_nonascent", rcg.restart_on_nonascent},
        {"df_patience", rcg.df_patience},
        {"jet", to_string(rcg.jet)},
        {"fd_step", rcg.fd.r},
        {"minimize", minimize},
        {"seed", seed},
        {"trace_out", trace_out},
        {"summary_out", summary_out},
    };
  }

  static RunSpec from_json(const nlohmann::json& j) {
    RunSpec s;
    auto problem = parse_problem(j.at("problem").get<std::string>());
    auto method = parse_method(j.at("method").get<std::string>());
    auto jet = parse_jet(j.value("jet", std::string("geodesic")));
    if (!problem) throw InvalidArgument("unknown problem in run spec");
    if (!method) throw InvalidArgument("unknown method in run spec");
    if (!jet) throw InvalidArgument("unknown jet kind in run spec");
    s.problem = *problem;
    s.method = *method;
    s.rcg.jet = *jet;
    s.dim = j.at("dim").get<Index>();
    if (j.contains("sigma_sq")) s.sigma_sq = j.at("sigma_sq").get<double>();
    s.rcg.max_iters = j.value("max_iters", s.rcg.max_iters);
    s.rcg.tol_df = j.value("tol_df", s.rcg.tol_df);
    s.rcg.tol_grad = j.value("tol_grad", s.rcg.tol_grad);
    s.rcg.wolfe_c1 = j.value("wolfe_c1", s.rcg.wolfe_c1);
    s.rcg.wolfe_c2 = j.value("wolfe_c2", s.rcg.wolfe_c2);
    s.rcg.t_init = j.value("t_init", s.rcg.t_init);
    s.rcg.max_line_search_evals = j.value("max_line_search_evals", s.rcg.max_line_search_evals);
    s.rcg.restart_on_nonascent = j.value("restart_on_nonascent", s.rcg.restart_on_nonascent);
    s.rcg.df_patience = j.value("df_patience", s.rcg.df_patience);
    s.rcg.fd.r = j.value("fd_step", s.rcg.fd.r);
    s.minimize = j.value("minimize", false);
    s.seed = j.value("seed", 0UL);
    s.trace_out = j.value("trace_out", std::string());
    s.summary_out = j.value("summary_out", std::string());
    return s;
  }
};

inline constexpr const char* kTraceHeader =
    "iter,f,grad_norm_riem,grad_norm_eucl,t_k,beta_k,s_k,ls_evals,wall_ns,restart";

inline void write_trace_csv(std::ostream& os, const std::vector<IterationTrace>& trace) {
  os << kTraceHeader << '\n';
  char buf[512];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%ld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%lld,%d\n", r.k, r.f,
                  r.grad_norm_riem, r.grad_norm_eucl, r.t, r.beta, r.s, r.ls_evals, r.wall_ns, r.restart ? 1 : 0);
    os << buf;
  }
}

struct RunOutcome {
  RunSpec spec;
  RcgResult result;
  nlohmann::json summary;
  int exit_code = 0;
};

/// Rosenbrock runs are labelled by the stationary value they end near.
inline std::string rosenbrock_basin(double f) {
  if (std::abs(f) <= 1e-3) return "global";
  if (std::abs(f - kRosenbrockLocalValue) <= 0.05) return "local";
  return "unresolved";
}

/// Runs one spec and builds its summary. Writes files only when the spec
/// names output paths.
inline RunOutcome execute(const RunSpec& spec) {
  spec.validate();
  RunOutcome out;
  out.spec = spec;
  ProblemInstance inst = make_problem(spec.problem, spec.dim);
  nlohmann::json warnings = nlohmann::json::array();
  if (auto w = fd_step_warning(spec.rcg.fd)) warnings.push_back(*w);

  auto solve = [&](const auto& obj) {
    if (spec.method == Method::Rcg) return run(obj, WarpConfig{spec.effective_sigma_sq()}, inst.theta0, spec.rcg);
    return run_euclidean_cg(obj, inst.theta0, spec.rcg);
  };
  if (spec.minimize) {
    out.result = solve(Negated<FunctionObjective>(inst.objective));
  } else {
    out.result = solve(inst.objective);
  }

  const RcgResult& r = out.result;
  const GeometryCache& c = r.state.cache;
  nlohmann::json s;
  s["version"] = kVersion;
  s["stop_reason"] = to_string(r.state.stop_reason);
  s["message"] = r.state.message;
  s["iterations"] = r.state.k;
  s["trace_rows"] = r.trace.size();
  const bool have_point = c.theta.size() == spec.dim;
  // With --minimize the optimiser sees the negated objective, so the known
  // maximiser of the built-in problem no longer applies.
  const bool known = !spec.minimize && have_point;
  s["final_f"] = have_point ? nlohmann::json(spec.minimize ? -c.ell : c.ell) : nlohmann::json(nullptr);
  s["final_grad_norm_riem"] = have_point ? nlohmann::json(riemannian_gradient_norm(c)) : nlohmann::json(nullptr);
  s["final_grad_norm_eucl"] = have_point ? nlohmann::json(std::sqrt(c.g2)) : nlohmann::json(nullptr);
  s["known_max_value"] = spec.minimize ? nlohmann::json(nullptr) : nlohmann::json(inst.max_value);
  s["gap_to_max"] = known ? nlohmann::json(inst.max_value - c.ell) : nlohmann::json(nullptr);
  s["distance_to_maximizer"] = known ? nlohmann::json((c.theta - inst.maximizer).norm()) : nlohmann::json(nullptr);
  if (spec.problem == ProblemKind::Rosenbrock && known) s["basin"] = rosenbrock_basin(c.ell);
  s["evals"] = {{"value", r.evals.value}, {"gradient", r.evals.gradient}, {"hessian_vector", r.evals.hessian_vector}};
  long long wall = 0;
  for (const auto& t : r.trace) wall += t.wall_ns;
  s["wall_ns"] = wall;
  s["warnings"] = warnings;
  s["config"] = spec.to_json();
  out.summary = std::move(s);
  out.exit_code = r.state.stop_reason == StopReason::NumericalBreakdown ? 2 : 0;

  if (!spec.trace_out.empty()) {
    std::ofstream f(spec.trace_out);
    if (!f) throw InvalidArgument("cannot open trace file " + spec.trace_out);
    write_trace_csv(f, r.trace);
  }
  if (!spec.summary_out.empty()) {
    std::ofstream f(spec.summary_out);
    if (!f) throw InvalidArgument("cannot open summary file " + spec.summary_out);
    f << out.summary.dump(2) << '\n';
  }
  return out;
}

/// Exit status of a single run: 1 for an invalid spec, 2 when the run hit a
/// numerical breakdown, 0 otherwise.
inline int run_spec(const RunSpec& spec, std::ostream* summary_stream = nullptr, std::ostream* err = nullptr) {
  try {
    RunOutcome o = execute(spec);
    if (summary_stream) *summary_stream << o.summary.dump(2) << '\n';
    return o.exit_code;
  } catch (const InvalidArgument& e) {
    if (err) *err << "error: " << e.what() << '\n';
    return 1;
  }
}

struct SweepRow {
  ProblemKind problem;
  Method method;
  Index dim;
  std::string stop_reason;
  long iterations = 0;
  double final_f = std::nan("");
  double gap_to_max = std::nan("");
  double grad_norm_riem = std::nan("");
  long long hvp_calls = 0;
  long long wall_ns = 0;
  std::string error;
};

inline constexpr const char* kSweepHeader =
    "problem,method,dim,stop_reason,iterations,final_f,gap_to_max,grad_norm_riem,hvp_calls,wall_ns,error";

/// One row per (method, D), ordered by method then D regardless of which
/// worker finishes first. A failing run is reported in its row.
inline std::vector<SweepRow> sweep(const RunSpec& base, const std::vector<Index>& dims,
                                   const std::vector<Method>& methods, int jobs = 1,
                                   const std::string& trace_dir = {}) {
  if (dims.empty()) throw InvalidArgument("sweep needs at least one dimension");
  if (methods.empty()) throw InvalidArgument("sweep needs at least one method");
  std::vector<RunSpec> specs;
  for (Method m : methods) {
    for (Index d : dims) {
      RunSpec s = base;
      s.method = m;
      s.dim = d;
      s.summary_out.clear();
      s.trace_out.clear();
      if (!trace_dir.empty()) {
        s.trace_out = (std::filesystem::path(trace_dir) /
                       (to_string(s.problem) + "_" + to_string(m) + "_D" + std::to_string(d) + ".csv"))
                          .string();
      }
      specs.push_back(std::move(s));
    }
  }
  for (const auto& s : specs) s.validate();

  std::vector<SweepRow> rows(specs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < specs.size(); i = next++) {
      const RunSpec& s = specs[i];
      SweepRow& row = rows[i];
      row.problem = s.problem;
      row.method = s.method;
      row.dim = s.dim;
      try {
        RunOutcome o = execute(s);
        const auto& j = o.summary;
        row.stop_reason = j["stop_reason"].get<std::string>();
        row.iterations = j["iterations"].get<long>();
        if (!j["final_f"].is_null()) row.final_f = j["final_f"].get<double>();
        if (!j["gap_to_max"].is_null()) row.gap_to_max = j["gap_to_max"].get<double>();
        if (!j["final_grad_norm_riem"].is_null()) row.grad_norm_riem = j["final_grad_norm_riem"].get<double>();
        row.hvp_calls = o.result.evals.hessian_vector;
        row.wall_ns = j["wall_ns"].get<long long>();
      } catch (const std::exception& e) {
        row.stop_reason = "Error";
        row.error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, int(specs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << kSweepHeader << '\n';
  char buf[512];
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::snprintf(buf, sizeof buf, "%s,%s,%ld,%s,%ld,%.17g,%.17g,%.17g,%lld,%lld,", to_string(r.problem).c_str(),
                  to_string(r.method).c_str(), long(r.dim), r.stop_reason.c_str(), r.iterations, r.final_f,
                  r.gap_to_max, r.grad_norm_riem, r.hvp_calls, r.wall_ns);
    os << buf << err << '\n';
  }
}

}  // namespace wrcg
