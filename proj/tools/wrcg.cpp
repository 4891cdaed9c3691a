#include "wrcg/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

template <class T, class Parse>
T parse_or_throw(const std::string& s, Parse parse, const char* what) {
  auto v = parse(s);
  if (!v) throw wrcg::InvalidArgument(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Riemannian conjugate gradient on the warped graph manifold"};
  app.set_version_flag("--version", std::string(wrcg::kVersion));

  wrcg::RunSpec spec;
  std::string problem = "squiggle";
  std::vector<std::string> methods;
  std::vector<long> dims;
  double sigma_sq = 0.0;
  std::string jet = "geodesic";
  int jobs = 1;

  app.add_option("--problem", problem, "squiggle, rosenbrock or quadratic")->capture_default_str();
  app.add_option("--dim", spec.dim, "problem dimension D")->capture_default_str();
  app.add_option("--method", methods, "rcg or euclid_cg; a sweep accepts a comma list (default: both)")
      ->delimiter(',');
  auto* sigma_opt = app.add_option("--sigma-sq", sigma_sq,
                                   "warp flattening sigma^2 (default 1 for squiggle/quadratic, 9e4 for rosenbrock)");
  app.add_option("--max-iters", spec.rcg.max_iters)->capture_default_str();
  app.add_option("--tol-df", spec.rcg.tol_df, "stop when |f_k+1 - f_k| falls below this")->capture_default_str();
  app.add_option("--tol-grad", spec.rcg.tol_grad, "stop when the Riemannian gradient norm falls below this")
      ->capture_default_str();
  app.add_option("--df-patience", spec.rcg.df_patience, "consecutive small |delta f| steps needed to stop")
      ->capture_default_str();
  app.add_option("--wolfe-c1", spec.rcg.wolfe_c1)->capture_default_str();
  app.add_option("--wolfe-c2", spec.rcg.wolfe_c2)->capture_default_str();
  app.add_option("--fd-step", spec.rcg.fd.r, "finite-difference step r")->capture_default_str();
  app.add_option("--jet", jet, "geodesic or normal")->capture_default_str();
  app.add_flag("--minimize", spec.minimize, "negate the objective and maximise that");
  app.add_option("--seed", spec.seed)->capture_default_str();
  app.add_option("--trace-out", spec.trace_out, "trace CSV path (a directory when sweeping)");
  app.add_option("--summary-out", spec.summary_out, "summary JSON path (sweep table CSV when sweeping)");
  auto* dims_opt = app.add_option("--dims", dims, "comma list of dimensions; runs a sweep")->delimiter(',');
  app.add_option("--jobs", jobs, "parallel runs in a sweep")->check(CLI::PositiveNumber)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    spec.problem = parse_or_throw<wrcg::ProblemKind>(problem, wrcg::parse_problem, "problem");
    spec.rcg.jet = parse_or_throw<wrcg::JetKind>(jet, wrcg::parse_jet, "jet kind");
    if (sigma_opt->count() > 0) spec.sigma_sq = sigma_sq;
    std::vector<wrcg::Method> ms;
    for (const auto& m : methods) ms.push_back(parse_or_throw<wrcg::Method>(m, wrcg::parse_method, "method"));
    if (auto w = wrcg::fd_step_warning(spec.rcg.fd)) std::cerr << "warning: " << *w << '\n';

    if (dims_opt->count() > 0) {
      if (dims.empty()) throw wrcg::InvalidArgument("--dims needs at least one value");
      if (ms.empty()) ms = {wrcg::Method::Rcg, wrcg::Method::EuclidCg};
      std::vector<wrcg::Index> ds(dims.begin(), dims.end());
      if (!spec.trace_out.empty()) std::filesystem::create_directories(spec.trace_out);
      const auto rows = wrcg::sweep(spec, ds, ms, jobs, spec.trace_out);
      if (spec.summary_out.empty()) {
        wrcg::write_sweep_csv(std::cout, rows);
      } else {
        std::ofstream f(spec.summary_out);
        if (!f) throw wrcg::InvalidArgument("cannot open " + spec.summary_out);
        wrcg::write_sweep_csv(f, rows);
      }
      for (const auto& r : rows) {
        if (r.stop_reason == "NumericalBreakdown") return 2;
      }
      return 0;
    }

    if (ms.size() > 1) throw wrcg::InvalidArgument("a single run takes one --method");
    if (!ms.empty()) spec.method = ms.front();
    return wrcg::run_spec(spec, spec.summary_out.empty() ? &std::cout : nullptr, &std::cerr);
  } catch (const wrcg::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
