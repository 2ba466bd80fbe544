// Command-line driver: consistency checks and delta-convergence studies.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlvc/nlvc.h"

namespace {

struct Options {
  std::string model = "poisson";
  std::optional<std::string> strategy, case_name, loc_mode, provider, solver, norm_region, weight_cache,
      matrix_export;
  std::optional<double> delta0, ratio, nu, tol;
  std::optional<int> levels, degree;
  std::string out;
  std::string format = "csv";
  int threads = 0;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--model", o.model, "poisson or lps")->check(CLI::IsMember({"poisson", "lps"}));
  cmd->add_option("--strategy", o.strategy, "dtd or dtn")->check(CLI::IsMember({"dtd", "dtn"}));
  cmd->add_option("--case", o.case_name, "manufactured solution name");
  cmd->add_option("--delta0", o.delta0, "horizon of the first level");
  cmd->add_option("--ratio", o.ratio, "delta / h");
  cmd->add_option("--levels", o.levels, "number of delta halvings + 1");
  cmd->add_option("--loc-mode", o.loc_mode, "auto, full_layer, right_strip or inner_ring");
  cmd->add_option("--nu", o.nu, "Poisson ratio (lps)");
  cmd->add_option("--local-provider", o.provider, "analytic or fd")->check(CLI::IsMember({"analytic", "fd"}));
  cmd->add_option("--norm-region", o.norm_region, "full or omega")->check(CLI::IsMember({"full", "omega"}));
  cmd->add_option("--out", o.out, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--solver", o.solver, "auto, dense_lu, gmres or bicgstab")
      ->check(CLI::IsMember({"auto", "dense_lu", "gmres", "bicgstab"}));
  cmd->add_option("--tol", o.tol, "relative residual tolerance");
  cmd->add_option("--threads", o.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  cmd->add_option("--degree", o.degree, "quadrature exactness degree");
  cmd->add_option("--weight-cache", o.weight_cache, "directory for cached quadrature weights");
  cmd->add_option("--matrix-export", o.matrix_export, "directory for coordinate-format system matrices");
}

struct ExperimentDeleter {
  void operator()(nlvc_experiment* e) const { nlvc_experiment_destroy(e); }
};
struct ReportDeleter {
  void operator()(nlvc_report* r) const { nlvc_report_destroy(r); }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int report_error(nlvc_status s) {
  std::cerr << "error: " << nlvc_status_string(s) << ": " << nlvc_last_error() << '\n';
  return s == NLVC_ERR_CONFIG || s == NLVC_ERR_LOOKUP ? 2 : 1;
}

int run(const Options& o, bool convergence) {
  if (o.threads > 0) nlvc_set_threads(o.threads);
  nlvc_experiment* raw = nullptr;
  if (nlvc_status s = nlvc_experiment_create(o.model.c_str(), &raw); s != NLVC_OK) return report_error(s);
  std::unique_ptr<nlvc_experiment, ExperimentDeleter> exp(raw);

  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&](const char* k, const auto& v) {
    if (!v) return;
    if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, std::string>)
      kv.emplace_back(k, *v);
    else if constexpr (std::is_same_v<std::decay_t<decltype(*v)>, double>)
      kv.emplace_back(k, num(*v));
    else
      kv.emplace_back(k, std::to_string(*v));
  };
  put("strategy", o.strategy);
  put("case", o.case_name);
  put("delta0", o.delta0);
  put("ratio", o.ratio);
  put("levels", o.levels);
  put("loc_mode", o.loc_mode);
  put("nu", o.nu);
  put("local_provider", o.provider);
  put("norm_region", o.norm_region);
  put("solver", o.solver);
  put("tol", o.tol);
  put("degree", o.degree);
  put("weight_cache", o.weight_cache);
  put("matrix_export", o.matrix_export);
  if (convergence && !o.levels) kv.emplace_back("levels", "4");
  for (const auto& [k, v] : kv)
    if (nlvc_status s = nlvc_experiment_set(exp.get(), k.c_str(), v.c_str()); s != NLVC_OK) return report_error(s);

  nlvc_report* rep_raw = nullptr;
  const nlvc_status s =
      convergence ? nlvc_run_convergence(exp.get(), &rep_raw) : nlvc_run_consistency(exp.get(), &rep_raw);
  if (s != NLVC_OK) return report_error(s);
  std::unique_ptr<nlvc_report, ReportDeleter> rep(rep_raw);

  std::size_t need = 0;
  nlvc_report_format(rep.get(), o.format.c_str(), nullptr, 0, &need);
  std::string text(need, '\0');
  if (nlvc_status fs = nlvc_report_format(rep.get(), o.format.c_str(), text.data(), text.size(), nullptr);
      fs != NLVC_OK)
    return report_error(fs);
  text.resize(need - 1);

  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) {
      std::cerr << "error: cannot open " << o.out << '\n';
      return 2;
    }
    f << text;
  }

  const bool passed = nlvc_report_passed(rep.get()) != 0;
  nlvc_level_info last{};
  nlvc_report_level(rep.get(), nlvc_report_level_count(rep.get()) - 1, &last);
  if (convergence)
    std::cerr << (passed ? "PASS" : "FAIL") << ": final rate " << (last.has_rate ? num(last.rate) : "n/a")
              << " (accepted [1.7, 2.4])\n";
  else
    std::cerr << (passed ? "PASS" : "FAIL") << ": e0 = " << num(last.e0) << '\n';
  return passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal solver with local-to-nonlocal boundary-condition conversion"};
  app.require_subcommand(1);
  Options opt;
  auto* consistency = app.add_subcommand("consistency", "one solve with a case the operator reproduces exactly");
  auto* converge = app.add_subcommand("converge", "delta-convergence study at fixed delta/h");
  add_common(consistency, opt);
  add_common(converge, opt);
  app.add_flag_callback("--version", [] {
    std::cout << nlvc_version() << '\n';
    throw CLI::Success();
  });

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  return run(opt, converge->parsed());
}
