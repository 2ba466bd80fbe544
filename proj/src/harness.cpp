#include "nlvc/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "nlvc/bc_conversion.hpp"
#include "nlvc/errors.hpp"
#include "nlvc/local_solutions.hpp"
#include "nlvc/quadrature.hpp"

namespace nlvc {

const char* to_string(Strategy s) { return s == Strategy::Dtd ? "dtd" : "dtn"; }
const char* to_string(ProviderKind p) { return p == ProviderKind::Analytic ? "analytic" : "fd"; }
const char* to_string(NormRegion r) { return r == NormRegion::Full ? "full" : "omega"; }

Strategy parse_strategy(const std::string& name) {
  if (name == "dtd") return Strategy::Dtd;
  if (name == "dtn") return Strategy::Dtn;
  throw ConfigError("unknown strategy '" + name + "'");
}

ProviderKind parse_provider(const std::string& name) {
  if (name == "analytic") return ProviderKind::Analytic;
  if (name == "fd") return ProviderKind::Fd;
  throw ConfigError("unknown local provider '" + name + "'");
}

NormRegion parse_norm_region(const std::string& name) {
  if (name == "full") return NormRegion::Full;
  if (name == "omega") return NormRegion::Omega;
  throw ConfigError("unknown norm region '" + name + "'");
}

ExperimentConfig ExperimentConfig::defaults_for(Model model) {
  ExperimentConfig c;
  c.model = model;
  if (model == Model::Lps) {
    c.case_name = "lps_linear";
    c.delta0 = 0.3;
    c.ratio = 3.2;
    c.rule.bond_quartic = true;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (!(delta0 > 0.0) || !std::isfinite(delta0)) throw ConfigError("delta0 must be positive");
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) throw ConfigError("ratio delta/h must be at least 1");
  if (levels < 1) throw ConfigError("levels must be at least 1");
  if (fd_refinement < 1) throw ConfigError("fd refinement must be at least 1");
  if (rule.degree < 0) throw ConfigError("quadrature degree must be non-negative");
  const ManufacturedCase c = registry_lookup(case_name, nu, young_E);
  if (c.model != model)
    throw ConfigError("case '" + case_name + "' belongs to the " + to_string(c.model) + " model");
  if (model == Model::Poisson) {
    if (loc_mode != "auto" && loc_mode != "full_layer" && loc_mode != "right_strip")
      throw ConfigError("loc mode for the square must be full_layer or right_strip");
  } else {
    if (loc_mode != "auto" && loc_mode != "full_layer" && loc_mode != "inner_ring")
      throw ConfigError("loc mode for the annulus must be full_layer or inner_ring");
    if (provider == ProviderKind::Fd) throw ConfigError("the finite-difference provider is Poisson only");
  }
  ::nlvc::validate(domain_at(0));
}

std::string ExperimentConfig::effective_loc_mode() const {
  if (loc_mode != "auto") return loc_mode;
  if (strategy == Strategy::Dtd) return "full_layer";
  return model == Model::Poisson ? "right_strip" : "inner_ring";
}

double ExperimentConfig::delta_at(int level) const { return std::ldexp(delta0, -level); }

DomainShape ExperimentConfig::domain_at(int level) const {
  const double d = delta_at(level);
  if (model == Model::Poisson) {
    SquareWithLayer s;
    s.horizon = d;
    s.loc_mode = effective_loc_mode() == "right_strip" ? SquareLocMode::RightStrip : SquareLocMode::FullLayer;
    return s;
  }
  AnnulusWithLayer a;
  a.horizon = d;
  a.loc_mode = effective_loc_mode() == "inner_ring" ? AnnulusLocMode::InnerRing : AnnulusLocMode::FullLayer;
  return a;
}

double compute_e0(const PointCloud& cloud, std::span<const double> u_n, std::span<const double> u_l, int components,
                  NormRegion region) {
  const auto c = static_cast<std::size_t>(components);
  if (u_n.size() != cloud.size() * c || u_l.size() != cloud.size() * c)
    throw ConfigError("e0: vectors do not match the cloud");
  double sum = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (region == NormRegion::Omega && cloud.label(i) != Region::Interior) continue;
    for (std::size_t k = 0; k < c; ++k) {
      const double d = u_n[c * i + k] - u_l[c * i + k];
      sum += d * d;
    }
  }
  const double h = cloud.spacing();
  return std::sqrt(h * h * sum);
}

namespace {

std::string level_tag(const ExperimentConfig& cfg, int level) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s_%s_%s_d%.6g_h%.6g_deg%d%s", to_string(cfg.model), to_string(cfg.strategy),
                cfg.effective_loc_mode().c_str(), cfg.delta_at(level), cfg.h_at(level), cfg.rule.degree,
                cfg.rule.bond_quartic ? "b" : "");
  return buf;
}

std::optional<QuadratureRule> load_cached_rule(const ExperimentConfig& cfg, int level, const PointCloud& cloud) {
  if (cfg.weight_cache_dir.empty()) return std::nullopt;
  const auto path = std::filesystem::path(cfg.weight_cache_dir) / ("weights_" + level_tag(cfg, level) + ".txt");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  QuadratureRule rule;
  if (!read_weight_cache(in, cloud, cfg.delta_at(level), rule)) return std::nullopt;
  return rule;
}

void store_cached_rule(const ExperimentConfig& cfg, int level, const PointCloud& cloud, const QuadratureRule& rule) {
  if (cfg.weight_cache_dir.empty()) return;
  std::filesystem::create_directories(cfg.weight_cache_dir);
  const auto path = std::filesystem::path(cfg.weight_cache_dir) / ("weights_" + level_tag(cfg, level) + ".txt");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write weight cache " + path.string());
  write_weight_cache(out, rule, cloud);
}

void export_matrix(const ExperimentConfig& cfg, int level, const CsrMatrix& a) {
  if (cfg.matrix_export_dir.empty()) return;
  std::filesystem::create_directories(cfg.matrix_export_dir);
  const auto path = std::filesystem::path(cfg.matrix_export_dir) / ("matrix_" + level_tag(cfg, level) + ".txt");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write matrix export " + path.string());
  write_coordinate(out, a);
}

}  // namespace

LevelResult run_level(const ExperimentConfig& config, int level, std::vector<double>* u_n_out,
                      std::vector<double>* u_l_out) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const ManufacturedCase mc = registry_lookup(config.case_name, config.nu, config.young_E);
  const double delta = config.delta_at(level);
  const double h = config.h_at(level);
  const PointCloud cloud(config.domain_at(level), h);
  const bool dtn = config.strategy == Strategy::Dtn;

  std::optional<QuadratureRule> cached = load_cached_rule(config, level, cloud);
  Discretization disc =
      prepare_discretization(config.model, cloud, delta, mc.material, dtn, config.rule, cached ? &*cached : nullptr);
  if (!cached) store_cached_rule(config, level, cloud, disc.rule);

  const CsrMatrix op = equation_matrix(disc);
  const int c = mc.components;

  std::vector<double> u_l;
  if (config.provider == ProviderKind::Fd) {
    const auto& square = std::get<SquareWithLayer>(cloud.domain());
    const GridFunction g = fd_poisson_solve(
        square, h / config.fd_refinement, [&](Vec2 x) { return mc.u(x)[0]; }, [&](Vec2 x) { return mc.s(x)[0]; });
    u_l = sample_local_solution(cloud, [&](Vec2 x) { return FieldValue{g(x), 0.0}; }, 1);
  } else {
    u_l = sample_local_solution(cloud, mc.u, c);
  }
  const std::vector<double>& v_n = u_l;
  const std::vector<double> s = sample_local_solution(cloud, mc.s, c);

  const AssembledSystem sys = dtn ? build_dtn_system(cloud, disc.dofs_per_point(), op, flux_matrix(disc), u_l, v_n, s)
                                  : build_dtd_system(cloud, disc.dofs_per_point(), op, u_l, v_n, s);
  export_matrix(config, level, sys.matrix);

  SolveResult sol = solve(sys.matrix, sys.rhs, config.solve);

  LevelResult r;
  r.delta = delta;
  r.h = h;
  r.points = cloud.size();
  r.unknowns = sys.matrix.rows();
  r.nonzeros = sys.matrix.nnz();
  r.e0 = compute_e0(cloud, sol.x, u_l, c, config.norm_region);
  r.stats = sol.stats;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (u_n_out) *u_n_out = std::move(sol.x);
  if (u_l_out) *u_l_out = std::move(u_l);
  return r;
}

double consistency_threshold(Model model) { return model == Model::Poisson ? 1e-10 : 1e-9; }

ConvergenceReport run_consistency(const ExperimentConfig& config) {
  if (config.case_name != "poisson_linear" && config.case_name != "poisson_cubic" && config.case_name != "lps_linear")
    throw ConfigError("consistency runs need poisson_linear, poisson_cubic or lps_linear");
  ConvergenceReport rep;
  rep.kind = "consistency";
  rep.config = config;
  rep.config.levels = 1;
  rep.threshold = consistency_threshold(config.model);
  rep.levels.push_back(run_level(rep.config, 0));
  rep.passed = rep.levels[0].e0 <= rep.threshold;
  return rep;
}

ConvergenceReport run_convergence(const ExperimentConfig& config) {
  if (config.levels < 2) throw ConfigError("a convergence study needs at least two levels");
  ConvergenceReport rep;
  rep.kind = "converge";
  rep.config = config;
  for (int k = 0; k < config.levels; ++k) {
    LevelResult r = run_level(config, k);
    if (k > 0) {
      const double prev = rep.levels.back().e0;
      r.rate = std::log2(prev / r.e0);
    }
    rep.levels.push_back(r);
  }
  const double last = rep.levels.back().rate.value_or(0.0);
  rep.passed = std::isfinite(last) && last >= rep.rate_min && last <= rep.rate_max;
  return rep;
}

namespace {

std::string fmt10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "delta,h,M,e0,rate\n";
  for (const auto& l : report.levels) {
    out << fmt10(l.delta) << ',' << fmt10(l.h) << ',' << l.points << ',' << fmt10(l.e0) << ',';
    if (l.rate) out << fmt10(*l.rate);
    out << '\n';
  }
}

void write_json(std::ostream& out, const ConvergenceReport& report) {
  using nlohmann::json;
  const ExperimentConfig& c = report.config;
  json cfg = {{"model", to_string(c.model)},
              {"strategy", to_string(c.strategy)},
              {"case", c.case_name},
              {"delta0", c.delta0},
              {"ratio", c.ratio},
              {"levels", c.levels},
              {"loc_mode", c.effective_loc_mode()},
              {"local_provider", to_string(c.provider)},
              {"norm_region", to_string(c.norm_region)},
              {"solver", to_string(c.solve.method)},
              {"tol", c.solve.tol},
              {"equilibrate", c.solve.equilibrate},
              {"quadrature_degree", c.rule.degree},
              {"bond_quartic", c.rule.bond_quartic}};
  if (c.model == Model::Lps) {
    cfg["nu"] = c.nu;
    cfg["E"] = c.young_E;
  }
  if (c.provider == ProviderKind::Fd) cfg["fd_refinement"] = c.fd_refinement;
  json levels = json::array();
  for (const auto& l : report.levels) {
    json j = {{"delta", l.delta},
              {"h", l.h},
              {"M", l.points},
              {"e0", l.e0},
              {"rate", l.rate ? json(*l.rate) : json(nullptr)},
              {"unknowns", l.unknowns},
              {"nonzeros", l.nonzeros},
              {"solver", {{"method", to_string(l.stats.method)},
                          {"iterations", l.stats.iterations},
                          {"residual", l.stats.residual},
                          {"unscaled_residual", l.stats.unscaled_residual}}},
              {"seconds", l.seconds}};
    levels.push_back(std::move(j));
  }
  json doc = {{"kind", report.kind}, {"config", cfg}, {"levels", levels}, {"passed", report.passed}};
  if (report.kind == "consistency")
    doc["threshold"] = report.threshold;
  else
    doc["rate_interval"] = {report.rate_min, report.rate_max};
  out << doc.dump(2) << '\n';
}

}  // namespace nlvc
