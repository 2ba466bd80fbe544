#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nlvc/geometry.hpp"
#include "nlvc/operators.hpp"
#include "nlvc/sparse.hpp"

namespace nlvc {

enum class Strategy { Dtd, Dtn };
enum class ProviderKind { Analytic, Fd };
enum class NormRegion { Full, Omega };

const char* to_string(Strategy s);
const char* to_string(ProviderKind p);
const char* to_string(NormRegion r);
Strategy parse_strategy(const std::string& name);
ProviderKind parse_provider(const std::string& name);
NormRegion parse_norm_region(const std::string& name);

struct ExperimentConfig {
  Model model = Model::Poisson;
  Strategy strategy = Strategy::Dtd;
  std::string case_name = "poisson_linear";
  double delta0 = 0.25;
  /// delta / h, constant over levels.
  double ratio = 2.5;
  int levels = 1;
  /// full_layer, right_strip (square), inner_ring (annulus) or auto: full_layer
  /// for DtD, right_strip or inner_ring for DtN.
  std::string loc_mode = "auto";
  double nu = 0.3;
  double young_E = 1.0;
  ProviderKind provider = ProviderKind::Analytic;
  /// h_loc = h / fd_refinement for the finite-difference provider.
  int fd_refinement = 8;
  NormRegion norm_region = NormRegion::Full;
  /// Row equilibration is on by default.
  SolveOptions solve{.equilibrate = true};
  RuleOptions rule;
  /// Optional directories; empty disables the feature.
  std::string weight_cache_dir;
  std::string matrix_export_dir;

  /// Model defaults: delta0 0.25 and ratio
  /// 2.5 for Poisson, delta0 0.3 and ratio 3.2 for LPS.
  static ExperimentConfig defaults_for(Model model);

  /// Throws ConfigError for inconsistent settings.
  void validate() const;

  /// loc_mode with auto resolved.
  std::string effective_loc_mode() const;

  double delta_at(int level) const;
  double h_at(int level) const { return delta_at(level) / ratio; }
  DomainShape domain_at(int level) const;
};

struct LevelResult {
  double delta = 0.0;
  double h = 0.0;
  std::size_t points = 0;
  std::size_t unknowns = 0;
  std::size_t nonzeros = 0;
  double e0 = 0.0;
  std::optional<double> rate;
  SolveStats stats;
  double seconds = 0.0;
};

struct ConvergenceReport {
  std::string kind;  // "consistency" or "converge"
  ExperimentConfig config;
  std::vector<LevelResult> levels;
  /// Consistency: e0 threshold. Convergence: accepted final-rate interval.
  double threshold = 0.0;
  double rate_min = 1.7;
  double rate_max = 2.4;
  bool passed = false;
};

/// Full solve at one level; u_n and u_l are returned when requested.
LevelResult run_level(const ExperimentConfig& config, int level, std::vector<double>* u_n = nullptr,
                      std::vector<double>* u_l = nullptr);

/// e0 = sqrt(h^2 sum_i |u_n(x_i) - u_l(x_i)|^2) over the whole cloud, or over
/// Interior points only with NormRegion::Omega.
double compute_e0(const PointCloud& cloud, std::span<const double> u_n, std::span<const double> u_l, int components,
                  NormRegion region = NormRegion::Full);

/// Pass threshold of the consistency test: 1e-10 for Poisson, 1e-9 for LPS.
double consistency_threshold(Model model);

/// One solve at delta0 with a polynomial case the operator reproduces.
ConvergenceReport run_consistency(const ExperimentConfig& config);

/// Levels k = 0..levels-1 with delta_k = delta0 / 2^k; passes when the final
/// rate lies in [1.7, 2.4].
ConvergenceReport run_convergence(const ExperimentConfig& config);

/// CSV: header delta,h,M,e0,rate; 10 significant digits; empty first rate.
void write_csv(std::ostream& out, const ConvergenceReport& report);
/// JSON: the CSV fields plus solver statistics and the configuration.
void write_json(std::ostream& out, const ConvergenceReport& report);

}  // namespace nlvc
