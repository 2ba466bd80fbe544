#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nlvc/geometry.hpp"
#include "nlvc/quadrature.hpp"
#include "nlvc/sparse.hpp"

namespace nlvc {

enum class Model { Poisson, Lps };

const char* to_string(Model m);
Model parse_model(const std::string& name);

enum class RowKind : std::uint8_t { Equation, FluxConstraint, DirichletIdentity };

/// Plane-strain elastic constants.
struct MaterialParams {
  double young_E = 1.0;
  double poisson_nu = 0.3;
  double lambda = 0.0;
  double mu = 0.0;

  /// Throws ConfigError unless E > 0 and nu in (0, 0.5).
  static MaterialParams plane_strain(double young_E, double poisson_nu);
};

// LPS constants for two dimensions.
inline constexpr double kLpsC1 = 2.0;
inline constexpr double kLpsC2 = 16.0;

/// Nonlocal Laplacian row at an Interior point:
/// r[j] = 2 w_ij gamma_ij, r[i] = -sum_j r[j].
SparseRow assemble_poisson_row(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                               std::size_t i);

/// Nonlocal flux row N u(x_i) = -sum_j w_ij gamma_ij (u_j - u_i) at a layer
/// point, with the rule built on the truncated ball.
SparseRow assemble_poisson_flux_row(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                                    std::size_t i);

/// Dilatation operator (M x 2M, displacements interleaved per point):
/// theta_i = (2 / m_i) sum_j w_ij gamma_ij z_ij . (u_j - u_i).
/// Points without a stencil get an empty row.
CsrMatrix assemble_theta_operator(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                                  std::span<const double> m_values);

/// The two LPS rows (x and y components) at point i. Used at Interior points
/// for the equation and at layer points for the LPS flux; the algebra is
/// identical, only the neighbor set (truncated at the domain edge) differs.
std::array<SparseRow, 2> assemble_lps_rows(const PointCloud& cloud, const QuadratureRule& rule,
                                           const KernelSpec& kernel, const MaterialParams& material,
                                           std::span<const double> m_values, const CsrMatrix& theta, std::size_t i);

std::array<SparseRow, 2> assemble_lps_flux_rows(const PointCloud& cloud, const QuadratureRule& rule,
                                                const KernelSpec& kernel, const MaterialParams& material,
                                                std::span<const double> m_values, const CsrMatrix& theta,
                                                std::size_t i);

/// Everything needed to assemble rows for one (model, cloud) pair.
struct Discretization {
  Model model = Model::Poisson;
  const PointCloud* cloud = nullptr;
  KernelSpec kernel;
  MaterialParams material;
  QuadratureRule rule;
  std::vector<double> m_values;  // LPS only; 0 where no stencil
  CsrMatrix theta;               // LPS only

  std::size_t dofs_per_point() const { return model == Model::Lps ? 2 : 1; }
};

/// Builds stencils (and for LPS, m_i and the dilatation operator) on every
/// point the equation rows, and the flux rows when `with_flux`, reference.
/// A `preset` rule (e.g. from the weight cache) is used instead of building
/// one; it must cover the same points.
Discretization prepare_discretization(Model model, const PointCloud& cloud, double delta,
                                      const MaterialParams& material, bool with_flux,
                                      const RuleOptions& options, const QuadratureRule* preset = nullptr);

/// Operator rows at every Interior point; other rows are empty.
CsrMatrix equation_matrix(const Discretization& disc);

/// Flux rows N at every OmegaLoc point; other rows are empty.
CsrMatrix flux_matrix(const Discretization& disc);

}  // namespace nlvc
