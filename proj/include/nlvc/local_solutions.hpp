#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "nlvc/geometry.hpp"
#include "nlvc/operators.hpp"
#include "nlvc/sparse.hpp"

namespace nlvc {

/// Value of a scalar (component 0) or 2-vector field at a point.
using FieldValue = std::array<double, 2>;
using FieldFn = std::function<FieldValue(Vec2)>;

/// A local solution u_l and its forcing s. For Poisson s = -Laplacian(u_l);
/// for LPS s = -div sigma(u_l).
struct ManufacturedCase {
  std::string name;
  Model model = Model::Poisson;
  int components = 1;
  FieldFn u;
  FieldFn s;
  /// Horizon is left at zero; the harness fills it per level.
  DomainShape domain;
  MaterialParams material;
};

/// Thick-walled cylinder under internal pressure (plane strain):
/// u = A x + B x / |x|^2.
struct LameCylinderParams {
  double p0 = 0.1;
  double R0 = 1.0;
  double R1 = 1.5;
  double E = 1.0;
  double nu = 0.3;
  double A = 0.0;
  double B = 0.0;

  static LameCylinderParams make(double nu, double E = 1.0, double p0 = 0.1, double R0 = 1.0, double R1 = 1.5);
  Vec2 displacement(Vec2 x) const;
};

/// Names accepted by registry_lookup.
const std::vector<std::string>& registry_names();

/// Throws LookupError for unknown names. `nu` and `young_E` only affect the
/// LPS cases.
ManufacturedCase registry_lookup(const std::string& name, double nu = 0.3, double young_E = 1.0);

/// Node values of a uniform grid over an axis-aligned box, sampled by
/// bilinear interpolation.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Vec2 origin, double spacing, std::size_t nx, std::size_t ny);

  Vec2 origin() const { return origin_; }
  double spacing() const { return h_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }

  double& node(std::size_t i, std::size_t j) { return values_[j * (nx_ + 1) + i]; }
  double node(std::size_t i, std::size_t j) const { return values_[j * (nx_ + 1) + i]; }
  Vec2 node_position(std::size_t i, std::size_t j) const;

  /// Throws DomainError outside the box (with a 1e-12 relative margin).
  double operator()(Vec2 x) const;

 private:
  Vec2 origin_;
  double h_ = 0.0;
  std::size_t nx_ = 0, ny_ = 0;  // cells per direction
  std::vector<double> values_;
};

struct FdSolveInfo {
  SolveStats stats;
  double max_residual = 0.0;  // max-norm of the h^2-scaled discrete residual
};

/// Five-point finite-difference solution of -Laplacian(u) = s on the extended
/// square with Dirichlet data on its boundary. Throws ConfigError when
/// `h_loc` does not divide the side and NumericError when the max-norm
/// residual exceeds 1e-10.
GridFunction fd_poisson_solve(const SquareWithLayer& domain, double h_loc, const std::function<double(Vec2)>& dirichlet,
                              const std::function<double(Vec2)>& s, FdSolveInfo* info = nullptr);

/// Samples a field at every cloud point; `components` entries per point.
std::vector<double> sample_local_solution(const PointCloud& cloud, const FieldFn& field, int components);

}  // namespace nlvc
