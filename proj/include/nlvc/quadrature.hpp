#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nlvc/geometry.hpp"

namespace nlvc {

enum class KernelKind {
  /// gamma = 4 / (pi delta^4) on the open ball of radius delta.
  PoissonConstant,
  /// gamma = 1 on the open ball of radius delta.
  LpsIndicator,
};

struct KernelSpec {
  KernelKind kind = KernelKind::PoissonConstant;
  double delta = 0.0;

  /// Kernel value at bond length r (0 outside the open ball).
  double operator()(double r) const;
};

KernelSpec poisson_constant_kernel(double delta);
KernelSpec lps_indicator_kernel(double delta);

/// Number of monomials z1^a z2^b with a + b <= degree.
constexpr std::size_t monomial_count(int degree) {
  return degree < 0 ? 0 : static_cast<std::size_t>((degree + 1) * (degree + 2) / 2);
}

/// Position of z1^a z2^b in graded order: (0,0),(1,0),(0,1),(2,0),(1,1),...
constexpr std::size_t monomial_index(int a, int b) {
  const int d = a + b;
  return monomial_count(d - 1) + static_cast<std::size_t>(b);
}

/// Exponents (4,0),(3,1) of the bond-normalized quartic moments
/// int z^alpha / |z|^2 dz. The other three quartic entries follow from these
/// and the quadratic moments ((2,2) = x^2 - (4,0), (1,3) = xy - (3,1),
/// (0,4) = y^2 - (2,2)), so adding them would make the constraints rank
/// deficient.
inline constexpr std::array<std::array<int, 2>, 2> kBondQuarticExponents{{{4, 0}, {3, 1}}};

/// Moments of a region R relative to a center c:
/// poly[monomial_index(a,b)] = int_R (y1-c1)^a (y2-c2)^b dy, and optionally
/// bond[k] = int_R (y-c)^alpha_k / |y-c|^2 dy for the kBondQuarticExponents.
struct MomentVector {
  int degree = 0;
  std::vector<double> poly;
  std::vector<double> bond;

  double at(int a, int b) const { return poly.at(monomial_index(a, b)); }
};

/// Analytic moments of the full ball B_delta(0).
MomentVector full_ball_moments(double delta, int degree, bool with_bond_quartic = false);

/// Moments of B_delta(center) intersected with the extended domain. The
/// region boundary is split into circular arcs and straight segments and the
/// moments are evaluated as boundary integrals (divergence theorem), each
/// piece with `refinement` Gauss-Legendre panels. Returns full_ball_moments
/// when the ball lies inside the domain.
MomentVector truncated_ball_moments(Vec2 center, double delta, const DomainShape& domain, int degree,
                                    int refinement = 8);

/// True when B_delta(x) is cut by the boundary of the extended domain.
bool ball_is_truncated(const DomainShape& domain, Vec2 x, double delta);

struct StencilWeights {
  std::vector<std::size_t> neighbors;
  std::vector<double> weights;
};

/// Minimum-norm weights (in units of h^2) over the strict delta-neighbors of
/// point i that reproduce every moment in `moments` exactly. Throws
/// QuadratureError if the constraints are rank deficient on the stencil.
StencilWeights compute_weights(const PointCloud& cloud, std::size_t i, double delta, const MomentVector& moments);

struct RuleOptions {
  int degree = 3;
  /// Add the bond-normalized quartic constraints on full balls (LPS).
  bool bond_quartic = false;
  int refinement = 8;
};

/// Per-point quadrature stencils in compressed form. Points that were not
/// requested have an empty stencil and degree -1.
class QuadratureRule {
 public:
  QuadratureRule() = default;
  QuadratureRule(std::size_t points, double delta);

  double delta() const { return delta_; }
  std::size_t size() const { return degree_.size(); }

  bool has(std::size_t i) const { return degree_[i] >= 0; }
  std::span<const std::size_t> neighbors(std::size_t i) const;
  std::span<const double> weights(std::size_t i) const;
  int degree(std::size_t i) const { return degree_[i]; }
  bool truncated(std::size_t i) const { return truncated_[i] != 0; }

  /// Stencils must be appended in ascending point order.
  void set(std::size_t i, const StencilWeights& stencil, int degree, bool truncated);
  void finalize();

 private:
  double delta_ = 0.0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> neighbors_;
  std::vector<double> weights_;
  std::vector<int> degree_;
  std::vector<char> truncated_;
  std::size_t filled_ = 0;
};

/// Builds stencils for every point with needed[i] != 0 (all points when
/// `needed` is empty). Full balls use the requested degree; truncated balls
/// step down in degree until the constraints are solvable.
QuadratureRule build_quadrature_rule(const PointCloud& cloud, double delta, const RuleOptions& options,
                                     std::span<const char> needed = {});

/// m_i = sum_j w_ij gamma(|x_j - x_i|) |x_j - x_i|^2. Throws AssemblyError
/// when not positive.
double discrete_m(const PointCloud& cloud, std::size_t i, const QuadratureRule& rule, const KernelSpec& kernel);

/// Weight cache: text table of "i j w" records (17 significant digits) after
/// a header that identifies the rule.
void write_weight_cache(std::ostream& out, const QuadratureRule& rule, const PointCloud& cloud);
/// Returns false when the header does not match `cloud`/`delta`.
bool read_weight_cache(std::istream& in, const PointCloud& cloud, double delta, QuadratureRule& rule);

}  // namespace nlvc
