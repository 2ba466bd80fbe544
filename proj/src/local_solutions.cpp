#include "nlvc/local_solutions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlvc/errors.hpp"

namespace nlvc {

LameCylinderParams LameCylinderParams::make(double nu, double E, double p0, double R0, double R1) {
  if (!(R1 > R0 && R0 > 0.0)) throw ConfigError("cylinder radii must satisfy 0 < R0 < R1");
  if (!(E > 0.0)) throw ConfigError("Young's modulus must be positive");
  if (!(nu > 0.0 && nu < 0.5)) throw ConfigError("Poisson ratio must lie in (0, 0.5)");
  LameCylinderParams p;
  p.p0 = p0;
  p.R0 = R0;
  p.R1 = R1;
  p.E = E;
  p.nu = nu;
  const double den = E * (R1 * R1 - R0 * R0);
  p.A = (1.0 + nu) * (1.0 - 2.0 * nu) * p0 * R0 * R0 / den;
  p.B = (1.0 + nu) * p0 * R0 * R0 * R1 * R1 / den;
  return p;
}

Vec2 LameCylinderParams::displacement(Vec2 x) const {
  const double r2 = dot(x, x);
  if (r2 == 0.0) throw DomainError("cylinder displacement is singular at the origin");
  return (A + B / r2) * x;
}

const std::vector<std::string>& registry_names() {
  static const std::vector<std::string> names{"poisson_linear", "poisson_cubic", "poisson_sin",
                                              "poisson_quartic", "lps_linear", "lps_cylinder"};
  return names;
}

ManufacturedCase registry_lookup(const std::string& name, double nu, double young_E) {
  ManufacturedCase c;
  c.name = name;
  if (name.rfind("poisson_", 0) == 0) {
    c.model = Model::Poisson;
    c.components = 1;
    c.domain = SquareWithLayer{};
    if (name == "poisson_linear") {
      c.u = [](Vec2 x) { return FieldValue{x.x + x.y, 0.0}; };
      c.s = [](Vec2) { return FieldValue{0.0, 0.0}; };
    } else if (name == "poisson_cubic") {
      c.u = [](Vec2 x) { return FieldValue{x.x * x.x * x.x + x.y * x.y * x.y, 0.0}; };
      c.s = [](Vec2 x) { return FieldValue{-6.0 * (x.x + x.y), 0.0}; };
    } else if (name == "poisson_sin") {
      c.u = [](Vec2 x) { return FieldValue{std::sin(x.x) * std::cos(x.y), 0.0}; };
      c.s = [](Vec2 x) { return FieldValue{2.0 * std::sin(x.x) * std::cos(x.y), 0.0}; };
    } else if (name == "poisson_quartic") {
      c.u = [](Vec2 x) { return FieldValue{std::pow(x.x, 4) + std::pow(x.y, 4), 0.0}; };
      c.s = [](Vec2 x) { return FieldValue{-12.0 * (x.x * x.x + x.y * x.y), 0.0}; };
    } else {
      throw LookupError("unknown case '" + name + "'");
    }
    return c;
  }
  if (name == "lps_linear" || name == "lps_cylinder") {
    c.model = Model::Lps;
    c.components = 2;
    c.domain = AnnulusWithLayer{};
    c.material = MaterialParams::plane_strain(young_E, nu);
    c.s = [](Vec2) { return FieldValue{0.0, 0.0}; };
    if (name == "lps_linear") {
      c.u = [](Vec2 x) { return FieldValue{10.0 * x.x + 2.0 * x.y, 3.0 * x.x + 4.0 * x.y}; };
    } else {
      const auto lame = LameCylinderParams::make(nu, young_E);
      c.u = [lame](Vec2 x) {
        const Vec2 d = lame.displacement(x);
        return FieldValue{d.x, d.y};
      };
    }
    return c;
  }
  throw LookupError("unknown case '" + name + "'");
}

GridFunction::GridFunction(Vec2 origin, double spacing, std::size_t nx, std::size_t ny)
    : origin_(origin), h_(spacing), nx_(nx), ny_(ny), values_((nx + 1) * (ny + 1), 0.0) {}

Vec2 GridFunction::node_position(std::size_t i, std::size_t j) const {
  return {origin_.x + static_cast<double>(i) * h_, origin_.y + static_cast<double>(j) * h_};
}

double GridFunction::operator()(Vec2 x) const {
  const double s = (x.x - origin_.x) / h_;
  const double t = (x.y - origin_.y) / h_;
  const double eps = 1e-12 * static_cast<double>(std::max(nx_, ny_));
  if (s < -eps || t < -eps || s > static_cast<double>(nx_) + eps || t > static_cast<double>(ny_) + eps) {
    std::ostringstream msg;
    msg << "grid function sampled outside its box at (" << x.x << ", " << x.y << ")";
    throw DomainError(msg.str());
  }
  // snap to the nearest node when within rounding, so node samples are exact
  const double sr = std::round(s), tr = std::round(t);
  const double ss = std::abs(s - sr) <= eps ? sr : s;
  const double tt = std::abs(t - tr) <= eps ? tr : t;
  auto i = static_cast<std::size_t>(std::clamp(std::floor(ss), 0.0, static_cast<double>(nx_ - 1)));
  auto j = static_cast<std::size_t>(std::clamp(std::floor(tt), 0.0, static_cast<double>(ny_ - 1)));
  const double a = std::clamp(ss - static_cast<double>(i), 0.0, 1.0);
  const double b = std::clamp(tt - static_cast<double>(j), 0.0, 1.0);
  return (1 - a) * (1 - b) * node(i, j) + a * (1 - b) * node(i + 1, j) + (1 - a) * b * node(i, j + 1) +
         a * b * node(i + 1, j + 1);
}

GridFunction fd_poisson_solve(const SquareWithLayer& domain, double h_loc, const std::function<double(Vec2)>& dirichlet,
                              const std::function<double(Vec2)>& s, FdSolveInfo* info) {
  if (!(h_loc > 0.0)) throw ConfigError("h_loc must be positive");
  const double lo = -domain.horizon;
  const double side = domain.side + 2.0 * domain.horizon;
  const double cells = side / h_loc;
  const double n_round = std::round(cells);
  if (n_round < 2.0 || std::abs(cells - n_round) > 1e-9 * cells)
    throw ConfigError("h_loc must divide the side of the extended square");
  const auto n = static_cast<std::size_t>(n_round);
  GridFunction g({lo, lo}, h_loc, n, n);

  for (std::size_t k = 0; k <= n; ++k) {
    g.node(k, 0) = dirichlet(g.node_position(k, 0));
    g.node(k, n) = dirichlet(g.node_position(k, n));
    g.node(0, k) = dirichlet(g.node_position(0, k));
    g.node(n, k) = dirichlet(g.node_position(n, k));
  }

  // unknowns: interior nodes (1..n-1)^2, row-major; system scaled by h^2
  const std::size_t m = n - 1;
  auto id = [m](std::size_t i, std::size_t j) { return (j - 1) * m + (i - 1); };
  std::vector<SparseRow> rows(m * m);
  std::vector<double> rhs(m * m);
  const double h2 = h_loc * h_loc;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t i = 1; i < n; ++i) {
      const std::size_t r = id(i, j);
      SparseRow& row = rows[r];
      double b = h2 * s(g.node_position(i, j));
      row.add(r, 4.0);
      const std::size_t ni[4] = {i - 1, i + 1, i, i};
      const std::size_t nj[4] = {j, j, j - 1, j + 1};
      for (int q = 0; q < 4; ++q) {
        if (ni[q] == 0 || ni[q] == n || nj[q] == 0 || nj[q] == n)
          b += g.node(ni[q], nj[q]);
        else
          row.add(id(ni[q], nj[q]), -1.0);
      }
      rhs[r] = b;
    }
  }
  const CsrMatrix a = CsrMatrix::from_rows(std::move(rows), m * m);

  SolveOptions opt;
  opt.method = SolverMethod::Cg;
  opt.max_iter = 50 * m * m + 1000;
  const double bnorm = norm2(rhs);
  opt.tol = bnorm > 0.0 ? std::min(1e-10, 1e-11 / bnorm) : 1e-10;
  const SolveResult sol = solve(a, rhs, opt);

  const std::vector<double> ax = spmv(a, sol.x);
  double rmax = 0.0;
  for (std::size_t k = 0; k < ax.size(); ++k) rmax = std::max(rmax, std::abs(ax[k] - rhs[k]));
  if (rmax > 1e-10) throw NumericError("finite-difference solve: residual above 1e-10", rmax);
  if (info) {
    info->stats = sol.stats;
    info->max_residual = rmax;
  }
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t i = 1; i < n; ++i) g.node(i, j) = sol.x[id(i, j)];
  return g;
}

std::vector<double> sample_local_solution(const PointCloud& cloud, const FieldFn& field, int components) {
  if (components != 1 && components != 2) throw ConfigError("a field has one or two components");
  const auto c = static_cast<std::size_t>(components);
  std::vector<double> out(cloud.size() * c);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const FieldValue v = field(cloud.point(i));
    for (std::size_t k = 0; k < c; ++k) out[c * i + k] = v[k];
  }
  return out;
}

}  // namespace nlvc
