#include "nlvc/operators.hpp"

#include <cmath>
#include <sstream>

#include "nlvc/errors.hpp"

namespace nlvc {

namespace {

void require_stencil(const QuadratureRule& rule, std::size_t i, const char* what) {
  if (i >= rule.size() || !rule.has(i)) {
    std::ostringstream msg;
    msg << what << ": no quadrature stencil at point " << i;
    throw AssemblyError(msg.str());
  }
}

void require_label(const PointCloud& cloud, std::size_t i, bool interior, const char* what) {
  const bool is_interior = cloud.label(i) == Region::Interior;
  if (is_interior != interior) {
    std::ostringstream msg;
    msg << what << ": point " << i << " has label " << to_string(cloud.label(i));
    throw AssemblyError(msg.str());
  }
}

std::array<SparseRow, 2> lps_rows(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                                  const MaterialParams& material, std::span<const double> m_values,
                                  const CsrMatrix& theta, std::size_t i) {
  require_stencil(rule, i, "lps rows");
  const double mi = m_values[i];
  if (!(mi > 0.0)) throw AssemblyError("lps rows: non-positive m at point " + std::to_string(i));
  const auto nb = rule.neighbors(i);
  const auto w = rule.weights(i);
  const double dil = kLpsC1 * (material.lambda - material.mu) / mi;
  const double dev = kLpsC2 * material.mu / mi;

  std::array<SparseRow, 2> rows;
  auto add_theta = [&](std::size_t p, double c1, double c2) {
    const auto tc = theta.row_cols(p);
    const auto tv = theta.row_vals(p);
    if (tc.empty()) throw AssemblyError("lps rows: dilatation unavailable at point " + std::to_string(p));
    for (std::size_t k = 0; k < tc.size(); ++k) {
      rows[0].add(tc[k], c1 * tv[k]);
      rows[1].add(tc[k], c2 * tv[k]);
    }
  };

  double sum1 = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const std::size_t j = nb[k];
    const Vec2 z = cloud.offset(i, j);
    const double r2 = dot(z, z);
    const double wg = w[k] * kernel(std::sqrt(r2));
    // (lambda - mu) term: z (theta_i + theta_j)
    sum1 += dil * wg * z.x;
    sum2 += dil * wg * z.y;
    add_theta(j, dil * wg * z.x, dil * wg * z.y);
    // deviatoric term: (z z^T / |z|^2) (u_j - u_i)
    const double c = dev * wg / r2;
    const double k11 = c * z.x * z.x, k12 = c * z.x * z.y, k22 = c * z.y * z.y;
    rows[0].add(2 * j, k11);
    rows[0].add(2 * j + 1, k12);
    rows[1].add(2 * j, k12);
    rows[1].add(2 * j + 1, k22);
    rows[0].add(2 * i, -k11);
    rows[0].add(2 * i + 1, -k12);
    rows[1].add(2 * i, -k12);
    rows[1].add(2 * i + 1, -k22);
  }
  add_theta(i, sum1, sum2);
  rows[0].compress();
  rows[1].compress();
  return rows;
}

}  // namespace

const char* to_string(Model m) { return m == Model::Poisson ? "poisson" : "lps"; }

Model parse_model(const std::string& name) {
  if (name == "poisson") return Model::Poisson;
  if (name == "lps") return Model::Lps;
  throw ConfigError("unknown model '" + name + "'");
}

MaterialParams MaterialParams::plane_strain(double young_E, double poisson_nu) {
  if (!(young_E > 0.0)) throw ConfigError("Young's modulus must be positive");
  if (!(poisson_nu > 0.0 && poisson_nu < 0.5)) throw ConfigError("Poisson ratio must lie in (0, 0.5)");
  MaterialParams p;
  p.young_E = young_E;
  p.poisson_nu = poisson_nu;
  p.lambda = young_E * poisson_nu / ((1.0 + poisson_nu) * (1.0 - 2.0 * poisson_nu));
  p.mu = young_E / (2.0 * (1.0 + poisson_nu));
  return p;
}

SparseRow assemble_poisson_row(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                               std::size_t i) {
  require_label(cloud, i, true, "poisson row");
  require_stencil(rule, i, "poisson row");
  if (rule.truncated(i)) throw AssemblyError("poisson row: stencil of interior point " + std::to_string(i) + " is cut");
  const auto nb = rule.neighbors(i);
  const auto w = rule.weights(i);
  SparseRow row;
  double diag = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const double c = 2.0 * w[k] * kernel(norm(cloud.offset(i, nb[k])));
    row.add(nb[k], c);
    diag -= c;
  }
  row.add(i, diag);
  row.compress();
  return row;
}

SparseRow assemble_poisson_flux_row(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                                    std::size_t i) {
  require_label(cloud, i, false, "poisson flux row");
  require_stencil(rule, i, "poisson flux row");
  const auto nb = rule.neighbors(i);
  const auto w = rule.weights(i);
  SparseRow row;
  double diag = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const double c = w[k] * kernel(norm(cloud.offset(i, nb[k])));
    row.add(nb[k], -c);
    diag += c;
  }
  row.add(i, diag);
  row.compress();
  return row;
}

CsrMatrix assemble_theta_operator(const PointCloud& cloud, const QuadratureRule& rule, const KernelSpec& kernel,
                                  std::span<const double> m_values) {
  const std::size_t m = cloud.size();
  std::vector<SparseRow> rows(m);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (!rule.has(i)) continue;
    const double mi = m_values[i];
    const auto nb = rule.neighbors(i);
    const auto w = rule.weights(i);
    SparseRow& row = rows[i];
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const Vec2 z = cloud.offset(i, nb[k]);
      const double c = 2.0 / mi * w[k] * kernel(norm(z));
      row.add(2 * nb[k], c * z.x);
      row.add(2 * nb[k] + 1, c * z.y);
      s1 += c * z.x;
      s2 += c * z.y;
    }
    row.add(2 * i, -s1);
    row.add(2 * i + 1, -s2);
  }
  for (std::size_t i = 0; i < m; ++i)
    if (rule.has(i) && !(m_values[i] > 0.0)) throw AssemblyError("theta operator: non-positive m at point " + std::to_string(i));
  return CsrMatrix::from_rows(std::move(rows), 2 * m);
}

std::array<SparseRow, 2> assemble_lps_rows(const PointCloud& cloud, const QuadratureRule& rule,
                                           const KernelSpec& kernel, const MaterialParams& material,
                                           std::span<const double> m_values, const CsrMatrix& theta, std::size_t i) {
  require_label(cloud, i, true, "lps rows");
  return lps_rows(cloud, rule, kernel, material, m_values, theta, i);
}

std::array<SparseRow, 2> assemble_lps_flux_rows(const PointCloud& cloud, const QuadratureRule& rule,
                                                const KernelSpec& kernel, const MaterialParams& material,
                                                std::span<const double> m_values, const CsrMatrix& theta,
                                                std::size_t i) {
  require_label(cloud, i, false, "lps flux rows");
  return lps_rows(cloud, rule, kernel, material, m_values, theta, i);
}

Discretization prepare_discretization(Model model, const PointCloud& cloud, double delta,
                                      const MaterialParams& material, bool with_flux, const RuleOptions& options,
                                      const QuadratureRule* preset) {
  Discretization d;
  d.model = model;
  d.cloud = &cloud;
  d.material = material;
  d.kernel = model == Model::Poisson ? poisson_constant_kernel(delta) : lps_indicator_kernel(delta);

  const std::size_t m = cloud.size();
  std::vector<char> rows_at(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const Region r = cloud.label(i);
    rows_at[i] = (r == Region::Interior || (with_flux && r == Region::OmegaLoc)) ? 1 : 0;
  }
  std::vector<char> needed = rows_at;
  if (model == Model::Lps) {
    // dilatation is referenced one horizon beyond every row point
    for (std::size_t i = 0; i < m; ++i) {
      if (!rows_at[i]) continue;
      for (std::size_t j : cloud.neighbors_within(i, delta)) needed[j] = 1;
    }
  }
  if (preset) {
    if (preset->size() != m) throw AssemblyError("preset quadrature rule does not match the cloud");
    for (std::size_t i = 0; i < m; ++i)
      if (needed[i] && !preset->has(i)) throw AssemblyError("preset quadrature rule misses point " + std::to_string(i));
    d.rule = *preset;
  } else {
    d.rule = build_quadrature_rule(cloud, delta, options, needed);
  }

  if (model == Model::Lps) {
    d.m_values.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      if (d.rule.has(i)) d.m_values[i] = discrete_m(cloud, i, d.rule, d.kernel);
    d.theta = assemble_theta_operator(cloud, d.rule, d.kernel, d.m_values);
  }
  return d;
}

namespace {

CsrMatrix assemble_rows(const Discretization& disc, Region where, bool flux) {
  const PointCloud& cloud = *disc.cloud;
  const std::size_t m = cloud.size();
  const std::size_t c = disc.dofs_per_point();
  std::vector<SparseRow> rows(m * c);
  std::vector<std::string> errors(m);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (cloud.label(i) != where) continue;
    try {
      if (disc.model == Model::Poisson) {
        rows[i] = flux ? assemble_poisson_flux_row(cloud, disc.rule, disc.kernel, i)
                       : assemble_poisson_row(cloud, disc.rule, disc.kernel, i);
      } else {
        auto pair = flux ? assemble_lps_flux_rows(cloud, disc.rule, disc.kernel, disc.material, disc.m_values,
                                                  disc.theta, i)
                         : assemble_lps_rows(cloud, disc.rule, disc.kernel, disc.material, disc.m_values, disc.theta, i);
        rows[2 * i] = std::move(pair[0]);
        rows[2 * i + 1] = std::move(pair[1]);
      }
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw AssemblyError(e);
  return CsrMatrix::from_rows(std::move(rows), m * c);
}

}  // namespace

CsrMatrix equation_matrix(const Discretization& disc) { return assemble_rows(disc, Region::Interior, false); }

CsrMatrix flux_matrix(const Discretization& disc) { return assemble_rows(disc, Region::OmegaLoc, true); }

}  // namespace nlvc
