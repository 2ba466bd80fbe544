#include "nlvc/bc_conversion.hpp"

#include <cmath>
#include <string>

#include "nlvc/errors.hpp"

namespace nlvc {

namespace {

void check_shapes(const PointCloud& cloud, std::size_t c, const CsrMatrix& rows, std::span<const double> u_l,
                  std::span<const double> v_n, std::span<const double> s) {
  if (c != 1 && c != 2) throw ConfigError("dofs per point must be 1 or 2");
  const std::size_t n = cloud.size() * c;
  if (rows.rows() != n || rows.cols() != n) throw AssemblyError("operator rows do not match the cloud");
  if (u_l.size() != n) throw AssemblyError("local solution samples do not cover the cloud");
  if (v_n.size() != n) throw AssemblyError("nonlocal data samples do not cover the cloud");
  if (s.size() != n) throw AssemblyError("forcing samples do not cover the cloud");
}

double require_sample(std::span<const double> v, std::size_t k, const char* what) {
  if (!std::isfinite(v[k])) throw AssemblyError(std::string("missing ") + what + " sample at row " + std::to_string(k));
  return v[k];
}

AssembledSystem assemble(const PointCloud& cloud, std::size_t c, const CsrMatrix& op, const CsrMatrix* flux,
                         std::span<const double> u_l, std::span<const double> v_n, std::span<const double> s) {
  const std::size_t m = cloud.size();
  const std::size_t n = m * c;
  AssembledSystem sys;
  sys.dofs_per_point = c;
  sys.rhs.assign(n, 0.0);
  sys.row_kind.assign(n, RowKind::Equation);

  std::vector<double> flux_rhs;
  if (flux) {
    flux_rhs = spmv(*flux, u_l);
  }

  std::vector<SparseRow> rows(n);
  for (std::size_t i = 0; i < m; ++i) {
    const Region region = cloud.label(i);
    for (std::size_t k = 0; k < c; ++k) {
      const std::size_t r = c * i + k;
      SparseRow& row = rows[r];
      if (region == Region::Interior) {
        const auto cols = op.row_cols(r);
        const auto vals = op.row_vals(r);
        if (cols.empty()) throw AssemblyError("no operator row at interior point " + std::to_string(i));
        for (std::size_t q = 0; q < cols.size(); ++q) row.add(cols[q], -vals[q]);
        sys.row_kind[r] = RowKind::Equation;
        sys.rhs[r] = require_sample(s, r, "forcing");
      } else if (region == Region::OmegaLoc && flux) {
        const auto cols = flux->row_cols(r);
        const auto vals = flux->row_vals(r);
        if (cols.empty()) throw AssemblyError("no flux row at layer point " + std::to_string(i));
        for (std::size_t q = 0; q < cols.size(); ++q) row.add(cols[q], -vals[q]);
        sys.row_kind[r] = RowKind::FluxConstraint;
        if (!std::isfinite(flux_rhs[r]))
          throw AssemblyError("missing local solution samples in the flux stencil of point " + std::to_string(i));
        sys.rhs[r] = -flux_rhs[r];
      } else {
        row.add(r, 1.0);
        sys.row_kind[r] = RowKind::DirichletIdentity;
        sys.rhs[r] = region == Region::OmegaLoc ? require_sample(u_l, r, "local solution")
                                                : require_sample(v_n, r, "nonlocal data");
      }
    }
  }
  sys.matrix = CsrMatrix::from_rows(std::move(rows), n);
  return sys;
}

}  // namespace

AssembledSystem build_dtd_system(const PointCloud& cloud, std::size_t dofs_per_point, const CsrMatrix& operator_rows,
                                 std::span<const double> u_l, std::span<const double> v_n,
                                 std::span<const double> s) {
  check_shapes(cloud, dofs_per_point, operator_rows, u_l, v_n, s);
  return assemble(cloud, dofs_per_point, operator_rows, nullptr, u_l, v_n, s);
}

AssembledSystem build_dtn_system(const PointCloud& cloud, std::size_t dofs_per_point, const CsrMatrix& operator_rows,
                                 const CsrMatrix& flux_rows, std::span<const double> u_l,
                                 std::span<const double> v_n, std::span<const double> s) {
  check_shapes(cloud, dofs_per_point, operator_rows, u_l, v_n, s);
  if (flux_rows.rows() != operator_rows.rows() || flux_rows.cols() != operator_rows.cols())
    throw AssemblyError("flux rows do not match the cloud");
  if (cloud.count(Region::OmegaNloc) == 0)
    throw ConfigError("DtN needs a nonempty OmegaNloc; with flux constraints on the whole layer the system is singular");
  return assemble(cloud, dofs_per_point, operator_rows, &flux_rows, u_l, v_n, s);
}

}  // namespace nlvc
