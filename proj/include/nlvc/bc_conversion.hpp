#pragma once

#include <span>
#include <vector>

#include "nlvc/geometry.hpp"
#include "nlvc/operators.hpp"
#include "nlvc/sparse.hpp"

namespace nlvc {

/// One square linear system per strategy. Point i owns rows
/// dofs_per_point * i + k, k < dofs_per_point.
struct AssembledSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<RowKind> row_kind;
  std::size_t dofs_per_point = 1;

  std::size_t row_of(std::size_t point, std::size_t component = 0) const {
    return dofs_per_point * point + component;
  }
};

/// Dirichlet-to-Dirichlet: equation rows -L u = s on Interior points and
/// identity rows on the whole layer (u_l on OmegaLoc, v_n on OmegaNloc).
/// `operator_rows` holds L at Interior points. Sample vectors span the whole
/// cloud; an entry that a row needs must be finite or AssemblyError is thrown.
AssembledSystem build_dtd_system(const PointCloud& cloud, std::size_t dofs_per_point, const CsrMatrix& operator_rows,
                                 std::span<const double> u_l, std::span<const double> v_n,
                                 std::span<const double> s);

/// Dirichlet-to-Neumann: as DtD, but OmegaLoc points get the rows -N with
/// right-hand side -N u_l, where N are the `flux_rows`. Throws ConfigError
/// when OmegaNloc is empty (the operator then has a nontrivial kernel).
AssembledSystem build_dtn_system(const PointCloud& cloud, std::size_t dofs_per_point, const CsrMatrix& operator_rows,
                                 const CsrMatrix& flux_rows, std::span<const double> u_l,
                                 std::span<const double> v_n, std::span<const double> s);

}  // namespace nlvc
