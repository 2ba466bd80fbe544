#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nlvc {

/// One sparse row under construction; duplicate columns are summed by
/// `compress()`.
struct SparseRow {
  std::vector<std::size_t> cols;
  std::vector<double> vals;

  void add(std::size_t col, double v) {
    cols.push_back(col);
    vals.push_back(v);
  }
  /// Sorts by column and merges duplicates.
  void compress();
  double dot(std::span<const double> x) const;
};

/// Compressed sparse rows with sorted, unique column indices per row.
class CsrMatrix {
 public:
  CsrMatrix() = default;
  CsrMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {indices_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  std::span<const double> row_vals(std::size_t r) const {
    return {values_.data() + offsets_[r], offsets_[r + 1] - offsets_[r]};
  }
  double coeff(std::size_t r, std::size_t c) const;
  std::vector<double> diagonal() const;

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  /// Builds from per-row data; each row is compressed first.
  static CsrMatrix from_rows(std::vector<SparseRow> rows, std::size_t cols);
  static CsrMatrix identity(std::size_t n);

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
};

/// y = A x, each row accumulated left to right so results do not depend on
/// the thread count. Throws ConfigError on shape mismatch.
std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);

/// C = A B.
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// diag(scale) A.
CsrMatrix scale_rows(const CsrMatrix& a, std::span<const double> scale);

/// Coordinate text export: "row col value" with 17 significant digits.
void write_coordinate(std::ostream& out, const CsrMatrix& a);

enum class SolverMethod { Auto, DenseLu, Gmres, Bicgstab, Cg };

const char* to_string(SolverMethod m);
SolverMethod parse_solver_method(const std::string& name);

struct SolveOptions {
  SolverMethod method = SolverMethod::Auto;
  double tol = 1e-12;
  std::size_t max_iter = 20000;
  std::size_t restart = 50;
  /// `Auto` switches from dense LU to GMRES above this size.
  std::size_t dense_limit = 4000;
  /// Divide every row and its right-hand side by the row's largest
  /// magnitude before solving; `tol` then applies to the scaled system.
  bool equilibrate = false;
};

struct SolveStats {
  SolverMethod method = SolverMethod::Auto;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||A x - b|| / ||b|| of the system solved, recomputed after the solve
  double unscaled_residual = 0.0;  // same for the system as given
};

struct SolveResult {
  std::vector<double> x;
  SolveStats stats;
};

/// Solves A x = b. The relative residual is verified after every solve;
/// NumericError (carrying the residual) is thrown when it exceeds `tol`.
SolveResult solve(const CsrMatrix& a, std::span<const double> b, const SolveOptions& options = {});

double norm2(std::span<const double> v);

}  // namespace nlvc
