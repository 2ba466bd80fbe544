#include "nlvc/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "nlvc/errors.hpp"

namespace nlvc {

void SparseRow::compress() {
  if (cols.empty()) return;
  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return cols[a] < cols[b]; });
  std::vector<std::size_t> c;
  std::vector<double> v;
  c.reserve(cols.size());
  v.reserve(cols.size());
  for (std::size_t k : order) {
    if (!c.empty() && c.back() == cols[k]) {
      v.back() += vals[k];
    } else {
      c.push_back(cols[k]);
      v.push_back(vals[k]);
    }
  }
  cols = std::move(c);
  vals = std::move(v);
}

double SparseRow::dot(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t k = 0; k < cols.size(); ++k) s += vals[k] * x[cols[k]];
  return s;
}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols) : cols_(cols), offsets_(rows + 1, 0) {}

double CsrMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto rc = row_cols(r);
  const auto it = std::lower_bound(rc.begin(), rc.end(), c);
  if (it == rc.end() || *it != c) return 0.0;
  return row_vals(r)[static_cast<std::size_t>(it - rc.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r) d[r] = coeff(r, r);
  return d;
}

CsrMatrix CsrMatrix::from_rows(std::vector<SparseRow> rows, std::size_t cols) {
  CsrMatrix m(rows.size(), cols);
  std::size_t nnz = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].compress();
    for (std::size_t c : rows[r].cols)
      if (c >= cols) throw AssemblyError("sparse row references a column outside the matrix");
    nnz += rows[r].cols.size();
    m.offsets_[r + 1] = nnz;
  }
  m.indices_.reserve(nnz);
  m.values_.reserve(nnz);
  for (auto& row : rows) {
    m.indices_.insert(m.indices_.end(), row.cols.begin(), row.cols.end());
    m.values_.insert(m.values_.end(), row.vals.begin(), row.vals.end());
    row = SparseRow{};
  }
  return m;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m(n, n);
  m.indices_.resize(n);
  m.values_.assign(n, 1.0);
  for (std::size_t r = 0; r < n; ++r) {
    m.offsets_[r + 1] = r + 1;
    m.indices_[r] = r;
  }
  return m;
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  if (x.size() != a.cols() || y.size() != a.rows()) throw ConfigError("spmv: shape mismatch");
  const auto& off = a.offsets();
  const auto& idx = a.indices();
  const auto& val = a.values();
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t k = off[r]; k < off[r + 1]; ++k) s += val[k] * x[idx[k]];
    y[static_cast<std::size_t>(r)] = s;
  }
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  spmv(a, x, y);
  return y;
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("multiply: shape mismatch");
  std::vector<SparseRow> rows(a.rows());
  const auto n = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel
  {
    std::vector<double> acc(b.cols(), 0.0);
    std::vector<char> touched(b.cols(), 0);
#pragma omp for schedule(dynamic, 64)
    for (std::ptrdiff_t rr = 0; rr < n; ++rr) {
      const auto r = static_cast<std::size_t>(rr);
      SparseRow& out = rows[r];
      const auto ac = a.row_cols(r);
      const auto av = a.row_vals(r);
      for (std::size_t k = 0; k < ac.size(); ++k) {
        const auto bc = b.row_cols(ac[k]);
        const auto bv = b.row_vals(ac[k]);
        for (std::size_t q = 0; q < bc.size(); ++q) {
          if (!touched[bc[q]]) {
            touched[bc[q]] = 1;
            out.cols.push_back(bc[q]);
          }
          acc[bc[q]] += av[k] * bv[q];
        }
      }
      std::sort(out.cols.begin(), out.cols.end());
      out.vals.resize(out.cols.size());
      for (std::size_t q = 0; q < out.cols.size(); ++q) {
        out.vals[q] = acc[out.cols[q]];
        acc[out.cols[q]] = 0.0;
        touched[out.cols[q]] = 0;
      }
    }
  }
  return CsrMatrix::from_rows(std::move(rows), b.cols());
}

CsrMatrix scale_rows(const CsrMatrix& a, std::span<const double> scale) {
  if (scale.size() != a.rows()) throw ConfigError("scale_rows: shape mismatch");
  std::vector<SparseRow> rows(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto c = a.row_cols(r);
    const auto v = a.row_vals(r);
    rows[r].cols.assign(c.begin(), c.end());
    rows[r].vals.resize(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) rows[r].vals[k] = scale[r] * v[k];
  }
  return CsrMatrix::from_rows(std::move(rows), a.cols());
}

void write_coordinate(std::ostream& out, const CsrMatrix& a) {
  const auto old = out.precision(17);
  out << "% " << a.rows() << ' ' << a.cols() << ' ' << a.nnz() << '\n';
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto c = a.row_cols(r);
    const auto v = a.row_vals(r);
    for (std::size_t k = 0; k < c.size(); ++k) out << r << ' ' << c[k] << ' ' << v[k] << '\n';
  }
  out.precision(old);
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace nlvc
