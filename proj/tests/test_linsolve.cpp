#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nlvc/errors.hpp"
#include "nlvc/sparse.hpp"
#include "oracles.hpp"

using namespace nlvc;

namespace {

CsrMatrix random_sparse(std::size_t n, double density, double diag, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), p(0.0, 1.0);
  std::vector<SparseRow> rows(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c)
      if (p(rng) < density) rows[r].add(c, u(rng));
    if (diag != 0.0) rows[r].add(r, diag);
  }
  return CsrMatrix::from_rows(std::move(rows), n);
}

CsrMatrix laplacian_5pt(std::size_t g) {
  const std::size_t n = g * g;
  std::vector<SparseRow> rows(n);
  for (std::size_t j = 0; j < g; ++j)
    for (std::size_t i = 0; i < g; ++i) {
      const std::size_t r = j * g + i;
      rows[r].add(r, 4.0);
      if (i > 0) rows[r].add(r - 1, -1.0);
      if (i + 1 < g) rows[r].add(r + 1, -1.0);
      if (j > 0) rows[r].add(r - g, -1.0);
      if (j + 1 < g) rows[r].add(r + g, -1.0);
    }
  return CsrMatrix::from_rows(std::move(rows), n);
}

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("sparse rows merge duplicates and sort") {
  SparseRow r;
  r.add(4, 1.0);
  r.add(1, 2.0);
  r.add(4, 0.5);
  r.compress();
  CHECK(r.cols == std::vector<std::size_t>{1, 4});
  CHECK(r.vals == std::vector<double>{2.0, 1.5});
  std::vector<SparseRow> bad(1);
  bad[0].add(3, 1.0);
  CHECK_THROWS_AS(CsrMatrix::from_rows(bad, 2), AssemblyError);
}

TEST_CASE("csr invariants") {
  const CsrMatrix a = random_sparse(60, 0.1, 0.0, 1);
  const auto& off = a.offsets();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    CHECK(off[r] <= off[r + 1]);
    const auto c = a.row_cols(r);
    for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k - 1] < c[k]);
  }
}

TEST_CASE("spmv") {
  const std::vector<double> x{1.0, 1.0};
  std::vector<SparseRow> rows(2);
  rows[0].add(0, 2.0);
  rows[0].add(1, 1.0);
  rows[1].add(1, 3.0);
  const CsrMatrix a = CsrMatrix::from_rows(rows, 2);
  CHECK(spmv(a, x) == std::vector<double>{3.0, 3.0});
  const auto v = random_vector(7, 2);
  CHECK(spmv(CsrMatrix::identity(7), v) == v);
  CHECK_THROWS_AS(spmv(a, v), ConfigError);

  const CsrMatrix s = random_sparse(50, 0.2, 0.0, 3);
  const auto y = random_vector(50, 4);
  CHECK(rel_diff(spmv(s, y), oracle::dense_matvec(oracle::to_dense(s), y)) <= 1e-13);
}

TEST_CASE("spmv does not depend on the thread count") {
  const CsrMatrix s = random_sparse(3000, 0.01, 1.0, 5);
  const auto y = random_vector(3000, 6);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = spmv(s, y);
  omp_set_num_threads(4);
  const auto four = spmv(s, y);
  omp_set_num_threads(saved);
  CHECK(one == four);
}

TEST_CASE("multiply and scale_rows match dense products") {
  const CsrMatrix a = random_sparse(30, 0.2, 0.0, 7);
  const CsrMatrix b = random_sparse(30, 0.2, 0.0, 8);
  const auto x = random_vector(30, 9);
  CHECK(rel_diff(spmv(multiply(a, b), x), spmv(a, spmv(b, x))) <= 1e-13);
  const auto sc = random_vector(30, 10);
  const auto ys = spmv(scale_rows(a, sc), x);
  const auto y = spmv(a, x);
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(ys[k] == doctest::Approx(sc[k] * y[k]).epsilon(1e-14));
}

TEST_CASE("coordinate export") {
  std::vector<SparseRow> rows(2);
  rows[0].add(1, 0.1);
  rows[1].add(0, -2.0);
  std::ostringstream os;
  write_coordinate(os, CsrMatrix::from_rows(rows, 2));
  CHECK(os.str() == "% 2 2 2\n0 1 0.10000000000000001\n1 0 -2\n");
}

TEST_CASE("identity solve") {
  const auto b = random_vector(40, 11);
  for (auto m : {SolverMethod::DenseLu, SolverMethod::Gmres, SolverMethod::Bicgstab, SolverMethod::Cg}) {
    SolveOptions o;
    o.method = m;
    const SolveResult r = solve(CsrMatrix::identity(40), b, o);
    CHECK(rel_diff(r.x, b) <= 1e-14);
  }
}

TEST_CASE("5-point laplacian on a 20 x 20 grid") {
  const CsrMatrix a = laplacian_5pt(20);
  const auto xs = random_vector(400, 12);
  const auto b = spmv(a, xs);
  for (auto m : {SolverMethod::Auto, SolverMethod::DenseLu, SolverMethod::Gmres, SolverMethod::Bicgstab,
                 SolverMethod::Cg}) {
    CAPTURE(to_string(m));
    SolveOptions o;
    o.method = m;
    const SolveResult r = solve(a, b, o);
    CHECK(r.stats.residual <= 1e-12);
    CHECK(rel_diff(spmv(a, r.x), b) <= 1e-12);
    CHECK(rel_diff(r.x, xs) <= 1e-10);
  }
}

TEST_CASE("dense LU and GMRES agree on nonsymmetric systems") {
  for (std::size_t n : {50, 400, 1500}) {
    const CsrMatrix a = random_sparse(n, 5.0 / static_cast<double>(n), 4.0, static_cast<unsigned>(n));
    const auto b = random_vector(n, 13);
    SolveOptions lu, gm;
    lu.method = SolverMethod::DenseLu;
    gm.method = SolverMethod::Gmres;
    const auto x1 = solve(a, b, lu).x;
    const auto x2 = solve(a, b, gm).x;
    CHECK(rel_diff(x2, x1) <= 1e-9);
  }
}

TEST_CASE("auto picks dense LU for small systems") {
  const CsrMatrix a = laplacian_5pt(10);
  const auto b = random_vector(100, 14);
  CHECK(solve(a, b).stats.method == SolverMethod::DenseLu);
  SolveOptions o;
  o.dense_limit = 50;
  CHECK(solve(a, b, o).stats.method == SolverMethod::Gmres);
}

TEST_CASE("equilibration") {
  CsrMatrix a = laplacian_5pt(12);
  std::vector<double> sc(a.rows());
  for (std::size_t r = 0; r < sc.size(); ++r) sc[r] = std::pow(10.0, static_cast<double>(r % 7) - 3.0);
  a = scale_rows(a, sc);
  const auto xs = random_vector(a.rows(), 15);
  const auto b = spmv(a, xs);
  SolveOptions o;
  o.method = SolverMethod::Gmres;
  o.equilibrate = true;
  const SolveResult r = solve(a, b, o);
  CHECK(r.stats.residual <= 1e-12);
  CHECK(r.stats.unscaled_residual == doctest::Approx(rel_diff(spmv(a, r.x), b)).epsilon(1e-6));
  CHECK(rel_diff(r.x, xs) <= 1e-9);

  std::vector<SparseRow> rows(2);
  rows[0].add(0, 1.0);
  CHECK_THROWS_AS(solve(CsrMatrix::from_rows(rows, 2), std::vector<double>{1.0, 1.0}, o), NumericError);
}

TEST_CASE("solver failures") {
  const CsrMatrix a = laplacian_5pt(20);
  const auto b = random_vector(400, 16);
  SolveOptions o;
  o.method = SolverMethod::Gmres;
  o.max_iter = 3;
  try {
    solve(a, b, o);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(e.residual > 1e-12);
    CHECK(std::isfinite(e.residual));
  }
  CHECK_THROWS_AS(solve(a, std::vector<double>(3, 1.0)), ConfigError);
  std::vector<double> nan = b;
  nan[5] = std::nan("");
  CHECK_THROWS_AS(solve(a, nan), ConfigError);
  CHECK_THROWS_AS(parse_solver_method("jacobi"), ConfigError);
  CHECK(solve(a, std::vector<double>(400, 0.0)).x == std::vector<double>(400, 0.0));
}
