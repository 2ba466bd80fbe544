#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlvc/errors.hpp"
#include "nlvc/sparse.hpp"

namespace nlvc {

namespace {

double dotp(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += alpha * x[k];
}

std::vector<double> inverse_diagonal(const CsrMatrix& a) {
  std::vector<double> d = a.diagonal();
  for (double& v : d) v = (v != 0.0 && std::isfinite(v)) ? 1.0 / v : 1.0;
  return d;
}

double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b, double bnorm) {
  std::vector<double> r = spmv(a, x);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = b[k] - r[k];
  return norm2(r) / bnorm;
}

std::size_t dense_lu(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x) {
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto c = a.row_cols(r);
    const auto v = a.row_vals(r);
    for (std::size_t k = 0; k < c.size(); ++k)
      dense(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c[k])) = v[k];
  }
  const Eigen::Map<const Eigen::VectorXd> rhs(b.data(), n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(dense);
  Eigen::VectorXd sol = lu.solve(rhs);
  // one step of iterative refinement
  const Eigen::VectorXd res = rhs - dense * sol;
  sol += lu.solve(res);
  x.assign(sol.data(), sol.data() + n);
  return 1;
}

// Restarted GMRES, right-preconditioned with the inverse diagonal.
std::size_t gmres(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x, const SolveOptions& opt,
                  double bnorm) {
  const std::size_t n = a.rows();
  const std::size_t m = std::max<std::size_t>(opt.restart, 1);
  const std::vector<double> dinv = inverse_diagonal(a);
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<double> hess((m + 1) * m), cs(m), sn(m), g(m + 1), w(n), z(n);
  auto hcol = [&](std::size_t i, std::size_t j) -> double& { return hess[j * (m + 1) + i]; };
  std::size_t iters = 0;
  const double target = opt.tol * bnorm;

  while (iters < opt.max_iter) {
    spmv(a, x, w);
    for (std::size_t k = 0; k < n; ++k) v[0][k] = b[k] - w[k];
    const double beta = norm2(v[0]);
    if (beta <= target) return iters;
    for (double& e : v[0]) e /= beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    std::size_t j = 0;
    for (; j < m && iters < opt.max_iter; ++j, ++iters) {
      for (std::size_t k = 0; k < n; ++k) z[k] = dinv[k] * v[j][k];
      spmv(a, z, w);
      for (std::size_t i = 0; i <= j; ++i) {
        hcol(i, j) = dotp(w, v[i]);
        axpy(-hcol(i, j), v[i], w);
      }
      // second Gram-Schmidt pass keeps the basis orthogonal at tight tolerances
      for (std::size_t i = 0; i <= j; ++i) {
        const double c = dotp(w, v[i]);
        hcol(i, j) += c;
        axpy(-c, v[i], w);
      }
      const double hn = norm2(w);
      hcol(j + 1, j) = hn;
      if (hn > 0.0)
        for (std::size_t k = 0; k < n; ++k) v[j + 1][k] = w[k] / hn;
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * hcol(i, j) + sn[i] * hcol(i + 1, j);
        hcol(i + 1, j) = -sn[i] * hcol(i, j) + cs[i] * hcol(i + 1, j);
        hcol(i, j) = t;
      }
      const double denom = std::hypot(hcol(j, j), hcol(j + 1, j));
      if (denom == 0.0) throw NumericError("gmres breakdown: singular Hessenberg column", std::abs(g[j]) / bnorm);
      cs[j] = hcol(j, j) / denom;
      sn[j] = hcol(j + 1, j) / denom;
      hcol(j, j) = denom;
      hcol(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (std::abs(g[j + 1]) <= 0.5 * target || hn == 0.0) {
        ++j;
        ++iters;
        break;
      }
    }
    // back substitution for the Krylov coefficients
    std::vector<double> y(j);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t k = ii + 1; k < j; ++k) s -= hcol(ii, k) * y[k];
      y[ii] = s / hcol(ii, ii);
    }
    std::fill(z.begin(), z.end(), 0.0);
    for (std::size_t i = 0; i < j; ++i) axpy(y[i], v[i], z);
    for (std::size_t k = 0; k < n; ++k) x[k] += dinv[k] * z[k];
  }
  return iters;
}

std::size_t bicgstab(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x, const SolveOptions& opt,
                     double bnorm) {
  const std::size_t n = a.rows();
  const std::vector<double> dinv = inverse_diagonal(a);
  std::vector<double> r(n), r0(n), p(n, 0.0), v(n, 0.0), s(n), t(n), ph(n), sh(n);
  spmv(a, x, r);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
  r0 = r;
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  const double target = opt.tol * bnorm;
  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    if (norm2(r) <= 0.5 * target) break;
    const double rho_new = dotp(r0, r);
    if (rho_new == 0.0) throw NumericError("bicgstab breakdown (rho = 0)", norm2(r) / bnorm);
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * (p[k] - omega * v[k]);
    for (std::size_t k = 0; k < n; ++k) ph[k] = dinv[k] * p[k];
    spmv(a, ph, v);
    const double r0v = dotp(r0, v);
    if (r0v == 0.0) throw NumericError("bicgstab breakdown (r0.v = 0)", norm2(r) / bnorm);
    alpha = rho / r0v;
    for (std::size_t k = 0; k < n; ++k) s[k] = r[k] - alpha * v[k];
    if (norm2(s) <= 0.5 * target) {
      axpy(alpha, ph, x);
      ++it;
      break;
    }
    for (std::size_t k = 0; k < n; ++k) sh[k] = dinv[k] * s[k];
    spmv(a, sh, t);
    const double tt = dotp(t, t);
    if (tt == 0.0) throw NumericError("bicgstab breakdown (t = 0)", norm2(s) / bnorm);
    omega = dotp(t, s) / tt;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * ph[k] + omega * sh[k];
      r[k] = s[k] - omega * t[k];
    }
    if (omega == 0.0) throw NumericError("bicgstab breakdown (omega = 0)", norm2(r) / bnorm);
  }
  return it;
}

std::size_t conjugate_gradient(const CsrMatrix& a, std::span<const double> b, std::vector<double>& x,
                               const SolveOptions& opt, double bnorm) {
  const std::size_t n = a.rows();
  const std::vector<double> dinv = inverse_diagonal(a);
  std::vector<double> r(n), z(n), p(n), q(n);
  spmv(a, x, r);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];
  for (std::size_t k = 0; k < n; ++k) z[k] = dinv[k] * r[k];
  p = z;
  double rz = dotp(r, z);
  const double target = opt.tol * bnorm;
  std::size_t it = 0;
  for (; it < opt.max_iter; ++it) {
    if (norm2(r) <= 0.5 * target) break;
    spmv(a, p, q);
    const double pq = dotp(p, q);
    if (!(pq > 0.0)) throw NumericError("cg breakdown: matrix is not positive definite", norm2(r) / bnorm);
    const double alpha = rz / pq;
    axpy(alpha, p, x);
    axpy(-alpha, q, r);
    for (std::size_t k = 0; k < n; ++k) z[k] = dinv[k] * r[k];
    const double rz_new = dotp(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
  }
  return it;
}

}  // namespace

const char* to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::DenseLu: return "dense_lu";
    case SolverMethod::Gmres: return "gmres";
    case SolverMethod::Bicgstab: return "bicgstab";
    case SolverMethod::Cg: return "cg";
  }
  return "?";
}

SolverMethod parse_solver_method(const std::string& name) {
  for (auto m : {SolverMethod::Auto, SolverMethod::DenseLu, SolverMethod::Gmres, SolverMethod::Bicgstab,
                 SolverMethod::Cg}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("unknown solver method '" + name + "'");
}

namespace {

SolveResult solve_unscaled(const CsrMatrix& a, std::span<const double> b, const SolveOptions& options) {
  SolveResult out;
  out.x.assign(a.rows(), 0.0);
  SolverMethod method = options.method;
  if (method == SolverMethod::Auto) method = a.rows() <= options.dense_limit ? SolverMethod::DenseLu : SolverMethod::Gmres;
  out.stats.method = method;

  const double bnorm = norm2(b);
  if (bnorm == 0.0) return out;

  switch (method) {
    case SolverMethod::DenseLu: out.stats.iterations = dense_lu(a, b, out.x); break;
    case SolverMethod::Gmres: out.stats.iterations = gmres(a, b, out.x, options, bnorm); break;
    case SolverMethod::Bicgstab: out.stats.iterations = bicgstab(a, b, out.x, options, bnorm); break;
    case SolverMethod::Cg: out.stats.iterations = conjugate_gradient(a, b, out.x, options, bnorm); break;
    case SolverMethod::Auto: break;
  }
  out.stats.residual = relative_residual(a, out.x, b, bnorm);
  out.stats.unscaled_residual = out.stats.residual;
  if (!(out.stats.residual <= options.tol)) {
    std::ostringstream msg;
    msg << to_string(method) << " did not reach the residual tolerance " << options.tol << " (residual "
        << out.stats.residual << " after " << out.stats.iterations << " iterations)";
    throw NumericError(msg.str(), out.stats.residual);
  }
  return out;
}

}  // namespace

SolveResult solve(const CsrMatrix& a, std::span<const double> b, const SolveOptions& options) {
  if (a.rows() != a.cols()) throw ConfigError("solve: matrix is not square");
  if (b.size() != a.rows()) throw ConfigError("solve: right-hand side has the wrong length");
  for (double v : b)
    if (!std::isfinite(v)) throw ConfigError("solve: right-hand side is not finite");
  if (!options.equilibrate) return solve_unscaled(a, b, options);

  std::vector<double> scale(a.rows(), 1.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    double mx = 0.0;
    for (double v : a.row_vals(r)) mx = std::max(mx, std::abs(v));
    if (mx == 0.0) throw NumericError("solve: matrix has an empty row", 0.0);
    scale[r] = 1.0 / mx;
  }
  std::vector<double> bs(b.size());
  for (std::size_t r = 0; r < b.size(); ++r) bs[r] = scale[r] * b[r];
  SolveResult out = solve_unscaled(scale_rows(a, scale), bs, options);
  const double bnorm = norm2(b);
  out.stats.unscaled_residual = bnorm > 0.0 ? relative_residual(a, out.x, b, bnorm) : 0.0;
  return out;
}

}  // namespace nlvc
