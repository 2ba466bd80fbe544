#include "nlvc/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "nlvc/errors.hpp"

namespace nlvc {

namespace {

constexpr double kPi = std::numbers::pi;

// int_0^{2pi} cos^a(t) sin^b(t) dt
double angular_moment(int a, int b) {
  if (a % 2 != 0 || b % 2 != 0) return 0.0;
  return 2.0 * std::tgamma((a + 1) / 2.0) * std::tgamma((b + 1) / 2.0) / std::tgamma((a + b + 2) / 2.0);
}

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

const GaussRule& gauss_legendre_12() {
  static const GaussRule rule = [] {
    constexpr int n = 12;
    GaussRule g;
    g.nodes.resize(n);
    g.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      g.nodes[i] = x;
      g.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return g;
  }();
  return rule;
}

// Accumulates int_R z1^a z2^b dz as the boundary integral of z1^(a+1) z2^b/(a+1) dz2.
class BoundaryMoments {
 public:
  BoundaryMoments(int degree, int panels) : degree_(degree), panels_(std::max(panels, 1)), acc_(monomial_count(degree), 0.0) {}

  // Counter-clockwise arc of the circle |z - p| = rho for t in [t0, t1].
  void arc(Vec2 p, double rho, double t0, double t1) {
    integrate(t0, t1, [&](double t) {
      return Sample{p.x + rho * std::cos(t), p.y + rho * std::sin(t), rho * std::cos(t)};
    });
  }

  // Straight segment from a to b.
  void segment(Vec2 a, Vec2 b) {
    integrate(0.0, 1.0, [&](double s) { return Sample{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), b.y - a.y}; });
  }

  const std::vector<double>& values() const { return acc_; }

 private:
  struct Sample {
    double x, y, dy;
  };

  template <class Param>
  void integrate(double t0, double t1, Param&& param) {
    const GaussRule& g = gauss_legendre_12();
    const double width = (t1 - t0) / panels_;
    std::vector<double> xp(static_cast<std::size_t>(degree_) + 2), yp(static_cast<std::size_t>(degree_) + 1);
    for (int p = 0; p < panels_; ++p) {
      const double lo = t0 + p * width;
      for (std::size_t q = 0; q < g.nodes.size(); ++q) {
        const double t = lo + 0.5 * width * (g.nodes[q] + 1.0);
        const Sample s = param(t);
        const double w = 0.5 * width * g.weights[q] * s.dy;
        xp[0] = 1.0;
        yp[0] = 1.0;
        for (std::size_t k = 1; k < xp.size(); ++k) xp[k] = xp[k - 1] * s.x;
        for (std::size_t k = 1; k < yp.size(); ++k) yp[k] = yp[k - 1] * s.y;
        for (int d = 0; d <= degree_; ++d) {
          for (int b = 0; b <= d; ++b) {
            const int a = d - b;
            acc_[monomial_index(a, b)] += w * xp[a + 1] * yp[b] / (a + 1);
          }
        }
      }
    }
  }

  int degree_;
  int panels_;
  std::vector<double> acc_;
};

double wrap_angle(double t) {
  t = std::fmod(t, 2.0 * kPi);
  return t < 0.0 ? t + 2.0 * kPi : t;
}

// Splits [0, 2pi) at the given angles; returns cyclic pieces (t0, t1) with t1 > t0.
std::vector<std::pair<double, double>> circle_pieces(std::vector<double> angles) {
  for (double& a : angles) a = wrap_angle(a);
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }),
               angles.end());
  std::vector<std::pair<double, double>> pieces;
  if (angles.empty()) {
    pieces.emplace_back(0.0, 2.0 * kPi);
    return pieces;
  }
  for (std::size_t k = 0; k + 1 < angles.size(); ++k) pieces.emplace_back(angles[k], angles[k + 1]);
  pieces.emplace_back(angles.back(), angles.front() + 2.0 * kPi);
  return pieces;
}

struct Box {
  double lo1, hi1, lo2, hi2;
  bool contains(Vec2 z) const { return z.x >= lo1 && z.x <= hi1 && z.y >= lo2 && z.y <= hi2; }
};

struct Disk {
  Vec2 center;
  double radius;
  bool contains(Vec2 z) const { return norm(z - center) <= radius; }
};

// Angles on the circle |z| = delta where it meets the line z1 = c (vertical) or z2 = c.
void line_circle_angles(double delta, double c, bool vertical, double lo, double hi, std::vector<double>& out) {
  if (std::abs(c) > delta) return;
  const double s = std::sqrt(std::max(delta * delta - c * c, 0.0));
  for (double v : {s, -s}) {
    if (v < lo || v > hi) continue;
    out.push_back(vertical ? std::atan2(v, c) : std::atan2(c, v));
  }
}

// Moments of B_delta(0) intersected with a box.
std::vector<double> ball_box_moments(double delta, const Box& box, int degree, int panels) {
  BoundaryMoments acc(degree, panels);
  std::vector<double> angles;
  line_circle_angles(delta, box.lo1, true, box.lo2, box.hi2, angles);
  line_circle_angles(delta, box.hi1, true, box.lo2, box.hi2, angles);
  line_circle_angles(delta, box.lo2, false, box.lo1, box.hi1, angles);
  line_circle_angles(delta, box.hi2, false, box.lo1, box.hi1, angles);
  for (const auto& [t0, t1] : circle_pieces(angles)) {
    const double tm = 0.5 * (t0 + t1);
    if (box.contains({delta * std::cos(tm), delta * std::sin(tm)})) acc.arc({0.0, 0.0}, delta, t0, t1);
  }
  const Vec2 corners[4] = {{box.lo1, box.lo2}, {box.hi1, box.lo2}, {box.hi1, box.hi2}, {box.lo1, box.hi2}};
  for (int e = 0; e < 4; ++e) {
    const Vec2 a = corners[e];
    const Vec2 b = corners[(e + 1) % 4];
    // |a + s (b - a)|^2 = delta^2
    const Vec2 d = b - a;
    const double qa = dot(d, d), qb = 2.0 * dot(a, d), qc = dot(a, a) - delta * delta;
    std::vector<double> cuts{0.0, 1.0};
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      for (double s : {(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)})
        if (s > 0.0 && s < 1.0) cuts.push_back(s);
    }
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double sm = 0.5 * (cuts[k] + cuts[k + 1]);
      if (norm(a + sm * d) < delta) acc.segment(a + cuts[k] * d, a + cuts[k + 1] * d);
    }
  }
  return acc.values();
}

// Moments of B_delta(0) intersected with a disk.
std::vector<double> ball_disk_moments(double delta, const Disk& disk, int degree, int panels) {
  BoundaryMoments acc(degree, panels);
  const Vec2 p = disk.center;
  const double rho = disk.radius;
  const double dist = norm(p);
  std::vector<double> ball_angles, disk_angles;
  if (dist > 0.0 && dist < delta + rho && dist > std::abs(delta - rho)) {
    // chord position along the center line, measured from the ball center
    const double along = (delta * delta - rho * rho + dist * dist) / (2.0 * dist);
    const double half = std::sqrt(std::max(delta * delta - along * along, 0.0));
    const Vec2 u{p.x / dist, p.y / dist};
    for (double sgn : {1.0, -1.0}) {
      const Vec2 q{along * u.x - sgn * half * u.y, along * u.y + sgn * half * u.x};
      ball_angles.push_back(std::atan2(q.y, q.x));
      disk_angles.push_back(std::atan2(q.y - p.y, q.x - p.x));
    }
  }
  for (const auto& [t0, t1] : circle_pieces(ball_angles)) {
    const double tm = 0.5 * (t0 + t1);
    if (disk.contains({delta * std::cos(tm), delta * std::sin(tm)})) acc.arc({0.0, 0.0}, delta, t0, t1);
  }
  for (const auto& [t0, t1] : circle_pieces(disk_angles)) {
    const double tm = 0.5 * (t0 + t1);
    if (norm(Vec2{p.x + rho * std::cos(tm), p.y + rho * std::sin(tm)}) < delta) acc.arc(p, rho, t0, t1);
  }
  return acc.values();
}

}  // namespace

double KernelSpec::operator()(double r) const {
  if (!(r < delta)) return 0.0;
  switch (kind) {
    case KernelKind::PoissonConstant: return 4.0 / (kPi * delta * delta * delta * delta);
    case KernelKind::LpsIndicator: return 1.0;
  }
  return 0.0;
}

KernelSpec poisson_constant_kernel(double delta) { return {KernelKind::PoissonConstant, delta}; }
KernelSpec lps_indicator_kernel(double delta) { return {KernelKind::LpsIndicator, delta}; }

MomentVector full_ball_moments(double delta, int degree, bool with_bond_quartic) {
  MomentVector m;
  m.degree = degree;
  m.poly.assign(monomial_count(degree), 0.0);
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      m.poly[monomial_index(a, b)] = std::pow(delta, d + 2) / (d + 2) * angular_moment(a, b);
    }
  }
  if (with_bond_quartic) {
    for (const auto& e : kBondQuarticExponents) m.bond.push_back(std::pow(delta, 4) / 4.0 * angular_moment(e[0], e[1]));
  }
  return m;
}

bool ball_is_truncated(const DomainShape& domain, Vec2 x, double delta) {
  return clearance(domain, x) < delta * (1.0 - 1e-12);
}

MomentVector truncated_ball_moments(Vec2 center, double delta, const DomainShape& domain, int degree, int refinement) {
  if (!ball_is_truncated(domain, center, delta)) return full_ball_moments(delta, degree);
  MomentVector m;
  m.degree = degree;
  if (const auto* sq = std::get_if<SquareWithLayer>(&domain)) {
    const double lo = -sq->horizon, hi = sq->side + sq->horizon;
    const Box box{lo - center.x, hi - center.x, lo - center.y, hi - center.y};
    m.poly = ball_box_moments(delta, box, degree, refinement);
  } else {
    const auto& an = std::get<AnnulusWithLayer>(domain);
    const Vec2 origin{-center.x, -center.y};
    auto big = ball_disk_moments(delta, {origin, an.r_outer + 2.0 * an.horizon}, degree, refinement);
    auto hole = ball_disk_moments(delta, {origin, an.r_inner - 2.0 * an.horizon}, degree, refinement);
    m.poly.resize(big.size());
    for (std::size_t k = 0; k < big.size(); ++k) m.poly[k] = big[k] - hole[k];
  }
  return m;
}

StencilWeights compute_weights(const PointCloud& cloud, std::size_t i, double delta, const MomentVector& moments) {
  StencilWeights out;
  out.neighbors = cloud.neighbors_within(i, delta);
  const std::size_t nn = out.neighbors.size();
  const std::size_t npoly = moments.poly.size();
  const std::size_t nc = npoly + moments.bond.size();
  const double h = cloud.spacing();
  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "quadrature at point " << i << " (" << cloud.point(i).x << ", " << cloud.point(i).y << ") with " << nn
        << " neighbors: " << why;
    return QuadratureError(msg.str());
  };
  if (nn < nc) throw fail("fewer neighbors than constraints (" + std::to_string(nc) + ")");

  // Scaled unknowns w / h^2 and scaled offsets z / delta.
  Eigen::MatrixXd a(nc, nn);
  Eigen::VectorXd b(nc);
  for (std::size_t j = 0; j < nn; ++j) {
    const Vec2 z = cloud.offset(i, out.neighbors[j]);
    const double z1 = z.x / delta, z2 = z.y / delta;
    for (int d = 0; d <= moments.degree; ++d) {
      for (int q = 0; q <= d; ++q) {
        a(static_cast<Eigen::Index>(monomial_index(d - q, q)), static_cast<Eigen::Index>(j)) =
            std::pow(z1, d - q) * std::pow(z2, q);
      }
    }
    const double r2 = z1 * z1 + z2 * z2;
    for (std::size_t k = 0; k < moments.bond.size(); ++k) {
      const auto& e = kBondQuarticExponents[k];
      a(static_cast<Eigen::Index>(npoly + k), static_cast<Eigen::Index>(j)) = std::pow(z1, e[0]) * std::pow(z2, e[1]) / r2;
    }
  }
  for (int d = 0; d <= moments.degree; ++d) {
    for (int q = 0; q <= d; ++q) {
      const std::size_t k = monomial_index(d - q, q);
      b(static_cast<Eigen::Index>(k)) = moments.poly[k] / (h * h * std::pow(delta, d));
    }
  }
  for (std::size_t k = 0; k < moments.bond.size(); ++k)
    b(static_cast<Eigen::Index>(npoly + k)) = moments.bond[k] / (h * h * delta * delta);

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-10);
  cod.compute(a);
  if (cod.rank() < static_cast<Eigen::Index>(nc)) {
    throw fail("moment constraints are rank deficient (rank " + std::to_string(cod.rank()) + " of " +
               std::to_string(nc) + ")");
  }
  const Eigen::VectorXd w = cod.solve(b);
  const Eigen::VectorXd residual = a * w - b;
  for (Eigen::Index k = 0; k < residual.size(); ++k) {
    if (!(std::abs(residual(k)) <= 1e-12 * std::max(1.0, std::abs(b(k))))) {
      throw fail("moment residual " + std::to_string(residual(k)) + " exceeds tolerance");
    }
  }
  out.weights.resize(nn);
  for (std::size_t j = 0; j < nn; ++j) out.weights[j] = w(static_cast<Eigen::Index>(j)) * h * h;
  return out;
}

QuadratureRule::QuadratureRule(std::size_t points, double delta)
    : delta_(delta), offsets_(points + 1, 0), degree_(points, -1), truncated_(points, 0) {}

std::span<const std::size_t> QuadratureRule::neighbors(std::size_t i) const {
  return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> QuadratureRule::weights(std::size_t i) const {
  return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

void QuadratureRule::set(std::size_t i, const StencilWeights& stencil, int degree, bool truncated) {
  // close out skipped points
  while (filled_ < i) offsets_[++filled_] = neighbors_.size();
  neighbors_.insert(neighbors_.end(), stencil.neighbors.begin(), stencil.neighbors.end());
  weights_.insert(weights_.end(), stencil.weights.begin(), stencil.weights.end());
  offsets_[i + 1] = neighbors_.size();
  filled_ = i + 1;
  degree_[i] = degree;
  truncated_[i] = truncated ? 1 : 0;
}

void QuadratureRule::finalize() {
  while (filled_ < degree_.size()) offsets_[++filled_] = neighbors_.size();
}

QuadratureRule build_quadrature_rule(const PointCloud& cloud, double delta, const RuleOptions& options,
                                     std::span<const char> needed) {
  const std::size_t m = cloud.size();
  if (!needed.empty() && needed.size() != m) throw ConfigError("quadrature mask size does not match the cloud");
  std::vector<StencilWeights> stencils(m);
  std::vector<int> degrees(m, -1);
  std::vector<char> truncated(m, 0);
  std::vector<std::string> errors(m);

#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    if (!needed.empty() && !needed[i]) continue;
    const Vec2 x = cloud.point(i);
    const bool cut = ball_is_truncated(cloud.domain(), x, delta);
    truncated[i] = cut ? 1 : 0;
    try {
      if (!cut) {
        stencils[i] = compute_weights(cloud, i, delta, full_ball_moments(delta, options.degree, options.bond_quartic));
        degrees[i] = options.degree;
      } else {
        const MomentVector full = truncated_ball_moments(x, delta, cloud.domain(), options.degree, options.refinement);
        for (int deg = options.degree; deg >= 0; --deg) {
          MomentVector reduced{deg, std::vector<double>(full.poly.begin(), full.poly.begin() + monomial_count(deg)), {}};
          try {
            stencils[i] = compute_weights(cloud, i, delta, reduced);
            degrees[i] = deg;
            break;
          } catch (const QuadratureError&) {
            if (deg == 0) throw;
          }
        }
      }
    } catch (const QuadratureError& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw QuadratureError(e);

  QuadratureRule rule(m, delta);
  for (std::size_t i = 0; i < m; ++i)
    if (degrees[i] >= 0) rule.set(i, stencils[i], degrees[i], truncated[i] != 0);
  rule.finalize();
  return rule;
}

double discrete_m(const PointCloud& cloud, std::size_t i, const QuadratureRule& rule, const KernelSpec& kernel) {
  const auto nb = rule.neighbors(i);
  const auto w = rule.weights(i);
  double m = 0.0;
  for (std::size_t k = 0; k < nb.size(); ++k) {
    const Vec2 z = cloud.offset(i, nb[k]);
    const double r2 = dot(z, z);
    m += w[k] * kernel(std::sqrt(r2)) * r2;
  }
  if (!(m > 0.0)) {
    std::ostringstream msg;
    msg << "non-positive weighted second moment m = " << m << " at point " << i;
    throw AssemblyError(msg.str());
  }
  return m;
}

void write_weight_cache(std::ostream& out, const QuadratureRule& rule, const PointCloud& cloud) {
  out.precision(17);
  out << "# nlvc-weights 1\n";
  out << "# points " << cloud.size() << " h " << cloud.spacing() << " delta " << rule.delta() << "\n";
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (rule.has(i)) out << "# stencil " << i << ' ' << rule.degree(i) << ' ' << (rule.truncated(i) ? 1 : 0) << "\n";
  }
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const auto nb = rule.neighbors(i);
    const auto w = rule.weights(i);
    for (std::size_t k = 0; k < nb.size(); ++k) out << i << ' ' << nb[k] << ' ' << w[k] << '\n';
  }
}

bool read_weight_cache(std::istream& in, const PointCloud& cloud, double delta, QuadratureRule& rule) {
  std::string line;
  if (!std::getline(in, line) || line != "# nlvc-weights 1") return false;
  if (!std::getline(in, line)) return false;
  {
    std::istringstream hdr(line);
    std::string hash, k1, k2, k3;
    std::size_t points = 0;
    double h = 0.0, d = 0.0;
    hdr >> hash >> k1 >> points >> k2 >> h >> k3 >> d;
    if (!hdr || points != cloud.size() || h != cloud.spacing() || d != delta) return false;
  }
  std::vector<int> degree(cloud.size(), -1);
  std::vector<char> truncated(cloud.size(), 0);
  std::vector<StencilWeights> stencils(cloud.size());
  while (in.peek() == '#') {
    std::getline(in, line);
    std::istringstream rec(line);
    std::string hash, tag;
    std::size_t i = 0;
    int deg = 0, cut = 0;
    rec >> hash >> tag >> i >> deg >> cut;
    if (!rec || tag != "stencil" || i >= cloud.size()) return false;
    degree[i] = deg;
    truncated[i] = static_cast<char>(cut);
  }
  std::size_t i = 0, j = 0;
  double w = 0.0;
  while (in >> i >> j >> w) {
    if (i >= cloud.size() || j >= cloud.size() || degree[i] < 0) return false;
    stencils[i].neighbors.push_back(j);
    stencils[i].weights.push_back(w);
  }
  if (!in.eof()) return false;
  rule = QuadratureRule(cloud.size(), delta);
  for (std::size_t p = 0; p < cloud.size(); ++p)
    if (degree[p] >= 0) rule.set(p, stencils[p], degree[p], truncated[p] != 0);
  rule.finalize();
  return true;
}

}  // namespace nlvc
