#include "nlvc/geometry.hpp"

#include <algorithm>
#include <sstream>

#include "nlvc/errors.hpp"

namespace nlvc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Box {
  double lo1, hi1, lo2, hi2;
};

Box bounding_box(const DomainShape& domain) {
  return std::visit(Overloaded{
                        [](const SquareWithLayer& s) {
                          return Box{-s.horizon, s.side + s.horizon, -s.horizon, s.side + s.horizon};
                        },
                        [](const AnnulusWithLayer& a) {
                          const double r = a.r_outer + 2.0 * a.horizon;
                          return Box{-r, r, -r, r};
                        },
                    },
                    domain);
}

}  // namespace

const char* to_string(Region r) {
  switch (r) {
    case Region::Interior: return "interior";
    case Region::OmegaLoc: return "omega_loc";
    case Region::OmegaNloc: return "omega_nloc";
  }
  return "?";
}

double horizon_of(const DomainShape& domain) {
  return std::visit([](const auto& d) { return d.horizon; }, domain);
}

double layer_thickness(const DomainShape& domain) {
  return std::visit(Overloaded{
                        [](const SquareWithLayer& s) { return s.horizon; },
                        [](const AnnulusWithLayer& a) { return 2.0 * a.horizon; },
                    },
                    domain);
}

void validate(const DomainShape& domain) {
  std::visit(Overloaded{
                 [](const SquareWithLayer& s) {
                   if (!(s.horizon > 0.0)) throw ConfigError("square domain: horizon must be positive");
                   if (!(s.side > 0.0)) throw ConfigError("square domain: side must be positive");
                 },
                 [](const AnnulusWithLayer& a) {
                   if (!(a.horizon > 0.0)) throw ConfigError("annulus domain: horizon must be positive");
                   if (!(a.r_inner < a.r_outer)) throw ConfigError("annulus domain: r_inner must be below r_outer");
                   if (a.r_inner - 2.0 * a.horizon < 0.0)
                     throw ConfigError("annulus domain: interaction layer reaches the origin");
                 },
             },
             domain);
}

bool in_extended_domain(const DomainShape& domain, Vec2 x, double tol) {
  return std::visit(Overloaded{
                        [&](const SquareWithLayer& s) {
                          const double lo = -s.horizon - tol;
                          const double hi = s.side + s.horizon + tol;
                          return x.x >= lo && x.x <= hi && x.y >= lo && x.y <= hi;
                        },
                        [&](const AnnulusWithLayer& a) {
                          const double r = norm(x);
                          return r >= a.r_inner - 2.0 * a.horizon - tol && r <= a.r_outer + 2.0 * a.horizon + tol;
                        },
                    },
                    domain);
}

double clearance(const DomainShape& domain, Vec2 x) {
  const double c = std::visit(Overloaded{
                                  [&](const SquareWithLayer& s) {
                                    const double lo = -s.horizon;
                                    const double hi = s.side + s.horizon;
                                    return std::min({x.x - lo, hi - x.x, x.y - lo, hi - x.y});
                                  },
                                  [&](const AnnulusWithLayer& a) {
                                    const double r = norm(x);
                                    return std::min(r - (a.r_inner - 2.0 * a.horizon), a.r_outer + 2.0 * a.horizon - r);
                                  },
                              },
                              domain);
  return std::max(c, 0.0);
}

Region classify_point(const DomainShape& domain, Vec2 x, double tol) {
  if (!in_extended_domain(domain, x, tol)) {
    std::ostringstream msg;
    msg << "point (" << x.x << ", " << x.y << ") lies outside the extended domain";
    throw DomainError(msg.str());
  }
  return std::visit(Overloaded{
                        [&](const SquareWithLayer& s) {
                          const bool interior = x.x > tol && x.x < s.side - tol && x.y > tol && x.y < s.side - tol;
                          if (interior) return Region::Interior;
                          if (s.loc_mode == SquareLocMode::FullLayer) return Region::OmegaLoc;
                          const bool strip = x.x >= s.side - tol && x.y >= -tol && x.y <= s.side + tol;
                          return strip ? Region::OmegaLoc : Region::OmegaNloc;
                        },
                        [&](const AnnulusWithLayer& a) {
                          const double r = norm(x);
                          if (r > a.r_inner + tol && r < a.r_outer - tol) return Region::Interior;
                          if (a.loc_mode == AnnulusLocMode::FullLayer) return Region::OmegaLoc;
                          return r <= a.r_inner + tol ? Region::OmegaLoc : Region::OmegaNloc;
                        },
                    },
                    domain);
}

PointCloud::PointCloud(const DomainShape& domain, double h) : domain_(domain), h_(h) {
  validate(domain);
  const double delta = horizon_of(domain);
  if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  if (delta / h < 1.0 - 1e-12) throw ConfigError("grid spacing exceeds the horizon (delta/h < 1)");

  const Box box = bounding_box(domain);
  const double tol = 1e-12 * h;
  const auto k_lo = [&](double v) { return static_cast<std::int64_t>(std::floor(v / h)) - 1; };
  const auto k_hi = [&](double v) { return static_cast<std::int64_t>(std::ceil(v / h)) + 1; };

  for (std::int64_t k2 = k_lo(box.lo2); k2 <= k_hi(box.hi2); ++k2) {
    for (std::int64_t k1 = k_lo(box.lo1); k1 <= k_hi(box.hi1); ++k1) {
      const Vec2 x{static_cast<double>(k1) * h, static_cast<double>(k2) * h};
      if (!in_extended_domain(domain, x, tol)) continue;
      by_lattice_.emplace(LatticeIndex{k1, k2}, points_.size());
      points_.push_back(x);
      lattice_.push_back({k1, k2});
      labels_.push_back(classify_point(domain, x, tol));
    }
  }
  if (points_.empty()) throw ConfigError("point cloud is empty; grid spacing too large");

  bin_cells_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(delta / h - 1e-9)));
  std::int64_t bmin1 = bin_of(lattice_.front().k1), bmax1 = bmin1;
  std::int64_t bmin2 = bin_of(lattice_.front().k2), bmax2 = bmin2;
  for (const auto& k : lattice_) {
    bmin1 = std::min(bmin1, bin_of(k.k1));
    bmax1 = std::max(bmax1, bin_of(k.k1));
    bmin2 = std::min(bmin2, bin_of(k.k2));
    bmax2 = std::max(bmax2, bin_of(k.k2));
  }
  bin_min1_ = bmin1;
  bin_min2_ = bmin2;
  bins1_ = bmax1 - bmin1 + 1;
  bins2_ = bmax2 - bmin2 + 1;

  const auto slot = [&](const LatticeIndex& k) {
    return static_cast<std::size_t>((bin_of(k.k2) - bin_min2_) * bins1_ + (bin_of(k.k1) - bin_min1_));
  };
  bin_offsets_.assign(static_cast<std::size_t>(bins1_ * bins2_) + 1, 0);
  for (const auto& k : lattice_) ++bin_offsets_[slot(k) + 1];
  for (std::size_t b = 1; b < bin_offsets_.size(); ++b) bin_offsets_[b] += bin_offsets_[b - 1];
  bin_points_.resize(points_.size());
  std::vector<std::size_t> fill(bin_offsets_.begin(), bin_offsets_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) bin_points_[fill[slot(lattice_[i])]++] = i;
}

std::int64_t PointCloud::bin_of(std::int64_t k) const {
  // floor division for negative lattice indices
  return k >= 0 ? k / bin_cells_ : -((-k + bin_cells_ - 1) / bin_cells_);
}

std::optional<std::size_t> PointCloud::find(LatticeIndex k) const {
  const auto it = by_lattice_.find(k);
  if (it == by_lattice_.end()) return std::nullopt;
  return it->second;
}

Vec2 PointCloud::offset(std::size_t from, std::size_t to) const {
  return {static_cast<double>(lattice_[to].k1 - lattice_[from].k1) * h_,
          static_cast<double>(lattice_[to].k2 - lattice_[from].k2) * h_};
}

std::vector<std::size_t> PointCloud::neighbors_within(std::size_t i, double radius) const {
  std::vector<std::size_t> out;
  const double rr = radius / h_;
  const double limit = rr * rr * (1.0 - 1e-12);
  const LatticeIndex ki = lattice_[i];
  const std::int64_t reach = static_cast<std::int64_t>(std::ceil(rr));
  const std::int64_t b1lo = std::max(bin_of(ki.k1 - reach), bin_min1_);
  const std::int64_t b1hi = std::min(bin_of(ki.k1 + reach), bin_min1_ + bins1_ - 1);
  const std::int64_t b2lo = std::max(bin_of(ki.k2 - reach), bin_min2_);
  const std::int64_t b2hi = std::min(bin_of(ki.k2 + reach), bin_min2_ + bins2_ - 1);
  for (std::int64_t b2 = b2lo; b2 <= b2hi; ++b2) {
    for (std::int64_t b1 = b1lo; b1 <= b1hi; ++b1) {
      const auto slot = static_cast<std::size_t>((b2 - bin_min2_) * bins1_ + (b1 - bin_min1_));
      for (std::size_t p = bin_offsets_[slot]; p < bin_offsets_[slot + 1]; ++p) {
        const std::size_t j = bin_points_[p];
        const double d1 = static_cast<double>(lattice_[j].k1 - ki.k1);
        const double d2 = static_cast<double>(lattice_[j].k2 - ki.k2);
        const double dd = d1 * d1 + d2 * d2;
        if (dd > 0.0 && dd < limit) out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t PointCloud::count(Region r) const {
  return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), r));
}

PointCloud build_point_cloud(const DomainShape& domain, double h) { return PointCloud(domain, h); }

}  // namespace nlvc
