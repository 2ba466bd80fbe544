#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

namespace nlvc {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Integer lattice coordinate: the point sits at (k1 * h, k2 * h).
struct LatticeIndex {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  friend bool operator==(LatticeIndex, LatticeIndex) = default;
};

enum class Region : std::uint8_t { Interior, OmegaLoc, OmegaNloc };

const char* to_string(Region r);

enum class SquareLocMode { FullLayer, RightStrip };
enum class AnnulusLocMode { FullLayer, InnerRing };

/// Unit square with an interaction layer of thickness `horizon` (Poisson).
struct SquareWithLayer {
  double side = 1.0;
  double horizon = 0.0;
  SquareLocMode loc_mode = SquareLocMode::FullLayer;
};

/// Hollow disc 1 < |x| < 1.5 with a layer of thickness 2 * horizon on both
/// sides (LPS).
struct AnnulusWithLayer {
  double r_inner = 1.0;
  double r_outer = 1.5;
  double horizon = 0.0;
  AnnulusLocMode loc_mode = AnnulusLocMode::FullLayer;
};

using DomainShape = std::variant<SquareWithLayer, AnnulusWithLayer>;

double horizon_of(const DomainShape& domain);

/// Thickness of the interaction layer: horizon for the square, 2 * horizon for
/// the annulus.
double layer_thickness(const DomainShape& domain);

/// Throws ConfigError when the shape violates its invariants.
void validate(const DomainShape& domain);

/// Closed-set membership test for the extended domain (interior plus layer).
bool in_extended_domain(const DomainShape& domain, Vec2 x, double tol);

/// Distance from x to the complement of the extended domain (0 outside).
double clearance(const DomainShape& domain, Vec2 x);

/// Region of a point of the extended domain. Points within `tol` of the
/// inner boundary belong to the layer. Throws DomainError outside the
/// extended domain.
Region classify_point(const DomainShape& domain, Vec2 x, double tol = 1e-12);

/// Cartesian collocation points (k1 h, k2 h) covering the extended domain,
/// ordered by k2 then k1, with region labels and a uniform-bin neighbor index.
/// Immutable after construction.
class PointCloud {
 public:
  PointCloud(const DomainShape& domain, double h);

  std::size_t size() const { return points_.size(); }
  double spacing() const { return h_; }
  const DomainShape& domain() const { return domain_; }

  Vec2 point(std::size_t i) const { return points_[i]; }
  LatticeIndex lattice(std::size_t i) const { return lattice_[i]; }
  Region label(std::size_t i) const { return labels_[i]; }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<Region>& labels() const { return labels_; }

  std::optional<std::size_t> find(LatticeIndex k) const;

  /// Exact lattice offset between two points, scaled by h.
  Vec2 offset(std::size_t from, std::size_t to) const;

  /// All j with 0 < |x_j - x_i| < radius, ascending. The strict comparison
  /// is done on integer lattice offsets, so points at exactly `radius` are
  /// always excluded.
  std::vector<std::size_t> neighbors_within(std::size_t i, double radius) const;

  std::size_t count(Region r) const;

 private:
  struct KeyHash {
    std::size_t operator()(const LatticeIndex& k) const noexcept {
      return std::hash<std::int64_t>()(k.k1 * 1000003LL ^ k.k2);
    }
  };

  std::int64_t bin_of(std::int64_t k) const;

  DomainShape domain_;
  double h_;
  std::vector<Vec2> points_;
  std::vector<LatticeIndex> lattice_;
  std::vector<Region> labels_;
  std::unordered_map<LatticeIndex, std::size_t, KeyHash> by_lattice_;

  // Uniform bins of `bin_cells_` lattice cells per side; bin width >= horizon.
  std::int64_t bin_cells_ = 1;
  std::int64_t bin_min1_ = 0, bin_min2_ = 0, bins1_ = 0, bins2_ = 0;
  std::vector<std::size_t> bin_offsets_;
  std::vector<std::size_t> bin_points_;
};

PointCloud build_point_cloud(const DomainShape& domain, double h);

}  // namespace nlvc
