#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace rotlat {

/// Integer lattice position, 0 <= ix < nx, 0 <= iy < ny.
struct Site {
  int ix = 0;
  int iy = 0;

  friend bool operator==(const Site&, const Site&) = default;
};

/// Physical position relative to the rotation axis.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BondDirection { PlusX, PlusY };

/// Unordered nearest-neighbor pair, stored with `to` one step along +x or +y
/// from `from`.
struct Bond {
  std::size_t from = 0;
  std::size_t to = 0;
  BondDirection direction = BondDirection::PlusX;
};

/// Finite square grid with open boundaries. Sites are numbered row-major,
/// index = iy * nx + ix.
class LatticeGeometry {
 public:
  /// Rotation axis at the geometric midpoint of the grid.
  LatticeGeometry(int nx, int ny, double spacing);
  LatticeGeometry(int nx, int ny, double spacing, Point center);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double spacing() const { return spacing_; }
  Point center() const { return center_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }

  /// Physical extent of the grid, (n - 1) * spacing.
  double width() const { return (nx_ - 1) * spacing_; }
  double height() const { return (ny_ - 1) * spacing_; }

  bool contains(Site s) const { return s.ix >= 0 && s.ix < nx_ && s.iy >= 0 && s.iy < ny_; }
  std::size_t index(Site s) const;
  Site site(std::size_t p) const;

  Point coordinates(Site s) const;
  Point coordinates(std::size_t p) const { return coordinates(site(p)); }
  double radius(std::size_t p) const;

  bool are_neighbors(std::size_t p, std::size_t q) const;

  /// Every unordered nearest-neighbor pair exactly once, +x bonds first.
  std::vector<Bond> bonds() const;
  std::size_t bond_count() const;

  /// K_{p,q} = (x_p y_q - y_p x_q) / d^2 for nearest neighbors p, q.
  /// Throws std::invalid_argument for non-neighbors.
  double rotation_factor(std::size_t p, std::size_t q) const;

  /// Image of site p under a counter-clockwise quarter turn about the axis,
  /// (x, y) -> (-y, x). Empty when the image is not a grid site.
  std::optional<std::size_t> quarter_turn(std::size_t p) const;

  /// True when the quarter turn maps the site set onto itself.
  bool has_fourfold_symmetry() const;

  /// Distance, in sites, from p to the nearest edge (0 for edge sites).
  int edge_distance(std::size_t p) const;

 private:
  int nx_;
  int ny_;
  double spacing_;
  Point center_;
};

}  // namespace rotlat
