#include "rotlat/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rotlat {

namespace {

void validate_grid(int nx, int ny, double spacing) {
  if (nx < 2) throw std::invalid_argument("nx must be >= 2, got " + std::to_string(nx));
  if (ny < 2) throw std::invalid_argument("ny must be >= 2, got " + std::to_string(ny));
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw std::invalid_argument("spacing must be a positive finite number");
  }
}

}  // namespace

LatticeGeometry::LatticeGeometry(int nx, int ny, double spacing)
    : LatticeGeometry(nx, ny, spacing, Point{(nx - 1) * spacing / 2.0, (ny - 1) * spacing / 2.0}) {}

LatticeGeometry::LatticeGeometry(int nx, int ny, double spacing, Point center)
    : nx_(nx), ny_(ny), spacing_(spacing), center_(center) {
  validate_grid(nx, ny, spacing);
  if (!std::isfinite(center.x) || !std::isfinite(center.y)) {
    throw std::invalid_argument("rotation axis coordinates must be finite");
  }
}

std::size_t LatticeGeometry::index(Site s) const {
  if (!contains(s)) {
    throw std::out_of_range("site (" + std::to_string(s.ix) + ", " + std::to_string(s.iy) +
                            ") outside " + std::to_string(nx_) + "x" + std::to_string(ny_) + " grid");
  }
  return static_cast<std::size_t>(s.iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(s.ix);
}

Site LatticeGeometry::site(std::size_t p) const {
  if (p >= size()) throw std::out_of_range("site index " + std::to_string(p) + " out of range");
  const auto n = static_cast<std::size_t>(nx_);
  return Site{static_cast<int>(p % n), static_cast<int>(p / n)};
}

Point LatticeGeometry::coordinates(Site s) const {
  if (!contains(s)) index(s);  // throws
  return Point{s.ix * spacing_ - center_.x, s.iy * spacing_ - center_.y};
}

double LatticeGeometry::radius(std::size_t p) const {
  const Point r = coordinates(p);
  return std::hypot(r.x, r.y);
}

bool LatticeGeometry::are_neighbors(std::size_t p, std::size_t q) const {
  const Site a = site(p);
  const Site b = site(q);
  return std::abs(a.ix - b.ix) + std::abs(a.iy - b.iy) == 1;
}

std::size_t LatticeGeometry::bond_count() const {
  return static_cast<std::size_t>(nx_ - 1) * ny_ + static_cast<std::size_t>(ny_ - 1) * nx_;
}

std::vector<Bond> LatticeGeometry::bonds() const {
  std::vector<Bond> out;
  out.reserve(bond_count());
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix + 1 < nx_; ++ix) {
      out.push_back({index({ix, iy}), index({ix + 1, iy}), BondDirection::PlusX});
    }
  }
  for (int iy = 0; iy + 1 < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      out.push_back({index({ix, iy}), index({ix, iy + 1}), BondDirection::PlusY});
    }
  }
  return out;
}

double LatticeGeometry::rotation_factor(std::size_t p, std::size_t q) const {
  if (!are_neighbors(p, q)) {
    throw std::invalid_argument("rotation factor requested for non-neighbor sites " + std::to_string(p) +
                                " and " + std::to_string(q));
  }
  // For a +x neighbor (x_p y_p - y_p (x_p + d)) / d^2 = -y_p / d, and x_p / d
  // for +y. The reduced form avoids cancelling products of large coordinates
  // and is exactly antisymmetric.
  if (q < p) return -rotation_factor(q, p);
  const Point a = coordinates(p);
  return q == p + 1 ? -a.y / spacing_ : a.x / spacing_;
}

std::optional<std::size_t> LatticeGeometry::quarter_turn(std::size_t p) const {
  const Point r = coordinates(p);
  const double fx = (-r.y + center_.x) / spacing_;
  const double fy = (r.x + center_.y) / spacing_;
  const double ix = std::round(fx);
  const double iy = std::round(fy);
  constexpr double snap = 1e-9;
  if (std::abs(fx - ix) > snap || std::abs(fy - iy) > snap) return std::nullopt;
  const Site s{static_cast<int>(ix), static_cast<int>(iy)};
  if (!contains(s)) return std::nullopt;
  return index(s);
}

bool LatticeGeometry::has_fourfold_symmetry() const {
  if (nx_ != ny_) return false;
  for (std::size_t p = 0; p < size(); ++p) {
    if (!quarter_turn(p)) return false;
  }
  return true;
}

int LatticeGeometry::edge_distance(std::size_t p) const {
  const Site s = site(p);
  return std::min({s.ix, s.iy, nx_ - 1 - s.ix, ny_ - 1 - s.iy});
}

}  // namespace rotlat
