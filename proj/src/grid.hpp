#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace ucprop {

using Point = std::array<double, 3>;  // third coordinate unused in 2D

inline double dist2(const Point& a, const Point& b, int dim) {
  double s = 0;
  for (int d = 0; d < dim; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

// Uniform axis-aligned lattice. Node i along axis d sits at
// origin[d] + i*h, 0 <= i < count[d].
class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::array<int, 3> count, double h, Point origin);

  int dim() const { return dim_; }
  double h() const { return h_; }
  const Point& origin() const { return origin_; }
  const std::array<int, 3>& count() const { return count_; }
  std::size_t num_nodes() const { return total_; }
  double extent(int d) const { return h_ * (count_[d] - 1); }
  double cell_volume() const;

  std::size_t index(int i, int j, int k = 0) const {
    return (static_cast<std::size_t>(k) * count_[1] + j) * count_[0] + i;
  }
  std::array<int, 3> coords(std::size_t idx) const {
    std::array<int, 3> c;
    c[0] = static_cast<int>(idx % count_[0]);
    idx /= count_[0];
    c[1] = static_cast<int>(idx % count_[1]);
    c[2] = static_cast<int>(idx / count_[1]);
    return c;
  }
  Point position(std::size_t idx) const {
    auto c = coords(idx);
    return {origin_[0] + c[0] * h_, origin_[1] + c[1] * h_,
            origin_[2] + c[2] * h_};
  }
  bool contains(const std::array<int, 3>& c) const {
    for (int d = 0; d < dim_; ++d)
      if (c[d] < 0 || c[d] >= count_[d]) return false;
    return true;
  }
  // Nearest node to a point; throws if the point falls outside the box.
  std::array<int, 3> nearest_node(const Point& p) const;

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && count_ == o.count_ && h_ == o.h_ &&
           origin_ == o.origin_;
  }

 private:
  int dim_ = 0;
  std::array<int, 3> count_{0, 0, 1};
  double h_ = 0;
  Point origin_{0, 0, 0};
  std::size_t total_ = 0;
};

// Boolean node set on a grid. Immutable by convention after construction.
class RegionMask {
 public:
  RegionMask() = default;
  explicit RegionMask(Grid grid, bool filled = false);

  const Grid& grid() const { return grid_; }
  bool at(std::size_t idx) const { return bits_[idx] != 0; }
  void set(std::size_t idx, bool v) { bits_[idx] = v ? 1 : 0; }
  std::size_t count() const;
  // Node count times h^n.
  double measure() const;
  bool empty() const { return count() == 0; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::vector<std::size_t> nodes() const;

 private:
  Grid grid_;
  std::vector<std::uint8_t> bits_;
};

// Exact squared Euclidean distance (in units of h) from every grid node to
// the nearest set node. Felzenszwalb-Huttenlocher two-pass transform.
std::vector<double> distance_transform(const RegionMask& mask);

// Reference path for the transform, quadratic cost. Used on small masks and
// as the equality oracle in tests.
std::vector<double> distance_transform_bruteforce(const RegionMask& mask);

// Discrete boundary of a mask: set nodes with an unset (or off-grid)
// axis neighbor.
RegionMask boundary_nodes(const RegionMask& domain);

// {x in domain : dist(x, boundary of domain) > 4*rho}. Empty result is valid.
RegionMask inner_region(const RegionMask& domain, double rho);

// Ball node set {x : |x - center| <= r} intersected with a mask (or the
// whole grid if clip is null).
RegionMask ball_mask(const Grid& grid, const Point& center, double r);

// Node index offsets of the ball of radius r around the origin node,
// reusable across centers.
std::vector<std::array<int, 3>> ball_offsets(const Grid& grid, double r);

RegionMask box_mask(const Grid& grid, const Point& lo, const Point& hi);
RegionMask intersect(const RegionMask& a, const RegionMask& b);

// F1 = nodes x of `set` whose filled ratio |set n B_r(x)| / |B_r(x)| exceeds
// gamma for every dyadic radius r in {r1, r1/2, ...} down to 4h.
RegionMask density_subset(const RegionMask& set, double gamma, double r1);

struct HProfile {
  std::vector<double> radius;   // sampled r
  std::vector<double> h_of_r;   // max_{||y|-r|<=h} dist(x0+y, F1)
  std::vector<int> level;       // l with r in (2^-l-1, 2^-l]
  std::vector<double> h_level;  // h_l = max over the dyadic block of h(r)
  std::vector<int> levels;      // distinct l for h_level entries
};

// Sampled h(r) = max_{|y|=r} dist(x0+y, F1) on shells of width 2h, plus the
// per-dyadic-level maxima h_l.
HProfile h_profile(const RegionMask& set_f1, const Point& x0, double r_max);

// Midpoint quadrature of  int_{|y|<=1} dist(x0+y, F1) / |y|^{n+1} dy,
// excluding the cell at y = 0.
double marcinkiewicz_integral(const RegionMask& set_f1, const Point& x0);

struct GoodScales {
  std::vector<int> good;  // levels l with h_l < l^{-1/(n+1)} 2^{-l}
  // per dyadic block {2^N+1..2^{N+1}}: (N, good count, block size)
  std::vector<std::array<int, 3>> blocks;
};

GoodScales good_scales(const std::vector<int>& levels,
                       const std::vector<double>& h_level, int n);

// Flat binary serialization: small text header then the boolean lattice.
void save_mask(const RegionMask& mask, const std::string& path);
RegionMask load_mask(const std::string& path);

}  // namespace ucprop
