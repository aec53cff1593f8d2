#include "grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace ucprop {

Grid::Grid(int dim, std::array<int, 3> count, double h, Point origin)
    : dim_(dim), count_(count), h_(h), origin_(origin) {
  if (dim != 2 && dim != 3) throw precondition_error("grid: dim must be 2 or 3");
  if (h <= 0) throw precondition_error("grid: spacing must be positive");
  if (dim == 2) count_[2] = 1;
  for (int d = 0; d < dim_; ++d)
    if (count_[d] < 9)
      throw precondition_error("grid: need at least 9 nodes per axis");
  total_ = static_cast<std::size_t>(count_[0]) * count_[1] * count_[2];
}

double Grid::cell_volume() const {
  double v = 1;
  for (int d = 0; d < dim_; ++d) v *= h_;
  return v;
}

std::array<int, 3> Grid::nearest_node(const Point& p) const {
  std::array<int, 3> c{0, 0, 0};
  for (int d = 0; d < dim_; ++d) {
    double t = (p[d] - origin_[d]) / h_;
    int i = static_cast<int>(std::lround(t));
    if (i < 0 || i >= count_[d])
      throw precondition_error("grid: point outside box");
    c[d] = i;
  }
  return c;
}

RegionMask::RegionMask(Grid grid, bool filled)
    : grid_(std::move(grid)), bits_(grid_.num_nodes(), filled ? 1 : 0) {}

std::size_t RegionMask::count() const {
  return static_cast<std::size_t>(
      std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double RegionMask::measure() const {
  return static_cast<double>(count()) * grid_.cell_volume();
}

std::vector<std::size_t> RegionMask::nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared distance transform of a sampled function (Felzenszwalb &
// Huttenlocher). f and out have length n, stride apart in memory.
void dt1d(const double* f, double* out, int n, std::vector<int>& v,
          std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (true) {
      if (f[v[k]] == kInf) {
        // previous parabola is absent; replace it
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      double s =
          ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
        break;
      }
    }
  }
  if (f[v[0]] == kInf) {
    for (int q = 0; q < n; ++q) out[q] = kInf;
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    double d = q - v[j];
    out[q] = d * d + f[v[j]];
  }
}

}  // namespace

std::vector<double> distance_transform(const RegionMask& mask) {
  const Grid& g = mask.grid();
  const auto& c = g.count();
  std::vector<double> d(g.num_nodes());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = mask.at(i) ? 0.0 : kInf;

  int nmax = std::max({c[0], c[1], c[2]});
  std::vector<int> v(nmax);
  std::vector<double> z(nmax + 1), line(nmax), lout(nmax);

  // axis 0
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j) {
      double* row = &d[g.index(0, j, k)];
      dt1d(row, lout.data(), c[0], v, z);
      std::copy(lout.begin(), lout.begin() + c[0], row);
    }
  // axis 1
  for (int k = 0; k < c[2]; ++k)
    for (int i = 0; i < c[0]; ++i) {
      for (int j = 0; j < c[1]; ++j) line[j] = d[g.index(i, j, k)];
      dt1d(line.data(), lout.data(), c[1], v, z);
      for (int j = 0; j < c[1]; ++j) d[g.index(i, j, k)] = lout[j];
    }
  // axis 2
  if (g.dim() == 3) {
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        for (int k = 0; k < c[2]; ++k) line[k] = d[g.index(i, j, k)];
        dt1d(line.data(), lout.data(), c[2], v, z);
        for (int k = 0; k < c[2]; ++k) d[g.index(i, j, k)] = lout[k];
      }
  }
  return d;
}

std::vector<double> distance_transform_bruteforce(const RegionMask& mask) {
  const Grid& g = mask.grid();
  auto src = mask.nodes();
  std::vector<double> d(g.num_nodes(), kInf);
  std::vector<std::array<int, 3>> sc(src.size());
  for (std::size_t s = 0; s < src.size(); ++s) sc[s] = g.coords(src[s]);
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto ci = g.coords(i);
    double best = kInf;
    for (const auto& cs : sc) {
      double s2 = 0;
      for (int dd = 0; dd < g.dim(); ++dd) {
        double t = ci[dd] - cs[dd];
        s2 += t * t;
      }
      best = std::min(best, s2);
    }
    d[i] = best;
  }
  return d;
}

RegionMask boundary_nodes(const RegionMask& domain) {
  const Grid& g = domain.grid();
  RegionMask out(g);
  const auto& c = g.count();
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j)
      for (int i = 0; i < c[0]; ++i) {
        std::size_t idx = g.index(i, j, k);
        if (!domain.at(idx)) continue;
        bool bdry = false;
        const int di[6] = {1, -1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, 1, -1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, 1, -1};
        int nn = g.dim() == 3 ? 6 : 4;
        for (int m = 0; m < nn && !bdry; ++m) {
          std::array<int, 3> nc{i + di[m], j + dj[m], k + dk[m]};
          if (!g.contains(nc) || !domain.at(g.index(nc[0], nc[1], nc[2])))
            bdry = true;
        }
        if (bdry) out.set(idx, true);
      }
  return out;
}

RegionMask inner_region(const RegionMask& domain, double rho) {
  if (rho <= 0) throw precondition_error("inner_region: rho must be positive");
  if (domain.empty()) throw precondition_error("inner_region: empty domain");
  const Grid& g = domain.grid();
  RegionMask bdry = boundary_nodes(domain);
  auto d2 = distance_transform(bdry);
  double thr = 4.0 * rho / g.h();
  double thr2 = thr * thr;
  RegionMask out(g);
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (domain.at(i) && d2[i] > thr2) out.set(i, true);
  return out;
}

RegionMask ball_mask(const Grid& grid, const Point& center, double r) {
  RegionMask out(grid);
  double r2 = r * r;
  const auto& c = grid.count();
  // bounding box
  std::array<int, 3> lo{0, 0, 0}, hi{c[0] - 1, c[1] - 1, c[2] - 1};
  for (int d = 0; d < grid.dim(); ++d) {
    lo[d] = std::max(
        0, static_cast<int>(std::floor((center[d] - r - grid.origin()[d]) / grid.h())));
    hi[d] = std::min(
        c[d] - 1,
        static_cast<int>(std::ceil((center[d] + r - grid.origin()[d]) / grid.h())));
  }
  if (grid.dim() == 2) {
    lo[2] = 0;
    hi[2] = 0;
  }
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        std::size_t idx = grid.index(i, j, k);
        Point p = grid.position(idx);
        if (dist2(p, center, grid.dim()) <= r2) out.set(idx, true);
      }
  return out;
}

std::vector<std::array<int, 3>> ball_offsets(const Grid& grid, double r) {
  std::vector<std::array<int, 3>> out;
  int m = static_cast<int>(std::floor(r / grid.h()));
  double r2 = (r / grid.h()) * (r / grid.h());
  int klo = grid.dim() == 3 ? -m : 0, khi = grid.dim() == 3 ? m : 0;
  for (int k = klo; k <= khi; ++k)
    for (int j = -m; j <= m; ++j)
      for (int i = -m; i <= m; ++i)
        if (i * i + j * j + k * k <= r2) out.push_back({i, j, k});
  return out;
}

RegionMask box_mask(const Grid& grid, const Point& lo, const Point& hi) {
  RegionMask out(grid);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    Point p = grid.position(i);
    bool in = true;
    for (int d = 0; d < grid.dim(); ++d)
      if (p[d] < lo[d] - 1e-12 || p[d] > hi[d] + 1e-12) in = false;
    if (in) out.set(i, true);
  }
  return out;
}

RegionMask intersect(const RegionMask& a, const RegionMask& b) {
  if (!(a.grid() == b.grid()))
    throw precondition_error("intersect: grids differ");
  RegionMask out(a.grid());
  for (std::size_t i = 0; i < a.grid().num_nodes(); ++i)
    out.set(i, a.at(i) && b.at(i));
  return out;
}

RegionMask density_subset(const RegionMask& set, double gamma, double r1) {
  if (gamma <= 0 || gamma >= 1)
    throw precondition_error("density_subset: gamma must be in (0,1)");
  const Grid& g = set.grid();
  if (r1 < 4 * g.h())
    throw resolution_error("density_subset: resolution exhausted, r1 < 4h");
  std::vector<double> radii;
  for (double r = r1; r >= 4 * g.h(); r /= 2) radii.push_back(r);

  std::vector<std::vector<std::array<int, 3>>> offs;
  for (double r : radii) offs.push_back(ball_offsets(g, r));

  RegionMask out(g);
  auto nodes = set.nodes();
  for (std::size_t idx : nodes) {
    auto c = g.coords(idx);
    bool ok = true;
    for (std::size_t ri = 0; ri < radii.size() && ok; ++ri) {
      std::size_t total = 0, filled = 0;
      for (const auto& o : offs[ri]) {
        std::array<int, 3> nc{c[0] + o[0], c[1] + o[1], c[2] + o[2]};
        if (!g.contains(nc)) continue;
        ++total;
        if (set.at(g.index(nc[0], nc[1], nc[2]))) ++filled;
      }
      if (total == 0 ||
          static_cast<double>(filled) <= gamma * static_cast<double>(total))
        ok = false;
    }
    if (ok) out.set(idx, true);
  }
  return out;
}

HProfile h_profile(const RegionMask& set_f1, const Point& x0, double r_max) {
  const Grid& g = set_f1.grid();
  auto c0 = g.nearest_node(x0);
  if (!set_f1.at(g.index(c0[0], c0[1], c0[2])))
    throw precondition_error("h_profile: x0 not in F1");
  auto d2 = distance_transform(set_f1);
  double h = g.h();

  HProfile prof;
  // dyadic sample radii: r_max, r_max/2^(1/1)... use per-level thirds to get
  // several samples per dyadic block
  std::vector<double> radii;
  for (double r = r_max; r >= 4 * h; r /= std::pow(2.0, 1.0 / 3.0))
    radii.push_back(r);
  Point x0n = g.position(g.index(c0[0], c0[1], c0[2]));
  for (double r : radii) {
    double rmin = r - h, rmax2 = (r + h) / h, rmin2 = rmin / h;
    double lo2 = rmin2 * rmin2, hi2 = rmax2 * rmax2;
    int m = static_cast<int>(std::ceil((r + h) / h));
    double best = -1;
    int klo = g.dim() == 3 ? -m : 0, khi = g.dim() == 3 ? m : 0;
    for (int k = klo; k <= khi; ++k)
      for (int j = -m; j <= m; ++j)
        for (int i = -m; i <= m; ++i) {
          double rr = static_cast<double>(i) * i + static_cast<double>(j) * j +
                      static_cast<double>(k) * k;
          if (rr < lo2 || rr > hi2) continue;
          std::array<int, 3> nc{c0[0] + i, c0[1] + j, c0[2] + k};
          if (!g.contains(nc)) continue;
          double dist = std::sqrt(d2[g.index(nc[0], nc[1], nc[2])]) * h;
          best = std::max(best, dist);
        }
    if (best < 0) continue;
    prof.radius.push_back(r);
    prof.h_of_r.push_back(best);
    int l = static_cast<int>(std::floor(-std::log2(r)));
    // r in (2^-l-1, 2^-l]
    if (std::pow(2.0, -l) < r - 1e-12) --l;
    prof.level.push_back(l);
  }
  (void)x0n;
  // per-level maxima
  for (std::size_t i = 0; i < prof.radius.size(); ++i) {
    int l = prof.level[i];
    auto it = std::find(prof.levels.begin(), prof.levels.end(), l);
    if (it == prof.levels.end()) {
      prof.levels.push_back(l);
      prof.h_level.push_back(prof.h_of_r[i]);
    } else {
      std::size_t pos = it - prof.levels.begin();
      prof.h_level[pos] = std::max(prof.h_level[pos], prof.h_of_r[i]);
    }
  }
  return prof;
}

double marcinkiewicz_integral(const RegionMask& set_f1, const Point& x0) {
  const Grid& g = set_f1.grid();
  auto c0 = g.nearest_node(x0);
  if (!set_f1.at(g.index(c0[0], c0[1], c0[2])))
    throw precondition_error("marcinkiewicz_integral: x0 not in F1");
  auto d2 = distance_transform(set_f1);
  double h = g.h();
  int n = g.dim();
  int m = static_cast<int>(std::floor(1.0 / h));
  double sum = 0;
  double cellvol = g.cell_volume();
  int klo = n == 3 ? -m : 0, khi = n == 3 ? m : 0;
  for (int k = klo; k <= khi; ++k)
    for (int j = -m; j <= m; ++j)
      for (int i = -m; i <= m; ++i) {
        if (i == 0 && j == 0 && k == 0) continue;
        double rr = static_cast<double>(i) * i + static_cast<double>(j) * j +
                    static_cast<double>(k) * k;
        double y = std::sqrt(rr) * h;
        if (y > 1.0) continue;
        std::array<int, 3> nc{c0[0] + i, c0[1] + j, c0[2] + k};
        if (!g.contains(nc)) continue;
        double dist = std::sqrt(d2[g.index(nc[0], nc[1], nc[2])]) * h;
        sum += dist / std::pow(y, n + 1) * cellvol;
      }
  return sum;
}

GoodScales good_scales(const std::vector<int>& levels,
                       const std::vector<double>& h_level, int n) {
  GoodScales out;
  if (levels.size() != h_level.size())
    throw precondition_error("good_scales: table size mismatch");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    int l = levels[i];
    if (l < 1) continue;
    double thr = std::pow(static_cast<double>(l), -1.0 / (n + 1)) *
                 std::pow(2.0, -static_cast<double>(l));
    if (h_level[i] < thr) out.good.push_back(l);
  }
  std::sort(out.good.begin(), out.good.end());
  if (!levels.empty()) {
    int lmax = *std::max_element(levels.begin(), levels.end());
    for (int N = 0; (1 << (N + 1)) <= lmax + 1; ++N) {
      int lo = (1 << N) + 1, hi = 1 << (N + 1);
      int cnt = 0, present = 0;
      for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] >= lo && levels[i] <= hi) ++present;
      for (int l : out.good)
        if (l >= lo && l <= hi) ++cnt;
      if (present > 0) out.blocks.push_back({N, cnt, present});
    }
  }
  return out;
}

void save_mask(const RegionMask& mask, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_mask: cannot open " + path);
  const Grid& g = mask.grid();
  std::ostringstream hdr;
  hdr.precision(17);
  hdr << "ucprop-mask 1\n"
      << g.dim() << ' ' << g.count()[0] << ' ' << g.count()[1] << ' '
      << g.count()[2] << '\n'
      << g.h() << '\n'
      << g.origin()[0] << ' ' << g.origin()[1] << ' ' << g.origin()[2] << "\n";
  f << hdr.str();
  f.write(reinterpret_cast<const char*>(mask.bits().data()),
          static_cast<std::streamsize>(mask.bits().size()));
}

RegionMask load_mask(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_mask: cannot open " + path);
  std::string magic;
  int version = 0;
  f >> magic >> version;
  if (magic != "ucprop-mask" || version != 1)
    throw std::runtime_error("load_mask: bad header in " + path);
  int dim;
  std::array<int, 3> count;
  double h;
  Point origin;
  f >> dim >> count[0] >> count[1] >> count[2] >> h >> origin[0] >>
      origin[1] >> origin[2];
  f.ignore(1);  // newline before payload
  Grid g(dim, count, h, origin);
  RegionMask mask(g);
  std::vector<std::uint8_t> buf(g.num_nodes());
  f.read(reinterpret_cast<char*>(buf.data()),
         static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("load_mask: truncated payload in " + path);
  for (std::size_t i = 0; i < buf.size(); ++i) mask.set(i, buf[i] != 0);
  return mask;
}

}  // namespace ucprop
