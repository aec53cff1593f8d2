#include "dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ucprop {

namespace {

// beta as an exact dyadic rational p / 2^q (doubles are dyadic rationals).
struct DyadicFraction {
  __int128 p = 0;
  int q = 0;
};

DyadicFraction to_dyadic(double beta) {
  if (!(beta > 0 && beta < 1))
    throw precondition_error("beta must be in (0,1)");
  int e;
  double m = std::frexp(beta, &e);  // beta = m * 2^e, m in [1/2, 1)
  std::int64_t p = static_cast<std::int64_t>(std::ldexp(m, 53));
  return {static_cast<__int128>(p), 53 - e};
}

// strict comparison a > beta * b with exact integer arithmetic
bool gt_beta(std::uint64_t a, std::uint64_t b, const DyadicFraction& beta) {
  __int128 lhs = static_cast<__int128>(a);
  for (int i = 0; i < beta.q; ++i) lhs <<= 1;
  return lhs > beta.p * static_cast<__int128>(b);
}

// a >= b / beta  <=>  beta * a >= b
bool ge_inv_beta(std::uint64_t a, std::uint64_t b, const DyadicFraction& beta) {
  __int128 rhs = static_cast<__int128>(b);
  for (int i = 0; i < beta.q; ++i) rhs <<= 1;
  return beta.p * static_cast<__int128>(a) >= rhs;
}

bool path_prefix(const std::vector<std::uint8_t>& pre,
                 const std::vector<std::uint8_t>& full) {
  if (pre.size() > full.size()) return false;
  return std::equal(pre.begin(), pre.end(), full.begin());
}

// measure of a rank-r cube in units of 2^{-dim*scale} |Q0|
std::uint64_t scaled_measure(int rank, int scale, int dim) {
  if (rank > scale) throw contract_error("dyadic: scale rank too small");
  return std::uint64_t{1} << (static_cast<unsigned>(dim) * (scale - rank));
}

// |R n E| where E is the union of an antichain, in scaled units
std::uint64_t intersection_scaled(const std::vector<std::uint8_t>& r_path,
                                  const std::vector<DyadicCube>& family,
                                  int scale, int dim) {
  std::uint64_t sum = 0;
  for (const auto& q : family) {
    if (path_prefix(q.path(), r_path))
      return scaled_measure(static_cast<int>(r_path.size()), scale, dim);
    if (path_prefix(r_path, q.path()))
      sum += scaled_measure(q.rank(), scale, dim);
  }
  return sum;
}

}  // namespace

DyadicCube::DyadicCube(Cube root, std::vector<std::uint8_t> path)
    : root_(root), path_(std::move(path)) {
  if (root_.dim != 2 && root_.dim != 3)
    throw precondition_error("dyadic cube: dim must be 2 or 3");
  unsigned nchildren = 1u << root_.dim;
  for (auto l : path_)
    if (l >= nchildren)
      throw precondition_error("dyadic cube: child index out of range");
}

Cube DyadicCube::geometry() const {
  Cube c = root_;
  for (auto l : path_) {
    c.side /= 2;
    for (int d = 0; d < c.dim; ++d)
      c.center[d] += ((l >> d) & 1 ? 1.0 : -1.0) * c.side / 2;
  }
  return c;
}

double DyadicCube::side() const {
  return root_.side * std::ldexp(1.0, -rank());
}

double DyadicCube::measure() const {
  return std::pow(side(), root_.dim);
}

DyadicCube DyadicCube::parent() const {
  if (path_.empty()) return *this;
  auto p = path_;
  p.pop_back();
  return DyadicCube(root_, std::move(p));
}

DyadicCube DyadicCube::child(std::uint8_t l) const {
  auto p = path_;
  p.push_back(l);
  return DyadicCube(root_, std::move(p));
}

bool DyadicCube::contains(const DyadicCube& other) const {
  return path_prefix(path_, other.path());
}

std::string DyadicCube::path_string() const {
  std::string s;
  for (auto l : path_) {
    if (!s.empty()) s += '.';
    s += std::to_string(static_cast<int>(l) + 1);
  }
  return s.empty() ? "root" : s;
}

CubeFamily::CubeFamily(Cube root, std::vector<DyadicCube> cubes)
    : root_(root), cubes_(std::move(cubes)) {
  std::sort(cubes_.begin(), cubes_.end());
  cubes_.erase(std::unique(cubes_.begin(), cubes_.end()), cubes_.end());
}

int CubeFamily::max_rank() const {
  int r = 0;
  for (const auto& c : cubes_) r = std::max(r, c.rank());
  return r;
}

bool CubeFamily::is_antichain() const {
  for (std::size_t i = 0; i < cubes_.size(); ++i)
    for (std::size_t j = 0; j < cubes_.size(); ++j)
      if (i != j && cubes_[i].contains(cubes_[j])) return false;
  return true;
}

bool CubeFamily::is_root_only() const {
  return cubes_.size() == 1 && cubes_[0].is_root();
}

std::uint64_t CubeFamily::union_measure_scaled(int scale_rank) const {
  // valid for antichains (members pairwise disjoint)
  std::uint64_t sum = 0;
  for (const auto& c : cubes_)
    sum += scaled_measure(c.rank(), scale_rank, root_.dim);
  return sum;
}

double CubeFamily::union_measure_fraction() const {
  double sum = 0;
  for (const auto& c : cubes_)
    sum += std::ldexp(1.0, -root_.dim * c.rank());
  return sum;
}

CubeFamily CubeFamily::reduced() const {
  std::vector<DyadicCube> keep;
  for (const auto& c : cubes_) {
    bool inside = false;
    for (const auto& o : cubes_)
      if (!(o == c) && o.contains(c)) inside = true;
    if (!inside) keep.push_back(c);
  }
  return CubeFamily(root_, std::move(keep));
}

double filled_ratio(const DyadicCube& cube, const RegionMask& set) {
  const Grid& g = set.grid();
  Cube geo = cube.geometry();
  if (geo.side < g.h())
    throw resolution_error("filled_ratio: resolution exhausted");
  double tol = g.h() * 1e-6;
  Point lo, hi;
  for (int d = 0; d < geo.dim; ++d) {
    lo[d] = geo.center[d] - geo.side / 2;
    hi[d] = geo.center[d] + geo.side / 2;
  }
  std::array<int, 3> ilo{0, 0, 0}, ihi{g.count()[0] - 1, g.count()[1] - 1,
                                       g.count()[2] - 1};
  for (int d = 0; d < g.dim(); ++d) {
    ilo[d] = std::max(
        0, static_cast<int>(std::ceil((lo[d] - tol - g.origin()[d]) / g.h())));
    ihi[d] = std::min(g.count()[d] - 1,
                      static_cast<int>(std::floor(
                          (hi[d] - tol - g.origin()[d]) / g.h())));
  }
  if (g.dim() == 2) {
    ilo[2] = 0;
    ihi[2] = 0;
  }
  std::size_t total = 0, filled = 0;
  for (int k = ilo[2]; k <= ihi[2]; ++k)
    for (int j = ilo[1]; j <= ihi[1]; ++j)
      for (int i = ilo[0]; i <= ihi[0]; ++i) {
        ++total;
        if (set.at(g.index(i, j, k))) ++filled;
      }
  if (total == 0)
    throw resolution_error("filled_ratio: cube contains no grid nodes");
  return static_cast<double>(filled) / static_cast<double>(total);
}

namespace {

void collect_filled(const DyadicCube& cube, const RegionMask& set, double beta,
                    int max_rank, std::vector<DyadicCube>& out) {
  double ratio;
  try {
    ratio = filled_ratio(cube, set);
  } catch (const resolution_error&) {
    return;
  }
  if (ratio > beta) {
    out.push_back(cube);
    return;
  }
  if (cube.rank() >= max_rank || ratio == 0.0) return;
  for (std::uint8_t l = 0; l < (1u << cube.dim()); ++l)
    collect_filled(cube.child(l), set, beta, max_rank, out);
}

}  // namespace

CubeFamily maximal_filled_cubes(const DyadicCube& root, const RegionMask& set,
                                double beta, int max_rank) {
  if (!(beta > 0 && beta < 1))
    throw precondition_error("maximal_filled_cubes: beta must be in (0,1)");
  std::vector<DyadicCube> out;
  collect_filled(root, set, beta, max_rank, out);
  return CubeFamily(root.root(), std::move(out));
}

namespace {

void collect_covered(const std::vector<std::uint8_t>& path,
                     const std::vector<DyadicCube>& family,
                     const DyadicFraction& beta, int scale, int dim,
                     const Cube& root, std::vector<DyadicCube>& out) {
  std::uint64_t inter = intersection_scaled(path, family, scale, dim);
  if (inter == 0) return;
  std::uint64_t own =
      scaled_measure(static_cast<int>(path.size()), scale, dim);
  if (gt_beta(inter, own, beta)) {
    out.emplace_back(root, path);
    return;
  }
  if (static_cast<int>(path.size()) >= scale) return;
  for (std::uint8_t l = 0; l < (1u << dim); ++l) {
    auto p = path;
    p.push_back(l);
    collect_covered(p, family, beta, scale, dim, root, out);
  }
}

}  // namespace

NadirashviliResult nadirashvili_step(const CubeFamily& family, double beta) {
  if (family.empty())
    throw precondition_error("nadirashvili_step: empty family");
  if (!family.is_antichain())
    throw contract_error("nadirashvili_step: input is not an antichain");
  DyadicFraction b = to_dyadic(beta);
  int dim = family.root().dim;
  int scale = family.max_rank();
  if (dim * scale > 60)
    throw precondition_error("nadirashvili_step: rank too deep for exact arithmetic");

  NadirashviliResult res;
  std::vector<DyadicCube> covered;
  collect_covered({}, family.cubes(), b, scale, dim, family.root(), covered);
  res.covered = CubeFamily(family.root(), covered);

  std::vector<DyadicCube> parents;
  for (const auto& c : covered) parents.push_back(c.parent());
  res.family1 = CubeFamily(family.root(), std::move(parents)).reduced();

  std::uint64_t q0 = scaled_measure(0, scale, dim);
  std::uint64_t e = family.union_measure_scaled(scale);
  std::uint64_t e1 = res.family1.union_measure_scaled(scale);
  res.e_measure = static_cast<double>(e) / static_cast<double>(q0);
  res.e1_measure = static_cast<double>(e1) / static_cast<double>(q0);

  // beta^{-1}|E| > |Q0|  <=>  |E| > beta |Q0|
  bool inv_beta_exceeds = gt_beta(e, q0, b);
  if (inv_beta_exceeds && res.family1.is_root_only()) {
    res.step_case = StepCase::II;
  } else {
    res.step_case = StepCase::I;
    if (!ge_inv_beta(e1, e, b))
      throw contract_error(
          "nadirashvili_step: case I postcondition |E1| >= |E|/beta failed");
  }
  return res;
}

IterationTrace iterate_families(const CubeFamily& family1, double beta,
                                int step_budget) {
  if (family1.empty())
    throw precondition_error("iterate_families: empty family");
  IterationTrace tr;
  tr.trace.push_back(family1);
  tr.measures.push_back(family1.union_measure_fraction());
  if (family1.is_root_only()) return tr;

  if (step_budget < 0) {
    double frac = family1.union_measure_fraction();
    double k = std::ceil(std::log(1.0 / frac) / std::log(1.0 / beta));
    step_budget = 10 * std::max(1, static_cast<int>(k));
  }
  CubeFamily cur = family1;
  while (true) {
    if (tr.steps >= step_budget)
      throw contract_error("iterate_families: step budget exceeded");
    auto res = nadirashvili_step(cur, beta);
    ++tr.steps;
    tr.trace.push_back(res.family1);
    tr.measures.push_back(res.family1.union_measure_fraction());
    cur = res.family1;
    if (res.step_case == StepCase::II || cur.is_root_only()) break;
  }
  return tr;
}

NadirashviliResult nadirashvili_step_bruteforce(const CubeFamily& family,
                                                double beta, int max_rank) {
  if (family.empty() || !family.is_antichain())
    throw contract_error("bruteforce: bad input family");
  int dim = family.root().dim;
  // enumerate every path of rank <= max_rank
  std::vector<std::vector<std::uint8_t>> all;
  all.push_back({});
  for (int r = 0; r < max_rank; ++r) {
    std::vector<std::vector<std::uint8_t>> next;
    for (const auto& p : all) {
      if (static_cast<int>(p.size()) != r) continue;
      for (std::uint8_t l = 0; l < (1u << dim); ++l) {
        auto q = p;
        q.push_back(l);
        next.push_back(q);
      }
    }
    for (auto& q : next) all.push_back(std::move(q));
  }
  // filled test with long-double arithmetic on exact dyadic fractions
  auto inter_frac = [&](const std::vector<std::uint8_t>& p) -> long double {
    long double sum = 0;
    for (const auto& q : family.cubes()) {
      const auto& qp = q.path();
      bool q_pre_p = qp.size() <= p.size() &&
                     std::equal(qp.begin(), qp.end(), p.begin());
      bool p_pre_q = p.size() <= qp.size() &&
                     std::equal(p.begin(), p.end(), qp.begin());
      if (q_pre_p)
        return std::pow(0.5L, static_cast<long double>(dim * p.size()));
      if (p_pre_q) sum += std::pow(0.5L, static_cast<long double>(dim * qp.size()));
    }
    return sum;
  };
  std::vector<std::vector<std::uint8_t>> filled;
  for (const auto& p : all) {
    long double own = std::pow(0.5L, static_cast<long double>(dim * p.size()));
    if (inter_frac(p) > static_cast<long double>(beta) * own)
      filled.push_back(p);
  }
  // maximal = not strictly contained in another filled cube
  std::vector<DyadicCube> covered;
  for (const auto& p : filled) {
    bool maximal = true;
    for (const auto& o : filled)
      if (o.size() < p.size() && std::equal(o.begin(), o.end(), p.begin()))
        maximal = false;
    if (maximal) covered.emplace_back(family.root(), p);
  }
  NadirashviliResult res;
  res.covered = CubeFamily(family.root(), covered);
  std::vector<DyadicCube> parents;
  for (const auto& c : covered) parents.push_back(c.parent());
  res.family1 = CubeFamily(family.root(), std::move(parents)).reduced();

  long double e = 0;
  for (const auto& q : family.cubes())
    e += std::pow(0.5L, static_cast<long double>(dim * q.rank()));
  long double e1 = 0;
  for (const auto& q : res.family1.cubes())
    e1 += std::pow(0.5L, static_cast<long double>(dim * q.rank()));
  res.e_measure = static_cast<double>(e);
  res.e1_measure = static_cast<double>(e1);
  res.step_case = (e > static_cast<long double>(beta) &&
                   res.family1.is_root_only())
                      ? StepCase::II
                      : StepCase::I;
  return res;
}

namespace {

void collect_inside(const DyadicCube& cube, const RegionMask& mask,
                    std::vector<DyadicCube>& out) {
  const Grid& g = mask.grid();
  if (cube.side() < 4 * g.h()) return;
  double ratio;
  try {
    ratio = filled_ratio(cube, mask);
  } catch (const resolution_error&) {
    return;
  }
  if (ratio == 1.0) {
    out.push_back(cube);
    return;
  }
  if (ratio == 0.0) return;
  for (std::uint8_t l = 0; l < (1u << cube.dim()); ++l)
    collect_inside(cube.child(l), mask, out);
}

}  // namespace

CubeFamily mask_to_cubes(const Cube& root, const RegionMask& mask) {
  std::vector<DyadicCube> out;
  collect_inside(DyadicCube(root, {}), mask, out);
  return CubeFamily(root, std::move(out));
}

void save_family(const CubeFamily& family, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_family: cannot open " + path);
  f.precision(17);
  const Cube& r = family.root();
  f << "ucprop-cubes 1\n"
    << r.dim << ' ' << r.side << ' ' << r.center[0] << ' ' << r.center[1]
    << ' ' << r.center[2] << '\n';
  for (const auto& c : family.cubes()) {
    f << c.rank();
    for (auto l : c.path()) f << ' ' << static_cast<int>(l);
    f << '\n';
  }
}

CubeFamily load_family(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_family: cannot open " + path);
  std::string magic;
  int version;
  f >> magic >> version;
  if (magic != "ucprop-cubes" || version != 1)
    throw std::runtime_error("load_family: bad header in " + path);
  Cube root;
  f >> root.dim >> root.side >> root.center[0] >> root.center[1] >>
      root.center[2];
  std::vector<DyadicCube> cubes;
  int rank;
  while (f >> rank) {
    std::vector<std::uint8_t> p(rank);
    for (int i = 0; i < rank; ++i) {
      int l;
      f >> l;
      p[i] = static_cast<std::uint8_t>(l);
    }
    cubes.emplace_back(root, std::move(p));
  }
  return CubeFamily(root, std::move(cubes));
}

}  // namespace ucprop
